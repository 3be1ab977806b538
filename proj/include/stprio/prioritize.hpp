#pragma once

#include "stprio/checksum.hpp"
#include "stprio/diag.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace stprio {

// Per-test trace data the strategies work on, in suite order.
struct TestTraceData {
    std::string id;
    std::int64_t duration_ms = 0;
    std::vector<std::int64_t> counts;       // dense per trace point
    std::vector<std::int64_t> first_visit;  // -1 when not visited
};

struct PlanEntry {
    std::string id;
    std::string group; // "high" | "low"
    double p_it = -1.0;
    int mttc_index = -1;
    std::int64_t cover_time_ms = -1;
};

struct Mttc {
    std::vector<std::string> tests;
    std::int64_t cover_time_ms = 0;
    std::vector<int> covered; // modification trace points covered
};

struct PrioritizedPlan {
    std::string strategy;
    bool heuristic = false;
    Checksum version_id = 0;
    std::vector<PlanEntry> order;
    std::vector<Mttc> mttcs;
};

// Modification-traversing tests first (suite order kept inside each group).
PrioritizedPlan prioritize_simple(const std::vector<TestTraceData>& tests,
                                  const std::set<int>& mod_tps);

// High group ordered by p_it: modification traversals per second of previous
// execution time, descending.
PrioritizedPlan prioritize_intensity(const std::vector<TestTraceData>& tests,
                                     const std::set<int>& mod_tps);

// Modification-traversing test combinations rated by the total time needed
// to traverse all reachable modifications; fastest first, repeated on the
// remaining tests. Falls back to a greedy heuristic beyond the enumeration
// cap (12 traversing tests / 16 modifications) and marks the plan.
PrioritizedPlan prioritize_mttc(const std::vector<TestTraceData>& tests,
                                const std::set<int>& mod_tps);

std::string plan_to_json(const PrioritizedPlan& plan);
std::string plan_to_table(const PrioritizedPlan& plan);

} // namespace stprio
