#pragma once

#include "stprio/model.hpp"
#include "stprio/trace.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace stprio {

// One scan cycle's cost counters. Statement count covers simple statements
// (assignments, calls, RETURN); control headers contribute expression nodes.
struct CycleMetrics {
    std::int64_t statements = 0;
    std::int64_t expr_nodes = 0;
    std::int64_t blocks_entered = 0; // only with block tracking enabled
};

struct BlockStats {
    std::int64_t count = 0;
    std::int64_t first_ms = -1;
};

// Deterministic scan-cycle machine. Executes all tasks once per cycle in
// declaration order; the simulated clock advances by the first task's
// cycle_ms at the end of each cycle.
class Machine {
public:
    explicit Machine(const ResolvedProject& project, const DependencyModel* model = nullptr);
    ~Machine();
    Machine(const Machine&) = delete;
    Machine& operator=(const Machine&) = delete;

    int cycle_ms() const;
    std::int64_t clock_ms() const;   // since power-on
    std::int64_t now_ms() const;     // since last reset (per-test clock)
    std::int64_t cycle_count() const;

    // Latches the given inputs, runs every task to completion, snapshots
    // outputs, advances the clock.
    CycleMetrics run_cycle(const std::map<std::string, Value>& inputs = {});

    std::map<std::string, Value> outputs() const;

    bool is_input(const std::string& name) const;
    bool is_readable(const std::string& name) const;
    Value read_var(const std::string& name) const;

    // Trace builtins. reset() zeroes the trace structure and the per-test
    // clock; save_trace() snapshots it. Only instrumented projects carry the
    // trace structure.
    bool instrumented() const;
    int trace_point_count() const;
    void reset();
    ExecutionTrace save_trace(const std::string& test_id, Checksum version_id) const;

    // Internal block-entry counters; independent of any injected trace code.
    void enable_block_tracking();
    const std::map<std::string, BlockStats>& block_stats() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct DifferentialResult {
    bool ok = true;
    std::int64_t mismatch_cycle = -1;
    std::string variable;
};

using InputScript = std::vector<std::map<std::string, Value>>;

// Runs both projects on the same per-cycle input script and compares the
// per-cycle output snapshots (the trace structure is not an output).
DifferentialResult differential_check(const ResolvedProject& original,
                                      const ResolvedProject& instrumented,
                                      const InputScript& script);

struct OverheadReport {
    std::int64_t cycles = 0;
    double avg_original = 0.0;
    double avg_instrumented = 0.0;
    std::int64_t max_original = 0;
    std::int64_t max_instrumented = 0;
    double avg_increase_pct = 0.0;
    double max_increase_pct = 0.0;
    double max_cycle_ratio = 0.0; // max over cycles of instr / max(orig, 1)
    // Per-cycle data for property checks.
    std::vector<std::int64_t> original_statements;
    std::vector<std::int64_t> instrumented_statements;
    std::vector<std::int64_t> original_blocks_entered;
};

// Statement-count analogue of scan-cycle time overhead; both runs use the
// same script. The original project must carry a model for block counting.
OverheadReport measure_overhead(const ResolvedProject& original,
                                const DependencyModel& original_model,
                                const ResolvedProject& instrumented,
                                const InputScript& script);

std::string overhead_report_text(const OverheadReport& report);

} // namespace stprio
