#pragma once

#include "stprio/checksum.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stprio {

struct TracePointVisit {
    int tp = -1;
    bool visited = false;
    std::int64_t count = 0;
    std::int64_t first_visit_ms = 0; // valid when visited
};

// Per-test execution trace; lists every trace point of the dense id range,
// visited or not.
struct ExecutionTrace {
    std::string test_id;
    std::int64_t duration_ms = 0;
    Checksum version_id = 0;
    std::vector<TracePointVisit> points;
};

std::string trace_to_json(const ExecutionTrace& trace);
ExecutionTrace trace_from_json(const std::string& text);
void save_trace(const ExecutionTrace& trace, const std::string& path);
ExecutionTrace load_trace(const std::string& path);

} // namespace stprio
