#pragma once

#include "stprio/instrument.hpp"
#include "stprio/interp.hpp"
#include "stprio/trace.hpp"

#include <string>
#include <vector>

namespace stprio {

struct TestStep {
    enum class Kind { SetInput, WaitCycles, WaitMs, Expect, Manual };
    Kind kind = Kind::WaitCycles;
    std::string var;
    Value value;
    std::int64_t n = 0; // cycles or ms
    std::string prompt;
    std::vector<std::pair<std::string, Value>> effects;
    std::int64_t ack_delay_ms = 0;
};

struct TestCase {
    std::string id;
    std::string name;
    std::vector<TestStep> steps;
};

struct TestResult {
    std::string id;
    bool passed = true;
    int failed_step = -1;
    std::int64_t duration_ms = 0;
};

struct TestReport {
    Checksum version_id = 0;
    std::vector<TestResult> tests;
    int passed = 0;
    int failed = 0;
    std::int64_t total_duration_ms = 0;
};

// Executes the suite against the instrumented project: fresh machine per
// test, reset before the steps, save after them (also after an expect
// failure). Manual steps idle for ack_delay_ms, then apply their effects.
std::pair<TestReport, std::vector<ExecutionTrace>> run_suite(const ResolvedProject& instrumented,
                                                             const TracePointDb& db,
                                                             const std::vector<TestCase>& suite);

// Lockstep execution of the suite on the instrumented and the original
// project: per-cycle output snapshots must be identical (trace structure
// excluded), instrumented counters must match the interpreter's internal
// block-entry counters, and statement-count overhead is aggregated.
struct SuiteComparison {
    bool ok = true;
    std::string detail;
    OverheadReport overhead;
    TestReport report;
    std::vector<ExecutionTrace> traces;
};

SuiteComparison run_suite_compared(const ResolvedProject& instrumented, const TracePointDb& db,
                                   const std::vector<TestCase>& suite,
                                   const ResolvedProject& original,
                                   const DependencyModel& original_model);

std::vector<TestCase> suite_from_json(const std::string& text);
std::string suite_to_json(const std::vector<TestCase>& suite);
std::vector<TestCase> load_suite(const std::string& path);

std::string report_to_json(const TestReport& report);
TestReport report_from_json(const std::string& text);

// JSON value encoding shared with the suite format: BOOL as true/false,
// INT/DINT as numbers, REAL as floats, TIME as "T#...".
Value value_from_json_text(const std::string& raw_json_value);

} // namespace stprio
