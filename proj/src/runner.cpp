#include "stprio/runner.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace stprio {

namespace {

using nlohmann::json;

Value value_from_json(const json& j) {
    if (j.is_boolean()) return Value::make_bool(j.get<bool>());
    if (j.is_number_integer()) return Value::make_int(j.get<std::int64_t>());
    if (j.is_number_float()) return Value::make_real(j.get<double>());
    if (j.is_string()) {
        std::int64_t ms = 0;
        if (parse_time_literal(j.get<std::string>(), ms)) return Value::make_time(ms);
        fail(ErrorCode::StepError, "bad value literal '" + j.get<std::string>() + "'");
    }
    fail(ErrorCode::StepError, "unsupported value in test step");
}

json value_to_json(const Value& v) {
    switch (v.kind) {
    case Value::Kind::Bool: return json(v.b);
    case Value::Kind::Int: return json(v.i);
    case Value::Kind::Real: return json(v.r);
    case Value::Kind::Time: return json(time_to_text(v.i));
    }
    return json();
}

std::int64_t ms_to_cycles(std::int64_t ms, int cycle_ms) {
    return (ms + cycle_ms - 1) / cycle_ms;
}

} // namespace

Value value_from_json_text(const std::string& raw_json_value) {
    return value_from_json(json::parse(raw_json_value));
}

std::pair<TestReport, std::vector<ExecutionTrace>> run_suite(const ResolvedProject& instrumented,
                                                             const TracePointDb& db,
                                                             const std::vector<TestCase>& suite) {
    {
        std::set<std::string> ids;
        for (const TestCase& t : suite) {
            if (!ids.insert(t.id).second) {
                fail(ErrorCode::StepError, "duplicate test id '" + t.id + "' in suite");
            }
        }
    }

    TestReport report;
    report.version_id = db.version_id;
    std::vector<ExecutionTrace> traces;

    for (const TestCase& test : suite) {
        // Power-cycle semantics: fresh machine per test.
        Machine machine(instrumented);
        if (!machine.instrumented()) {
            fail(ErrorCode::TraceIOError, "project is not instrumented; cannot record traces");
        }
        if (machine.trace_point_count() != static_cast<int>(db.points.size())) {
            fail(ErrorCode::ModelProjectMismatch,
                 "trace structure size does not match the trace-point db");
        }
        machine.reset();

        std::map<std::string, Value> standing; // held input image
        TestResult result;
        result.id = test.id;

        auto run_cycles = [&](std::int64_t n) {
            for (std::int64_t i = 0; i < n; ++i) machine.run_cycle(standing);
        };

        for (std::size_t si = 0; si < test.steps.size(); ++si) {
            const TestStep& step = test.steps[si];
            switch (step.kind) {
            case TestStep::Kind::SetInput:
                if (!machine.is_input(step.var)) {
                    fail(ErrorCode::StepError,
                         "test " + test.id + ": '" + step.var + "' is not a settable input");
                }
                standing[step.var] = step.value;
                break;
            case TestStep::Kind::WaitCycles:
                run_cycles(step.n);
                break;
            case TestStep::Kind::WaitMs:
                run_cycles(ms_to_cycles(step.n, machine.cycle_ms()));
                break;
            case TestStep::Kind::Expect: {
                if (!machine.is_readable(step.var)) {
                    fail(ErrorCode::StepError,
                         "test " + test.id + ": '" + step.var + "' is not a readable variable");
                }
                Value actual = machine.read_var(step.var);
                if (!actual.equals(step.value)) {
                    result.passed = false;
                    result.failed_step = static_cast<int>(si);
                }
                break;
            }
            case TestStep::Kind::Manual:
                run_cycles(ms_to_cycles(step.ack_delay_ms, machine.cycle_ms()));
                for (const auto& [var, value] : step.effects) {
                    if (!machine.is_input(var)) {
                        fail(ErrorCode::StepError,
                             "test " + test.id + ": '" + var + "' is not a settable input");
                    }
                    standing[var] = value;
                }
                break;
            }
            if (!result.passed) break; // remaining steps skipped; save still runs
        }

        result.duration_ms = machine.now_ms();
        traces.push_back(machine.save_trace(test.id, db.version_id));
        report.total_duration_ms += result.duration_ms;
        if (result.passed) ++report.passed;
        else ++report.failed;
        report.tests.push_back(std::move(result));
    }
    return {std::move(report), std::move(traces)};
}

SuiteComparison run_suite_compared(const ResolvedProject& instrumented, const TracePointDb& db,
                                   const std::vector<TestCase>& suite,
                                   const ResolvedProject& original,
                                   const DependencyModel& original_model) {
    SuiteComparison out;
    out.report.version_id = db.version_id;
    double sum_orig = 0.0, sum_instr = 0.0;

    for (const TestCase& test : suite) {
        Machine instr(instrumented);
        Machine orig(original, &original_model);
        orig.enable_block_tracking();
        if (!instr.instrumented()) {
            fail(ErrorCode::TraceIOError, "project is not instrumented; cannot record traces");
        }
        instr.reset();
        orig.reset();

        std::map<std::string, Value> standing;
        TestResult result;
        result.id = test.id;

        auto run_cycles = [&](std::int64_t n) {
            for (std::int64_t i = 0; i < n && out.ok; ++i) {
                CycleMetrics mi = instr.run_cycle(standing);
                CycleMetrics mo = orig.run_cycle(standing);
                out.overhead.original_statements.push_back(mo.statements);
                out.overhead.instrumented_statements.push_back(mi.statements);
                out.overhead.original_blocks_entered.push_back(mo.blocks_entered);
                sum_orig += static_cast<double>(mo.statements);
                sum_instr += static_cast<double>(mi.statements);
                out.overhead.max_original = std::max(out.overhead.max_original, mo.statements);
                out.overhead.max_instrumented =
                    std::max(out.overhead.max_instrumented, mi.statements);
                double ratio = static_cast<double>(mi.statements) /
                               static_cast<double>(std::max<std::int64_t>(mo.statements, 1));
                out.overhead.max_cycle_ratio = std::max(out.overhead.max_cycle_ratio, ratio);
                ++out.overhead.cycles;
                std::map<std::string, Value> oi = instr.outputs();
                std::map<std::string, Value> oo = orig.outputs();
                for (const auto& [name, value] : oo) {
                    auto it = oi.find(name);
                    if (it == oi.end() || !it->second.equals(value)) {
                        out.ok = false;
                        out.detail = "test " + test.id + ": output '" + name +
                                     "' diverges at cycle " + std::to_string(orig.cycle_count());
                        break;
                    }
                }
            }
        };

        for (std::size_t si = 0; si < test.steps.size() && out.ok; ++si) {
            const TestStep& step = test.steps[si];
            switch (step.kind) {
            case TestStep::Kind::SetInput:
                standing[step.var] = step.value;
                break;
            case TestStep::Kind::WaitCycles:
                run_cycles(step.n);
                break;
            case TestStep::Kind::WaitMs:
                run_cycles(ms_to_cycles(step.n, instr.cycle_ms()));
                break;
            case TestStep::Kind::Expect: {
                Value actual = instr.read_var(step.var);
                if (!actual.equals(step.value)) {
                    result.passed = false;
                    result.failed_step = static_cast<int>(si);
                }
                break;
            }
            case TestStep::Kind::Manual:
                run_cycles(ms_to_cycles(step.ack_delay_ms, instr.cycle_ms()));
                for (const auto& [var, value] : step.effects) standing[var] = value;
                break;
            }
            if (!result.passed) break;
        }

        result.duration_ms = instr.now_ms();
        ExecutionTrace trace = instr.save_trace(test.id, db.version_id);

        // Trace soundness: injected counters against the internal ones.
        if (out.ok) {
            const std::map<std::string, BlockStats>& stats = orig.block_stats();
            for (const TracePointEntry& e : db.points) {
                auto it = stats.find(e.block_qname());
                std::int64_t count = it == stats.end() ? 0 : it->second.count;
                std::int64_t first = it == stats.end() ? -1 : it->second.first_ms;
                const TracePointVisit& v = trace.points[static_cast<std::size_t>(e.tp)];
                if (v.count != count || (v.visited != (count > 0)) ||
                    (v.visited && v.first_visit_ms != first)) {
                    out.ok = false;
                    out.detail = "test " + test.id + ": trace point " + std::to_string(e.tp) +
                                 " disagrees with the internal block counter";
                    break;
                }
            }
        }

        out.traces.push_back(std::move(trace));
        out.report.total_duration_ms += result.duration_ms;
        if (result.passed) ++out.report.passed;
        else ++out.report.failed;
        out.report.tests.push_back(std::move(result));
        if (!out.ok) break;
    }

    if (out.overhead.cycles > 0) {
        out.overhead.avg_original = sum_orig / static_cast<double>(out.overhead.cycles);
        out.overhead.avg_instrumented = sum_instr / static_cast<double>(out.overhead.cycles);
    }
    double avg_base = std::max(out.overhead.avg_original, 1.0);
    double max_base = static_cast<double>(std::max<std::int64_t>(out.overhead.max_original, 1));
    out.overhead.avg_increase_pct =
        (out.overhead.avg_instrumented - out.overhead.avg_original) / avg_base * 100.0;
    out.overhead.max_increase_pct = (static_cast<double>(out.overhead.max_instrumented) -
                                     static_cast<double>(out.overhead.max_original)) /
                                    max_base * 100.0;
    return out;
}

std::vector<TestCase> suite_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) fail(ErrorCode::StepError, "malformed suite JSON");
    std::vector<TestCase> suite;
    for (const json& jt : doc.at("tests")) {
        TestCase t;
        if (jt.at("id").is_string()) t.id = jt.at("id").get<std::string>();
        else t.id = std::to_string(jt.at("id").get<std::int64_t>());
        t.name = jt.value("name", std::string());
        for (const json& js : jt.at("steps")) {
            TestStep s;
            std::string op = js.at("op").get<std::string>();
            if (op == "set_input") {
                s.kind = TestStep::Kind::SetInput;
                s.var = js.at("var").get<std::string>();
                s.value = value_from_json(js.at("value"));
            } else if (op == "wait_cycles") {
                s.kind = TestStep::Kind::WaitCycles;
                s.n = js.at("n").get<std::int64_t>();
            } else if (op == "wait_ms") {
                s.kind = TestStep::Kind::WaitMs;
                s.n = js.at("ms").get<std::int64_t>();
            } else if (op == "expect") {
                s.kind = TestStep::Kind::Expect;
                s.var = js.at("var").get<std::string>();
                s.value = value_from_json(js.at("value"));
            } else if (op == "manual") {
                s.kind = TestStep::Kind::Manual;
                s.prompt = js.value("prompt", std::string());
                s.ack_delay_ms = js.at("ack_delay_ms").get<std::int64_t>();
                if (js.contains("effects")) {
                    for (const json& je : js.at("effects")) {
                        s.effects.emplace_back(je.at("var").get<std::string>(),
                                               value_from_json(je.at("value")));
                    }
                }
            } else {
                fail(ErrorCode::StepError, "unknown step op '" + op + "'");
            }
            t.steps.push_back(std::move(s));
        }
        suite.push_back(std::move(t));
    }
    return suite;
}

std::string suite_to_json(const std::vector<TestCase>& suite) {
    json tests = json::array();
    for (const TestCase& t : suite) {
        json jt;
        jt["id"] = t.id;
        jt["name"] = t.name;
        json steps = json::array();
        for (const TestStep& s : t.steps) {
            json js;
            switch (s.kind) {
            case TestStep::Kind::SetInput:
                js["op"] = "set_input";
                js["var"] = s.var;
                js["value"] = value_to_json(s.value);
                break;
            case TestStep::Kind::WaitCycles:
                js["op"] = "wait_cycles";
                js["n"] = s.n;
                break;
            case TestStep::Kind::WaitMs:
                js["op"] = "wait_ms";
                js["ms"] = s.n;
                break;
            case TestStep::Kind::Expect:
                js["op"] = "expect";
                js["var"] = s.var;
                js["value"] = value_to_json(s.value);
                break;
            case TestStep::Kind::Manual: {
                js["op"] = "manual";
                js["prompt"] = s.prompt;
                js["ack_delay_ms"] = s.ack_delay_ms;
                json effects = json::array();
                for (const auto& [var, value] : s.effects) {
                    json je;
                    je["var"] = var;
                    je["value"] = value_to_json(value);
                    effects.push_back(std::move(je));
                }
                js["effects"] = std::move(effects);
                break;
            }
            }
            steps.push_back(std::move(js));
        }
        jt["steps"] = std::move(steps);
        tests.push_back(std::move(jt));
    }
    json doc;
    doc["tests"] = std::move(tests);
    return doc.dump(2) + "\n";
}

std::vector<TestCase> load_suite(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::StepError, "cannot read suite file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return suite_from_json(text);
}

std::string report_to_json(const TestReport& report) {
    json doc;
    doc["version_id"] = checksum_to_hex(report.version_id);
    json tests = json::array();
    for (const TestResult& t : report.tests) {
        json jt;
        jt["id"] = t.id;
        jt["verdict"] = t.passed ? "passed" : "failed";
        jt["duration_ms"] = t.duration_ms;
        jt["failed_step"] = t.failed_step >= 0 ? json(t.failed_step) : json(nullptr);
        tests.push_back(std::move(jt));
    }
    doc["tests"] = std::move(tests);
    doc["totals"] = {{"passed", report.passed},
                     {"failed", report.failed},
                     {"total_duration_ms", report.total_duration_ms}};
    return doc.dump(2) + "\n";
}

TestReport report_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) fail(ErrorCode::TraceIOError, "malformed report JSON");
    TestReport report;
    report.version_id = std::stoull(doc.at("version_id").get<std::string>(), nullptr, 16);
    for (const json& jt : doc.at("tests")) {
        TestResult t;
        t.id = jt.at("id").get<std::string>();
        t.passed = jt.at("verdict").get<std::string>() == "passed";
        t.duration_ms = jt.at("duration_ms").get<std::int64_t>();
        if (!jt.at("failed_step").is_null()) t.failed_step = jt.at("failed_step").get<int>();
        report.tests.push_back(std::move(t));
    }
    report.passed = doc.at("totals").at("passed").get<int>();
    report.failed = doc.at("totals").at("failed").get<int>();
    report.total_duration_ms = doc.at("totals").at("total_duration_ms").get<std::int64_t>();
    return report;
}

} // namespace stprio
