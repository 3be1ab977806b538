// End-to-end acceptance checks for the prioritization pipeline. Each check
// prints one PASS/FAIL line; the process exits nonzero if any check fails.

#include "stprio/diff.hpp"
#include "stprio/impact.hpp"
#include "stprio/instrument.hpp"
#include "stprio/interp.hpp"
#include "stprio/model.hpp"
#include "stprio/prioritize.hpp"
#include "stprio/project.hpp"
#include "stprio/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace stprio;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << ": " << number << ". " << name;
    if (!ok && !detail.empty()) std::cout << " -- " << detail;
    std::cout << "\n";
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Pipeline {
    ResolvedProject v1;
    DependencyModel v1_model;
    ResolvedProject v2;
    DependencyModel v2_model;
    ResolvedProject instrumented;
    TracePointDb db;
    std::vector<TestCase> suite;
    TestReport report;
    std::vector<ExecutionTrace> traces;
    ModificationSet mods;
    std::set<int> mod_tps;
    std::vector<TestTraceData> tests;
};

Pipeline run_pipeline(const std::string& fixtures) {
    Pipeline p;
    p.v1 = resolve(load_project(fixtures + "/depal_v1"));
    p.v1_model = build_dependency_model(p.v1);
    p.v2 = resolve(load_project(fixtures + "/depal_v2"));
    p.v2_model = build_dependency_model(p.v2);
    auto [instr, db] = instrument(p.v1, p.v1_model);
    p.db = std::move(db);
    p.instrumented = resolve(load_project_from_memory(instr.files, instr.tasks_cfg));
    p.suite = load_suite(fixtures + "/suite.json");
    auto [report, traces] = run_suite(p.instrumented, p.db, p.suite);
    p.report = std::move(report);
    p.traces = std::move(traces);

    ChangeSet changes = diff_models(p.v1_model, p.v2_model);
    p.mods = impact(p.v2_model, changes);
    map_to_old_trace_points(p.mods, changes, p.db);
    p.mod_tps = std::set<int>(p.mods.mapped_tp_ids.begin(), p.mods.mapped_tp_ids.end());

    for (std::size_t i = 0; i < p.report.tests.size(); ++i) {
        const TestResult& r = p.report.tests[i];
        const ExecutionTrace& t = p.traces[i];
        TestTraceData d;
        d.id = r.id;
        d.duration_ms = r.duration_ms;
        d.counts.assign(t.points.size(), 0);
        d.first_visit.assign(t.points.size(), -1);
        for (const TracePointVisit& v : t.points) {
            d.counts[static_cast<std::size_t>(v.tp)] = v.count;
            if (v.visited) d.first_visit[static_cast<std::size_t>(v.tp)] = v.first_visit_ms;
        }
        p.tests.push_back(std::move(d));
    }
    return p;
}

const TestTraceData& test_by_id(const Pipeline& p, const std::string& id) {
    for (const TestTraceData& t : p.tests) {
        if (t.id == id) return t;
    }
    throw std::runtime_error("missing test " + id);
}

std::int64_t mod_visit_sum(const Pipeline& p, const std::string& id) {
    const TestTraceData& t = test_by_id(p, id);
    std::int64_t sum = 0;
    for (int tp : p.mod_tps) sum += t.counts[static_cast<std::size_t>(tp)];
    return sum;
}

// Cover time of an ordered candidate: full durations of all tests before the
// last plus the last test's worst first visit among the modifications it
// newly covers.
std::int64_t candidate_cover_time(const Pipeline& p, const std::vector<std::string>& ids) {
    std::set<int> covered;
    std::int64_t dur_sum = 0;
    std::int64_t result = -1;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const TestTraceData& t = test_by_id(p, ids[k]);
        if (k + 1 == ids.size()) {
            std::int64_t worst = 0;
            for (int tp : p.mod_tps) {
                if (covered.count(tp)) continue;
                if (t.counts[static_cast<std::size_t>(tp)] > 0) {
                    worst = std::max(worst, t.first_visit[static_cast<std::size_t>(tp)]);
                }
            }
            result = dur_sum + worst;
        } else {
            dur_sum += t.duration_ms;
            for (int tp : p.mod_tps) {
                if (t.counts[static_cast<std::size_t>(tp)] > 0) covered.insert(tp);
            }
        }
    }
    return result;
}

std::vector<std::string> order_ids(const PrioritizedPlan& plan) {
    std::vector<std::string> out;
    for (const PlanEntry& e : plan.order) out.push_back(e.id);
    return out;
}

// ---- randomized semantics-preservation corpus ----

struct MiniProgram {
    const char* name;
    std::vector<std::pair<std::string, std::string>> files;
    std::vector<std::pair<std::string, char>> inputs; // name, kind: b/i/t
};

std::vector<MiniProgram> mini_programs() {
    std::vector<MiniProgram> out;
    out.push_back({"branching",
                   {{"p.st",
                     "PROGRAM P\n"
                     "VAR_INPUT a : INT; b : INT; go : BOOL; END_VAR\n"
                     "VAR_OUTPUT q : INT; neg : BOOL; END_VAR\n"
                     "IF go AND a > b THEN\n    q := a - b;\n"
                     "ELSIF go AND a < b THEN\n    q := b - a;\n"
                     "ELSIF go THEN\n    q := 100;\nELSE\n    q := 0;\nEND_IF;\n"
                     "neg := q < 0;\n"
                     "END_PROGRAM\n"}},
                   {{"a", 'i'}, {"b", 'i'}, {"go", 'b'}}});
    out.push_back({"selector",
                   {{"p.st",
                     "PROGRAM P\n"
                     "VAR_INPUT sel : INT; x : INT; END_VAR\n"
                     "VAR_OUTPUT y : INT; hits : DINT; END_VAR\n"
                     "CASE sel OF\n"
                     "0:\n    y := 0;\n"
                     "1, 2:\n    y := x * 2;\n    hits := hits + 1;\n"
                     "3:\n    y := x * x;\n"
                     "ELSE\n    y := -1;\nEND_CASE;\n"
                     "END_PROGRAM\n"}},
                   {{"sel", 'i'}, {"x", 'i'}}});
    out.push_back({"loops",
                   {{"p.st",
                     "PROGRAM P\n"
                     "VAR_INPUT n : INT; END_VAR\n"
                     "VAR_OUTPUT acc : DINT; odd : BOOL; END_VAR\n"
                     "VAR i : INT; k : INT; END_VAR\n"
                     "acc := 0;\n"
                     "FOR i := 1 TO n DO\n    acc := acc + i;\nEND_FOR;\n"
                     "k := n;\n"
                     "WHILE k > 0 DO\n    k := k - 2;\nEND_WHILE;\n"
                     "odd := acc MOD 2 = 1;\n"
                     "END_PROGRAM\n"}},
                   {{"n", 'i'}}});
    out.push_back({"timers",
                   {{"p.st",
                     "PROGRAM P\n"
                     "VAR_INPUT run : BOOL; pt : TIME; END_VAR\n"
                     "VAR_OUTPUT fired : BOOL; span : TIME; END_VAR\n"
                     "VAR T1 : TON; T2 : TON; END_VAR\n"
                     "T1(IN := run, PT := pt);\n"
                     "T2(IN := NOT run, PT := T#70ms);\n"
                     "fired := T1.Q OR T2.Q;\n"
                     "span := T1.ET;\n"
                     "END_PROGRAM\n"}},
                   {{"run", 'b'}, {"pt", 't'}}});
    out.push_back({"sequence",
                   {{"p.st",
                     "PROGRAM P\n"
                     "VAR_INPUT start : BOOL; stop : BOOL; END_VAR\n"
                     "VAR_OUTPUT phase : INT; ticks : DINT; END_VAR\n"
                     "STEP S_Off INITIAL\n    ACTION A_Off;\nEND_STEP\n"
                     "STEP S_Run\n    ACTION A_Run;\nEND_STEP\n"
                     "STEP S_Cool\n    ACTION A_Cool;\nEND_STEP\n"
                     "TRANSITION T_Go FROM S_Off TO S_Run := start AND NOT stop;\n"
                     "TRANSITION T_Halt FROM S_Run TO S_Cool := stop;\n"
                     "TRANSITION T_Done FROM S_Cool TO S_Off := NOT stop;\n"
                     "ACTION A_Off\n    phase := 0;\nEND_ACTION\n"
                     "ACTION A_Run\n    phase := 1;\n    ticks := ticks + 1;\nEND_ACTION\n"
                     "ACTION A_Cool\n    phase := 2;\nEND_ACTION\n"
                     "END_PROGRAM\n"}},
                   {{"start", 'b'}, {"stop", 'b'}}});
    out.push_back({"calls",
                   {{"fb.st",
                     "FUNCTION_BLOCK FB_Count\n"
                     "VAR_INPUT inc : BOOL; limit : DINT; END_VAR\n"
                     "VAR_OUTPUT n : DINT; full : BOOL; END_VAR\n"
                     "IF inc AND n < limit THEN\n    n := n + 1;\nEND_IF;\n"
                     "full := n >= limit;\n"
                     "END_FUNCTION_BLOCK\n"},
                    {"fn.st",
                     "FUNCTION F_Clamp : DINT\n"
                     "VAR_INPUT v : DINT; hi : DINT; END_VAR\n"
                     "IF v > hi THEN\n    F_Clamp := hi;\nELSE\n    F_Clamp := v;\nEND_IF;\n"
                     "END_FUNCTION\n"},
                    {"p.st",
                     "PROGRAM P\n"
                     "VAR_INPUT bump : BOOL; END_VAR\n"
                     "VAR_OUTPUT total : DINT; capped : DINT; isfull : BOOL; END_VAR\n"
                     "VAR Cnt : FB_Count; END_VAR\n"
                     "Cnt(inc := bump, limit := 17, n => total, full => isfull);\n"
                     "capped := F_Clamp(v := total * 3, hi := 40);\n"
                     "END_PROGRAM\n"}},
                   {{"bump", 'b'}}});
    return out;
}

Value random_value(std::mt19937& rng, char kind) {
    switch (kind) {
    case 'b': return Value::make_bool(rng() % 2 == 0);
    case 'i': return Value::make_int(static_cast<std::int64_t>(rng() % 21) - 10);
    default: return Value::make_time(static_cast<std::int64_t>(rng() % 40) * 5);
    }
}

// ---- brute-force MTTC oracle, independent of the searched implementation ----

struct BruteForce {
    const std::vector<TestTraceData>& tests;
    std::set<int> target;
    std::int64_t best = -1;

    BruteForce(const std::vector<TestTraceData>& tests_, const std::set<int>& mods)
        : tests(tests_) {
        for (const TestTraceData& t : tests) {
            for (int tp : mods) {
                if (t.counts[static_cast<std::size_t>(tp)] > 0) target.insert(tp);
            }
        }
    }

    void recurse(std::vector<int>& seq, std::set<int> covered, std::int64_t dur_sum) {
        for (int i = 0; i < static_cast<int>(tests.size()); ++i) {
            if (std::find(seq.begin(), seq.end(), i) != seq.end()) continue;
            std::set<int> cov;
            for (int tp : target) {
                if (tests[static_cast<std::size_t>(i)].counts[static_cast<std::size_t>(tp)] > 0) {
                    cov.insert(tp);
                }
            }
            bool adds = false;
            for (int tp : cov) {
                if (!covered.count(tp)) adds = true;
            }
            if (!adds) continue;
            std::set<int> merged = covered;
            merged.insert(cov.begin(), cov.end());
            if (merged == target) {
                std::int64_t worst = 0;
                for (int tp : target) {
                    if (covered.count(tp)) continue;
                    if (cov.count(tp)) {
                        worst = std::max(worst,
                                         tests[static_cast<std::size_t>(i)]
                                             .first_visit[static_cast<std::size_t>(tp)]);
                    }
                }
                std::int64_t cover = dur_sum + worst;
                if (best < 0 || cover < best) best = cover;
            } else {
                seq.push_back(i);
                recurse(seq, merged, dur_sum + tests[static_cast<std::size_t>(i)].duration_ms);
                seq.pop_back();
            }
        }
    }

    std::int64_t run() {
        std::vector<int> seq;
        recurse(seq, {}, 0);
        return best;
    }
};

} // namespace

int main(int argc, char** argv) {
    std::string fixtures = argc > 1 ? argv[1] : STPRIO_FIXTURE_DIR;
    Pipeline p = run_pipeline(fixtures);

    // Shared sanity: the recorded traces reproduce the reference timetable.
    {
        bool ok = true;
        std::ostringstream why;
        auto expect_eq = [&](const std::string& what, std::int64_t got, std::int64_t want) {
            if (got != want) {
                ok = false;
                why << what << "=" << got << " (want " << want << ") ";
            }
        };
        expect_eq("sum11", mod_visit_sum(p, "11"), 10);
        expect_eq("sum12", mod_visit_sum(p, "12"), 26);
        expect_eq("sum13", mod_visit_sum(p, "13"), 384);
        expect_eq("dur11", test_by_id(p, "11").duration_ms, 40000);
        expect_eq("dur12", test_by_id(p, "12").duration_ms, 93000);
        expect_eq("dur13", test_by_id(p, "13").duration_ms, 587000);
        expect_eq("passed", p.report.passed, 14);
        // per-block timetable: BB1/BB2/BB3 are the gripper's check blocks
        int bb1 = p.db.find_tp("FB_Gripper.bb7");
        int bb2 = p.db.find_tp("FB_Gripper.bb8");
        int bb3 = p.db.find_tp("FB_Gripper.bb9");
        auto cell = [&](const std::string& id, int tp, std::int64_t count,
                        std::int64_t first) {
            const TestTraceData& t = test_by_id(p, id);
            expect_eq(id + " count@" + std::to_string(tp),
                      t.counts[static_cast<std::size_t>(tp)], count);
            if (count > 0) {
                expect_eq(id + " first@" + std::to_string(tp),
                          t.first_visit[static_cast<std::size_t>(tp)], first);
            }
        };
        cell("11", bb1, 5, 23000);
        cell("11", bb2, 0, 0);
        cell("11", bb3, 5, 23000);
        cell("12", bb1, 13, 25000);
        cell("12", bb2, 8, 25000);
        cell("12", bb3, 5, 52000);
        cell("13", bb1, 192, 24000);
        cell("13", bb2, 192, 24000);
        cell("13", bb3, 0, 0);
        for (int i = 1; i <= 14; ++i) {
            if (i >= 11 && i <= 13) continue;
            expect_eq("sum" + std::to_string(i), mod_visit_sum(p, std::to_string(i)), 0);
        }
        report(0, "Fixture traces match the reference timetable", ok, why.str());
    }

    // 1. Intensity reproduction.
    {
        auto start = std::chrono::steady_clock::now();
        PrioritizedPlan plan = prioritize_intensity(p.tests, p.mod_tps);
        double elapsed = seconds_since(start);
        std::vector<std::string> ids = order_ids(plan);
        bool ok = ids.size() == 14 && ids[0] == "13" && ids[1] == "12" && ids[2] == "11";
        double p13 = plan.order[0].p_it, p12 = plan.order[1].p_it, p11 = plan.order[2].p_it;
        ok = ok && std::abs(p11 - 0.25) < 0.005 && std::abs(p12 - 0.28) < 0.005 &&
             std::abs(p13 - 0.65) < 0.005;
        for (std::size_t i = 3; i < plan.order.size(); ++i) {
            if (plan.order[i].group != "low") ok = false;
        }
        ok = ok && elapsed < 1.0;
        std::ostringstream why;
        why << "p_it(11)=" << p11 << " p_it(12)=" << p12 << " p_it(13)=" << p13 << " in "
            << elapsed << "s";
        report(1, "Intensity values 0.25 / 0.28 / 0.65 and order 13, 12, 11", ok,
               why.str());
    }

    // 2. MTTC reproduction.
    {
        auto start = std::chrono::steady_clock::now();
        PrioritizedPlan plan = prioritize_mttc(p.tests, p.mod_tps);
        double elapsed = seconds_since(start);
        std::int64_t c_11_12 = candidate_cover_time(p, {"11", "12"});
        std::int64_t c_11_13 = candidate_cover_time(p, {"11", "13"});
        std::int64_t c_12 = candidate_cover_time(p, {"12"});
        std::int64_t c_13_11 = candidate_cover_time(p, {"13", "11"});
        std::int64_t c_13_12 = candidate_cover_time(p, {"13", "12"});
        bool ok = c_11_12 == 65000 && c_11_13 == 64000 && c_12 == 52000 &&
                  c_13_11 > 600000 && c_13_12 > 600000;
        ok = ok && !plan.mttcs.empty() &&
             plan.mttcs[0].tests == std::vector<std::string>{"12"} &&
             plan.mttcs[0].cover_time_ms == 52000;
        ok = ok && elapsed < 1.0;
        std::ostringstream why;
        why << "covers: 11+12=" << c_11_12 << " 11+13=" << c_11_13 << " 12=" << c_12
            << " 13+11=" << c_13_11 << " 13+12=" << c_13_12;
        report(2, "MTTC reproduction (65000 / 64000 / 52000 / >600000; chosen {12})", ok,
               why.str());
    }

    // 3. Impact-analysis golden.
    {
        std::set<int> expected;
        for (const char* b :
             {"FB_Gripper.bb1", "FB_Gripper.bb7", "FB_Gripper.bb8", "FB_Gripper.bb9"}) {
            expected.insert(p.db.find_tp(b));
        }
        bool ok = p.mod_tps == expected;
        std::ostringstream why;
        why << "mapped {";
        for (int tp : p.mod_tps) why << tp << " ";
        why << "} expected {";
        for (int tp : expected) why << tp << " ";
        why << "}";
        report(3, "Impact golden: exactly {change site, BB1, BB2, BB3}", ok, why.str());
    }

    // 4. Simple-grouping golden.
    {
        PrioritizedPlan plan = prioritize_simple(p.tests, p.mod_tps);
        std::set<std::string> high;
        for (const PlanEntry& e : plan.order) {
            if (e.group == "high") high.insert(e.id);
        }
        bool ok = high == std::set<std::string>{"11", "12", "13"};
        report(4, "Simple grouping: high group exactly {11, 12, 13}", ok);
    }

    // 5. Semantics preservation over randomized scripts.
    {
        auto start = std::chrono::steady_clock::now();
        bool ok = true;
        std::ostringstream why;
        int scripts_run = 0;
        std::vector<MiniProgram> minis = mini_programs();
        for (std::size_t mp = 0; mp < minis.size() && ok; ++mp) {
            ResolvedProject original = resolve(
                load_project_from_memory(minis[mp].files, "task main program P cycle_ms 10\n"));
            DependencyModel model = build_dependency_model(original);
            auto [instr_files, db] = instrument(original, model);
            ResolvedProject instrumented =
                resolve(load_project_from_memory(instr_files.files, instr_files.tasks_cfg));
            for (int s = 0; s < 170 && ok; ++s) {
                std::mt19937 rng(static_cast<unsigned>(1000 * mp) + static_cast<unsigned>(s));
                InputScript script;
                int cycles = 30 + static_cast<int>(rng() % 40);
                std::map<std::string, Value> standing;
                for (int c = 0; c < cycles; ++c) {
                    for (const auto& [name, kind] : minis[mp].inputs) {
                        if (c == 0 || rng() % 5 == 0) standing[name] = random_value(rng, kind);
                    }
                    script.push_back(standing);
                }
                DifferentialResult diff = differential_check(original, instrumented, script);
                ++scripts_run;
                if (!diff.ok) {
                    ok = false;
                    why << minis[mp].name << " script " << s << " diverges at cycle "
                        << diff.mismatch_cycle << " on " << diff.variable;
                }
            }
        }
        double elapsed = seconds_since(start);
        ok = ok && scripts_run >= 1000 && elapsed < 60.0;
        if (ok) {
            std::cout << "      (" << scripts_run << " scripts over " << minis.size()
                      << " programs in " << elapsed << "s)\n";
        }
        report(5, "Semantics preservation on randomized scan-cycle scripts", ok, why.str());
    }

    // 6 & 9. Trace soundness and bounded instrumentation overhead, via a
    // lockstep run of the whole fixture suite against the original.
    {
        SuiteComparison cmp = run_suite_compared(p.instrumented, p.db, p.suite, p.v1, p.v1_model);
        report(6, "Trace soundness: injected counters equal internal block counters", cmp.ok,
               cmp.detail);

        bool bounded = true;
        std::ostringstream why;
        for (std::size_t c = 0; c < cmp.overhead.original_statements.size(); ++c) {
            std::int64_t extra =
                cmp.overhead.instrumented_statements[c] - cmp.overhead.original_statements[c];
            if (extra < 0 || extra > 3 * cmp.overhead.original_blocks_entered[c]) {
                bounded = false;
                why << "cycle " << c << ": +" << extra << " statements for "
                    << cmp.overhead.original_blocks_entered[c] << " blocks";
                break;
            }
        }
        std::string text = overhead_report_text(cmp.overhead);
        bool has_ratios = text.find("avg") != std::string::npos &&
                          text.find("max") != std::string::npos &&
                          cmp.overhead.avg_increase_pct > 0.0;
        if (bounded && has_ratios) {
            std::cout << "      overhead: avg +" << cmp.overhead.avg_increase_pct << "%, max +"
                      << cmp.overhead.max_increase_pct << "%\n";
        }
        report(9, "Overhead bounded by 3 statements per entered block; ratios reported",
               bounded && has_ratios, why.str());
    }

    // 7. MTTC oracle equivalence on random instances.
    {
        auto start = std::chrono::steady_clock::now();
        bool ok = true;
        std::ostringstream why;
        std::mt19937 rng(4242);
        int checked = 0;
        for (int instance = 0; instance < 260 && ok; ++instance) {
            int n_tests = 1 + static_cast<int>(rng() % 6);
            int n_mods = 1 + static_cast<int>(rng() % 5);
            std::vector<TestTraceData> tests;
            bool any = false;
            for (int i = 0; i < n_tests; ++i) {
                TestTraceData t;
                t.id = "t" + std::to_string(i);
                t.duration_ms = 500 + static_cast<std::int64_t>(rng() % 120000);
                t.counts.assign(static_cast<std::size_t>(n_mods), 0);
                t.first_visit.assign(static_cast<std::size_t>(n_mods), -1);
                for (int tp = 0; tp < n_mods; ++tp) {
                    if (rng() % 3 == 0) {
                        t.counts[static_cast<std::size_t>(tp)] =
                            1 + static_cast<std::int64_t>(rng() % 50);
                        t.first_visit[static_cast<std::size_t>(tp)] = static_cast<std::int64_t>(
                            rng() % static_cast<unsigned long>(t.duration_ms));
                        any = true;
                    }
                }
                tests.push_back(std::move(t));
            }
            std::set<int> mods;
            for (int tp = 0; tp < n_mods; ++tp) mods.insert(tp);
            PrioritizedPlan plan = prioritize_mttc(tests, mods);
            if (!any) {
                if (!plan.mttcs.empty()) {
                    ok = false;
                    why << "instance " << instance << ": combination without coverage";
                }
                continue;
            }
            BruteForce oracle(tests, mods);
            std::int64_t expected = oracle.run();
            ++checked;
            if (plan.mttcs.empty() || plan.mttcs[0].cover_time_ms != expected) {
                ok = false;
                why << "instance " << instance << ": got "
                    << (plan.mttcs.empty() ? -1 : plan.mttcs[0].cover_time_ms) << " want "
                    << expected;
            }
        }
        double elapsed = seconds_since(start);
        ok = ok && checked >= 200 && elapsed < 30.0;
        if (ok) std::cout << "      (" << checked << " instances in " << elapsed << "s)\n";
        report(7, "MTTC choice equals the exhaustive minimum on random instances", ok,
               why.str());
    }

    // 8. Diff fallback behavior.
    {
        std::string pre = "PROGRAM P\nVAR c : BOOL; a : INT; END_VAR\n";
        auto mk = [&](const std::string& body) {
            ResolvedProject rp = resolve(load_project_from_memory(
                {{"p.st", pre + body + "END_PROGRAM\n"}}, "task main program P cycle_ms 10\n"));
            DependencyModel m = build_dependency_model(rp);
            return std::pair<ResolvedProject, DependencyModel>(std::move(rp), std::move(m));
        };
        auto base = mk("a := 1;\nIF c THEN a := 2; END_IF;\na := 3;\n");
        auto literal = mk("a := 1;\nIF c THEN a := 7; END_IF;\na := 3;\n");
        auto new_if =
            mk("a := 1;\nIF c THEN a := 2; END_IF;\nIF a > 1 THEN a := 9; END_IF;\na := 3;\n");

        ChangeSet small = diff_models(base.second, literal.second);
        bool small_ok = small.modified_pous.size() == 1 &&
                        !small.modified_pous[0].structural_fallback &&
                        small.modified_pous[0].parents[0].changed_pairs.size() == 1;
        ModificationSet small_mods = impact(literal.second, small);
        small_ok = small_ok && small_mods.modified_blocks == std::set<std::string>{"P.bb1"};

        ChangeSet big = diff_models(base.second, new_if.second);
        bool big_ok = big.modified_pous.size() == 1 && big.modified_pous[0].structural_fallback;
        ModificationSet big_mods = impact(new_if.second, big);
        big_ok = big_ok && static_cast<int>(big_mods.modified_blocks.size()) ==
                               new_if.second.basic_block_count();
        report(8, "Diff fallback: new IF marks all blocks, literal edit marks one",
               small_ok && big_ok);
    }

    // 10. No-change identity through the whole pipeline.
    {
        ResolvedProject again = resolve(load_project(fixtures + "/depal_v1"));
        DependencyModel again_model = build_dependency_model(again);
        ChangeSet none = diff_models(p.v1_model, again_model);
        ModificationSet mods = impact(again_model, none);
        map_to_old_trace_points(mods, none, p.db);
        std::set<int> tps(mods.mapped_tp_ids.begin(), mods.mapped_tp_ids.end());
        std::vector<std::string> original;
        for (const TestTraceData& t : p.tests) original.push_back(t.id);
        bool ok = none.empty() && tps.empty();
        ok = ok && order_ids(prioritize_simple(p.tests, tps)) == original;
        ok = ok && order_ids(prioritize_intensity(p.tests, tps)) == original;
        ok = ok && order_ids(prioritize_mttc(p.tests, tps)) == original;
        report(10, "No-change identity: original order under all three strategies", ok);
    }

    if (failures > 0) {
        std::cout << failures << " acceptance check(s) FAILED\n";
        return 1;
    }
    std::cout << "all acceptance checks passed\n";
    return 0;
}
