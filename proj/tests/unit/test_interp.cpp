#include "doctest.h"

#include "helpers.hpp"

using namespace stprio;
using testutil::build;

namespace {

testutil::Built build_single(const std::string& body, const std::string& vars = "") {
    return build({{"p.st", "PROGRAM P\n" + vars + body + "\nEND_PROGRAM\n"}});
}

} // namespace

TEST_CASE("one cycle latches inputs, produces outputs, advances the clock") {
    auto built = build_single("q := i;",
                              "VAR_INPUT i : BOOL; END_VAR\nVAR_OUTPUT q : BOOL; END_VAR\n");
    Machine m(built.project);
    CHECK(m.cycle_ms() == 10);
    std::map<std::string, Value> in{{"i", Value::make_bool(true)}};
    m.run_cycle(in);
    CHECK(m.outputs().at("P.q").b);
    CHECK(m.clock_ms() == 10);
}

TEST_CASE("TON turns on at the 51st cycle for PT=500ms at 10ms cycles") {
    auto built = build_single(
        "T1(IN := TRUE, PT := T#500ms);\nq := T1.Q;",
        "VAR T1 : TON; END_VAR\nVAR_OUTPUT q : BOOL; END_VAR\n");
    Machine m(built.project);
    int first_on = -1;
    for (int cycle = 1; cycle <= 60; ++cycle) {
        m.run_cycle();
        if (first_on < 0 && m.outputs().at("P.q").b) first_on = cycle;
    }
    CHECK(first_on == 51);
}

TEST_CASE("two-step SFC: S1 active from cycle 2 on, S0 action stops") {
    std::string src =
        "PROGRAM P\n"
        "VAR_OUTPUT a : DINT; b : DINT; END_VAR\n"
        "STEP S0 INITIAL\n    ACTION A0;\nEND_STEP\n"
        "STEP S1\n    ACTION A1;\nEND_STEP\n"
        "TRANSITION T0 FROM S0 TO S1 := TRUE;\n"
        "ACTION A0\n    a := a + 1;\nEND_ACTION\n"
        "ACTION A1\n    b := b + 1;\nEND_ACTION\n"
        "END_PROGRAM\n";
    auto built = build({{"p.st", src}});
    Machine m(built.project);
    m.run_cycle();
    CHECK(m.outputs().at("P.a").i == 1);
    CHECK(m.outputs().at("P.b").i == 0);
    for (int k = 0; k < 4; ++k) m.run_cycle();
    CHECK(m.outputs().at("P.a").i == 1); // S0 action no longer executed
    CHECK(m.outputs().at("P.b").i == 4);
}

TEST_CASE("division by zero and runaway loops fault") {
    auto div0 = build_single("x := 1 / y;", "VAR x : INT; y : INT; END_VAR\n");
    Machine m1(div0.project);
    CHECK_THROWS_AS(m1.run_cycle(), Error);

    auto loop = build_single("WHILE TRUE DO x := x + 1; END_WHILE;", "VAR x : INT; END_VAR\n");
    Machine m2(loop.project);
    try {
        m2.run_cycle();
        FAIL("expected RuntimeFault");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RuntimeFault);
    }
}

TEST_CASE("reset/save: empty run yields all-unvisited trace") {
    auto built = build_single("x := 1;", "VAR x : INT; END_VAR\n");
    auto [instr, db] = instrument(built.project, built.model);
    ResolvedProject rp = testutil::reload_instrumented(instr);
    Machine m(rp);
    m.reset();
    ExecutionTrace t = m.save_trace("t0", db.version_id);
    CHECK(t.duration_ms == 0);
    REQUIRE(t.points.size() == 1);
    CHECK_FALSE(t.points[0].visited);
    CHECK(t.points[0].count == 0);
}

TEST_CASE("reset/save: five cycles of a straight-line program") {
    auto built = build_single("x := x + 1;", "VAR x : INT; END_VAR\n");
    auto [instr, db] = instrument(built.project, built.model);
    ResolvedProject rp = testutil::reload_instrumented(instr);
    Machine m(rp);
    m.reset();
    for (int k = 0; k < 5; ++k) m.run_cycle();
    ExecutionTrace t = m.save_trace("t1", db.version_id);
    CHECK(t.duration_ms == 50);
    REQUIRE(t.points.size() == 1);
    CHECK(t.points[0].visited);
    CHECK(t.points[0].count == 5);
    CHECK(t.points[0].first_visit_ms == 0);
}

TEST_CASE("save before reset is rejected") {
    auto built = build_single("x := 1;", "VAR x : INT; END_VAR\n");
    auto [instr, db] = instrument(built.project, built.model);
    ResolvedProject rp = testutil::reload_instrumented(instr);
    Machine m(rp);
    m.run_cycle();
    try {
        m.save_trace("t", db.version_id);
        FAIL("expected SaveWithoutReset");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SaveWithoutReset);
    }
}

TEST_CASE("reset zeroes counters and the per-test clock") {
    auto built = build_single("x := x + 1;", "VAR x : INT; END_VAR\n");
    auto [instr, db] = instrument(built.project, built.model);
    ResolvedProject rp = testutil::reload_instrumented(instr);
    Machine m(rp);
    m.reset();
    for (int k = 0; k < 3; ++k) m.run_cycle();
    m.reset();
    for (int k = 0; k < 2; ++k) m.run_cycle();
    ExecutionTrace t = m.save_trace("t", db.version_id);
    CHECK(t.duration_ms == 20);
    CHECK(t.points[0].count == 2);
    CHECK(t.points[0].first_visit_ms == 0);
}

TEST_CASE("overhead of the empty program is the 3-statement floor") {
    auto built = build({{"p.st", "PROGRAM P\nEND_PROGRAM\n"}});
    auto [instr, db] = instrument(built.project, built.model);
    ResolvedProject rp = testutil::reload_instrumented(instr);
    InputScript script(10);
    OverheadReport report = measure_overhead(built.project, built.model, rp, script);
    CHECK(report.max_cycle_ratio == doctest::Approx(3.0)); // 3 injected / 1 empty-block floor
    CHECK(report.max_original == 0);
    CHECK(report.max_instrumented == 3);
    CHECK(report.avg_instrumented > 2.0);
}

TEST_CASE("identical runs produce identical metrics and traces") {
    auto built = testutil::build_dir(testutil::fixture_dir() + "/depal_v1");
    auto [instr, db] = instrument(built.project, built.model);
    ResolvedProject rp = testutil::reload_instrumented(instr);
    auto run_once = [&]() {
        Machine m(rp);
        m.reset();
        std::map<std::string, Value> in;
        in["_BtnAuto"] = Value::make_bool(true);
        in["_BtnStart"] = Value::make_bool(true);
        std::int64_t stmts = 0;
        for (int k = 0; k < 500; ++k) {
            if (k == 100) in["_SnsTray"] = Value::make_bool(true);
            CycleMetrics cm = m.run_cycle(in);
            stmts += cm.statements;
        }
        return std::pair(stmts, trace_to_json(m.save_trace("d", db.version_id)));
    };
    auto a = run_once();
    auto b = run_once();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}

TEST_CASE("internal block counters match injected counters on the fixture") {
    auto built = testutil::build_dir(testutil::fixture_dir() + "/depal_v1");
    auto [instrp, db] = instrument(built.project, built.model);
    ResolvedProject rp = testutil::reload_instrumented(instrp);

    Machine instr_m(rp);
    Machine orig_m(built.project, &built.model);
    orig_m.enable_block_tracking();
    instr_m.reset();
    orig_m.reset();
    std::map<std::string, Value> in;
    in["_BtnAuto"] = Value::make_bool(true);
    in["_BtnStart"] = Value::make_bool(true);
    in["_SnsNdl"] = Value::make_bool(true);
    for (int k = 0; k < 6000; ++k) {
        if (k == 50) in["_SnsTray"] = Value::make_bool(true);
        instr_m.run_cycle(in);
        orig_m.run_cycle(in);
    }
    ExecutionTrace t = instr_m.save_trace("s", db.version_id);
    const auto& stats = orig_m.block_stats();
    for (const TracePointEntry& e : db.points) {
        auto it = stats.find(e.block_qname());
        std::int64_t count = it == stats.end() ? 0 : it->second.count;
        const TracePointVisit& v = t.points[static_cast<std::size_t>(e.tp)];
        CHECK(v.count == count);
        if (v.visited) {
            REQUIRE(it != stats.end());
            CHECK(v.first_visit_ms == it->second.first_ms);
        }
    }
}

TEST_CASE("sfc parallel branch: divergence activates both, convergence waits") {
    std::string src =
        "PROGRAM P\n"
        "VAR_INPUT join_ok : BOOL; END_VAR\n"
        "VAR_OUTPUT a : DINT; b : DINT; done : DINT; END_VAR\n"
        "STEP S0 INITIAL\nEND_STEP\n"
        "STEP SA\n    ACTION A_A;\nEND_STEP\n"
        "STEP SB\n    ACTION A_B;\nEND_STEP\n"
        "STEP SD\n    ACTION A_D;\nEND_STEP\n"
        "TRANSITION T_Split FROM S0 TO SA, SB := TRUE;\n"
        "TRANSITION T_Join FROM SA, SB TO SD := join_ok;\n"
        "ACTION A_A\n    a := a + 1;\nEND_ACTION\n"
        "ACTION A_B\n    b := b + 1;\nEND_ACTION\n"
        "ACTION A_D\n    done := done + 1;\nEND_ACTION\n"
        "END_PROGRAM\n";
    auto built = build({{"p.st", src}});
    Machine m(built.project);
    std::map<std::string, Value> in{{"join_ok", Value::make_bool(false)}};
    for (int k = 0; k < 4; ++k) m.run_cycle(in); // split after cycle 1; SA+SB run 2..4
    CHECK(m.outputs().at("P.a").i == 3);
    CHECK(m.outputs().at("P.b").i == 3);
    CHECK(m.outputs().at("P.done").i == 0);
    in["join_ok"] = Value::make_bool(true);
    m.run_cycle(in); // both branches active: join fires
    m.run_cycle(in);
    CHECK(m.outputs().at("P.a").i == 4);
    CHECK(m.outputs().at("P.b").i == 4);
    CHECK(m.outputs().at("P.done").i == 1);
}

TEST_CASE("FOR counts down with a negative step") {
    auto built = build_single(
        "acc := 0;\nFOR i := 10 TO 1 BY -3 DO acc := acc + i; END_FOR;\no := acc;",
        "VAR i : INT; acc : INT; END_VAR\nVAR_OUTPUT o : INT; END_VAR\n");
    Machine m(built.project);
    m.run_cycle();
    CHECK(m.outputs().at("P.o").i == 10 + 7 + 4 + 1);
}

TEST_CASE("CASE matches negative labels") {
    auto built = build_single(
        "CASE s OF\n-1:\n    o := 100;\n0, 2:\n    o := 200;\nELSE\n    o := 300;\nEND_CASE;",
        "VAR_INPUT s : INT; END_VAR\nVAR_OUTPUT o : INT; END_VAR\n");
    Machine m(built.project);
    m.run_cycle({{"s", Value::make_int(-1)}});
    CHECK(m.outputs().at("P.o").i == 100);
    m.run_cycle({{"s", Value::make_int(2)}});
    CHECK(m.outputs().at("P.o").i == 200);
    m.run_cycle({{"s", Value::make_int(5)}});
    CHECK(m.outputs().at("P.o").i == 300);
}

TEST_CASE("functions accept positional arguments and XOR works") {
    auto built = build({{"f.st",
                         "FUNCTION F_Add : INT\nVAR_INPUT a : INT; b : INT; END_VAR\n"
                         "F_Add := a + b;\nEND_FUNCTION\n"},
                        {"p.st",
                         "PROGRAM P\nVAR_OUTPUT o : INT; x : BOOL; END_VAR\n"
                         "o := F_Add(3, 4);\nx := TRUE XOR TRUE;\nEND_PROGRAM\n"}});
    Machine m(built.project);
    m.run_cycle();
    CHECK(m.outputs().at("P.o").i == 7);
    CHECK_FALSE(m.outputs().at("P.x").b);
}

TEST_CASE("TIME values add, subtract and compare") {
    auto built = build_single(
        "t := T#1s + T#500ms;\nlonger := t > T#1400ms;\ndd := t - T#1s;",
        "VAR t : TIME; END_VAR\nVAR_OUTPUT longer : BOOL; dd : TIME; END_VAR\n");
    Machine m(built.project);
    m.run_cycle();
    CHECK(m.outputs().at("P.longer").b);
    CHECK(m.outputs().at("P.dd").i == 500);
}

TEST_CASE("wait_ms rounds partial cycles up") {
    auto built = build({{"p.st",
                         "PROGRAM P\nVAR_OUTPUT n : DINT; END_VAR\nn := n + 1;\nEND_PROGRAM\n"}});
    auto [instr, db] = instrument(built.project, built.model);
    ResolvedProject rp = testutil::reload_instrumented(instr);
    TestCase t;
    t.id = "w";
    TestStep s;
    s.kind = TestStep::Kind::WaitMs;
    s.n = 25; // 2.5 cycles at 10 ms -> 3 cycles
    t.steps.push_back(s);
    auto [report, traces] = run_suite(rp, db, {t});
    CHECK(report.tests[0].duration_ms == 30);
}
