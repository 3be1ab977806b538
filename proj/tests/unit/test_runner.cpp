#include "doctest.h"

#include "helpers.hpp"

#include <algorithm>

using namespace stprio;
using testutil::build;

namespace {

struct Prepared {
    testutil::Built built;
    ResolvedProject instrumented;
    TracePointDb db;
};

Prepared prepare(std::vector<std::pair<std::string, std::string>> files,
                 const std::string& tasks = "task main program P cycle_ms 10\n") {
    Prepared out{testutil::build(std::move(files), tasks), {}, {}};
    auto [instr, db] = instrument(out.built.project, out.built.model);
    out.instrumented = testutil::reload_instrumented(instr);
    out.db = std::move(db);
    return out;
}

TestStep set_input(const std::string& var, Value v) {
    TestStep s;
    s.kind = TestStep::Kind::SetInput;
    s.var = var;
    s.value = v;
    return s;
}

TestStep wait_cycles(std::int64_t n) {
    TestStep s;
    s.kind = TestStep::Kind::WaitCycles;
    s.n = n;
    return s;
}

TestStep expect(const std::string& var, Value v) {
    TestStep s;
    s.kind = TestStep::Kind::Expect;
    s.var = var;
    s.value = v;
    return s;
}

} // namespace

TEST_CASE("single expect on a default value passes") {
    Prepared p = prepare({{"p.st", "PROGRAM P\nVAR_OUTPUT q : BOOL; END_VAR\nEND_PROGRAM\n"}});
    TestCase t;
    t.id = "t1";
    t.steps = {wait_cycles(1), expect("P.q", Value::make_bool(false))};
    auto [report, traces] = run_suite(p.instrumented, p.db, {t});
    REQUIRE(report.tests.size() == 1);
    CHECK(report.tests[0].passed);
    CHECK(report.tests[0].duration_ms == 10);
    REQUIRE(traces.size() == 1);
    CHECK(traces[0].duration_ms == 10);
}

TEST_CASE("failing expect skips remaining steps but still saves the trace") {
    Prepared p = prepare({{"p.st",
                           "PROGRAM P\nVAR_INPUT i : BOOL; END_VAR\n"
                           "VAR_OUTPUT q : BOOL; n : DINT; END_VAR\n"
                           "q := i;\nn := n + 1;\nEND_PROGRAM\n"}});
    TestCase t;
    t.id = "f1";
    t.steps = {wait_cycles(3), expect("P.q", Value::make_bool(true)), // fails: i never set
               wait_cycles(100)};
    auto [report, traces] = run_suite(p.instrumented, p.db, {t});
    REQUIRE(report.tests.size() == 1);
    CHECK_FALSE(report.tests[0].passed);
    CHECK(report.tests[0].failed_step == 1);
    CHECK(report.tests[0].duration_ms == 30); // the trailing wait never ran
    REQUIRE(traces.size() == 1);
    CHECK(traces[0].points[0].count == 3);
}

TEST_CASE("manual steps idle for the acknowledge delay, then apply effects") {
    Prepared p = prepare({{"p.st",
                           "PROGRAM P\nVAR_INPUT go : BOOL; END_VAR\n"
                           "VAR_OUTPUT n : DINT; END_VAR\n"
                           "IF go THEN n := n + 1; END_IF;\nEND_PROGRAM\n"}});
    TestCase t;
    t.id = "m1";
    TestStep manual;
    manual.kind = TestStep::Kind::Manual;
    manual.prompt = "press go";
    manual.effects = {{"go", Value::make_bool(true)}};
    manual.ack_delay_ms = 50;
    t.steps = {manual, wait_cycles(4), expect("P.n", Value::make_int(4))};
    auto [report, traces] = run_suite(p.instrumented, p.db, {t});
    CHECK(report.tests[0].passed);
    CHECK(report.tests[0].duration_ms == 90);
}

TEST_CASE("expect on an unknown variable is a step error") {
    Prepared p = prepare({{"p.st", "PROGRAM P\nVAR_OUTPUT q : BOOL; END_VAR\nEND_PROGRAM\n"}});
    TestCase t;
    t.id = "e1";
    t.steps = {expect("P.nope", Value::make_bool(true))};
    try {
        run_suite(p.instrumented, p.db, {t});
        FAIL("expected StepError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StepError);
    }
}

TEST_CASE("reordering the suite leaves per-test traces bit-identical") {
    Prepared p = prepare({{"p.st",
                           "PROGRAM P\nVAR_INPUT i : BOOL; END_VAR\n"
                           "VAR_OUTPUT q : BOOL; n : DINT; END_VAR\n"
                           "q := i;\nIF i THEN n := n + 1; END_IF;\nEND_PROGRAM\n"}});
    TestCase a;
    a.id = "a";
    a.steps = {set_input("i", Value::make_bool(true)), wait_cycles(7)};
    TestCase b;
    b.id = "b";
    b.steps = {wait_cycles(3), set_input("i", Value::make_bool(true)), wait_cycles(2)};

    std::vector<TestCase> fwd{a, b};
    std::vector<TestCase> rev{b, a};

    auto [r1, t1] = run_suite(p.instrumented, p.db, fwd);
    auto [r2, t2] = run_suite(p.instrumented, p.db, rev);
    REQUIRE(t1.size() == 2);
    REQUIRE(t2.size() == 2);
    auto find = [](const std::vector<ExecutionTrace>& ts, const std::string& id) {
        for (const ExecutionTrace& t : ts) {
            if (t.test_id == id) return trace_to_json(t);
        }
        return std::string();
    };
    CHECK(find(t1, "a") == find(t2, "a"));
    CHECK(find(t1, "b") == find(t2, "b"));
    for (const TestResult& r : r1.tests) {
        for (const TestResult& s : r2.tests) {
            if (r.id == s.id) {
                CHECK(r.passed == s.passed);
                CHECK(r.duration_ms == s.duration_ms);
            }
        }
    }
}

TEST_CASE("duplicate test ids are rejected") {
    Prepared p = prepare({{"p.st", "PROGRAM P\nEND_PROGRAM\n"}});
    TestCase t1, t2;
    t1.id = "x";
    t2.id = "x";
    CHECK_THROWS_AS(run_suite(p.instrumented, p.db, {std::move(t1), std::move(t2)}), Error);
}

TEST_CASE("suite and report JSON round-trip") {
    std::vector<TestCase> suite = load_suite(testutil::fixture_dir() + "/suite.json");
    REQUIRE(suite.size() == 14);
    CHECK(suite[10].id == "11");
    CHECK(suite[10].steps.size() >= 7);
    std::string again = suite_to_json(suite);
    std::vector<TestCase> reparsed = suite_from_json(again);
    CHECK(suite_to_json(reparsed) == again);

    TestReport report;
    report.version_id = 42;
    report.passed = 1;
    report.tests.push_back(TestResult{"11", true, -1, 40000});
    TestReport parsed = report_from_json(report_to_json(report));
    CHECK(parsed.version_id == 42);
    CHECK(parsed.tests[0].duration_ms == 40000);
    CHECK(parsed.tests[0].passed);
}
