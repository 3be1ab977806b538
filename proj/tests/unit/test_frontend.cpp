#include "doctest.h"

#include "stprio/cfg.hpp"
#include "stprio/checksum.hpp"
#include "stprio/lexer.hpp"
#include "stprio/parser.hpp"
#include "stprio/project.hpp"
#include "stprio/resolve.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace stprio;

namespace {

const Stmt& first_stmt(const PouAst& pou) { return *pou.body.stmts.at(0); }

PouAst parse_body(const std::string& body) {
    return parse_st("PROGRAM P\nVAR x : INT; y : INT; a : INT; c : BOOL; END_VAR\n" + body +
                    "\nEND_PROGRAM\n");
}

} // namespace

TEST_CASE("lexer strips comments and normalizes spacing") {
    CHECK(normalize_tokens("a := 1;") == normalize_tokens("a:=1; (* c *)"));
    CHECK(normalize_tokens("a := 1;") != normalize_tokens("a := 2;"));
    CHECK(normalize_tokens("(* outer (* inner *) still *) x") == "x");
    CHECK(normalize_tokens("x // trailing\n:= 1;") == "x := 1 ;");
}

TEST_CASE("checksum is whitespace and comment insensitive, token sensitive") {
    CHECK(checksum("a := 1;") == checksum("a:=1; (* c *)"));
    CHECK(checksum("a := 1;") != checksum("a := 2;"));
    CHECK(checksum("a := 1;") == checksum("a := 1;"));
    // equivalence refined only by token content
    CHECK(checksum("IF a THEN b := 1; END_IF") == checksum("if a then b := 1; end_if"));
}

TEST_CASE("time literals") {
    std::int64_t ms = 0;
    REQUIRE(parse_time_literal("T#1500ms", ms));
    CHECK(ms == 1500);
    REQUIRE(parse_time_literal("T#1m33s", ms));
    CHECK(ms == 93000);
    REQUIRE(parse_time_literal("T#9m47s", ms));
    CHECK(ms == 587000);
    REQUIRE(parse_time_literal("t#2s", ms));
    CHECK(ms == 2000);
    CHECK_FALSE(parse_time_literal("T#", ms));
    CHECK_FALSE(parse_time_literal("T#5x", ms));
}

TEST_CASE("parse assignment reads and writes") {
    PouAst pou = parse_body("x := y + 1;");
    ResolvedProject rp = resolve([&] {
        ProjectAst p;
        p.pous.push_back(std::move(pou));
        p.tasks.push_back(TaskDecl{"main", "P", 10});
        return p;
    }());
    const Stmt& st = first_stmt(rp.ast.pous[0]);
    CHECK(st.kind == Stmt::Kind::Assign);
    CHECK(st.target_use.qname == "P.x");
    CHECK(st.rhs->kind == Expr::Kind::Binary);
    CHECK(st.rhs->args[0]->use.qname == "P.y");
}

TEST_CASE("parse FB call with named parameters") {
    std::string src =
        "FUNCTION_BLOCK FB_G\n"
        "VAR SqTimer : TON; END_VAR\n"
        "SqTimer(IN := TRUE, PT := DelayNeedle);\n"
        "END_FUNCTION_BLOCK\n";
    PouAst pou = parse_st(src);
    REQUIRE(pou.body.stmts.size() == 1);
    const Stmt& st = *pou.body.stmts[0];
    CHECK(st.kind == Stmt::Kind::FbCall);
    CHECK(st.instance == "SqTimer");
    REQUIRE(st.params.size() == 2);
    CHECK(st.params[0].name == "IN");
    CHECK(st.params[1].name == "PT");
    CHECK(st.params[1].value->path == std::vector<std::string>{"DelayNeedle"});
}

TEST_CASE("parse decision reading instance output") {
    std::string src =
        "FUNCTION_BLOCK FB_G\n"
        "VAR_OUTPUT ok : BOOL; END_VAR\n"
        "VAR SqTimer : TON; END_VAR\n"
        "IF SqTimer.Q AND _SnsNdl THEN\n"
        "    ok := TRUE;\n"
        "ELSE\n"
        "    ok := FALSE;\n"
        "END_IF;\n"
        "END_FUNCTION_BLOCK\n";
    ProjectAst project;
    parse_globals("VAR_GLOBAL _SnsNdl : BOOL; END_VAR\n", "globals.st", project);
    project.pous.push_back(parse_st(src));
    project.pous.push_back(parse_st("PROGRAM P\nVAR G : FB_G; END_VAR\nG();\nEND_PROGRAM\n"));
    project.tasks.push_back(TaskDecl{"main", "P", 10});
    ResolvedProject rp = resolve(std::move(project));
    const Stmt& st = *rp.ast.pous[0].body.stmts[0];
    REQUIRE(st.kind == Stmt::Kind::If);
    const Expr& cond = *st.arms[0].cond;
    CHECK(cond.args[0]->use.qname == "FB_G.SqTimer.Q");
    CHECK(cond.args[1]->use.qname == "_SnsNdl");
}

TEST_CASE("parse error carries position") {
    try {
        parse_st("PROGRAM P\nx == 1;\nEND_PROGRAM\n", "bad.st");
        FAIL("expected SyntaxError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Syntax);
        CHECK(std::string(e.what()).find("bad.st:2") != std::string::npos);
    }
}

TEST_CASE("parse-print-parse round trip") {
    std::string src =
        "PROGRAM P\n"
        "VAR_INPUT go : BOOL; n : INT; END_VAR\n"
        "VAR_OUTPUT q : BOOL; END_VAR\n"
        "VAR i : INT; acc : DINT; t : TimeKeeper; END_VAR\n"
        "IF go AND n > 3 THEN\n"
        "    acc := 0;\n"
        "    FOR i := 1 TO n BY 2 DO\n"
        "        acc := acc + i;\n"
        "    END_FOR;\n"
        "ELSIF n = 0 THEN\n"
        "    q := FALSE;\n"
        "ELSE\n"
        "    WHILE i > 0 DO\n"
        "        i := i - 1;\n"
        "    END_WHILE;\n"
        "END_IF;\n"
        "CASE n OF\n"
        "1, 2:\n"
        "    q := TRUE;\n"
        "ELSE\n"
        "    q := FALSE;\n"
        "END_CASE;\n"
        "t(run := go);\n"
        "RETURN;\n"
        "END_PROGRAM\n";
    PouAst a = parse_st(src);
    PouAst b = parse_st(render_pou(a));
    CHECK(ast_equal(a, b));
}

TEST_CASE("sfc textual form round trip") {
    std::string src =
        "PROGRAM P\n"
        "VAR n : INT; END_VAR\n"
        "STEP S0 INITIAL\n"
        "    ACTION A0;\n"
        "END_STEP\n"
        "STEP S1\n"
        "    ACTION A1;\n"
        "END_STEP\n"
        "TRANSITION T0 FROM S0 TO S1 := n > 3;\n"
        "TRANSITION T1 FROM S1 TO S0 := n = 0;\n"
        "ACTION A0\n"
        "    n := n + 1;\n"
        "END_ACTION\n"
        "ACTION A1\n"
        "    n := 0;\n"
        "END_ACTION\n"
        "END_PROGRAM\n";
    PouAst a = parse_st(src);
    CHECK(a.is_sfc);
    CHECK(a.sfc.steps.size() == 2);
    CHECK(a.sfc.transitions.size() == 2);
    PouAst b = parse_st(render_pou(a));
    CHECK(ast_equal(a, b));
}

TEST_CASE("cfg of straight-line body is one block") {
    PouAst pou = parse_body("x := 1;\ny := 2;\na := 3;");
    Cfg cfg = build_cfg(pou);
    CHECK(cfg.blocks.size() == 1);
    CHECK(cfg.decisions.empty());
    CHECK(cfg.blocks[0].stmt_ids.size() == 3);
}

TEST_CASE("cfg of IF without ELSE: entry, then, join") {
    PouAst pou = parse_body("IF c THEN x := 1; END_IF;\ny := 2;");
    Cfg cfg = build_cfg(pou);
    REQUIRE(cfg.blocks.size() == 3);
    // decisions: entry->then (c), entry->join (ELSE); plus then->join jump
    REQUIRE(cfg.decisions.size() == 1);
    CHECK(cfg.decisions[0].source == 0);
    CHECK(cfg.decisions[0].targets == std::vector<int>{1, 2});
    int conditional = 0, unconditional = 0;
    for (const CfgEdge& e : cfg.edges) {
        e.conditional ? ++conditional : ++unconditional;
    }
    CHECK(conditional == 2);
    CHECK(unconditional == 1);
    // join holds the trailing statement
    CHECK(cfg.blocks[2].stmt_ids.size() == 1);
}

TEST_CASE("cfg of IF/ELSE has four blocks") {
    PouAst pou = parse_body("IF c THEN a := 1; ELSE a := 2; END_IF;");
    Cfg cfg = build_cfg(pou);
    CHECK(cfg.blocks.size() == 4); // empty entry, then, else, empty join
    CHECK(cfg.blocks[0].stmt_ids.empty());
    CHECK(cfg.blocks[3].stmt_ids.empty());
    REQUIRE(cfg.decisions.size() == 1);
    CHECK(cfg.decisions[0].targets.size() == 2); // join not a decision target
}

TEST_CASE("cfg of WHILE has header with back edge") {
    PouAst pou = parse_body("x := 0;\nWHILE c DO x := x + 1; END_WHILE;");
    Cfg cfg = build_cfg(pou);
    REQUIRE(cfg.blocks.size() == 4); // pre, header, body, join
    bool back = false;
    for (const CfgEdge& e : cfg.edges) {
        if (e.back_edge) {
            back = true;
            CHECK(e.from == 2);
            CHECK(e.to == 1);
        }
    }
    CHECK(back);
}

TEST_CASE("every statement lands in exactly one block") {
    PouAst pou = parse_body(
        "x := 1;\n"
        "IF c THEN y := 1; ELSIF x > 2 THEN y := 2; ELSE y := 3; END_IF;\n"
        "CASE x OF 1: a := 1; ELSE a := 2; END_CASE;\n"
        "FOR x := 1 TO 3 DO a := a + 1; END_FOR;\n"
        "y := 9;");
    Cfg cfg = build_cfg(pou);
    std::map<int, int> seen;
    for (const CfgBlock& b : cfg.blocks) {
        for (int id : b.stmt_ids) seen[id] += 1;
    }
    // 8 simple statements in the body
    CHECK(seen.size() == 8);
    for (const auto& [id, n] : seen) {
        (void)id;
        CHECK(n == 1);
    }
}

TEST_CASE("load_project smallest valid project and error paths") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "stprio_min_proj";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "p.st") << "PROGRAM P\nEND_PROGRAM\n";
    std::ofstream(dir / "tasks.cfg") << "task main program P cycle_ms 10\n";

    ProjectAst project = load_project(dir.string());
    CHECK(project.pous.size() == 1);
    REQUIRE(project.tasks.size() == 1);
    CHECK(project.tasks[0].cycle_ms == 10);

    fs::remove(dir / "tasks.cfg");
    try {
        load_project(dir.string());
        FAIL("expected MissingTasksConfig");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingTasksConfig);
    }
    fs::remove_all(dir);
}

TEST_CASE("unknown type and unresolved reference are rejected") {
    {
        ProjectAst project;
        project.pous.push_back(parse_st("PROGRAM P\nVAR x : WORD; END_VAR\nEND_PROGRAM\n"));
        project.tasks.push_back(TaskDecl{"main", "P", 10});
        try {
            resolve(std::move(project));
            FAIL("expected UnknownType");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnknownType);
        }
    }
    ProjectAst project;
    project.pous.push_back(parse_st("PROGRAM P\nq := nope;\nEND_PROGRAM\n"));
    project.tasks.push_back(TaskDecl{"main", "P", 10});
    try {
        resolve(std::move(project));
        FAIL("expected UnresolvedReference");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnresolvedReference);
    }
}

TEST_CASE("checksum equivalence is stable under comment and spacing noise") {
    std::mt19937 rng(7);
    const std::vector<std::string> tokens = {"IF", "x", ":=", "1", ";", "THEN", "y",
                                             "+", "(", ")", "END_IF", "T#15ms", "2.5"};
    for (int round = 0; round < 50; ++round) {
        std::string clean, noisy;
        int len = 3 + static_cast<int>(rng() % 10);
        for (int k = 0; k < len; ++k) {
            const std::string& tok = tokens[rng() % tokens.size()];
            clean += tok + " ";
            if (rng() % 3 == 0) noisy += "(* noise " + std::to_string(rng() % 100) + " *)";
            noisy += std::string(1 + rng() % 4, ' ') + tok;
            if (rng() % 4 == 0) noisy += "\n";
        }
        CHECK(checksum(clean) == checksum(noisy));
        // any token change refines the class
        std::string mutated = clean + "z";
        CHECK(checksum(clean) != checksum(mutated));
    }
}
