#pragma once

#include "stprio/ast.hpp"

#include <string>
#include <vector>

namespace stprio {

// Basic block: maximal straight-line statement run. Control statement
// headers never appear inside a block; they become decisions.
struct CfgBlock {
    int index = -1;
    std::vector<int> stmt_ids;
    std::vector<const Stmt*> stmts;
    int insert_pos = 0; // where instrumentation text goes
    SourceSpan span;    // covered statement text; empty blocks have begin==end
};

struct CfgEdge {
    int from = -1;
    int to = -1;
    std::string label; // normalized condition text, "ELSE", or "" (unconditional)
    bool conditional = false;
    bool back_edge = false;
};

// One branching construct: IF/CASE header or loop test.
struct CfgDecision {
    int source = -1;
    std::vector<int> targets; // arm entry blocks; join when an ELSE arm is absent
    std::string cond_text;    // normalized header text
    int stmt_id = -1;
};

struct Cfg {
    int entry = 0;
    std::vector<CfgBlock> blocks;
    std::vector<CfgEdge> edges;
    std::vector<CfgDecision> decisions;
};

// Builds the CFG of an ST body and annotates the statements in place with
// block ids (arm blocks, join/header/body blocks) for the interpreter.
Cfg build_cfg(PouAst& pou);

// Same for one SFC action body.
Cfg build_action_cfg(PouAst& pou, SfcAction& action);

} // namespace stprio
