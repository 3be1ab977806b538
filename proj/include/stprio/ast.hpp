#pragma once

#include "stprio/diag.hpp"
#include "stprio/value.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace stprio {

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;
struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

// Resolution annotation for a variable reference or assignment target.
struct VarUse {
    enum class Space {
        Unresolved,
        Local,            // POU input/output/local scalar
        Global,           // global scalar
        GlobalStructField,
        InstanceField,    // FB instance input/output field
        FunctionReturn,   // the function's own name inside a FUNCTION body
    };
    Space space = Space::Unresolved;
    std::string qname;      // canonical analysis name, e.g. "FB_Gripper.SqTimer.Q"
    int slot = -1;          // frame or global slot
    int instance_slot = -1; // local slot holding the instance (InstanceField)
    int field_slot = -1;    // slot within the instance frame or struct
};

struct Expr {
    enum class Kind { Literal, VarRef, Unary, Binary, Call };
    enum class Op { Or, Xor, And, Not, Eq, Neq, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, Mod, Neg };

    Kind kind = Kind::Literal;
    SourceSpan span;
    Value lit;
    std::vector<std::string> path; // VarRef: identifier path (length 1 or 2)
    VarUse use;
    std::string callee; // Call
    int callee_index = -1;
    Op op = Op::Or;
    std::vector<ExprPtr> args;          // operands or call arguments
    std::vector<std::string> arg_names; // per argument; empty string = positional
};

struct StList {
    std::vector<StmtPtr> stmts;
};

struct ParamAssign {
    std::string name;
    bool is_output = false; // name => target
    ExprPtr value;          // for outputs this is a VarRef target
    SourceSpan span;
};

struct IfArm {
    ExprPtr cond; // null for the ELSE arm
    StList body;
    int body_pos = 0; // source offset just after THEN/ELSE
    int block = -1;   // CFG annotation
};

struct CaseArm {
    std::vector<std::int64_t> labels;
    std::string label_text;
    bool is_else = false;
    StList body;
    int body_pos = 0;
    int block = -1;
};

struct Stmt {
    enum class Kind { Assign, FbCall, If, Case, While, For, Return };

    Kind kind = Kind::Return;
    int id = -1;
    SourceSpan span;

    // Assign
    std::vector<std::string> target;
    VarUse target_use;
    ExprPtr rhs;

    // FbCall
    std::string instance;
    VarUse instance_use;
    std::vector<ParamAssign> params;

    // If / Case
    std::vector<IfArm> arms;
    ExprPtr selector;
    std::vector<CaseArm> case_arms;

    // While / For
    ExprPtr cond;
    StList body;
    int body_pos = 0;
    std::string for_var;
    VarUse for_var_use;
    ExprPtr for_from;
    ExprPtr for_to;
    ExprPtr for_by; // optional

    // Span of the full decision header text (conditions/selector/for header).
    int decision_begin = -1;
    int decision_end = -1;

    // CFG annotations, filled by build_cfg.
    int join_block = -1;
    int header_block = -1;
    int body_block = -1;
};

struct VarDecl {
    std::string name;
    VarType type = VarType::Bool;
    bool is_instance = false;
    std::string fb_type;   // when is_instance
    bool is_struct = false;
    std::string struct_type;
    ExprPtr init; // literal initializer or null
    SourceSpan span;
};

struct SfcStep {
    std::string name;
    bool is_initial = false;
    std::vector<std::string> actions;
    SourceSpan span;
};

struct SfcTransition {
    std::string name;
    std::vector<std::string> from;
    std::vector<std::string> to;
    ExprPtr cond;
    SourceSpan span;
};

struct SfcAction {
    std::string name;
    StList body;
    int body_pos = 0;
    int end_pos = 0;
    SourceSpan span;
};

struct SfcBody {
    std::vector<SfcStep> steps;
    std::vector<SfcTransition> transitions;
    std::vector<SfcAction> actions;
};

enum class PouKind { Program, FunctionBlock, Function };

struct PouAst {
    PouKind kind = PouKind::Program;
    std::string name;
    VarType return_type = VarType::Bool; // Function only
    std::vector<VarDecl> inputs;
    std::vector<VarDecl> outputs;
    std::vector<VarDecl> locals; // instances included (is_instance)
    bool is_sfc = false;
    StList body;
    SfcBody sfc;

    std::string file;
    std::string source;  // full file text
    int body_pos = 0;    // offset where the body region starts
    int end_pos = 0;     // offset of the closing END_* keyword
    int next_stmt_id = 0;
};

struct StructField {
    std::string name;
    VarType type = VarType::Bool;
};

struct StructType {
    std::string name;
    std::vector<StructField> fields;
};

struct GlobalDecl {
    std::string name;
    bool is_struct = false;
    VarType type = VarType::Bool;
    std::string struct_type;
    ExprPtr init;
    SourceSpan span;
};

struct TaskDecl {
    std::string name;
    std::string root;
    int cycle_ms = 10;
};

struct ProjectAst {
    std::vector<PouAst> pous; // document order
    std::vector<StructType> structs;
    std::vector<GlobalDecl> globals;
    std::vector<TaskDecl> tasks;
    std::string globals_file;
    std::string globals_source;
    std::string root_dir;
};

const char* pou_kind_name(PouKind kind);

// Pretty printer; parse(render(ast)) yields an AST identical modulo spans.
std::string render_pou(const PouAst& pou);
std::string render_stmt(const Stmt& stmt, int indent = 0);
std::string render_expr(const Expr& expr);

// Structural AST equality ignoring source spans and annotations.
bool ast_equal(const PouAst& a, const PouAst& b);

} // namespace stprio
