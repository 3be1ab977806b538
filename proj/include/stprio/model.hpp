#pragma once

#include "stprio/cfg.hpp"
#include "stprio/checksum.hpp"
#include "stprio/resolve.hpp"

#include <map>
#include <string>
#include <vector>

namespace stprio {

enum class NodeKind {
    Task,
    Program,
    FunctionBlock,
    Function,
    Action,
    SfcStep,
    SfcTransition,
    BasicBlock,
    GlobalVariable,
};

const char* node_kind_name(NodeKind kind);

struct Node {
    int id = -1;
    NodeKind kind = NodeKind::Program;
    std::string qname; // dot-joined, unique across the project
    Checksum content_checksum = 0;
    std::string file;
    int span_begin = 0;
    int span_end = 0;
    std::string fb_type; // instance nodes: declared FB type
};

enum class EdgeKind { Calls, Reads, Writes, JumpsTo, SfcTransitionEdge, Contains };

const char* edge_kind_name(EdgeKind kind);

struct Edge {
    EdgeKind kind = EdgeKind::Contains;
    int source = -1;
    int target = -1;
    std::string label;
};

// ---- analysis annex ----
// Statement-level facts attached to basic blocks; fuels change impact
// analysis and diffing. References resolve to canonical variable qnames.

struct StmtSummary {
    enum class Kind { Assign, Call, Return };
    Kind kind = Kind::Return;
    int stmt_id = -1;
    std::string text_norm;
    std::string write; // assignment target
    std::vector<std::string> reads;

    struct CallParam {
        std::string formal;
        bool is_output = false;
        std::vector<std::string> reads; // for inputs: argument reads
        std::string out_target;         // for outputs: caller-side target
    };
    struct CallInfo {
        std::string callee_qname; // instance path or function name
        bool is_function = false;
        int callee_pou = -1; // -1 = builtin TON
        std::string type_name;
        std::vector<CallParam> params;
    };
    std::vector<CallInfo> calls;
    std::vector<std::string> extra_writes; // output-parameter targets
};

struct BlockInfo {
    std::string qname; // "<parent>.bb<N>"
    int index = -1;    // within parent
    int node_id = -1;
    std::string text_norm;
    std::vector<StmtSummary> stmts;
    int insert_pos = 0;
    SourceSpan span;
};

struct DecisionInfo {
    int source = -1;
    std::vector<int> targets;
    std::string cond_text;
    std::vector<std::string> reads;
};

// One instrumentable: a POU main body or an SFC action.
struct ParentInfo {
    std::string qname;
    int pou_index = -1;
    int action_index = -1; // -1 = main body
    std::vector<BlockInfo> blocks;
    std::vector<DecisionInfo> decisions;
    std::vector<CfgEdge> shape_edges; // for structural comparison
};

struct TransitionInfo {
    std::string qname;
    std::string name;
    std::vector<std::string> from_steps;
    std::vector<std::string> to_steps;
    std::string cond_text;
    std::vector<std::string> reads;
};

struct StepInfo {
    std::string name;
    bool is_initial = false;
    std::vector<std::string> actions;
    Checksum decl_checksum = 0;
};

struct PouModelInfo {
    std::string name;
    PouKind kind = PouKind::Program;
    bool is_sfc = false;
    Checksum source_checksum = 0;
    std::vector<int> parents; // indices into DependencyModel::parents
    std::vector<TransitionInfo> transitions;
    std::vector<StepInfo> steps;
    std::vector<std::string> output_vars;
};

struct EntryPoint {
    std::string task;
    std::string root_pou;
    int cycle_ms = 10;
};

// Directed dependency graph over project entities plus the analysis annex.
// Immutable after construction; the annex borrows nothing from the AST.
struct DependencyModel {
    Checksum version_id = 0;
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::map<std::string, int> node_by_qname;
    std::vector<ParentInfo> parents;
    std::map<std::string, int> parent_by_qname;
    std::vector<PouModelInfo> pous;
    std::map<std::string, int> pou_info_by_name;
    std::vector<EntryPoint> entries;

    const Node* find(const std::string& qname) const;
    int basic_block_count() const;
};

// Builds the model: one node per task, POU, action, SFC step/transition,
// basic block and global variable, with Calls/Reads/Writes/JumpsTo/
// SfcTransitionEdge/Contains edges. Deterministic document order.
// Annotates the project's statements with CFG block ids as a side effect.
DependencyModel build_dependency_model(ResolvedProject& project);

// Deterministic JSON export (nodes and edges sorted by qname).
std::string model_to_json(const DependencyModel& model);

} // namespace stprio
