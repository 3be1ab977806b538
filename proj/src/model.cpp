#include "stprio/model.hpp"

#include "stprio/lexer.hpp"

#include "json.hpp"

#include <algorithm>

namespace stprio {

namespace {

using nlohmann::json;

class ModelBuilder {
public:
    explicit ModelBuilder(ResolvedProject& rp) : rp_(rp) {}

    DependencyModel run() {
        model_.version_id = rp_.version_id;
        add_globals();
        add_tasks_placeholder();
        for (std::size_t i = 0; i < rp_.ast.pous.size(); ++i) {
            add_pou(static_cast<int>(i));
        }
        link_tasks();
        link_instances();
        link_data_flow();
        return std::move(model_);
    }

private:
    ResolvedProject& rp_;
    DependencyModel model_;
    std::vector<std::pair<std::string, std::string>> pending_task_edges_;
    std::vector<std::pair<std::string, std::string>> pending_instance_edges_;

    int add_node(NodeKind kind, const std::string& qname, Checksum sum, const std::string& file,
                 int begin, int end, const std::string& fb_type = "") {
        Node n;
        n.id = static_cast<int>(model_.nodes.size());
        n.kind = kind;
        n.qname = qname;
        n.content_checksum = sum;
        n.file = file;
        n.span_begin = begin;
        n.span_end = end;
        n.fb_type = fb_type;
        if (!model_.node_by_qname.emplace(qname, n.id).second) {
            fail(ErrorCode::DuplicateName, "qualified name '" + qname + "' is not unique");
        }
        model_.nodes.push_back(std::move(n));
        return static_cast<int>(model_.nodes.size()) - 1;
    }

    void add_edge(EdgeKind kind, int source, int target, std::string label = "") {
        model_.edges.push_back(Edge{kind, source, target, std::move(label)});
    }

    int node_id(const std::string& qname) const { return model_.node_by_qname.at(qname); }

    void add_globals() {
        // One node per declared global (struct globals appear as one node).
        for (const GlobalDecl& g : rp_.ast.globals) {
            std::string text = rp_.ast.globals_source.substr(
                static_cast<std::size_t>(g.span.begin),
                static_cast<std::size_t>(g.span.end - g.span.begin));
            add_node(NodeKind::GlobalVariable, g.name, checksum(text), rp_.ast.globals_file,
                     g.span.begin, g.span.end);
        }
    }

    void add_tasks_placeholder() {
        for (const ResolvedProject::Task& t : rp_.tasks) {
            std::string text = t.name + "|" + rp_.pou(t.root_pou).name + "|" +
                               std::to_string(t.cycle_ms);
            add_node(NodeKind::Task, t.name, checksum_raw(text), "tasks.cfg", 0, 0);
            pending_task_edges_.emplace_back(t.name, rp_.pou(t.root_pou).name);
            model_.entries.push_back(EntryPoint{t.name, rp_.pou(t.root_pou).name, t.cycle_ms});
        }
    }

    void link_tasks() {
        for (const auto& [task, root] : pending_task_edges_) {
            add_edge(EdgeKind::Calls, node_id(task), node_id(root));
        }
    }

    void link_instances() {
        for (const auto& [inst, type] : pending_instance_edges_) {
            add_edge(EdgeKind::Calls, node_id(inst), node_id(type), "type");
        }
    }

    // Reads/Writes/Calls edges; emitted once every node exists.
    void link_data_flow() {
        auto global_node = [&](const std::string& qname) -> int {
            auto it = model_.node_by_qname.find(qname);
            if (it == model_.node_by_qname.end()) return -1;
            // Struct-global fields map onto the owning global's node.
            if (model_.nodes[static_cast<std::size_t>(it->second)].kind !=
                NodeKind::GlobalVariable) {
                return -1;
            }
            return it->second;
        };
        for (const ParentInfo& parent : model_.parents) {
            for (const BlockInfo& b : parent.blocks) {
                for (const StmtSummary& s : b.stmts) {
                    for (const std::string& r : s.reads) {
                        int g = global_node(r);
                        if (g >= 0) add_edge(EdgeKind::Reads, b.node_id, g);
                    }
                    auto add_write_edge = [&](const std::string& w) {
                        int g = global_node(w);
                        if (g >= 0) add_edge(EdgeKind::Writes, b.node_id, g);
                    };
                    if (!s.write.empty()) add_write_edge(s.write);
                    for (const std::string& w : s.extra_writes) add_write_edge(w);
                    for (const StmtSummary::CallInfo& c : s.calls) {
                        auto it = model_.node_by_qname.find(c.callee_qname);
                        if (it != model_.node_by_qname.end()) {
                            add_edge(EdgeKind::Calls, b.node_id, it->second);
                        }
                    }
                }
            }
            for (const DecisionInfo& d : parent.decisions) {
                for (const std::string& r : d.reads) {
                    int g = global_node(r);
                    if (g >= 0) {
                        add_edge(EdgeKind::Reads,
                                 parent.blocks[static_cast<std::size_t>(d.source)].node_id, g);
                    }
                }
            }
        }
    }

    // ---- statement facts ----

    void collect_expr(const Expr& e, std::vector<std::string>& reads,
                      std::vector<StmtSummary::CallInfo>& calls) {
        switch (e.kind) {
        case Expr::Kind::Literal:
            break;
        case Expr::Kind::VarRef:
            reads.push_back(e.use.qname);
            break;
        case Expr::Kind::Unary:
        case Expr::Kind::Binary:
            for (const ExprPtr& a : e.args) collect_expr(*a, reads, calls);
            break;
        case Expr::Kind::Call: {
            if (e.callee_index == kCalleeNow) return;
            StmtSummary::CallInfo info;
            info.callee_qname = e.callee;
            info.is_function = true;
            info.callee_pou = e.callee_index;
            info.type_name = e.callee;
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                StmtSummary::CallParam p;
                p.formal = e.arg_names[i];
                collect_expr(*e.args[i], p.reads, calls);
                for (const std::string& r : p.reads) reads.push_back(r);
                info.params.push_back(std::move(p));
            }
            // the call's value depends on the function's return variable
            reads.push_back(e.callee + "." + e.callee);
            calls.push_back(std::move(info));
            break;
        }
        }
    }

    StmtSummary summarize_stmt(const PouAst& pou, const Stmt& st) {
        StmtSummary s;
        s.stmt_id = st.id;
        s.text_norm = normalize_tokens(pou.source.substr(
            static_cast<std::size_t>(st.span.begin),
            static_cast<std::size_t>(st.span.end - st.span.begin)));
        switch (st.kind) {
        case Stmt::Kind::Assign:
            s.kind = StmtSummary::Kind::Assign;
            s.write = st.target_use.qname;
            collect_expr(*st.rhs, s.reads, s.calls);
            break;
        case Stmt::Kind::FbCall: {
            s.kind = StmtSummary::Kind::Call;
            const PouLayout& layout = rp_.layouts[static_cast<std::size_t>(find_pou_of(pou))];
            const PouLayout::Instance& inst =
                layout.instances[static_cast<std::size_t>(st.instance_use.instance_slot)];
            StmtSummary::CallInfo info;
            info.callee_qname = st.instance_use.qname;
            info.is_function = false;
            info.callee_pou = inst.pou_index;
            info.type_name = inst.type_name;
            for (const ParamAssign& pa : st.params) {
                StmtSummary::CallParam p;
                p.formal = pa.name;
                p.is_output = pa.is_output;
                if (pa.is_output) {
                    p.out_target = pa.value->use.qname;
                    s.extra_writes.push_back(p.out_target);
                    // copying an output reads the instance field
                    s.reads.push_back(info.callee_qname + "." + pa.name);
                } else {
                    collect_expr(*pa.value, p.reads, s.calls);
                    for (const std::string& r : p.reads) s.reads.push_back(r);
                }
                info.params.push_back(std::move(p));
            }
            s.calls.push_back(std::move(info));
            break;
        }
        case Stmt::Kind::Return:
            s.kind = StmtSummary::Kind::Return;
            break;
        default:
            fail(ErrorCode::Internal, "control statement cannot be summarized");
        }
        return s;
    }

    int find_pou_of(const PouAst& pou) const { return rp_.pou_index.at(pou.name); }

    void collect_decision_reads(const Stmt& st, std::vector<std::string>& reads) {
        std::vector<StmtSummary::CallInfo> calls;
        switch (st.kind) {
        case Stmt::Kind::If:
            for (const IfArm& arm : st.arms) {
                if (arm.cond) collect_expr(*arm.cond, reads, calls);
            }
            break;
        case Stmt::Kind::Case:
            collect_expr(*st.selector, reads, calls);
            break;
        case Stmt::Kind::While:
            collect_expr(*st.cond, reads, calls);
            break;
        case Stmt::Kind::For:
            collect_expr(*st.for_from, reads, calls);
            collect_expr(*st.for_to, reads, calls);
            if (st.for_by) collect_expr(*st.for_by, reads, calls);
            reads.push_back(st.for_var_use.qname);
            break;
        default:
            break;
        }
    }

    const Stmt* find_stmt(const StList& list, int id) const {
        for (const StmtPtr& st : list.stmts) {
            if (st->id == id) return st.get();
            const Stmt* found = nullptr;
            switch (st->kind) {
            case Stmt::Kind::If:
                for (const IfArm& arm : st->arms) {
                    if ((found = find_stmt(arm.body, id))) return found;
                }
                break;
            case Stmt::Kind::Case:
                for (const CaseArm& arm : st->case_arms) {
                    if ((found = find_stmt(arm.body, id))) return found;
                }
                break;
            case Stmt::Kind::While:
            case Stmt::Kind::For:
                if ((found = find_stmt(st->body, id))) return found;
                break;
            default:
                break;
            }
        }
        return nullptr;
    }

    // Adds block nodes, JumpsTo edges and the annex entry for one body.
    int add_parent(PouAst& pou, const std::string& parent_qname, Cfg cfg, StList& body) {
        ParentInfo parent;
        parent.qname = parent_qname;
        parent.pou_index = find_pou_of(pou);
        parent.action_index = -1;
        parent.shape_edges = cfg.edges;

        int parent_node = node_id(parent_qname);
        for (const CfgBlock& b : cfg.blocks) {
            BlockInfo info;
            info.index = b.index;
            info.qname = parent_qname + ".bb" + std::to_string(b.index);
            info.insert_pos = b.insert_pos;
            info.span = b.span;
            std::string text = pou.source.substr(
                static_cast<std::size_t>(b.span.begin),
                static_cast<std::size_t>(b.span.end - b.span.begin));
            info.text_norm = normalize_tokens(text);
            for (const Stmt* st : b.stmts) {
                info.stmts.push_back(summarize_stmt(pou, *st));
            }
            info.node_id = add_node(NodeKind::BasicBlock, info.qname, checksum_raw(info.text_norm),
                                    pou.file, b.span.begin, b.span.end);
            add_edge(EdgeKind::Contains, parent_node, info.node_id);
            parent.blocks.push_back(std::move(info));
        }
        for (const CfgEdge& e : cfg.edges) {
            add_edge(EdgeKind::JumpsTo, parent.blocks[static_cast<std::size_t>(e.from)].node_id,
                     parent.blocks[static_cast<std::size_t>(e.to)].node_id, e.label);
        }
        for (const CfgDecision& d : cfg.decisions) {
            DecisionInfo info;
            info.source = d.source;
            info.targets = d.targets;
            info.cond_text = d.cond_text;
            if (const Stmt* st = find_stmt(body, d.stmt_id)) {
                collect_decision_reads(*st, info.reads);
            }
            parent.decisions.push_back(std::move(info));
        }

        model_.parent_by_qname.emplace(parent.qname, static_cast<int>(model_.parents.size()));
        model_.parents.push_back(std::move(parent));
        return static_cast<int>(model_.parents.size()) - 1;
    }

    void add_pou(int pou_i) {
        PouAst& pou = rp_.ast.pous[static_cast<std::size_t>(pou_i)];
        const PouLayout& layout = rp_.layouts[static_cast<std::size_t>(pou_i)];
        NodeKind kind = pou.kind == PouKind::Program ? NodeKind::Program
                        : pou.kind == PouKind::FunctionBlock ? NodeKind::FunctionBlock
                                                             : NodeKind::Function;
        int pou_node = add_node(kind, pou.name, checksum(pou.source), pou.file, 0,
                                static_cast<int>(pou.source.size()));

        PouModelInfo info;
        info.name = pou.name;
        info.kind = pou.kind;
        info.is_sfc = pou.is_sfc;
        info.source_checksum = checksum(pou.source);
        for (const PouLayout::Var& v : layout.vars) {
            if (v.role == PouLayout::Var::Role::Output) info.output_vars.push_back(v.name);
        }

        // FB instance nodes under the declaring POU.
        for (const PouLayout::Instance& inst : layout.instances) {
            std::string qname = pou.name + "." + inst.name;
            int inst_node = add_node(NodeKind::FunctionBlock, qname,
                                     checksum_raw(inst.name + ":" + inst.type_name), pou.file, 0,
                                     0, inst.type_name);
            add_edge(EdgeKind::Contains, pou_node, inst_node);
            if (inst.pou_index >= 0) {
                pending_instance_edges_.emplace_back(qname, inst.type_name);
            }
        }

        if (pou.is_sfc) {
            for (const SfcStep& step : pou.sfc.steps) {
                std::string text = pou.source.substr(
                    static_cast<std::size_t>(step.span.begin),
                    static_cast<std::size_t>(step.span.end - step.span.begin));
                int step_node = add_node(NodeKind::SfcStep, pou.name + "." + step.name,
                                         checksum(text), pou.file, step.span.begin,
                                         step.span.end);
                add_edge(EdgeKind::Contains, pou_node, step_node);
                StepInfo si;
                si.name = step.name;
                si.is_initial = step.is_initial;
                si.actions = step.actions;
                si.decl_checksum = checksum(text);
                info.steps.push_back(std::move(si));
            }
            for (const SfcTransition& tr : pou.sfc.transitions) {
                std::string text = pou.source.substr(
                    static_cast<std::size_t>(tr.span.begin),
                    static_cast<std::size_t>(tr.span.end - tr.span.begin));
                int tr_node = add_node(NodeKind::SfcTransition, pou.name + "." + tr.name,
                                       checksum(text), pou.file, tr.span.begin, tr.span.end);
                add_edge(EdgeKind::Contains, pou_node, tr_node);
                for (const std::string& s : tr.from) {
                    add_edge(EdgeKind::SfcTransitionEdge, node_id(pou.name + "." + s), tr_node);
                }
                for (const std::string& s : tr.to) {
                    add_edge(EdgeKind::SfcTransitionEdge, tr_node, node_id(pou.name + "." + s));
                }
                TransitionInfo ti;
                ti.qname = pou.name + "." + tr.name;
                ti.name = tr.name;
                ti.from_steps = tr.from;
                ti.to_steps = tr.to;
                ti.cond_text = normalize_tokens(pou.source.substr(
                    static_cast<std::size_t>(tr.cond->span.begin),
                    static_cast<std::size_t>(tr.cond->span.end - tr.cond->span.begin)));
                std::vector<StmtSummary::CallInfo> calls;
                collect_expr(*tr.cond, ti.reads, calls);
                info.transitions.push_back(std::move(ti));
            }
            for (SfcAction& act : pou.sfc.actions) {
                std::string text = pou.source.substr(
                    static_cast<std::size_t>(act.body_pos),
                    static_cast<std::size_t>(act.end_pos - act.body_pos));
                std::string qname = pou.name + "." + act.name;
                int act_node = add_node(NodeKind::Action, qname, checksum(text), pou.file,
                                        act.span.begin, act.span.end);
                add_edge(EdgeKind::Contains, pou_node, act_node);
                Cfg cfg = build_action_cfg(pou, act);
                int p = add_parent(pou, qname, std::move(cfg), act.body);
                model_.parents[static_cast<std::size_t>(p)].action_index =
                    static_cast<int>(&act - pou.sfc.actions.data());
                info.parents.push_back(p);
            }
        } else {
            Cfg cfg = build_cfg(pou);
            info.parents.push_back(add_parent(pou, pou.name, std::move(cfg), pou.body));
        }

        model_.pou_info_by_name.emplace(info.name, static_cast<int>(model_.pous.size()));
        model_.pous.push_back(std::move(info));
    }
};

} // namespace

const char* node_kind_name(NodeKind kind) {
    switch (kind) {
    case NodeKind::Task: return "Task";
    case NodeKind::Program: return "Program";
    case NodeKind::FunctionBlock: return "FunctionBlock";
    case NodeKind::Function: return "Function";
    case NodeKind::Action: return "Action";
    case NodeKind::SfcStep: return "SfcStep";
    case NodeKind::SfcTransition: return "SfcTransition";
    case NodeKind::BasicBlock: return "BasicBlock";
    case NodeKind::GlobalVariable: return "GlobalVariable";
    }
    return "?";
}

const char* edge_kind_name(EdgeKind kind) {
    switch (kind) {
    case EdgeKind::Calls: return "Calls";
    case EdgeKind::Reads: return "Reads";
    case EdgeKind::Writes: return "Writes";
    case EdgeKind::JumpsTo: return "JumpsTo";
    case EdgeKind::SfcTransitionEdge: return "SfcTransitionEdge";
    case EdgeKind::Contains: return "Contains";
    }
    return "?";
}

const Node* DependencyModel::find(const std::string& qname) const {
    auto it = node_by_qname.find(qname);
    return it == node_by_qname.end() ? nullptr : &nodes[static_cast<std::size_t>(it->second)];
}

int DependencyModel::basic_block_count() const {
    int n = 0;
    for (const Node& node : nodes) {
        if (node.kind == NodeKind::BasicBlock) ++n;
    }
    return n;
}

DependencyModel build_dependency_model(ResolvedProject& project) {
    ModelBuilder b(project);
    return b.run();
}

std::string model_to_json(const DependencyModel& model) {
    json doc;
    doc["version_id"] = checksum_to_hex(model.version_id);
    json nodes = json::array();
    std::vector<const Node*> sorted;
    sorted.reserve(model.nodes.size());
    for (const Node& n : model.nodes) sorted.push_back(&n);
    std::sort(sorted.begin(), sorted.end(),
              [](const Node* a, const Node* b) { return a->qname < b->qname; });
    for (const Node* n : sorted) {
        json jn;
        jn["qname"] = n->qname;
        jn["kind"] = node_kind_name(n->kind);
        jn["checksum"] = checksum_to_hex(n->content_checksum);
        jn["file"] = n->file;
        jn["begin"] = n->span_begin;
        jn["end"] = n->span_end;
        if (!n->fb_type.empty()) jn["fb_type"] = n->fb_type;
        nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);

    struct EdgeRow {
        std::string kind, source, target, label;
    };
    std::vector<EdgeRow> rows;
    rows.reserve(model.edges.size());
    for (const Edge& e : model.edges) {
        rows.push_back(EdgeRow{edge_kind_name(e.kind),
                               model.nodes[static_cast<std::size_t>(e.source)].qname,
                               model.nodes[static_cast<std::size_t>(e.target)].qname, e.label});
    }
    std::sort(rows.begin(), rows.end(), [](const EdgeRow& a, const EdgeRow& b) {
        return std::tie(a.kind, a.source, a.target, a.label) <
               std::tie(b.kind, b.source, b.target, b.label);
    });
    json edges = json::array();
    for (const EdgeRow& r : rows) {
        json je;
        je["kind"] = r.kind;
        je["source"] = r.source;
        je["target"] = r.target;
        if (!r.label.empty()) je["label"] = r.label;
        edges.push_back(std::move(je));
    }
    doc["edges"] = std::move(edges);
    return doc.dump(2) + "\n";
}

} // namespace stprio
