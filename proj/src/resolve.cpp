#include "stprio/resolve.hpp"

namespace stprio {

namespace {

Value const_eval(const Expr& e) {
    if (e.kind == Expr::Kind::Literal) return e.lit;
    if (e.kind == Expr::Kind::Unary && e.op == Expr::Op::Neg &&
        e.args[0]->kind == Expr::Kind::Literal) {
        Value v = e.args[0]->lit;
        if (v.kind == Value::Kind::Int) return Value::make_int(-v.i);
        if (v.kind == Value::Kind::Real) return Value::make_real(-v.r);
    }
    fail(ErrorCode::Syntax, "initializer must be a literal");
}

class Resolver {
public:
    explicit Resolver(ProjectAst project) { rp_.ast = std::move(project); }

    ResolvedProject run() {
        index_pous();
        build_globals();
        for (std::size_t i = 0; i < rp_.ast.pous.size(); ++i) {
            build_layout(static_cast<int>(i));
        }
        for (std::size_t i = 0; i < rp_.ast.pous.size(); ++i) {
            resolve_pou(static_cast<int>(i));
        }
        resolve_tasks();
        rp_.version_id = project_version_id(rp_.ast);
        return std::move(rp_);
    }

private:
    ResolvedProject rp_;

    void index_pous() {
        for (std::size_t i = 0; i < rp_.ast.pous.size(); ++i) {
            const std::string& name = rp_.ast.pous[i].name;
            if (!rp_.pou_index.emplace(name, static_cast<int>(i)).second) {
                fail(ErrorCode::DuplicateName, "POU '" + name + "' declared twice");
            }
        }
    }

    void build_globals() {
        std::map<std::string, const StructType*> structs;
        for (const StructType& st : rp_.ast.structs) {
            if (!structs.emplace(st.name, &st).second) {
                fail(ErrorCode::DuplicateName, "struct type '" + st.name + "' declared twice");
            }
        }
        for (const GlobalDecl& g : rp_.ast.globals) {
            if (g.is_struct) {
                auto it = structs.find(g.struct_type);
                if (it == structs.end()) {
                    fail(ErrorCode::UnknownType,
                         "global '" + g.name + "' has unknown type '" + g.struct_type + "'");
                }
                rp_.struct_global_names.push_back(g.name);
                for (const StructField& f : it->second->fields) {
                    ResolvedProject::GlobalSlot slot;
                    slot.qname = g.name + "." + f.name;
                    slot.type = f.type;
                    slot.is_struct_field = true;
                    slot.struct_global = g.name;
                    add_global(slot);
                }
            } else {
                ResolvedProject::GlobalSlot slot;
                slot.qname = g.name;
                slot.type = g.type;
                if (g.init) {
                    slot.has_init = true;
                    slot.init = const_eval(*g.init);
                }
                add_global(slot);
            }
        }
    }

    void add_global(ResolvedProject::GlobalSlot slot) {
        int index = static_cast<int>(rp_.globals.size());
        if (!rp_.global_index.emplace(slot.qname, index).second) {
            fail(ErrorCode::DuplicateName, "global '" + slot.qname + "' declared twice");
        }
        rp_.globals.push_back(std::move(slot));
    }

    void build_layout(int pou_i) {
        const PouAst& pou = rp_.pou(pou_i);
        PouLayout layout;
        auto add_var = [&](const VarDecl& d, PouLayout::Var::Role role) {
            PouLayout::Var v;
            v.name = d.name;
            v.type = d.type;
            v.role = role;
            if (d.init) {
                v.has_init = true;
                v.init = const_eval(*d.init);
            }
            int index = static_cast<int>(layout.vars.size());
            if (!layout.var_index.emplace(v.name, index).second) {
                fail(ErrorCode::DuplicateName,
                     "variable '" + v.name + "' declared twice in " + pou.name);
            }
            layout.vars.push_back(std::move(v));
        };
        auto add_decls = [&](const std::vector<VarDecl>& decls, PouLayout::Var::Role role) {
            for (const VarDecl& d : decls) {
                if (d.is_instance) {
                    if (role != PouLayout::Var::Role::Local) {
                        fail(ErrorCode::UnknownType,
                             "FB instance '" + d.name + "' must be declared in VAR");
                    }
                    if (pou.kind == PouKind::Function) {
                        fail(ErrorCode::UnknownType,
                             "functions cannot declare FB instances (" + d.name + ")");
                    }
                    PouLayout::Instance inst;
                    inst.name = d.name;
                    inst.type_name = d.fb_type;
                    if (d.fb_type == "TON") {
                        inst.pou_index = -1;
                    } else {
                        auto it = rp_.pou_index.find(d.fb_type);
                        if (it == rp_.pou_index.end() ||
                            rp_.ast.pous[static_cast<std::size_t>(it->second)].kind !=
                                PouKind::FunctionBlock) {
                            fail(ErrorCode::UnknownType, "instance '" + d.name +
                                                             "' has unknown FB type '" +
                                                             d.fb_type + "'");
                        }
                        inst.pou_index = it->second;
                    }
                    int index = static_cast<int>(layout.instances.size());
                    if (layout.var_index.count(d.name) ||
                        !layout.instance_index.emplace(d.name, index).second) {
                        fail(ErrorCode::DuplicateName,
                             "name '" + d.name + "' declared twice in " + pou.name);
                    }
                    layout.instances.push_back(std::move(inst));
                } else {
                    add_var(d, role);
                }
            }
        };
        add_decls(pou.inputs, PouLayout::Var::Role::Input);
        add_decls(pou.outputs, PouLayout::Var::Role::Output);
        add_decls(pou.locals, PouLayout::Var::Role::Local);
        if (pou.kind == PouKind::Function) {
            VarDecl ret;
            ret.name = pou.name;
            ret.type = pou.return_type;
            add_var(ret, PouLayout::Var::Role::Return);
        }
        rp_.layouts.push_back(std::move(layout));
    }

    // ---- reference binding ----

    int pou_i_ = -1;

    const PouAst& cur_pou() const { return rp_.pou(pou_i_); }
    PouLayout& cur_layout() { return rp_.layouts[static_cast<std::size_t>(pou_i_)]; }

    [[noreturn]] void unresolved(const std::string& what) {
        fail(ErrorCode::UnresolvedReference, what + " in " + cur_pou().name);
    }

    // Field lookup inside an instance; inputs and outputs only.
    int instance_field(const PouLayout::Instance& inst, const std::string& field,
                       bool for_write) {
        if (inst.pou_index < 0) {
            if (field == "IN") return kTonIn;
            if (field == "PT") return kTonPt;
            if (!for_write && field == "Q") return kTonQ;
            if (!for_write && field == "ET") return kTonEt;
            unresolved("no member '" + field + "' on TON instance '" + inst.name + "'");
        }
        const PouLayout& callee = rp_.layouts[static_cast<std::size_t>(inst.pou_index)];
        auto it = callee.var_index.find(field);
        if (it == callee.var_index.end()) {
            unresolved("no member '" + field + "' on instance '" + inst.name + "'");
        }
        const PouLayout::Var& v = callee.vars[static_cast<std::size_t>(it->second)];
        if (v.role != PouLayout::Var::Role::Input && v.role != PouLayout::Var::Role::Output) {
            unresolved("member '" + field + "' of '" + inst.name + "' is not an interface variable");
        }
        return it->second;
    }

    VarUse bind_path(const std::vector<std::string>& path, bool for_write) {
        VarUse use;
        const PouLayout& layout = cur_layout();
        if (path.size() == 1) {
            const std::string& n = path[0];
            auto vit = layout.var_index.find(n);
            if (vit != layout.var_index.end()) {
                const PouLayout::Var& v = layout.vars[static_cast<std::size_t>(vit->second)];
                use.space = v.role == PouLayout::Var::Role::Return ? VarUse::Space::FunctionReturn
                                                                   : VarUse::Space::Local;
                use.slot = vit->second;
                use.qname = cur_pou().name + "." + n;
                return use;
            }
            auto git = rp_.global_index.find(n);
            if (git != rp_.global_index.end()) {
                use.space = VarUse::Space::Global;
                use.slot = git->second;
                use.qname = n;
                return use;
            }
            unresolved("unknown variable '" + n + "'");
        }
        if (path.size() == 2) {
            auto iit = layout.instance_index.find(path[0]);
            if (iit != layout.instance_index.end()) {
                if (for_write) {
                    unresolved("cannot assign to instance member '" + path[0] + "." + path[1] +
                               "'; pass it in a call instead");
                }
                const PouLayout::Instance& inst =
                    layout.instances[static_cast<std::size_t>(iit->second)];
                use.space = VarUse::Space::InstanceField;
                use.instance_slot = iit->second;
                use.field_slot = instance_field(inst, path[1], for_write);
                use.qname = cur_pou().name + "." + path[0] + "." + path[1];
                return use;
            }
            auto git = rp_.global_index.find(path[0] + "." + path[1]);
            if (git != rp_.global_index.end()) {
                use.space = VarUse::Space::GlobalStructField;
                use.slot = git->second;
                use.qname = path[0] + "." + path[1];
                return use;
            }
            unresolved("unknown reference '" + path[0] + "." + path[1] + "'");
        }
        unresolved("nested member path '" + path[0] + "....' is unsupported");
    }

    void resolve_expr(Expr& e) {
        switch (e.kind) {
        case Expr::Kind::Literal:
            break;
        case Expr::Kind::VarRef:
            e.use = bind_path(e.path, false);
            break;
        case Expr::Kind::Unary:
        case Expr::Kind::Binary:
            for (ExprPtr& a : e.args) resolve_expr(*a);
            break;
        case Expr::Kind::Call: {
            if (e.callee == "__NOW") {
                if (!e.args.empty()) unresolved("__NOW() takes no arguments");
                e.callee_index = kCalleeNow;
                return;
            }
            auto it = rp_.pou_index.find(e.callee);
            if (it == rp_.pou_index.end() ||
                rp_.ast.pous[static_cast<std::size_t>(it->second)].kind != PouKind::Function) {
                unresolved("call of unknown function '" + e.callee + "'");
            }
            e.callee_index = it->second;
            const PouLayout& callee = rp_.layouts[static_cast<std::size_t>(it->second)];
            std::size_t positional = 0;
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                resolve_expr(*e.args[i]);
                if (e.arg_names[i].empty()) {
                    // positional arguments bind inputs in declaration order
                    std::size_t k = 0;
                    bool ok = false;
                    for (const PouLayout::Var& v : callee.vars) {
                        if (v.role != PouLayout::Var::Role::Input) continue;
                        if (k == positional) {
                            e.arg_names[i] = v.name;
                            ok = true;
                            break;
                        }
                        ++k;
                    }
                    if (!ok) unresolved("too many arguments for '" + e.callee + "'");
                    ++positional;
                } else {
                    auto vit = callee.var_index.find(e.arg_names[i]);
                    if (vit == callee.var_index.end() ||
                        callee.vars[static_cast<std::size_t>(vit->second)].role !=
                            PouLayout::Var::Role::Input) {
                        unresolved("function '" + e.callee + "' has no input '" +
                                   e.arg_names[i] + "'");
                    }
                }
            }
            break;
        }
        }
    }

    void resolve_stlist(StList& list) {
        for (StmtPtr& st : list.stmts) resolve_stmt(*st);
    }

    void resolve_stmt(Stmt& st) {
        switch (st.kind) {
        case Stmt::Kind::Assign:
            st.target_use = bind_path(st.target, true);
            resolve_expr(*st.rhs);
            break;
        case Stmt::Kind::FbCall: {
            auto iit = cur_layout().instance_index.find(st.instance);
            if (iit == cur_layout().instance_index.end()) {
                unresolved("call of unknown FB instance '" + st.instance + "'");
            }
            st.instance_use.space = VarUse::Space::InstanceField;
            st.instance_use.instance_slot = iit->second;
            st.instance_use.qname = cur_pou().name + "." + st.instance;
            const PouLayout::Instance& inst =
                cur_layout().instances[static_cast<std::size_t>(iit->second)];
            for (ParamAssign& pa : st.params) {
                if (pa.is_output) {
                    // validate the formal is an output, then bind the local target
                    if (inst.pou_index < 0) {
                        if (pa.name != "Q" && pa.name != "ET") {
                            unresolved("TON has no output '" + pa.name + "'");
                        }
                    } else {
                        const PouLayout& callee =
                            rp_.layouts[static_cast<std::size_t>(inst.pou_index)];
                        auto vit = callee.var_index.find(pa.name);
                        if (vit == callee.var_index.end() ||
                            callee.vars[static_cast<std::size_t>(vit->second)].role !=
                                PouLayout::Var::Role::Output) {
                            unresolved("FB '" + inst.type_name + "' has no output '" +
                                       pa.name + "'");
                        }
                    }
                    pa.value->use = bind_path(pa.value->path, true);
                } else {
                    if (inst.pou_index < 0) {
                        if (pa.name != "IN" && pa.name != "PT") {
                            unresolved("TON has no input '" + pa.name + "'");
                        }
                    } else {
                        const PouLayout& callee =
                            rp_.layouts[static_cast<std::size_t>(inst.pou_index)];
                        auto vit = callee.var_index.find(pa.name);
                        if (vit == callee.var_index.end() ||
                            callee.vars[static_cast<std::size_t>(vit->second)].role !=
                                PouLayout::Var::Role::Input) {
                            unresolved("FB '" + inst.type_name + "' has no input '" +
                                       pa.name + "'");
                        }
                    }
                    resolve_expr(*pa.value);
                }
            }
            break;
        }
        case Stmt::Kind::If:
            for (IfArm& arm : st.arms) {
                if (arm.cond) resolve_expr(*arm.cond);
                resolve_stlist(arm.body);
            }
            break;
        case Stmt::Kind::Case:
            resolve_expr(*st.selector);
            for (CaseArm& arm : st.case_arms) resolve_stlist(arm.body);
            break;
        case Stmt::Kind::While:
            resolve_expr(*st.cond);
            resolve_stlist(st.body);
            break;
        case Stmt::Kind::For: {
            std::vector<std::string> path{st.for_var};
            st.for_var_use = bind_path(path, true);
            resolve_expr(*st.for_from);
            resolve_expr(*st.for_to);
            if (st.for_by) resolve_expr(*st.for_by);
            resolve_stlist(st.body);
            break;
        }
        case Stmt::Kind::Return:
            break;
        }
    }

    void resolve_pou(int pou_i) {
        pou_i_ = pou_i;
        PouAst& pou = rp_.ast.pous[static_cast<std::size_t>(pou_i)];
        if (pou.is_sfc) {
            if (pou.sfc.steps.empty()) {
                fail(ErrorCode::Syntax, "SFC POU '" + pou.name + "' declares no step");
            }
            int initial_count = 0;
            std::map<std::string, bool> step_names;
            std::map<std::string, bool> action_names;
            for (const SfcStep& s : pou.sfc.steps) {
                if (s.is_initial) ++initial_count;
                if (!step_names.emplace(s.name, true).second) {
                    fail(ErrorCode::DuplicateName,
                         "step '" + s.name + "' declared twice in " + pou.name);
                }
            }
            if (initial_count != 1) {
                fail(ErrorCode::Syntax,
                     "SFC POU '" + pou.name + "' needs exactly one INITIAL step");
            }
            for (SfcAction& a : pou.sfc.actions) {
                if (!action_names.emplace(a.name, true).second) {
                    fail(ErrorCode::DuplicateName,
                         "action '" + a.name + "' declared twice in " + pou.name);
                }
                resolve_stlist(a.body);
            }
            for (const SfcStep& s : pou.sfc.steps) {
                for (const std::string& a : s.actions) {
                    if (!action_names.count(a)) {
                        unresolved("step '" + s.name + "' references unknown action '" + a + "'");
                    }
                }
            }
            for (SfcTransition& t : pou.sfc.transitions) {
                for (const std::string& s : t.from) {
                    if (!step_names.count(s)) {
                        unresolved("transition '" + t.name + "' from unknown step '" + s + "'");
                    }
                }
                for (const std::string& s : t.to) {
                    if (!step_names.count(s)) {
                        unresolved("transition '" + t.name + "' to unknown step '" + s + "'");
                    }
                }
                resolve_expr(*t.cond);
            }
        } else {
            resolve_stlist(pou.body);
        }
    }

    void resolve_tasks() {
        for (const TaskDecl& t : rp_.ast.tasks) {
            ResolvedProject::Task task;
            task.name = t.name;
            task.cycle_ms = t.cycle_ms;
            task.root_pou = rp_.pou_index.at(t.root);
            rp_.tasks.push_back(task);
        }
    }
};

} // namespace

int ResolvedProject::find_pou(const std::string& name) const {
    auto it = pou_index.find(name);
    return it == pou_index.end() ? -1 : it->second;
}

ResolvedProject resolve(ProjectAst project) {
    Resolver r(std::move(project));
    return r.run();
}

} // namespace stprio
