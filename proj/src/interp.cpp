#include "stprio/interp.hpp"

#include <algorithm>
#include <cmath>

namespace stprio {

namespace {

constexpr std::int64_t kLoopIterationCap = 10'000;
constexpr int kCallDepthCap = 64;

struct TonState {
    bool in = false;
    std::int64_t pt = 0;
    std::int64_t start = 0;
    bool started = false;
};

struct InstanceState {
    int pou = -1; // -1 => builtin TON
    std::vector<Value> frame;
    std::vector<std::unique_ptr<InstanceState>> subs;
    TonState ton;
    std::vector<bool> steps; // SFC step activity
};

enum class Flow { Normal, Returned };

} // namespace

struct Machine::Impl {
    const ResolvedProject& rp;
    const DependencyModel* model;

    std::vector<Value> globals;
    std::map<int, std::unique_ptr<InstanceState>> programs; // by root pou index
    std::vector<std::pair<int, InstanceState*>> task_order; // (pou index, instance)

    int cycle_ms_ = 10;
    std::int64_t clock = 0;
    std::int64_t test_start = 0;
    std::int64_t cycles = 0;
    bool has_reset = false;

    // trace structure slots
    int tp_count = 0;
    std::vector<int> x_slots, c_slots, t_slots;

    // io binding
    struct IoRef {
        bool is_global = false;
        int global_slot = -1;
        int pou = -1;
        int var_slot = -1;
        bool writable = false;
    };
    std::map<std::string, IoRef> io;

    // metrics (current cycle)
    CycleMetrics metrics;

    // block tracking
    bool tracking = false;
    std::vector<std::vector<BlockStats>> stats;        // per parent
    std::vector<int> main_parent;                      // pou -> parent id
    std::map<std::pair<int, int>, int> action_parent;  // (pou, action) -> parent id
    mutable std::map<std::string, BlockStats> stats_by_qname;
    mutable bool stats_dirty = false;

    int call_depth = 0;

    struct Ctx {
        InstanceState* inst;
        const PouAst* pou;
        const PouLayout* layout;
        int parent_id;
    };

    explicit Impl(const ResolvedProject& project, const DependencyModel* m)
        : rp(project), model(m) {
        init_globals();
        init_programs();
        init_io();
        init_trace_slots();
        if (!rp.tasks.empty()) cycle_ms_ = rp.tasks.front().cycle_ms;
        if (model) {
            main_parent.assign(rp.ast.pous.size(), -1);
            for (std::size_t p = 0; p < model->parents.size(); ++p) {
                const ParentInfo& parent = model->parents[p];
                if (parent.action_index < 0) {
                    main_parent[static_cast<std::size_t>(parent.pou_index)] =
                        static_cast<int>(p);
                } else {
                    action_parent[{parent.pou_index, parent.action_index}] =
                        static_cast<int>(p);
                }
            }
            stats.resize(model->parents.size());
            for (std::size_t p = 0; p < model->parents.size(); ++p) {
                stats[p].resize(model->parents[p].blocks.size());
            }
        }
    }

    void init_globals() {
        globals.reserve(rp.globals.size());
        for (const ResolvedProject::GlobalSlot& g : rp.globals) {
            globals.push_back(g.has_init ? coerce(g.type, g.init) : Value::default_for(g.type));
        }
    }

    std::unique_ptr<InstanceState> make_instance(int pou_index) {
        auto inst = std::make_unique<InstanceState>();
        inst->pou = pou_index;
        if (pou_index < 0) return inst; // TON
        const PouLayout& layout = rp.layouts[static_cast<std::size_t>(pou_index)];
        inst->frame.reserve(layout.vars.size());
        for (const PouLayout::Var& v : layout.vars) {
            inst->frame.push_back(v.has_init ? coerce(v.type, v.init)
                                             : Value::default_for(v.type));
        }
        for (const PouLayout::Instance& sub : layout.instances) {
            inst->subs.push_back(make_instance(sub.pou_index));
        }
        const PouAst& pou = rp.pou(pou_index);
        if (pou.is_sfc) {
            inst->steps.assign(pou.sfc.steps.size(), false);
            for (std::size_t i = 0; i < pou.sfc.steps.size(); ++i) {
                if (pou.sfc.steps[i].is_initial) inst->steps[i] = true;
            }
        }
        return inst;
    }

    void init_programs() {
        for (const ResolvedProject::Task& t : rp.tasks) {
            auto it = programs.find(t.root_pou);
            if (it == programs.end()) {
                it = programs.emplace(t.root_pou, make_instance(t.root_pou)).first;
            }
            task_order.emplace_back(t.root_pou, it->second.get());
        }
    }

    void init_io() {
        // Program interface variables, qualified and (when unique) bare.
        std::map<std::string, int> bare_count;
        for (const auto& [pou_index, inst] : programs) {
            (void)inst;
            const PouLayout& layout = rp.layouts[static_cast<std::size_t>(pou_index)];
            const PouAst& pou = rp.pou(pou_index);
            for (std::size_t i = 0; i < layout.vars.size(); ++i) {
                const PouLayout::Var& v = layout.vars[i];
                if (v.role != PouLayout::Var::Role::Input &&
                    v.role != PouLayout::Var::Role::Output) {
                    continue;
                }
                IoRef ref;
                ref.pou = pou_index;
                ref.var_slot = static_cast<int>(i);
                ref.writable = v.role == PouLayout::Var::Role::Input;
                io[pou.name + "." + v.name] = ref;
                bare_count[v.name] += 1;
            }
        }
        for (const auto& [pou_index, inst] : programs) {
            (void)inst;
            const PouLayout& layout = rp.layouts[static_cast<std::size_t>(pou_index)];
            const PouAst& pou = rp.pou(pou_index);
            for (std::size_t i = 0; i < layout.vars.size(); ++i) {
                const PouLayout::Var& v = layout.vars[i];
                if (v.role != PouLayout::Var::Role::Input &&
                    v.role != PouLayout::Var::Role::Output) {
                    continue;
                }
                if (bare_count[v.name] == 1 && !io.count(v.name)) {
                    io[v.name] = io[pou.name + "." + v.name];
                }
            }
        }
        // Scalar globals act as wired I/O.
        for (std::size_t i = 0; i < rp.globals.size(); ++i) {
            const ResolvedProject::GlobalSlot& g = rp.globals[i];
            if (g.is_struct_field) continue;
            IoRef ref;
            ref.is_global = true;
            ref.global_slot = static_cast<int>(i);
            ref.writable = true;
            io[g.qname] = ref;
        }
    }

    void init_trace_slots() {
        std::map<int, int> xs, cs, ts;
        for (std::size_t i = 0; i < rp.globals.size(); ++i) {
            const ResolvedProject::GlobalSlot& g = rp.globals[i];
            if (!g.is_struct_field || g.struct_global != "tp") continue;
            const std::string& q = g.qname; // "tp.x12"
            if (q.size() < 5) continue;
            char kind = q[3];
            int index = std::atoi(q.c_str() + 4);
            if (kind == 'x') xs[index] = static_cast<int>(i);
            else if (kind == 'c') cs[index] = static_cast<int>(i);
            else if (kind == 't') ts[index] = static_cast<int>(i);
        }
        if (xs.empty()) return;
        int n = static_cast<int>(xs.size());
        if (static_cast<int>(cs.size()) != n || static_cast<int>(ts.size()) != n) return;
        x_slots.resize(static_cast<std::size_t>(n));
        c_slots.resize(static_cast<std::size_t>(n));
        t_slots.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            if (!xs.count(i) || !cs.count(i) || !ts.count(i)) {
                x_slots.clear();
                c_slots.clear();
                t_slots.clear();
                return;
            }
            x_slots[static_cast<std::size_t>(i)] = xs[i];
            c_slots[static_cast<std::size_t>(i)] = cs[i];
            t_slots[static_cast<std::size_t>(i)] = ts[i];
        }
        tp_count = n;
    }

    // ---- values ----

    static Value coerce(VarType t, const Value& v) {
        switch (t) {
        case VarType::Bool:
            if (v.kind == Value::Kind::Bool) return v;
            break;
        case VarType::Int:
        case VarType::Dint:
            if (v.kind == Value::Kind::Int) return v;
            break;
        case VarType::Time:
            if (v.kind == Value::Kind::Time) return v;
            break;
        case VarType::Real:
            if (v.kind == Value::Kind::Real) return v;
            if (v.kind == Value::Kind::Int) return Value::make_real(static_cast<double>(v.i));
            break;
        }
        fail(ErrorCode::RuntimeFault,
             "cannot assign " + v.to_text() + " to a " + var_type_name(t) + " variable");
    }

    std::int64_t now_ms() const { return clock - test_start; }

    // ---- variable access ----

    Value read_ton_field(const InstanceState& ton, int field) const {
        switch (field) {
        case kTonIn: return Value::make_bool(ton.ton.in);
        case kTonPt: return Value::make_time(ton.ton.pt);
        case kTonQ:
            return Value::make_bool(ton.ton.in && ton.ton.started &&
                                    clock - ton.ton.start >= ton.ton.pt);
        case kTonEt: {
            if (!ton.ton.in || !ton.ton.started) return Value::make_time(0);
            return Value::make_time(std::min(clock - ton.ton.start, ton.ton.pt));
        }
        default:
            fail(ErrorCode::RuntimeFault, "invalid TON field");
        }
    }

    Value read_use(const Ctx& ctx, const VarUse& use) const {
        switch (use.space) {
        case VarUse::Space::Local:
        case VarUse::Space::FunctionReturn:
            return ctx.inst->frame[static_cast<std::size_t>(use.slot)];
        case VarUse::Space::Global:
        case VarUse::Space::GlobalStructField:
            return globals[static_cast<std::size_t>(use.slot)];
        case VarUse::Space::InstanceField: {
            const InstanceState& inst =
                *ctx.inst->subs[static_cast<std::size_t>(use.instance_slot)];
            if (inst.pou < 0) return read_ton_field(inst, use.field_slot);
            return inst.frame[static_cast<std::size_t>(use.field_slot)];
        }
        case VarUse::Space::Unresolved:
            break;
        }
        fail(ErrorCode::Internal, "unresolved variable use");
    }

    void write_use(Ctx& ctx, const VarUse& use, const Value& v) {
        switch (use.space) {
        case VarUse::Space::Local:
        case VarUse::Space::FunctionReturn: {
            const PouLayout::Var& var = ctx.layout->vars[static_cast<std::size_t>(use.slot)];
            ctx.inst->frame[static_cast<std::size_t>(use.slot)] = coerce(var.type, v);
            return;
        }
        case VarUse::Space::Global:
        case VarUse::Space::GlobalStructField: {
            const ResolvedProject::GlobalSlot& g =
                rp.globals[static_cast<std::size_t>(use.slot)];
            globals[static_cast<std::size_t>(use.slot)] = coerce(g.type, v);
            return;
        }
        case VarUse::Space::InstanceField:
        case VarUse::Space::Unresolved:
            break;
        }
        fail(ErrorCode::Internal, "invalid assignment target");
    }

    // ---- expression evaluation ----

    Value eval(Ctx& ctx, const Expr& e) {
        ++metrics.expr_nodes;
        switch (e.kind) {
        case Expr::Kind::Literal:
            return e.lit;
        case Expr::Kind::VarRef:
            return read_use(ctx, e.use);
        case Expr::Kind::Unary: {
            Value v = eval(ctx, *e.args[0]);
            if (e.op == Expr::Op::Not) return Value::make_bool(!v.as_bool());
            switch (v.kind) {
            case Value::Kind::Int: return Value::make_int(-v.i);
            case Value::Kind::Real: return Value::make_real(-v.r);
            case Value::Kind::Time: return Value::make_time(-v.i);
            default: fail(ErrorCode::RuntimeFault, "cannot negate a BOOL");
            }
        }
        case Expr::Kind::Binary:
            return eval_binary(ctx, e);
        case Expr::Kind::Call:
            return eval_call(ctx, e);
        }
        fail(ErrorCode::Internal, "bad expression");
    }

    Value eval_binary(Ctx& ctx, const Expr& e) {
        Value a = eval(ctx, *e.args[0]);
        Value b = eval(ctx, *e.args[1]);
        auto both_int = [&] { return a.kind == Value::Kind::Int && b.kind == Value::Kind::Int; };
        auto both_time = [&] {
            return a.kind == Value::Kind::Time && b.kind == Value::Kind::Time;
        };
        auto numeric = [&] {
            return (a.kind == Value::Kind::Int || a.kind == Value::Kind::Real) &&
                   (b.kind == Value::Kind::Int || b.kind == Value::Kind::Real);
        };
        switch (e.op) {
        case Expr::Op::Or: return Value::make_bool(a.as_bool() || b.as_bool());
        case Expr::Op::Xor: return Value::make_bool(a.as_bool() != b.as_bool());
        case Expr::Op::And: return Value::make_bool(a.as_bool() && b.as_bool());
        case Expr::Op::Eq:
        case Expr::Op::Neq: {
            bool eq;
            if (a.kind == Value::Kind::Bool && b.kind == Value::Kind::Bool) eq = a.b == b.b;
            else if (both_int() || both_time()) eq = a.i == b.i;
            else if (numeric()) eq = a.as_real() == b.as_real();
            else fail(ErrorCode::RuntimeFault, "incomparable operand types");
            return Value::make_bool(e.op == Expr::Op::Eq ? eq : !eq);
        }
        case Expr::Op::Lt:
        case Expr::Op::Le:
        case Expr::Op::Gt:
        case Expr::Op::Ge: {
            if (both_int() || both_time()) {
                bool r;
                switch (e.op) {
                case Expr::Op::Lt: r = a.i < b.i; break;
                case Expr::Op::Le: r = a.i <= b.i; break;
                case Expr::Op::Gt: r = a.i > b.i; break;
                default: r = a.i >= b.i; break;
                }
                return Value::make_bool(r);
            }
            if (!numeric()) fail(ErrorCode::RuntimeFault, "incomparable operand types");
            double x = a.as_real();
            double y = b.as_real();
            bool r;
            switch (e.op) {
            case Expr::Op::Lt: r = x < y; break;
            case Expr::Op::Le: r = x <= y; break;
            case Expr::Op::Gt: r = x > y; break;
            default: r = x >= y; break;
            }
            return Value::make_bool(r);
        }
        case Expr::Op::Add:
            if (both_int()) return Value::make_int(a.i + b.i);
            if (both_time()) return Value::make_time(a.i + b.i);
            if (numeric()) return Value::make_real(a.as_real() + b.as_real());
            fail(ErrorCode::RuntimeFault, "invalid operands for '+'");
        case Expr::Op::Sub:
            if (both_int()) return Value::make_int(a.i - b.i);
            if (both_time()) return Value::make_time(a.i - b.i);
            if (numeric()) return Value::make_real(a.as_real() - b.as_real());
            fail(ErrorCode::RuntimeFault, "invalid operands for '-'");
        case Expr::Op::Mul:
            if (both_int()) return Value::make_int(a.i * b.i);
            if (numeric()) return Value::make_real(a.as_real() * b.as_real());
            fail(ErrorCode::RuntimeFault, "invalid operands for '*'");
        case Expr::Op::Div:
            if (both_int()) {
                if (b.i == 0) fail(ErrorCode::RuntimeFault, "division by zero");
                return Value::make_int(a.i / b.i);
            }
            if (numeric()) {
                if (b.as_real() == 0.0) fail(ErrorCode::RuntimeFault, "division by zero");
                return Value::make_real(a.as_real() / b.as_real());
            }
            fail(ErrorCode::RuntimeFault, "invalid operands for '/'");
        case Expr::Op::Mod:
            if (both_int()) {
                if (b.i == 0) fail(ErrorCode::RuntimeFault, "MOD by zero");
                return Value::make_int(a.i % b.i);
            }
            fail(ErrorCode::RuntimeFault, "MOD needs integer operands");
        default:
            fail(ErrorCode::Internal, "bad binary operator");
        }
    }

    Value eval_call(Ctx& ctx, const Expr& e) {
        if (e.callee_index == kCalleeNow) return Value::make_time(now_ms());
        int callee = e.callee_index;
        const PouAst& pou = rp.pou(callee);
        const PouLayout& layout = rp.layouts[static_cast<std::size_t>(callee)];
        if (++call_depth > kCallDepthCap) {
            fail(ErrorCode::RuntimeFault, "call depth limit exceeded in " + e.callee);
        }
        InstanceState frame;
        frame.pou = callee;
        frame.frame.reserve(layout.vars.size());
        for (const PouLayout::Var& v : layout.vars) {
            frame.frame.push_back(v.has_init ? coerce(v.type, v.init)
                                             : Value::default_for(v.type));
        }
        for (std::size_t i = 0; i < e.args.size(); ++i) {
            Value v = eval(ctx, *e.args[i]);
            int slot = layout.var_index.at(e.arg_names[i]);
            frame.frame[static_cast<std::size_t>(slot)] =
                coerce(layout.vars[static_cast<std::size_t>(slot)].type, v);
        }
        Ctx callee_ctx{&frame, &pou, &layout,
                       tracking ? main_parent[static_cast<std::size_t>(callee)] : -1};
        exec_body(callee_ctx);
        --call_depth;
        int ret_slot = layout.var_index.at(pou.name);
        return frame.frame[static_cast<std::size_t>(ret_slot)];
    }

    // ---- statement execution ----

    void enter_block(const Ctx& ctx, int block_index) {
        if (!tracking || ctx.parent_id < 0 || block_index < 0) return;
        BlockStats& s =
            stats[static_cast<std::size_t>(ctx.parent_id)][static_cast<std::size_t>(block_index)];
        s.count += 1;
        if (s.first_ms < 0) s.first_ms = now_ms();
        ++metrics.blocks_entered;
        stats_dirty = true;
    }

    Flow exec_stlist(Ctx& ctx, const StList& list) {
        for (const StmtPtr& st : list.stmts) {
            if (exec_stmt(ctx, *st) == Flow::Returned) return Flow::Returned;
        }
        return Flow::Normal;
    }

    Flow exec_stmt(Ctx& ctx, const Stmt& st) {
        switch (st.kind) {
        case Stmt::Kind::Assign: {
            ++metrics.statements;
            Value v = eval(ctx, *st.rhs);
            write_use(ctx, st.target_use, v);
            return Flow::Normal;
        }
        case Stmt::Kind::FbCall:
            ++metrics.statements;
            exec_fb_call(ctx, st);
            return Flow::Normal;
        case Stmt::Kind::Return:
            ++metrics.statements;
            return Flow::Returned;
        case Stmt::Kind::If: {
            for (const IfArm& arm : st.arms) {
                bool taken = !arm.cond || eval(ctx, *arm.cond).as_bool();
                if (taken) {
                    enter_block(ctx, arm.block);
                    if (exec_stlist(ctx, arm.body) == Flow::Returned) return Flow::Returned;
                    break;
                }
            }
            enter_block(ctx, st.join_block);
            return Flow::Normal;
        }
        case Stmt::Kind::Case: {
            std::int64_t sel = eval(ctx, *st.selector).as_int();
            const CaseArm* chosen = nullptr;
            const CaseArm* else_arm = nullptr;
            for (const CaseArm& arm : st.case_arms) {
                if (arm.is_else) {
                    else_arm = &arm;
                    continue;
                }
                if (!chosen &&
                    std::find(arm.labels.begin(), arm.labels.end(), sel) != arm.labels.end()) {
                    chosen = &arm;
                }
            }
            if (!chosen) chosen = else_arm;
            if (chosen) {
                enter_block(ctx, chosen->block);
                if (exec_stlist(ctx, chosen->body) == Flow::Returned) return Flow::Returned;
            }
            enter_block(ctx, st.join_block);
            return Flow::Normal;
        }
        case Stmt::Kind::While: {
            enter_block(ctx, st.header_block);
            std::int64_t iterations = 0;
            while (eval(ctx, *st.cond).as_bool()) {
                if (++iterations > kLoopIterationCap) {
                    fail(ErrorCode::RuntimeFault, "loop iteration limit exceeded");
                }
                enter_block(ctx, st.body_block);
                if (exec_stlist(ctx, st.body) == Flow::Returned) return Flow::Returned;
            }
            enter_block(ctx, st.join_block);
            return Flow::Normal;
        }
        case Stmt::Kind::For: {
            enter_block(ctx, st.header_block);
            Value from = eval(ctx, *st.for_from);
            Value to = eval(ctx, *st.for_to);
            std::int64_t step = 1;
            if (st.for_by) step = eval(ctx, *st.for_by).as_int();
            if (step == 0) fail(ErrorCode::RuntimeFault, "FOR step of zero");
            std::int64_t i = from.as_int();
            std::int64_t limit = to.as_int();
            write_use(ctx, st.for_var_use, Value::make_int(i));
            std::int64_t iterations = 0;
            while (step > 0 ? i <= limit : i >= limit) {
                if (++iterations > kLoopIterationCap) {
                    fail(ErrorCode::RuntimeFault, "loop iteration limit exceeded");
                }
                enter_block(ctx, st.body_block);
                if (exec_stlist(ctx, st.body) == Flow::Returned) return Flow::Returned;
                i += step;
                write_use(ctx, st.for_var_use, Value::make_int(i));
            }
            enter_block(ctx, st.join_block);
            return Flow::Normal;
        }
        }
        fail(ErrorCode::Internal, "bad statement");
    }

    void exec_fb_call(Ctx& ctx, const Stmt& st) {
        InstanceState& inst =
            *ctx.inst->subs[static_cast<std::size_t>(st.instance_use.instance_slot)];
        if (inst.pou < 0) {
            // TON: latch inputs; Q/ET are functions of the running clock.
            for (const ParamAssign& pa : st.params) {
                if (pa.is_output) continue;
                Value v = eval(ctx, *pa.value);
                if (pa.name == "IN") {
                    bool in = v.as_bool();
                    if (in && !inst.ton.in) {
                        inst.ton.start = clock;
                        inst.ton.started = true;
                    }
                    inst.ton.in = in;
                } else { // PT
                    inst.ton.pt = v.as_time();
                }
            }
            for (const ParamAssign& pa : st.params) {
                if (!pa.is_output) continue;
                int field = pa.name == "Q" ? kTonQ : kTonEt;
                Value v = read_ton_field(inst, field);
                write_use(ctx, pa.value->use, v);
            }
            return;
        }
        const PouAst& pou = rp.pou(inst.pou);
        const PouLayout& layout = rp.layouts[static_cast<std::size_t>(inst.pou)];
        for (const ParamAssign& pa : st.params) {
            if (pa.is_output) continue;
            Value v = eval(ctx, *pa.value);
            int slot = layout.var_index.at(pa.name);
            inst.frame[static_cast<std::size_t>(slot)] =
                coerce(layout.vars[static_cast<std::size_t>(slot)].type, v);
        }
        if (++call_depth > kCallDepthCap) {
            fail(ErrorCode::RuntimeFault, "call depth limit exceeded in " + pou.name);
        }
        Ctx callee_ctx{&inst, &pou, &layout,
                       tracking ? main_parent[static_cast<std::size_t>(inst.pou)] : -1};
        exec_body(callee_ctx);
        --call_depth;
        for (const ParamAssign& pa : st.params) {
            if (!pa.is_output) continue;
            int slot = layout.var_index.at(pa.name);
            write_use(ctx, pa.value->use, inst.frame[static_cast<std::size_t>(slot)]);
        }
    }

    void exec_body(Ctx& ctx) {
        if (ctx.pou->is_sfc) {
            exec_sfc(ctx);
            return;
        }
        enter_block(ctx, 0);
        exec_stlist(ctx, ctx.pou->body);
    }

    void exec_sfc(Ctx& ctx) {
        const SfcBody& sfc = ctx.pou->sfc;
        InstanceState& inst = *ctx.inst;
        // actions of active steps first, then transition evaluation
        for (std::size_t s = 0; s < sfc.steps.size(); ++s) {
            if (!inst.steps[s]) continue;
            for (const std::string& action_name : sfc.steps[s].actions) {
                for (std::size_t a = 0; a < sfc.actions.size(); ++a) {
                    if (sfc.actions[a].name != action_name) continue;
                    int parent_id = -1;
                    if (tracking) {
                        auto it = action_parent.find({inst.pou, static_cast<int>(a)});
                        if (it != action_parent.end()) parent_id = it->second;
                    }
                    Ctx action_ctx{&inst, ctx.pou, ctx.layout, parent_id};
                    enter_block(action_ctx, 0);
                    exec_stlist(action_ctx, sfc.actions[a].body);
                    break;
                }
            }
        }
        std::vector<std::size_t> fired;
        for (std::size_t t = 0; t < sfc.transitions.size(); ++t) {
            const SfcTransition& tr = sfc.transitions[t];
            bool enabled = true;
            for (const std::string& from : tr.from) {
                if (!step_active(ctx, from)) {
                    enabled = false;
                    break;
                }
            }
            if (enabled && eval(ctx, *tr.cond).as_bool()) fired.push_back(t);
        }
        for (std::size_t t : fired) {
            const SfcTransition& tr = sfc.transitions[t];
            bool still_enabled = true;
            for (const std::string& from : tr.from) {
                if (!step_active(ctx, from)) {
                    still_enabled = false;
                    break;
                }
            }
            if (!still_enabled) continue; // earlier firing consumed a shared source
            for (const std::string& from : tr.from) set_step(ctx, from, false);
            for (const std::string& to : tr.to) set_step(ctx, to, true);
        }
    }

    bool step_active(const Ctx& ctx, const std::string& name) const {
        const SfcBody& sfc = ctx.pou->sfc;
        for (std::size_t i = 0; i < sfc.steps.size(); ++i) {
            if (sfc.steps[i].name == name) return ctx.inst->steps[i];
        }
        return false;
    }

    void set_step(Ctx& ctx, const std::string& name, bool active) {
        const SfcBody& sfc = ctx.pou->sfc;
        for (std::size_t i = 0; i < sfc.steps.size(); ++i) {
            if (sfc.steps[i].name == name) {
                ctx.inst->steps[i] = active;
                return;
            }
        }
    }

    // ---- cycle ----

    CycleMetrics run_cycle(const std::map<std::string, Value>& inputs) {
        metrics = CycleMetrics{};
        for (const auto& [name, value] : inputs) {
            auto it = io.find(name);
            if (it == io.end() || !it->second.writable) {
                fail(ErrorCode::StepError, "'" + name + "' is not a settable input");
            }
            write_io(it->second, value);
        }
        for (const auto& [pou_index, inst] : task_order) {
            const PouAst& pou = rp.pou(pou_index);
            const PouLayout& layout = rp.layouts[static_cast<std::size_t>(pou_index)];
            Ctx ctx{inst, &pou, &layout,
                    tracking ? main_parent[static_cast<std::size_t>(pou_index)] : -1};
            exec_body(ctx);
        }
        clock += cycle_ms_;
        ++cycles;
        return metrics;
    }

    void write_io(const IoRef& ref, const Value& v) {
        if (ref.is_global) {
            const ResolvedProject::GlobalSlot& g =
                rp.globals[static_cast<std::size_t>(ref.global_slot)];
            globals[static_cast<std::size_t>(ref.global_slot)] = coerce(g.type, v);
            return;
        }
        InstanceState* inst = programs.at(ref.pou).get();
        const PouLayout& layout = rp.layouts[static_cast<std::size_t>(ref.pou)];
        inst->frame[static_cast<std::size_t>(ref.var_slot)] =
            coerce(layout.vars[static_cast<std::size_t>(ref.var_slot)].type, v);
    }

    Value read_io(const IoRef& ref) const {
        if (ref.is_global) return globals[static_cast<std::size_t>(ref.global_slot)];
        const InstanceState* inst = programs.at(ref.pou).get();
        return inst->frame[static_cast<std::size_t>(ref.var_slot)];
    }
};

Machine::Machine(const ResolvedProject& project, const DependencyModel* model)
    : impl_(std::make_unique<Impl>(project, model)) {}

Machine::~Machine() = default;

int Machine::cycle_ms() const { return impl_->cycle_ms_; }
std::int64_t Machine::clock_ms() const { return impl_->clock; }
std::int64_t Machine::now_ms() const { return impl_->now_ms(); }
std::int64_t Machine::cycle_count() const { return impl_->cycles; }

CycleMetrics Machine::run_cycle(const std::map<std::string, Value>& inputs) {
    return impl_->run_cycle(inputs);
}

std::map<std::string, Value> Machine::outputs() const {
    std::map<std::string, Value> out;
    for (const auto& [pou_index, inst] : impl_->programs) {
        const PouLayout& layout = impl_->rp.layouts[static_cast<std::size_t>(pou_index)];
        const PouAst& pou = impl_->rp.pou(pou_index);
        for (std::size_t i = 0; i < layout.vars.size(); ++i) {
            if (layout.vars[i].role == PouLayout::Var::Role::Output) {
                out[pou.name + "." + layout.vars[i].name] = inst->frame[i];
            }
        }
    }
    return out;
}

bool Machine::is_input(const std::string& name) const {
    auto it = impl_->io.find(name);
    return it != impl_->io.end() && it->second.writable;
}

bool Machine::is_readable(const std::string& name) const {
    return impl_->io.count(name) > 0;
}

Value Machine::read_var(const std::string& name) const {
    auto it = impl_->io.find(name);
    if (it == impl_->io.end()) {
        fail(ErrorCode::StepError, "'" + name + "' is not a readable variable");
    }
    return impl_->read_io(it->second);
}

bool Machine::instrumented() const { return impl_->tp_count > 0; }
int Machine::trace_point_count() const { return impl_->tp_count; }

void Machine::reset() {
    Impl& m = *impl_;
    for (int i = 0; i < m.tp_count; ++i) {
        m.globals[static_cast<std::size_t>(m.x_slots[static_cast<std::size_t>(i)])] =
            Value::make_bool(false);
        m.globals[static_cast<std::size_t>(m.c_slots[static_cast<std::size_t>(i)])] =
            Value::make_int(0);
        m.globals[static_cast<std::size_t>(m.t_slots[static_cast<std::size_t>(i)])] =
            Value::make_time(0);
    }
    m.test_start = m.clock;
    m.has_reset = true;
}

ExecutionTrace Machine::save_trace(const std::string& test_id, Checksum version_id) const {
    Impl& m = *impl_;
    if (m.tp_count == 0) {
        fail(ErrorCode::TraceIOError, "project is not instrumented; no trace structure");
    }
    if (!m.has_reset) {
        fail(ErrorCode::SaveWithoutReset, "save requested before any reset");
    }
    ExecutionTrace trace;
    trace.test_id = test_id;
    trace.duration_ms = m.now_ms();
    trace.version_id = version_id;
    trace.points.reserve(static_cast<std::size_t>(m.tp_count));
    for (int i = 0; i < m.tp_count; ++i) {
        TracePointVisit v;
        v.tp = i;
        v.visited = m.globals[static_cast<std::size_t>(m.x_slots[static_cast<std::size_t>(i)])].b;
        v.count = m.globals[static_cast<std::size_t>(m.c_slots[static_cast<std::size_t>(i)])].i;
        v.first_visit_ms =
            m.globals[static_cast<std::size_t>(m.t_slots[static_cast<std::size_t>(i)])].i;
        if (!v.visited) v.first_visit_ms = 0;
        trace.points.push_back(v);
    }
    return trace;
}

void Machine::enable_block_tracking() {
    if (!impl_->model) {
        fail(ErrorCode::Internal, "block tracking requires a dependency model");
    }
    impl_->tracking = true;
}

const std::map<std::string, BlockStats>& Machine::block_stats() const {
    Impl& m = *impl_;
    if (m.stats_dirty || m.stats_by_qname.empty()) {
        m.stats_by_qname.clear();
        for (std::size_t p = 0; p < m.stats.size(); ++p) {
            const ParentInfo& parent = m.model->parents[p];
            for (std::size_t b = 0; b < m.stats[p].size(); ++b) {
                m.stats_by_qname[parent.blocks[b].qname] = m.stats[p][b];
            }
        }
        m.stats_dirty = false;
    }
    return m.stats_by_qname;
}

DifferentialResult differential_check(const ResolvedProject& original,
                                      const ResolvedProject& instrumented,
                                      const InputScript& script) {
    Machine a(original);
    Machine b(instrumented);
    DifferentialResult result;
    for (std::size_t cycle = 0; cycle < script.size(); ++cycle) {
        a.run_cycle(script[cycle]);
        b.run_cycle(script[cycle]);
        std::map<std::string, Value> oa = a.outputs();
        std::map<std::string, Value> ob = b.outputs();
        for (const auto& [name, value] : oa) {
            auto it = ob.find(name);
            if (it == ob.end() || !it->second.equals(value)) {
                result.ok = false;
                result.mismatch_cycle = static_cast<std::int64_t>(cycle);
                result.variable = name;
                return result;
            }
        }
    }
    return result;
}

OverheadReport measure_overhead(const ResolvedProject& original,
                                const DependencyModel& original_model,
                                const ResolvedProject& instrumented,
                                const InputScript& script) {
    Machine a(original, &original_model);
    a.enable_block_tracking();
    Machine b(instrumented);
    OverheadReport report;
    report.cycles = static_cast<std::int64_t>(script.size());
    double sum_orig = 0.0, sum_instr = 0.0;
    for (const auto& inputs : script) {
        CycleMetrics ma = a.run_cycle(inputs);
        CycleMetrics mb = b.run_cycle(inputs);
        report.original_statements.push_back(ma.statements);
        report.instrumented_statements.push_back(mb.statements);
        report.original_blocks_entered.push_back(ma.blocks_entered);
        sum_orig += static_cast<double>(ma.statements);
        sum_instr += static_cast<double>(mb.statements);
        report.max_original = std::max(report.max_original, ma.statements);
        report.max_instrumented = std::max(report.max_instrumented, mb.statements);
        double ratio = static_cast<double>(mb.statements) /
                       static_cast<double>(std::max<std::int64_t>(ma.statements, 1));
        report.max_cycle_ratio = std::max(report.max_cycle_ratio, ratio);
    }
    if (report.cycles > 0) {
        report.avg_original = sum_orig / static_cast<double>(report.cycles);
        report.avg_instrumented = sum_instr / static_cast<double>(report.cycles);
    }
    double avg_base = std::max(report.avg_original, 1.0);
    double max_base = static_cast<double>(std::max<std::int64_t>(report.max_original, 1));
    report.avg_increase_pct = (report.avg_instrumented - report.avg_original) / avg_base * 100.0;
    report.max_increase_pct =
        (static_cast<double>(report.max_instrumented) - static_cast<double>(report.max_original)) /
        max_base * 100.0;
    return report;
}

std::string overhead_report_text(const OverheadReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "scan-cycle statement counts over %lld cycles\n"
                  "  avg: original %.2f, instrumented %.2f (+%.1f%%)\n"
                  "  max: original %lld, instrumented %lld (+%.1f%%)\n"
                  "  worst per-cycle ratio: %.2f\n",
                  static_cast<long long>(r.cycles), r.avg_original, r.avg_instrumented,
                  r.avg_increase_pct, static_cast<long long>(r.max_original),
                  static_cast<long long>(r.max_instrumented), r.max_increase_pct,
                  r.max_cycle_ratio);
    return buf;
}

} // namespace stprio
