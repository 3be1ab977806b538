#include "stprio/ast.hpp"

#include <sstream>

namespace stprio {

namespace {

const char* op_text(Expr::Op op) {
    switch (op) {
    case Expr::Op::Or: return "OR";
    case Expr::Op::Xor: return "XOR";
    case Expr::Op::And: return "AND";
    case Expr::Op::Not: return "NOT";
    case Expr::Op::Eq: return "=";
    case Expr::Op::Neq: return "<>";
    case Expr::Op::Lt: return "<";
    case Expr::Op::Le: return "<=";
    case Expr::Op::Gt: return ">";
    case Expr::Op::Ge: return ">=";
    case Expr::Op::Add: return "+";
    case Expr::Op::Sub: return "-";
    case Expr::Op::Mul: return "*";
    case Expr::Op::Div: return "/";
    case Expr::Op::Mod: return "MOD";
    case Expr::Op::Neg: return "-";
    }
    return "?";
}

std::string path_text(const std::vector<std::string>& path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) out += '.';
        out += path[i];
    }
    return out;
}

void indent_to(std::ostringstream& os, int n) {
    for (int i = 0; i < n; ++i) os << "    ";
}

void render_stlist(std::ostringstream& os, const StList& list, int indent);

void render_stmt_to(std::ostringstream& os, const Stmt& st, int indent) {
    switch (st.kind) {
    case Stmt::Kind::Assign:
        indent_to(os, indent);
        os << path_text(st.target) << " := " << render_expr(*st.rhs) << ";\n";
        break;
    case Stmt::Kind::FbCall: {
        indent_to(os, indent);
        os << st.instance << "(";
        for (std::size_t i = 0; i < st.params.size(); ++i) {
            if (i) os << ", ";
            const ParamAssign& pa = st.params[i];
            os << pa.name << (pa.is_output ? " => " : " := ") << render_expr(*pa.value);
        }
        os << ");\n";
        break;
    }
    case Stmt::Kind::If: {
        for (std::size_t i = 0; i < st.arms.size(); ++i) {
            const IfArm& arm = st.arms[i];
            indent_to(os, indent);
            if (arm.cond) {
                os << (i == 0 ? "IF " : "ELSIF ") << render_expr(*arm.cond) << " THEN\n";
            } else {
                os << "ELSE\n";
            }
            render_stlist(os, arm.body, indent + 1);
        }
        indent_to(os, indent);
        os << "END_IF;\n";
        break;
    }
    case Stmt::Kind::Case: {
        indent_to(os, indent);
        os << "CASE " << render_expr(*st.selector) << " OF\n";
        for (const CaseArm& arm : st.case_arms) {
            indent_to(os, indent);
            if (arm.is_else) {
                os << "ELSE\n";
            } else {
                for (std::size_t i = 0; i < arm.labels.size(); ++i) {
                    if (i) os << ", ";
                    os << arm.labels[i];
                }
                os << ":\n";
            }
            render_stlist(os, arm.body, indent + 1);
        }
        indent_to(os, indent);
        os << "END_CASE;\n";
        break;
    }
    case Stmt::Kind::While:
        indent_to(os, indent);
        os << "WHILE " << render_expr(*st.cond) << " DO\n";
        render_stlist(os, st.body, indent + 1);
        indent_to(os, indent);
        os << "END_WHILE;\n";
        break;
    case Stmt::Kind::For:
        indent_to(os, indent);
        os << "FOR " << st.for_var << " := " << render_expr(*st.for_from) << " TO "
           << render_expr(*st.for_to);
        if (st.for_by) os << " BY " << render_expr(*st.for_by);
        os << " DO\n";
        render_stlist(os, st.body, indent + 1);
        indent_to(os, indent);
        os << "END_FOR;\n";
        break;
    case Stmt::Kind::Return:
        indent_to(os, indent);
        os << "RETURN;\n";
        break;
    }
}

void render_stlist(std::ostringstream& os, const StList& list, int indent) {
    for (const StmtPtr& st : list.stmts) render_stmt_to(os, *st, indent);
}

void render_var_decl(std::ostringstream& os, const VarDecl& d) {
    os << "    " << d.name << " : " << (d.is_instance ? d.fb_type : var_type_name(d.type));
    if (d.init) os << " := " << render_expr(*d.init);
    os << ";\n";
}

void render_section(std::ostringstream& os, const char* kw, const std::vector<VarDecl>& decls) {
    if (decls.empty()) return;
    os << kw << "\n";
    for (const VarDecl& d : decls) render_var_decl(os, d);
    os << "END_VAR\n";
}

} // namespace

const char* pou_kind_name(PouKind kind) {
    switch (kind) {
    case PouKind::Program: return "Program";
    case PouKind::FunctionBlock: return "FunctionBlock";
    case PouKind::Function: return "Function";
    }
    return "?";
}

std::string render_expr(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Literal:
        return e.lit.to_text();
    case Expr::Kind::VarRef:
        return path_text(e.path);
    case Expr::Kind::Unary:
        if (e.op == Expr::Op::Not) return std::string("NOT (") + render_expr(*e.args[0]) + ")";
        return std::string("-(") + render_expr(*e.args[0]) + ")";
    case Expr::Kind::Binary:
        return "(" + render_expr(*e.args[0]) + " " + op_text(e.op) + " " +
               render_expr(*e.args[1]) + ")";
    case Expr::Kind::Call: {
        std::string out = e.callee + "(";
        for (std::size_t i = 0; i < e.args.size(); ++i) {
            if (i) out += ", ";
            if (!e.arg_names[i].empty()) out += e.arg_names[i] + " := ";
            out += render_expr(*e.args[i]);
        }
        return out + ")";
    }
    }
    return "?";
}

std::string render_stmt(const Stmt& stmt, int indent) {
    std::ostringstream os;
    render_stmt_to(os, stmt, indent);
    return os.str();
}

std::string render_pou(const PouAst& pou) {
    std::ostringstream os;
    switch (pou.kind) {
    case PouKind::Program: os << "PROGRAM " << pou.name << "\n"; break;
    case PouKind::FunctionBlock: os << "FUNCTION_BLOCK " << pou.name << "\n"; break;
    case PouKind::Function:
        os << "FUNCTION " << pou.name << " : " << var_type_name(pou.return_type) << "\n";
        break;
    }
    render_section(os, "VAR_INPUT", pou.inputs);
    render_section(os, "VAR_OUTPUT", pou.outputs);
    render_section(os, "VAR", pou.locals);
    if (pou.is_sfc) {
        for (const SfcStep& s : pou.sfc.steps) {
            os << "STEP " << s.name << (s.is_initial ? " INITIAL" : "") << "\n";
            for (const std::string& a : s.actions) os << "    ACTION " << a << ";\n";
            os << "END_STEP\n";
        }
        for (const SfcTransition& t : pou.sfc.transitions) {
            auto join = [](const std::vector<std::string>& names) {
                std::string out;
                for (std::size_t i = 0; i < names.size(); ++i) {
                    if (i) out += ", ";
                    out += names[i];
                }
                return out;
            };
            os << "TRANSITION " << t.name << " FROM " << join(t.from) << " TO " << join(t.to)
               << " := " << render_expr(*t.cond) << ";\n";
        }
        for (const SfcAction& a : pou.sfc.actions) {
            os << "ACTION " << a.name << "\n";
            render_stlist(os, a.body, 1);
            os << "END_ACTION\n";
        }
    } else {
        render_stlist(os, pou.body, 0);
    }
    switch (pou.kind) {
    case PouKind::Program: os << "END_PROGRAM\n"; break;
    case PouKind::FunctionBlock: os << "END_FUNCTION_BLOCK\n"; break;
    case PouKind::Function: os << "END_FUNCTION\n"; break;
    }
    return os.str();
}

namespace {

bool expr_equal(const Expr* a, const Expr* b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case Expr::Kind::Literal:
        return a->lit.kind == b->lit.kind && a->lit.equals(b->lit);
    case Expr::Kind::VarRef:
        return a->path == b->path;
    case Expr::Kind::Unary:
    case Expr::Kind::Binary:
        if (a->op != b->op || a->args.size() != b->args.size()) return false;
        for (std::size_t i = 0; i < a->args.size(); ++i) {
            if (!expr_equal(a->args[i].get(), b->args[i].get())) return false;
        }
        return true;
    case Expr::Kind::Call:
        if (a->callee != b->callee || a->args.size() != b->args.size() ||
            a->arg_names != b->arg_names) {
            return false;
        }
        for (std::size_t i = 0; i < a->args.size(); ++i) {
            if (!expr_equal(a->args[i].get(), b->args[i].get())) return false;
        }
        return true;
    }
    return false;
}

bool stlist_equal(const StList& a, const StList& b);

bool stmt_equal(const Stmt& a, const Stmt& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Stmt::Kind::Assign:
        return a.target == b.target && expr_equal(a.rhs.get(), b.rhs.get());
    case Stmt::Kind::FbCall: {
        if (a.instance != b.instance || a.params.size() != b.params.size()) return false;
        for (std::size_t i = 0; i < a.params.size(); ++i) {
            if (a.params[i].name != b.params[i].name ||
                a.params[i].is_output != b.params[i].is_output ||
                !expr_equal(a.params[i].value.get(), b.params[i].value.get())) {
                return false;
            }
        }
        return true;
    }
    case Stmt::Kind::If: {
        if (a.arms.size() != b.arms.size()) return false;
        for (std::size_t i = 0; i < a.arms.size(); ++i) {
            if (!expr_equal(a.arms[i].cond.get(), b.arms[i].cond.get())) return false;
            if (!stlist_equal(a.arms[i].body, b.arms[i].body)) return false;
        }
        return true;
    }
    case Stmt::Kind::Case: {
        if (!expr_equal(a.selector.get(), b.selector.get())) return false;
        if (a.case_arms.size() != b.case_arms.size()) return false;
        for (std::size_t i = 0; i < a.case_arms.size(); ++i) {
            if (a.case_arms[i].labels != b.case_arms[i].labels ||
                a.case_arms[i].is_else != b.case_arms[i].is_else ||
                !stlist_equal(a.case_arms[i].body, b.case_arms[i].body)) {
                return false;
            }
        }
        return true;
    }
    case Stmt::Kind::While:
        return expr_equal(a.cond.get(), b.cond.get()) && stlist_equal(a.body, b.body);
    case Stmt::Kind::For:
        return a.for_var == b.for_var && expr_equal(a.for_from.get(), b.for_from.get()) &&
               expr_equal(a.for_to.get(), b.for_to.get()) &&
               expr_equal(a.for_by.get(), b.for_by.get()) && stlist_equal(a.body, b.body);
    case Stmt::Kind::Return:
        return true;
    }
    return false;
}

bool stlist_equal(const StList& a, const StList& b) {
    if (a.stmts.size() != b.stmts.size()) return false;
    for (std::size_t i = 0; i < a.stmts.size(); ++i) {
        if (!stmt_equal(*a.stmts[i], *b.stmts[i])) return false;
    }
    return true;
}

bool decls_equal(const std::vector<VarDecl>& a, const std::vector<VarDecl>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].name != b[i].name || a[i].is_instance != b[i].is_instance ||
            a[i].fb_type != b[i].fb_type || a[i].is_struct != b[i].is_struct ||
            a[i].struct_type != b[i].struct_type ||
            (!a[i].is_instance && !a[i].is_struct && a[i].type != b[i].type) ||
            !expr_equal(a[i].init.get(), b[i].init.get())) {
            return false;
        }
    }
    return true;
}

} // namespace

bool ast_equal(const PouAst& a, const PouAst& b) {
    if (a.kind != b.kind || a.name != b.name || a.is_sfc != b.is_sfc) return false;
    if (a.kind == PouKind::Function && a.return_type != b.return_type) return false;
    if (!decls_equal(a.inputs, b.inputs) || !decls_equal(a.outputs, b.outputs) ||
        !decls_equal(a.locals, b.locals)) {
        return false;
    }
    if (a.is_sfc) {
        if (a.sfc.steps.size() != b.sfc.steps.size() ||
            a.sfc.transitions.size() != b.sfc.transitions.size() ||
            a.sfc.actions.size() != b.sfc.actions.size()) {
            return false;
        }
        for (std::size_t i = 0; i < a.sfc.steps.size(); ++i) {
            if (a.sfc.steps[i].name != b.sfc.steps[i].name ||
                a.sfc.steps[i].is_initial != b.sfc.steps[i].is_initial ||
                a.sfc.steps[i].actions != b.sfc.steps[i].actions) {
                return false;
            }
        }
        for (std::size_t i = 0; i < a.sfc.transitions.size(); ++i) {
            const SfcTransition& x = a.sfc.transitions[i];
            const SfcTransition& y = b.sfc.transitions[i];
            if (x.name != y.name || x.from != y.from || x.to != y.to ||
                !expr_equal(x.cond.get(), y.cond.get())) {
                return false;
            }
        }
        for (std::size_t i = 0; i < a.sfc.actions.size(); ++i) {
            if (a.sfc.actions[i].name != b.sfc.actions[i].name ||
                !stlist_equal(a.sfc.actions[i].body, b.sfc.actions[i].body)) {
                return false;
            }
        }
        return true;
    }
    return stlist_equal(a.body, b.body);
}

} // namespace stprio
