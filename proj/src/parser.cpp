#include "stprio/parser.hpp"

#include "stprio/lexer.hpp"

namespace stprio {

namespace {

class Parser {
public:
    Parser(const std::string& source, const std::string& file)
        : source_(source), file_(file), tokens_(lex(source, file)) {}

    PouAst parse_pou() {
        PouAst pou;
        pou.file = file_;
        pou.source = source_;
        if (accept_kw("PROGRAM")) {
            pou.kind = PouKind::Program;
        } else if (accept_kw("FUNCTION_BLOCK")) {
            pou.kind = PouKind::FunctionBlock;
        } else if (accept_kw("FUNCTION")) {
            pou.kind = PouKind::Function;
        } else {
            error("expected PROGRAM, FUNCTION_BLOCK or FUNCTION");
        }
        pou.name = expect_identifier("POU name");
        if (pou.kind == PouKind::Function) {
            expect(TokenKind::Colon, "':' before function return type");
            pou.return_type = expect_type();
        }
        parse_var_sections(pou);
        pou.body_pos = peek().pos.offset;
        const char* end_kw = pou.kind == PouKind::Program ? "END_PROGRAM"
                             : pou.kind == PouKind::FunctionBlock ? "END_FUNCTION_BLOCK"
                                                                  : "END_FUNCTION";
        if (peek_kw("STEP") || peek_kw("TRANSITION") ||
            (peek_kw("ACTION") && pou.kind != PouKind::Function)) {
            pou.is_sfc = true;
            parse_sfc_body(pou, end_kw);
        } else {
            pou.body = parse_stlist(&pou);
        }
        pou.end_pos = peek().pos.offset;
        expect_kw(end_kw);
        expect(TokenKind::EndOfFile, "end of file after POU");
        return pou;
    }

    void parse_globals_file(ProjectAst& into) {
        for (;;) {
            if (accept_kw("TYPE")) {
                StructType st;
                st.name = expect_identifier("type name");
                expect(TokenKind::Colon, "':' after type name");
                expect_kw("STRUCT");
                while (!accept_kw("END_STRUCT")) {
                    StructField f;
                    f.name = expect_identifier("field name");
                    expect(TokenKind::Colon, "':' after field name");
                    f.type = expect_type();
                    expect(TokenKind::Semicolon, "';' after field");
                    st.fields.push_back(std::move(f));
                }
                expect_kw("END_TYPE");
                into.structs.push_back(std::move(st));
            } else if (accept_kw("VAR_GLOBAL")) {
                while (!accept_kw("END_VAR")) {
                    GlobalDecl g;
                    int begin = peek().pos.offset;
                    g.name = expect_identifier("global variable name");
                    expect(TokenKind::Colon, "':' after variable name");
                    Token type_tok = peek();
                    VarType vt;
                    if (type_tok.kind == TokenKind::Identifier &&
                        !var_type_from_name(type_tok.text, vt)) {
                        g.is_struct = true;
                        g.struct_type = type_tok.text;
                        next();
                    } else {
                        g.type = expect_type();
                    }
                    if (accept(TokenKind::Assign)) {
                        g.init = parse_expr();
                    }
                    expect(TokenKind::Semicolon, "';' after declaration");
                    g.span = SourceSpan{begin, prev_end_};
                    into.globals.push_back(std::move(g));
                }
            } else if (peek().kind == TokenKind::EndOfFile) {
                break;
            } else {
                error("expected TYPE or VAR_GLOBAL section");
            }
        }
    }

private:
    const std::string& source_;
    std::string file_;
    std::vector<Token> tokens_;
    std::size_t index_ = 0;
    int prev_end_ = 0;
    PouAst* current_pou_ = nullptr;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = index_ + ahead;
        if (i >= tokens_.size()) i = tokens_.size() - 1;
        return tokens_[i];
    }
    const Token& next() {
        const Token& t = tokens_[index_];
        if (index_ + 1 < tokens_.size()) ++index_;
        prev_end_ = t.end_offset;
        return t;
    }
    bool peek_kw(const char* kw, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Keyword && t.text == kw;
    }
    bool accept_kw(const char* kw) {
        if (peek_kw(kw)) {
            next();
            return true;
        }
        return false;
    }
    void expect_kw(const char* kw) {
        if (!accept_kw(kw)) error(std::string("expected ") + kw);
    }
    bool accept(TokenKind kind) {
        if (peek().kind == kind) {
            next();
            return true;
        }
        return false;
    }
    void expect(TokenKind kind, const char* what) {
        if (!accept(kind)) error(std::string("expected ") + what);
    }
    std::string expect_identifier(const char* what) {
        if (peek().kind != TokenKind::Identifier) {
            error(std::string("expected ") + what);
        }
        return next().text;
    }
    VarType expect_type() {
        if (peek().kind != TokenKind::Identifier) error("expected type name");
        VarType t;
        if (!var_type_from_name(peek().text, t)) {
            fail_at(ErrorCode::UnknownType, file_, peek().pos,
                    "unknown type '" + peek().text + "'");
        }
        next();
        return t;
    }
    [[noreturn]] void error(const std::string& message) const {
        fail_at(ErrorCode::Syntax, file_, peek().pos, message);
    }

    int fresh_stmt_id() { return current_pou_ ? current_pou_->next_stmt_id++ : -1; }

    void parse_var_sections(PouAst& pou) {
        for (;;) {
            std::vector<VarDecl>* dest = nullptr;
            if (accept_kw("VAR_INPUT")) dest = &pou.inputs;
            else if (accept_kw("VAR_OUTPUT")) dest = &pou.outputs;
            else if (accept_kw("VAR")) dest = &pou.locals;
            else break;
            while (!accept_kw("END_VAR")) {
                VarDecl d;
                int begin = peek().pos.offset;
                d.name = expect_identifier("variable name");
                expect(TokenKind::Colon, "':' after variable name");
                Token type_tok = peek();
                VarType vt;
                if (type_tok.kind == TokenKind::Identifier &&
                    !var_type_from_name(type_tok.text, vt)) {
                    d.is_instance = true;
                    d.fb_type = type_tok.text;
                    next();
                } else {
                    d.type = expect_type();
                }
                if (accept(TokenKind::Assign)) {
                    d.init = parse_expr();
                }
                expect(TokenKind::Semicolon, "';' after declaration");
                d.span = SourceSpan{begin, prev_end_};
                dest->push_back(std::move(d));
            }
        }
    }

    // ---- statements ----

    // Label lists look like "-1, 2, 3:"; nothing else starts with a number.
    bool is_case_label_start() const {
        std::size_t k = 0;
        for (;;) {
            if (peek(k).kind == TokenKind::Minus) ++k;
            if (peek(k).kind != TokenKind::IntLiteral) return false;
            ++k;
            if (peek(k).kind == TokenKind::Colon) return true;
            if (peek(k).kind != TokenKind::Comma) return false;
            ++k;
        }
    }

    StList parse_stlist(PouAst* pou) {
        PouAst* saved = current_pou_;
        if (pou) current_pou_ = pou;
        StList list;
        for (;;) {
            if (peek().kind == TokenKind::EndOfFile) break;
            if (peek_kw("END_PROGRAM") || peek_kw("END_FUNCTION_BLOCK") ||
                peek_kw("END_FUNCTION") || peek_kw("END_IF") || peek_kw("END_CASE") ||
                peek_kw("END_WHILE") || peek_kw("END_FOR") || peek_kw("END_ACTION") ||
                peek_kw("ELSE") || peek_kw("ELSIF")) {
                break;
            }
            if (is_case_label_start()) {
                break; // next CASE arm label
            }
            list.stmts.push_back(parse_stmt());
        }
        if (pou) current_pou_ = saved;
        return list;
    }

    StmtPtr parse_stmt() {
        if (peek_kw("IF")) return parse_if();
        if (peek_kw("CASE")) return parse_case();
        if (peek_kw("WHILE")) return parse_while();
        if (peek_kw("FOR")) return parse_for();
        if (peek_kw("RETURN")) {
            auto st = std::make_unique<Stmt>();
            st->kind = Stmt::Kind::Return;
            st->id = fresh_stmt_id();
            int begin = peek().pos.offset;
            next();
            expect(TokenKind::Semicolon, "';' after RETURN");
            st->span = SourceSpan{begin, prev_end_};
            return st;
        }
        if (peek().kind == TokenKind::Identifier) {
            if (peek(1).kind == TokenKind::LParen) return parse_fb_call();
            return parse_assign();
        }
        error("expected statement");
    }

    StmtPtr parse_assign() {
        auto st = std::make_unique<Stmt>();
        st->kind = Stmt::Kind::Assign;
        st->id = fresh_stmt_id();
        int begin = peek().pos.offset;
        st->target.push_back(expect_identifier("assignment target"));
        while (accept(TokenKind::Dot)) {
            st->target.push_back(expect_identifier("member name"));
        }
        expect(TokenKind::Assign, "':='");
        st->rhs = parse_expr();
        expect(TokenKind::Semicolon, "';' after assignment");
        st->span = SourceSpan{begin, prev_end_};
        return st;
    }

    StmtPtr parse_fb_call() {
        auto st = std::make_unique<Stmt>();
        st->kind = Stmt::Kind::FbCall;
        st->id = fresh_stmt_id();
        int begin = peek().pos.offset;
        st->instance = expect_identifier("instance name");
        expect(TokenKind::LParen, "'('");
        if (!accept(TokenKind::RParen)) {
            for (;;) {
                ParamAssign pa;
                int pa_begin = peek().pos.offset;
                pa.name = expect_identifier("parameter name");
                if (accept(TokenKind::OutArrow)) {
                    pa.is_output = true;
                    auto target = std::make_unique<Expr>();
                    target->kind = Expr::Kind::VarRef;
                    int t_begin = peek().pos.offset;
                    target->path.push_back(expect_identifier("output target"));
                    while (accept(TokenKind::Dot)) {
                        target->path.push_back(expect_identifier("member name"));
                    }
                    target->span = SourceSpan{t_begin, prev_end_};
                    pa.value = std::move(target);
                } else {
                    expect(TokenKind::Assign, "':=' or '=>' in parameter assignment");
                    pa.value = parse_expr();
                }
                pa.span = SourceSpan{pa_begin, prev_end_};
                st->params.push_back(std::move(pa));
                if (accept(TokenKind::Comma)) continue;
                expect(TokenKind::RParen, "')' after parameters");
                break;
            }
        }
        expect(TokenKind::Semicolon, "';' after call");
        st->span = SourceSpan{begin, prev_end_};
        return st;
    }

    StmtPtr parse_if() {
        auto st = std::make_unique<Stmt>();
        st->kind = Stmt::Kind::If;
        st->id = fresh_stmt_id();
        int begin = peek().pos.offset;
        expect_kw("IF");
        {
            IfArm arm;
            arm.cond = parse_expr();
            expect_kw("THEN");
            arm.body_pos = prev_end_;
            arm.body = parse_stlist(nullptr);
            st->arms.push_back(std::move(arm));
        }
        while (accept_kw("ELSIF")) {
            IfArm arm;
            arm.cond = parse_expr();
            expect_kw("THEN");
            arm.body_pos = prev_end_;
            arm.body = parse_stlist(nullptr);
            st->arms.push_back(std::move(arm));
        }
        if (accept_kw("ELSE")) {
            IfArm arm;
            arm.body_pos = prev_end_;
            arm.body = parse_stlist(nullptr);
            st->arms.push_back(std::move(arm));
        }
        expect_kw("END_IF");
        accept(TokenKind::Semicolon);
        st->span = SourceSpan{begin, prev_end_};
        return st;
    }

    StmtPtr parse_case() {
        auto st = std::make_unique<Stmt>();
        st->kind = Stmt::Kind::Case;
        st->id = fresh_stmt_id();
        int begin = peek().pos.offset;
        expect_kw("CASE");
        st->selector = parse_expr();
        expect_kw("OF");
        for (;;) {
            if (peek_kw("END_CASE")) break;
            if (accept_kw("ELSE")) {
                CaseArm arm;
                arm.is_else = true;
                arm.body_pos = prev_end_;
                arm.body = parse_stlist(nullptr);
                st->case_arms.push_back(std::move(arm));
                break;
            }
            CaseArm arm;
            int label_begin = peek().pos.offset;
            for (;;) {
                bool neg = accept(TokenKind::Minus);
                if (peek().kind != TokenKind::IntLiteral) error("expected CASE label");
                std::int64_t v = std::stoll(next().text);
                arm.labels.push_back(neg ? -v : v);
                if (!accept(TokenKind::Comma)) break;
            }
            arm.label_text = normalize_tokens(source_.substr(
                static_cast<std::size_t>(label_begin),
                static_cast<std::size_t>(prev_end_ - label_begin)));
            expect(TokenKind::Colon, "':' after CASE labels");
            arm.body_pos = prev_end_;
            arm.body = parse_stlist(nullptr);
            st->case_arms.push_back(std::move(arm));
        }
        expect_kw("END_CASE");
        accept(TokenKind::Semicolon);
        st->span = SourceSpan{begin, prev_end_};
        return st;
    }

    StmtPtr parse_while() {
        auto st = std::make_unique<Stmt>();
        st->kind = Stmt::Kind::While;
        st->id = fresh_stmt_id();
        int begin = peek().pos.offset;
        expect_kw("WHILE");
        st->cond = parse_expr();
        st->decision_begin = st->cond->span.begin;
        st->decision_end = st->cond->span.end;
        expect_kw("DO");
        st->body_pos = prev_end_;
        st->body = parse_stlist(nullptr);
        expect_kw("END_WHILE");
        accept(TokenKind::Semicolon);
        st->span = SourceSpan{begin, prev_end_};
        return st;
    }

    StmtPtr parse_for() {
        auto st = std::make_unique<Stmt>();
        st->kind = Stmt::Kind::For;
        st->id = fresh_stmt_id();
        int begin = peek().pos.offset;
        expect_kw("FOR");
        st->decision_begin = peek().pos.offset;
        st->for_var = expect_identifier("loop variable");
        expect(TokenKind::Assign, "':=' in FOR header");
        st->for_from = parse_expr();
        expect_kw("TO");
        st->for_to = parse_expr();
        if (accept_kw("BY")) {
            st->for_by = parse_expr();
        }
        st->decision_end = prev_end_;
        expect_kw("DO");
        st->body_pos = prev_end_;
        st->body = parse_stlist(nullptr);
        expect_kw("END_FOR");
        accept(TokenKind::Semicolon);
        st->span = SourceSpan{begin, prev_end_};
        return st;
    }

    // ---- SFC ----

    void parse_sfc_body(PouAst& pou, const char* end_kw) {
        current_pou_ = &pou;
        while (!peek_kw(end_kw)) {
            if (accept_kw("STEP")) {
                SfcStep step;
                int begin = prev_end_;
                step.name = expect_identifier("step name");
                step.is_initial = accept_kw("INITIAL");
                while (accept_kw("ACTION")) {
                    step.actions.push_back(expect_identifier("action name"));
                    expect(TokenKind::Semicolon, "';' after action reference");
                }
                expect_kw("END_STEP");
                accept(TokenKind::Semicolon);
                step.span = SourceSpan{begin, prev_end_};
                pou.sfc.steps.push_back(std::move(step));
            } else if (accept_kw("TRANSITION")) {
                SfcTransition tr;
                int begin = prev_end_;
                tr.name = expect_identifier("transition name");
                expect_kw("FROM");
                tr.from.push_back(expect_identifier("source step"));
                while (accept(TokenKind::Comma)) {
                    tr.from.push_back(expect_identifier("source step"));
                }
                expect_kw("TO");
                tr.to.push_back(expect_identifier("target step"));
                while (accept(TokenKind::Comma)) {
                    tr.to.push_back(expect_identifier("target step"));
                }
                expect(TokenKind::Assign, "':=' before transition condition");
                tr.cond = parse_expr();
                expect(TokenKind::Semicolon, "';' after transition");
                tr.span = SourceSpan{begin, prev_end_};
                pou.sfc.transitions.push_back(std::move(tr));
            } else if (accept_kw("ACTION")) {
                SfcAction act;
                int begin = prev_end_;
                act.name = expect_identifier("action name");
                act.body_pos = prev_end_;
                act.body = parse_stlist(&pou);
                act.end_pos = peek().pos.offset;
                expect_kw("END_ACTION");
                accept(TokenKind::Semicolon);
                act.span = SourceSpan{begin, prev_end_};
                pou.sfc.actions.push_back(std::move(act));
            } else {
                error("expected STEP, TRANSITION or ACTION");
            }
        }
        current_pou_ = nullptr;
    }

    // ---- expressions ----

    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr binary(Expr::Op op, ExprPtr lhs, ExprPtr rhs) {
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Binary;
        e->op = op;
        e->span = SourceSpan{lhs->span.begin, rhs->span.end};
        e->args.push_back(std::move(lhs));
        e->args.push_back(std::move(rhs));
        return e;
    }

    ExprPtr parse_or() {
        ExprPtr lhs = parse_xor();
        while (accept_kw("OR")) lhs = binary(Expr::Op::Or, std::move(lhs), parse_xor());
        return lhs;
    }
    ExprPtr parse_xor() {
        ExprPtr lhs = parse_and();
        while (accept_kw("XOR")) lhs = binary(Expr::Op::Xor, std::move(lhs), parse_and());
        return lhs;
    }
    ExprPtr parse_and() {
        ExprPtr lhs = parse_cmp();
        while (accept_kw("AND")) lhs = binary(Expr::Op::And, std::move(lhs), parse_cmp());
        return lhs;
    }
    ExprPtr parse_cmp() {
        ExprPtr lhs = parse_add();
        Expr::Op op;
        switch (peek().kind) {
        case TokenKind::Eq: op = Expr::Op::Eq; break;
        case TokenKind::Neq: op = Expr::Op::Neq; break;
        case TokenKind::Lt: op = Expr::Op::Lt; break;
        case TokenKind::Le: op = Expr::Op::Le; break;
        case TokenKind::Gt: op = Expr::Op::Gt; break;
        case TokenKind::Ge: op = Expr::Op::Ge; break;
        default: return lhs;
        }
        next();
        return binary(op, std::move(lhs), parse_add());
    }
    ExprPtr parse_add() {
        ExprPtr lhs = parse_mul();
        for (;;) {
            if (accept(TokenKind::Plus)) lhs = binary(Expr::Op::Add, std::move(lhs), parse_mul());
            else if (accept(TokenKind::Minus)) lhs = binary(Expr::Op::Sub, std::move(lhs), parse_mul());
            else return lhs;
        }
    }
    ExprPtr parse_mul() {
        ExprPtr lhs = parse_unary();
        for (;;) {
            if (accept(TokenKind::Star)) lhs = binary(Expr::Op::Mul, std::move(lhs), parse_unary());
            else if (accept(TokenKind::Slash)) lhs = binary(Expr::Op::Div, std::move(lhs), parse_unary());
            else if (accept_kw("MOD")) lhs = binary(Expr::Op::Mod, std::move(lhs), parse_unary());
            else return lhs;
        }
    }
    ExprPtr parse_unary() {
        int begin = peek().pos.offset;
        if (accept_kw("NOT")) {
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Unary;
            e->op = Expr::Op::Not;
            e->args.push_back(parse_unary());
            e->span = SourceSpan{begin, e->args[0]->span.end};
            return e;
        }
        if (accept(TokenKind::Minus)) {
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Unary;
            e->op = Expr::Op::Neg;
            e->args.push_back(parse_unary());
            e->span = SourceSpan{begin, e->args[0]->span.end};
            return e;
        }
        return parse_primary();
    }
    ExprPtr parse_primary() {
        const Token& t = peek();
        int begin = t.pos.offset;
        if (accept(TokenKind::LParen)) {
            ExprPtr inner = parse_expr();
            expect(TokenKind::RParen, "')'");
            inner->span = SourceSpan{begin, prev_end_};
            return inner;
        }
        auto lit = [&](Value v) {
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Literal;
            e->lit = v;
            next();
            e->span = SourceSpan{begin, prev_end_};
            return e;
        };
        if (t.kind == TokenKind::IntLiteral) return lit(Value::make_int(std::stoll(t.text)));
        if (t.kind == TokenKind::RealLiteral) return lit(Value::make_real(std::stod(t.text)));
        if (t.kind == TokenKind::TimeLiteral) {
            std::int64_t ms = 0;
            parse_time_literal(t.text, ms);
            return lit(Value::make_time(ms));
        }
        if (peek_kw("TRUE")) return lit(Value::make_bool(true));
        if (peek_kw("FALSE")) return lit(Value::make_bool(false));
        if (t.kind == TokenKind::Identifier) {
            if (peek(1).kind == TokenKind::LParen) {
                // function call in expression
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::Call;
                e->callee = next().text;
                next(); // '('
                if (!accept(TokenKind::RParen)) {
                    for (;;) {
                        std::string name;
                        if (peek().kind == TokenKind::Identifier &&
                            peek(1).kind == TokenKind::Assign) {
                            name = next().text;
                            next();
                        }
                        e->arg_names.push_back(name);
                        e->args.push_back(parse_expr());
                        if (accept(TokenKind::Comma)) continue;
                        expect(TokenKind::RParen, "')' after arguments");
                        break;
                    }
                }
                e->span = SourceSpan{begin, prev_end_};
                return e;
            }
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::VarRef;
            e->path.push_back(next().text);
            while (accept(TokenKind::Dot)) {
                e->path.push_back(expect_identifier("member name"));
            }
            e->span = SourceSpan{begin, prev_end_};
            return e;
        }
        error("expected expression");
    }
};

} // namespace

PouAst parse_st(const std::string& source, const std::string& file) {
    Parser p(source, file);
    return p.parse_pou();
}

void parse_globals(const std::string& source, const std::string& file, ProjectAst& into) {
    Parser p(source, file);
    p.parse_globals_file(into);
    into.globals_file = file;
    into.globals_source = source;
}

} // namespace stprio
