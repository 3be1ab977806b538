#include "stprio/cfg.hpp"

#include "stprio/lexer.hpp"

#include <algorithm>
#include <numeric>

namespace stprio {

namespace {

class CfgBuilder {
public:
    CfgBuilder(const std::string& source) : source_(source) {}

    Cfg build(StList& body, int body_pos) {
        cur_ = new_block(body_pos);
        build_list(body);
        return finish();
    }

private:
    const std::string& source_;
    std::vector<CfgBlock> blocks_;
    std::vector<CfgEdge> edges_;
    std::vector<CfgDecision> decisions_;
    std::vector<int*> patches_; // AST annotation slots holding temp ids
    int cur_ = -1;

    std::string norm(int begin, int end) const {
        return normalize_tokens(source_.substr(static_cast<std::size_t>(begin),
                                               static_cast<std::size_t>(end - begin)));
    }

    int new_block(int insert_pos) {
        CfgBlock b;
        b.index = static_cast<int>(blocks_.size());
        b.insert_pos = insert_pos;
        b.span = SourceSpan{insert_pos, insert_pos};
        blocks_.push_back(std::move(b));
        return static_cast<int>(blocks_.size()) - 1;
    }

    void edge(int from, int to, std::string label, bool conditional, bool back = false) {
        edges_.push_back(CfgEdge{from, to, std::move(label), conditional, back});
    }

    void annotate(int& field, int temp_id) {
        field = temp_id;
        patches_.push_back(&field);
    }

    void append_stmt(Stmt& st) {
        CfgBlock& b = blocks_[static_cast<std::size_t>(cur_)];
        b.stmt_ids.push_back(st.id);
        b.stmts.push_back(&st);
        if (b.span.begin == b.span.end) b.span.begin = st.span.begin;
        b.span.end = st.span.end;
    }

    void build_list(StList& list) {
        for (StmtPtr& stp : list.stmts) {
            Stmt& st = *stp;
            switch (st.kind) {
            case Stmt::Kind::Assign:
            case Stmt::Kind::FbCall:
            case Stmt::Kind::Return:
                append_stmt(st);
                break;
            case Stmt::Kind::If: {
                int source = cur_;
                int join = new_block(st.span.end);
                CfgDecision dec;
                dec.source = source;
                dec.stmt_id = st.id;
                std::string cond_text;
                bool has_else = false;
                for (IfArm& arm : st.arms) {
                    int arm_block = new_block(arm.body_pos);
                    annotate(arm.block, arm_block);
                    dec.targets.push_back(arm_block);
                    std::string label = "ELSE";
                    if (arm.cond) {
                        label = norm(arm.cond->span.begin, arm.cond->span.end);
                        if (!cond_text.empty()) cond_text += " | ";
                        cond_text += label;
                    } else {
                        has_else = true;
                    }
                    edge(source, arm_block, label, true);
                    cur_ = arm_block;
                    build_list(arm.body);
                    edge(cur_, join, "", false);
                }
                if (!has_else) {
                    edge(source, join, "ELSE", true);
                    dec.targets.push_back(join);
                }
                dec.cond_text = cond_text;
                decisions_.push_back(std::move(dec));
                annotate(st.join_block, join);
                cur_ = join;
                break;
            }
            case Stmt::Kind::Case: {
                int source = cur_;
                int join = new_block(st.span.end);
                CfgDecision dec;
                dec.source = source;
                dec.stmt_id = st.id;
                std::string sel = norm(st.selector->span.begin, st.selector->span.end);
                std::string cond_text = sel;
                bool has_else = false;
                for (CaseArm& arm : st.case_arms) {
                    int arm_block = new_block(arm.body_pos);
                    annotate(arm.block, arm_block);
                    dec.targets.push_back(arm_block);
                    std::string label = arm.is_else ? "ELSE" : sel + " = " + arm.label_text;
                    if (arm.is_else) has_else = true;
                    else cond_text += " | " + arm.label_text;
                    edge(source, arm_block, label, true);
                    cur_ = arm_block;
                    build_list(arm.body);
                    edge(cur_, join, "", false);
                }
                if (!has_else) {
                    edge(source, join, "ELSE", true);
                    dec.targets.push_back(join);
                }
                dec.cond_text = cond_text;
                decisions_.push_back(std::move(dec));
                annotate(st.join_block, join);
                cur_ = join;
                break;
            }
            case Stmt::Kind::While:
            case Stmt::Kind::For: {
                int header = new_block(st.span.begin);
                int body = new_block(st.body_pos);
                int join = new_block(st.span.end);
                edge(cur_, header, "", false);
                std::string cond_text = norm(st.decision_begin, st.decision_end);
                edge(header, body, cond_text, true);
                edge(header, join, "ELSE", true);
                CfgDecision dec;
                dec.source = header;
                dec.stmt_id = st.id;
                dec.targets = {body, join};
                dec.cond_text = cond_text;
                decisions_.push_back(std::move(dec));
                annotate(st.header_block, header);
                annotate(st.body_block, body);
                annotate(st.join_block, join);
                cur_ = body;
                build_list(st.body);
                edge(cur_, header, "", false, true);
                cur_ = join;
                break;
            }
            }
        }
    }

    Cfg finish() {
        // Number blocks in source order of their insertion points; creation
        // order breaks ties so probes at a shared offset keep execution order.
        std::vector<int> order(blocks_.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return blocks_[static_cast<std::size_t>(a)].insert_pos <
                   blocks_[static_cast<std::size_t>(b)].insert_pos;
        });
        std::vector<int> remap(blocks_.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            remap[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
        }

        Cfg cfg;
        cfg.blocks.resize(blocks_.size());
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            CfgBlock b = std::move(blocks_[i]);
            b.index = remap[i];
            cfg.blocks[static_cast<std::size_t>(remap[i])] = std::move(b);
        }
        cfg.edges = std::move(edges_);
        for (CfgEdge& e : cfg.edges) {
            e.from = remap[static_cast<std::size_t>(e.from)];
            e.to = remap[static_cast<std::size_t>(e.to)];
        }
        cfg.decisions = std::move(decisions_);
        for (CfgDecision& d : cfg.decisions) {
            d.source = remap[static_cast<std::size_t>(d.source)];
            for (int& t : d.targets) t = remap[static_cast<std::size_t>(t)];
        }
        for (int* p : patches_) *p = remap[static_cast<std::size_t>(*p)];
        cfg.entry = 0;
        return cfg;
    }
};

} // namespace

Cfg build_cfg(PouAst& pou) {
    CfgBuilder b(pou.source);
    return b.build(pou.body, pou.body_pos);
}

Cfg build_action_cfg(PouAst& pou, SfcAction& action) {
    CfgBuilder b(pou.source);
    return b.build(action.body, action.body_pos);
}

} // namespace stprio
