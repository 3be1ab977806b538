#include "stprio/diff.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace stprio {

namespace {

using nlohmann::json;

// Longest common subsequence matching over sequences of strings; returns
// matched index pairs in order.
std::vector<std::pair<int, int>> lcs_match(const std::vector<std::string>& a,
                                           const std::vector<std::string>& b) {
    std::size_t n = a.size(), m = b.size();
    std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            if (a[i] == b[j]) dp[i][j] = dp[i + 1][j + 1] + 1;
            else dp[i][j] = std::max(dp[i + 1][j], dp[i][j + 1]);
        }
    }
    std::vector<std::pair<int, int>> out;
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
        if (a[i] == b[j]) {
            out.emplace_back(static_cast<int>(i), static_cast<int>(j));
            ++i;
            ++j;
        } else if (dp[i + 1][j] >= dp[i][j + 1]) {
            ++i;
        } else {
            ++j;
        }
    }
    return out;
}

bool same_shape(const ParentInfo& a, const ParentInfo& b) {
    if (a.blocks.size() != b.blocks.size()) return false;
    auto edge_key = [](const CfgEdge& e) { return std::tuple(e.from, e.to, e.conditional); };
    std::vector<std::tuple<int, int, bool>> ea, eb;
    for (const CfgEdge& e : a.shape_edges) ea.push_back(edge_key(e));
    for (const CfgEdge& e : b.shape_edges) eb.push_back(edge_key(e));
    std::sort(ea.begin(), ea.end());
    std::sort(eb.begin(), eb.end());
    if (ea != eb) return false;
    if (a.decisions.size() != b.decisions.size()) return false;
    for (std::size_t i = 0; i < a.decisions.size(); ++i) {
        if (a.decisions[i].source != b.decisions[i].source ||
            a.decisions[i].targets != b.decisions[i].targets) {
            return false;
        }
    }
    return true;
}

ParentDiff diff_parent(const ParentInfo& oldp, const ParentInfo& newp) {
    ParentDiff out;
    out.qname = newp.qname;
    if (!same_shape(oldp, newp)) {
        out.structural_fallback = true;
        return out;
    }
    std::vector<std::string> old_texts, new_texts;
    for (const BlockInfo& b : oldp.blocks) old_texts.push_back(b.text_norm);
    for (const BlockInfo& b : newp.blocks) new_texts.push_back(b.text_norm);
    std::vector<std::pair<int, int>> matches = lcs_match(old_texts, new_texts);
    std::set<int> matched_old, matched_new;
    for (const auto& [oi, ni] : matches) {
        out.pairs.push_back(BlockPair{oi, ni, false});
        matched_old.insert(oi);
        matched_new.insert(ni);
    }
    // Equal block counts under an isomorphic shape: the unmatched runs pair
    // up in order and those pairs carry the content changes.
    std::vector<int> rest_old, rest_new;
    for (int i = 0; i < static_cast<int>(old_texts.size()); ++i) {
        if (!matched_old.count(i)) rest_old.push_back(i);
    }
    for (int i = 0; i < static_cast<int>(new_texts.size()); ++i) {
        if (!matched_new.count(i)) rest_new.push_back(i);
    }
    for (std::size_t k = 0; k < rest_old.size(); ++k) {
        out.pairs.push_back(BlockPair{rest_old[k], rest_new[k], true});
        ChangedPairDetail detail;
        detail.old_index = rest_old[k];
        detail.new_index = rest_new[k];
        const BlockInfo& ob = oldp.blocks[static_cast<std::size_t>(rest_old[k])];
        const BlockInfo& nb = newp.blocks[static_cast<std::size_t>(rest_new[k])];
        std::vector<std::string> os, ns;
        for (const StmtSummary& s : ob.stmts) os.push_back(s.text_norm);
        for (const StmtSummary& s : nb.stmts) ns.push_back(s.text_norm);
        std::vector<std::pair<int, int>> stmt_matches = lcs_match(os, ns);
        std::set<int> mo, mn;
        for (const auto& [oi, ni] : stmt_matches) {
            mo.insert(oi);
            mn.insert(ni);
        }
        for (int i = 0; i < static_cast<int>(ns.size()); ++i) {
            if (!mn.count(i)) detail.changed_new_stmt_ordinals.push_back(i);
        }
        for (int i = 0; i < static_cast<int>(os.size()); ++i) {
            if (!mo.count(i)) detail.removed_old_stmts.push_back(ob.stmts[static_cast<std::size_t>(i)]);
        }
        out.changed_pairs.push_back(std::move(detail));
    }
    std::sort(out.pairs.begin(), out.pairs.end(),
              [](const BlockPair& a, const BlockPair& b) { return a.new_index < b.new_index; });
    for (std::size_t i = 0; i < oldp.decisions.size(); ++i) {
        if (oldp.decisions[i].cond_text != newp.decisions[i].cond_text) {
            DecisionChange dc;
            dc.ordinal = static_cast<int>(i);
            dc.old_text = oldp.decisions[i].cond_text;
            dc.new_text = newp.decisions[i].cond_text;
            out.changed_decisions.push_back(std::move(dc));
        }
    }
    return out;
}

PouChange diff_pou(const DependencyModel& om, const PouModelInfo& op, const DependencyModel& nm,
                   const PouModelInfo& np) {
    PouChange out;
    out.name = np.name;
    if (op.is_sfc != np.is_sfc || op.kind != np.kind) {
        // body form changed entirely; every block of the POU counts as changed
        out.structural_fallback = true;
        for (int pi : np.parents) {
            ParentDiff pd;
            pd.qname = nm.parents[static_cast<std::size_t>(pi)].qname;
            pd.structural_fallback = true;
            out.parents.push_back(std::move(pd));
        }
        return out;
    }
    if (!np.is_sfc) {
        const ParentInfo& oldp = om.parents[static_cast<std::size_t>(op.parents[0])];
        const ParentInfo& newp = nm.parents[static_cast<std::size_t>(np.parents[0])];
        ParentDiff pd = diff_parent(oldp, newp);
        out.structural_fallback = pd.structural_fallback;
        out.parents.push_back(std::move(pd));
        return out;
    }

    // SFC: steps by name, then transitions, then actions like ST bodies.
    auto step_of = [](const PouModelInfo& info, const std::string& name) -> const StepInfo* {
        for (const StepInfo& s : info.steps) {
            if (s.name == name) return &s;
        }
        return nullptr;
    };
    for (const StepInfo& s : np.steps) {
        const StepInfo* old_step = step_of(op, s.name);
        if (!old_step) {
            out.added_steps.push_back(s.name);
            for (const std::string& a : s.actions) {
                out.changed_step_action_parents.push_back(np.name + "." + a);
            }
        } else if (old_step->decl_checksum != s.decl_checksum) {
            out.changed_steps.push_back(s.name);
            std::set<std::string> actions(old_step->actions.begin(), old_step->actions.end());
            actions.insert(s.actions.begin(), s.actions.end());
            for (const std::string& a : actions) {
                out.changed_step_action_parents.push_back(np.name + "." + a);
            }
        }
    }
    for (const StepInfo& s : op.steps) {
        if (!step_of(np, s.name)) {
            out.removed_steps.push_back(s.name);
            for (const std::string& a : s.actions) {
                out.changed_step_action_parents.push_back(np.name + "." + a);
            }
        }
    }
    auto transition_of = [](const PouModelInfo& info,
                            const std::string& name) -> const TransitionInfo* {
        for (const TransitionInfo& t : info.transitions) {
            if (t.name == name) return &t;
        }
        return nullptr;
    };
    for (const TransitionInfo& t : np.transitions) {
        const TransitionInfo* old_tr = transition_of(op, t.name);
        if (!old_tr) {
            out.added_transitions.push_back(t.name);
        } else if (old_tr->cond_text != t.cond_text || old_tr->from_steps != t.from_steps ||
                   old_tr->to_steps != t.to_steps) {
            out.changed_transitions.push_back(t.name);
        }
    }
    for (const TransitionInfo& t : op.transitions) {
        if (!transition_of(np, t.name)) {
            out.removed_transitions.push_back(t.name);
            std::vector<std::string> steps = t.from_steps;
            steps.insert(steps.end(), t.to_steps.begin(), t.to_steps.end());
            out.removed_transition_steps.emplace_back(t.name, std::move(steps));
        }
    }
    // Actions: parents beyond index 0 (SFC POUs have no main-body parent).
    auto parent_of = [](const DependencyModel& m, const PouModelInfo& info,
                        const std::string& qname) -> const ParentInfo* {
        for (int pi : info.parents) {
            const ParentInfo& p = m.parents[static_cast<std::size_t>(pi)];
            if (p.qname == qname) return &p;
        }
        return nullptr;
    };
    for (int pi : np.parents) {
        const ParentInfo& newp = nm.parents[static_cast<std::size_t>(pi)];
        const ParentInfo* oldp = parent_of(om, op, newp.qname);
        if (!oldp) {
            out.added_actions.push_back(newp.qname);
            continue;
        }
        std::string old_text, new_text;
        for (const BlockInfo& b : oldp->blocks) old_text += b.text_norm + "\n";
        for (const BlockInfo& b : newp.blocks) new_text += b.text_norm + "\n";
        bool same_decisions = oldp->decisions.size() == newp.decisions.size();
        if (same_decisions) {
            for (std::size_t i = 0; i < oldp->decisions.size(); ++i) {
                if (oldp->decisions[i].cond_text != newp.decisions[i].cond_text) {
                    same_decisions = false;
                    break;
                }
            }
        }
        if (old_text != new_text || !same_decisions) {
            out.parents.push_back(diff_parent(*oldp, newp));
        }
    }
    for (int pi : op.parents) {
        const ParentInfo& oldp = om.parents[static_cast<std::size_t>(pi)];
        if (!parent_of(nm, np, oldp.qname)) out.removed_actions.push_back(oldp.qname);
    }
    return out;
}

} // namespace

bool ChangeSet::empty() const {
    return added_pous.empty() && removed_pous.empty() && modified_pous.empty() &&
           added_globals.empty() && removed_globals.empty() && changed_globals.empty();
}

const PouChange* ChangeSet::find_pou(const std::string& name) const {
    for (const PouChange& p : modified_pous) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

const ParentDiff* ChangeSet::find_parent(const std::string& qname) const {
    for (const PouChange& p : modified_pous) {
        for (const ParentDiff& pd : p.parents) {
            if (pd.qname == qname) return &pd;
        }
    }
    return nullptr;
}

ChangeSet diff_models(const DependencyModel& old_model, const DependencyModel& new_model) {
    ChangeSet out;
    out.old_version = old_model.version_id;
    out.new_version = new_model.version_id;

    // Project level: POUs and globals matched by qualified name; equal names
    // with differing checksums go to the fine-grained pass.
    for (const PouModelInfo& np : new_model.pous) {
        auto it = old_model.pou_info_by_name.find(np.name);
        if (it == old_model.pou_info_by_name.end()) {
            out.added_pous.push_back(np.name);
            continue;
        }
        const PouModelInfo& op = old_model.pous[static_cast<std::size_t>(it->second)];
        if (op.source_checksum != np.source_checksum) {
            out.modified_pous.push_back(diff_pou(old_model, op, new_model, np));
        }
    }
    for (const PouModelInfo& op : old_model.pous) {
        if (!new_model.pou_info_by_name.count(op.name)) out.removed_pous.push_back(op.name);
    }

    auto global_checksum = [](const DependencyModel& m, const std::string& name) {
        const Node* n = m.find(name);
        return n ? n->content_checksum : Checksum(0);
    };
    std::set<std::string> old_globals, new_globals;
    for (const Node& n : old_model.nodes) {
        if (n.kind == NodeKind::GlobalVariable) old_globals.insert(n.qname);
    }
    for (const Node& n : new_model.nodes) {
        if (n.kind == NodeKind::GlobalVariable) new_globals.insert(n.qname);
    }
    for (const std::string& g : new_globals) {
        if (!old_globals.count(g)) out.added_globals.push_back(g);
        else if (global_checksum(old_model, g) != global_checksum(new_model, g)) {
            out.changed_globals.push_back(g);
        }
    }
    for (const std::string& g : old_globals) {
        if (!new_globals.count(g)) out.removed_globals.push_back(g);
    }
    return out;
}

// ---- JSON ----

namespace {

json stmt_summary_to_json(const StmtSummary& s) {
    json js;
    js["kind"] = s.kind == StmtSummary::Kind::Assign ? "assign"
                 : s.kind == StmtSummary::Kind::Call ? "call"
                                                     : "return";
    js["text"] = s.text_norm;
    if (!s.write.empty()) js["write"] = s.write;
    js["reads"] = s.reads;
    if (!s.extra_writes.empty()) js["extra_writes"] = s.extra_writes;
    json calls = json::array();
    for (const StmtSummary::CallInfo& c : s.calls) {
        json jc;
        jc["callee"] = c.callee_qname;
        jc["function"] = c.is_function;
        jc["type"] = c.type_name;
        json params = json::array();
        for (const StmtSummary::CallParam& p : c.params) {
            json jp;
            jp["formal"] = p.formal;
            jp["output"] = p.is_output;
            jp["reads"] = p.reads;
            if (!p.out_target.empty()) jp["target"] = p.out_target;
            params.push_back(std::move(jp));
        }
        jc["params"] = std::move(params);
        calls.push_back(std::move(jc));
    }
    if (!calls.empty()) js["calls"] = std::move(calls);
    return js;
}

StmtSummary stmt_summary_from_json(const json& js) {
    StmtSummary s;
    std::string kind = js.at("kind").get<std::string>();
    s.kind = kind == "assign" ? StmtSummary::Kind::Assign
             : kind == "call" ? StmtSummary::Kind::Call
                              : StmtSummary::Kind::Return;
    s.text_norm = js.at("text").get<std::string>();
    s.write = js.value("write", std::string());
    s.reads = js.at("reads").get<std::vector<std::string>>();
    if (js.contains("extra_writes")) {
        s.extra_writes = js.at("extra_writes").get<std::vector<std::string>>();
    }
    if (js.contains("calls")) {
        for (const json& jc : js.at("calls")) {
            StmtSummary::CallInfo c;
            c.callee_qname = jc.at("callee").get<std::string>();
            c.is_function = jc.at("function").get<bool>();
            c.type_name = jc.at("type").get<std::string>();
            for (const json& jp : jc.at("params")) {
                StmtSummary::CallParam p;
                p.formal = jp.at("formal").get<std::string>();
                p.is_output = jp.at("output").get<bool>();
                p.reads = jp.at("reads").get<std::vector<std::string>>();
                p.out_target = jp.value("target", std::string());
                c.params.push_back(std::move(p));
            }
            s.calls.push_back(std::move(c));
        }
    }
    return s;
}

} // namespace

std::string changeset_to_json(const ChangeSet& changes) {
    json doc;
    doc["old_version_id"] = checksum_to_hex(changes.old_version);
    doc["new_version_id"] = checksum_to_hex(changes.new_version);
    doc["added_pous"] = changes.added_pous;
    doc["removed_pous"] = changes.removed_pous;
    doc["added_globals"] = changes.added_globals;
    doc["removed_globals"] = changes.removed_globals;
    doc["changed_globals"] = changes.changed_globals;
    json pous = json::array();
    for (const PouChange& p : changes.modified_pous) {
        json jp;
        jp["name"] = p.name;
        jp["structural_fallback"] = p.structural_fallback;
        json parents = json::array();
        for (const ParentDiff& pd : p.parents) {
            json jd;
            jd["qname"] = pd.qname;
            jd["structural_fallback"] = pd.structural_fallback;
            json pairs = json::array();
            for (const BlockPair& bp : pd.pairs) {
                pairs.push_back({{"old", bp.old_index}, {"new", bp.new_index},
                                 {"changed", bp.changed}});
            }
            jd["pairs"] = std::move(pairs);
            json decisions = json::array();
            for (const DecisionChange& dc : pd.changed_decisions) {
                decisions.push_back({{"ordinal", dc.ordinal},
                                     {"old_text", dc.old_text},
                                     {"new_text", dc.new_text}});
            }
            jd["changed_decisions"] = std::move(decisions);
            json details = json::array();
            for (const ChangedPairDetail& cd : pd.changed_pairs) {
                json jc;
                jc["old"] = cd.old_index;
                jc["new"] = cd.new_index;
                jc["changed_new_stmts"] = cd.changed_new_stmt_ordinals;
                json removed = json::array();
                for (const StmtSummary& s : cd.removed_old_stmts) {
                    removed.push_back(stmt_summary_to_json(s));
                }
                jc["removed_old_stmts"] = std::move(removed);
                details.push_back(std::move(jc));
            }
            jd["changed_pairs"] = std::move(details);
            parents.push_back(std::move(jd));
        }
        jp["parents"] = std::move(parents);
        jp["added_steps"] = p.added_steps;
        jp["removed_steps"] = p.removed_steps;
        jp["changed_steps"] = p.changed_steps;
        jp["added_transitions"] = p.added_transitions;
        jp["removed_transitions"] = p.removed_transitions;
        jp["changed_transitions"] = p.changed_transitions;
        json rts = json::array();
        for (const auto& [name, steps] : p.removed_transition_steps) {
            rts.push_back({{"name", name}, {"steps", steps}});
        }
        jp["removed_transition_steps"] = std::move(rts);
        jp["added_actions"] = p.added_actions;
        jp["removed_actions"] = p.removed_actions;
        jp["changed_step_action_parents"] = p.changed_step_action_parents;
        pous.push_back(std::move(jp));
    }
    doc["modified_pous"] = std::move(pous);
    return doc.dump(2) + "\n";
}

ChangeSet changeset_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) fail(ErrorCode::TraceIOError, "malformed change-set JSON");
    ChangeSet out;
    out.old_version = std::stoull(doc.at("old_version_id").get<std::string>(), nullptr, 16);
    out.new_version = std::stoull(doc.at("new_version_id").get<std::string>(), nullptr, 16);
    out.added_pous = doc.at("added_pous").get<std::vector<std::string>>();
    out.removed_pous = doc.at("removed_pous").get<std::vector<std::string>>();
    out.added_globals = doc.at("added_globals").get<std::vector<std::string>>();
    out.removed_globals = doc.at("removed_globals").get<std::vector<std::string>>();
    out.changed_globals = doc.at("changed_globals").get<std::vector<std::string>>();
    for (const json& jp : doc.at("modified_pous")) {
        PouChange p;
        p.name = jp.at("name").get<std::string>();
        p.structural_fallback = jp.at("structural_fallback").get<bool>();
        for (const json& jd : jp.at("parents")) {
            ParentDiff pd;
            pd.qname = jd.at("qname").get<std::string>();
            pd.structural_fallback = jd.at("structural_fallback").get<bool>();
            for (const json& jb : jd.at("pairs")) {
                pd.pairs.push_back(BlockPair{jb.at("old").get<int>(), jb.at("new").get<int>(),
                                             jb.at("changed").get<bool>()});
            }
            for (const json& jc : jd.at("changed_decisions")) {
                pd.changed_decisions.push_back(DecisionChange{
                    jc.at("ordinal").get<int>(), jc.at("old_text").get<std::string>(),
                    jc.at("new_text").get<std::string>()});
            }
            for (const json& jc : jd.at("changed_pairs")) {
                ChangedPairDetail cd;
                cd.old_index = jc.at("old").get<int>();
                cd.new_index = jc.at("new").get<int>();
                cd.changed_new_stmt_ordinals = jc.at("changed_new_stmts").get<std::vector<int>>();
                for (const json& jr : jc.at("removed_old_stmts")) {
                    cd.removed_old_stmts.push_back(stmt_summary_from_json(jr));
                }
                pd.changed_pairs.push_back(std::move(cd));
            }
            p.parents.push_back(std::move(pd));
        }
        p.added_steps = jp.at("added_steps").get<std::vector<std::string>>();
        p.removed_steps = jp.at("removed_steps").get<std::vector<std::string>>();
        p.changed_steps = jp.at("changed_steps").get<std::vector<std::string>>();
        p.added_transitions = jp.at("added_transitions").get<std::vector<std::string>>();
        p.removed_transitions = jp.at("removed_transitions").get<std::vector<std::string>>();
        p.changed_transitions = jp.at("changed_transitions").get<std::vector<std::string>>();
        for (const json& jr : jp.at("removed_transition_steps")) {
            p.removed_transition_steps.emplace_back(
                jr.at("name").get<std::string>(),
                jr.at("steps").get<std::vector<std::string>>());
        }
        p.added_actions = jp.at("added_actions").get<std::vector<std::string>>();
        p.removed_actions = jp.at("removed_actions").get<std::vector<std::string>>();
        p.changed_step_action_parents =
            jp.at("changed_step_action_parents").get<std::vector<std::string>>();
        out.modified_pous.push_back(std::move(p));
    }
    return out;
}

ChangeSet load_changeset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::TraceIOError, "cannot read change set: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return changeset_from_json(text);
}

} // namespace stprio
