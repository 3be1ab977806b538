#include "stprio/impact.hpp"

#include "json.hpp"

#include <algorithm>
#include <deque>
#include <fstream>

namespace stprio {

namespace {

using nlohmann::json;

struct StmtRef {
    int parent = -1;
    int block = -1;
    int stmt = -1;
};

struct DecisionRef {
    int parent = -1;
    int ordinal = -1;
};

struct TransitionRef {
    int pou = -1;
    int ordinal = -1;
};

class ImpactEngine {
public:
    ImpactEngine(const DependencyModel& model, const ChangeSet& changes, int max_depth)
        : model_(model), changes_(changes), max_depth_(max_depth) {
        build_indexes();
    }

    ModificationSet run() {
        mods_.old_version = changes_.old_version;
        mods_.new_version = changes_.new_version;
        seed();
        drain();
        return std::move(mods_);
    }

private:
    const DependencyModel& model_;
    const ChangeSet& changes_;
    int max_depth_ = 0;
    ModificationSet mods_;

    std::map<std::string, std::vector<StmtRef>> readers_;
    std::map<std::string, std::vector<DecisionRef>> decision_readers_;
    std::map<std::string, std::vector<TransitionRef>> transition_readers_;
    std::set<std::pair<int, int>> visited_stmts_; // (parent, stmt position key)
    std::set<std::pair<int, int>> visited_decisions_;
    std::set<std::pair<int, int>> visited_transitions_;
    std::deque<std::pair<std::string, int>> var_queue_;

    const StmtSummary& stmt_at(const StmtRef& ref) const {
        return model_.parents[static_cast<std::size_t>(ref.parent)]
            .blocks[static_cast<std::size_t>(ref.block)]
            .stmts[static_cast<std::size_t>(ref.stmt)];
    }

    void build_indexes() {
        for (std::size_t p = 0; p < model_.parents.size(); ++p) {
            const ParentInfo& parent = model_.parents[p];
            for (std::size_t b = 0; b < parent.blocks.size(); ++b) {
                const BlockInfo& block = parent.blocks[b];
                for (std::size_t s = 0; s < block.stmts.size(); ++s) {
                    for (const std::string& r : block.stmts[s].reads) {
                        readers_[r].push_back(StmtRef{static_cast<int>(p), static_cast<int>(b),
                                                      static_cast<int>(s)});
                    }
                }
            }
            for (std::size_t d = 0; d < parent.decisions.size(); ++d) {
                for (const std::string& r : parent.decisions[d].reads) {
                    decision_readers_[r].push_back(
                        DecisionRef{static_cast<int>(p), static_cast<int>(d)});
                }
            }
        }
        for (std::size_t pi = 0; pi < model_.pous.size(); ++pi) {
            const PouModelInfo& pou = model_.pous[pi];
            for (std::size_t t = 0; t < pou.transitions.size(); ++t) {
                for (const std::string& r : pou.transitions[t].reads) {
                    transition_readers_[r].push_back(
                        TransitionRef{static_cast<int>(pi), static_cast<int>(t)});
                }
            }
        }
    }

    void note(const std::string& item, const std::string& kind, const std::string& rule,
              const std::string& via) {
        mods_.provenance.push_back(Provenance{item, kind, rule, via});
    }

    void mark_block(const std::string& qname, const std::string& rule, const std::string& via) {
        if (mods_.modified_blocks.insert(qname).second) note(qname, "block", rule, via);
    }

    void mark_block_ref(int parent, int block, const std::string& rule, const std::string& via) {
        mark_block(model_.parents[static_cast<std::size_t>(parent)]
                       .blocks[static_cast<std::size_t>(block)]
                       .qname,
                   rule, via);
    }

    void mark_variable(const std::string& qname, const std::string& rule,
                       const std::string& via, int depth) {
        if (qname.empty()) return;
        if (mods_.modified_variables.insert(qname).second) {
            note(qname, "variable", rule, via);
            var_queue_.emplace_back(qname, depth);
        }
    }

    void mark_instance(const std::string& qname, const std::string& type_name, int callee_pou,
                       const std::string& via, int depth) {
        if (!mods_.modified_instances.insert(qname).second) return;
        note(qname, "instance", "call", via);
        // Outputs of a modified instance carry its behavior to the readers.
        std::vector<std::string> outputs;
        if (callee_pou < 0) {
            outputs = {"Q", "ET"};
        } else {
            auto it = model_.pou_info_by_name.find(type_name);
            if (it != model_.pou_info_by_name.end()) {
                outputs = model_.pous[static_cast<std::size_t>(it->second)].output_vars;
            }
        }
        for (const std::string& field : outputs) {
            std::string q = qname + "." + field;
            if (readers_.count(q) || decision_readers_.count(q) ||
                transition_readers_.count(q)) {
                mark_variable(q, "call", qname, depth);
            }
        }
    }

    // Per-statement influence analysis. `cause` is empty for direct changes;
    // `depth` is the propagation distance of whatever this analysis marks.
    void analyze_statement(const StmtRef& ref, const std::string& cause, int depth) {
        const ParentInfo& parent = model_.parents[static_cast<std::size_t>(ref.parent)];
        const BlockInfo& block = parent.blocks[static_cast<std::size_t>(ref.block)];
        const StmtSummary& s = block.stmts[static_cast<std::size_t>(ref.stmt)];
        mark_block(block.qname, cause.empty() ? "direct" : "assignment", cause);
        if (s.kind == StmtSummary::Kind::Assign) {
            mark_variable(s.write, "assignment", cause.empty() ? block.qname : cause, depth);
        }
        for (const std::string& w : s.extra_writes) {
            mark_variable(w, "assignment", cause.empty() ? block.qname : cause, depth);
        }
        for (const StmtSummary::CallInfo& c : s.calls) {
            bool any_param_modified = false;
            for (const StmtSummary::CallParam& p : c.params) {
                if (p.is_output) continue;
                bool param_modified = cause.empty();
                if (!param_modified) {
                    param_modified =
                        std::find(p.reads.begin(), p.reads.end(), cause) != p.reads.end();
                }
                if (param_modified) {
                    any_param_modified = true;
                    // the corresponding formal input inside the callee
                    mark_variable(c.type_name + "." + p.formal, "call", c.callee_qname, depth);
                }
            }
            if (any_param_modified) {
                mark_instance(c.callee_qname, c.type_name, c.callee_pou,
                              cause.empty() ? block.qname : cause, depth);
            }
        }
    }

    void analyze_detached_stmt(const StmtSummary& s, const std::string& via) {
        // Removed statements: their effects are gone, which modifies every
        // variable they used to assign.
        if (s.kind == StmtSummary::Kind::Assign) mark_variable(s.write, "assignment", via, 0);
        for (const std::string& w : s.extra_writes) mark_variable(w, "assignment", via, 0);
        for (const StmtSummary::CallInfo& c : s.calls) {
            if (!c.is_function) {
                mark_instance(c.callee_qname, c.type_name, c.callee_pou, via, 0);
                for (const StmtSummary::CallParam& p : c.params) {
                    if (!p.is_output) {
                        mark_variable(c.type_name + "." + p.formal, "call", via, 0);
                    }
                }
            }
        }
    }

    void mark_decision(const DecisionRef& ref, const std::string& via) {
        if (!visited_decisions_.insert({ref.parent, ref.ordinal}).second) return;
        const ParentInfo& parent = model_.parents[static_cast<std::size_t>(ref.parent)];
        const DecisionInfo& d = parent.decisions[static_cast<std::size_t>(ref.ordinal)];
        mark_block_ref(ref.parent, d.source, "decision", via);
        for (int t : d.targets) mark_block_ref(ref.parent, t, "decision", via);
    }

    void mark_transition(const TransitionRef& ref, const std::string& via) {
        if (!visited_transitions_.insert({ref.pou, ref.ordinal}).second) return;
        const PouModelInfo& pou = model_.pous[static_cast<std::size_t>(ref.pou)];
        const TransitionInfo& tr = pou.transitions[static_cast<std::size_t>(ref.ordinal)];
        note(tr.qname, "transition", via.empty() ? "direct" : "decision", via);
        mark_step_actions(pou, tr.from_steps, tr.qname);
        mark_step_actions(pou, tr.to_steps, tr.qname);
    }

    void mark_step_actions(const PouModelInfo& pou, const std::vector<std::string>& steps,
                           const std::string& via) {
        for (const std::string& step_name : steps) {
            for (const StepInfo& step : pou.steps) {
                if (step.name != step_name) continue;
                for (const std::string& action : step.actions) {
                    mark_parent_blocks(pou.name + "." + action, "decision", via);
                }
            }
        }
    }

    void mark_parent_blocks(const std::string& parent_qname, const std::string& rule,
                            const std::string& via) {
        auto it = model_.parent_by_qname.find(parent_qname);
        if (it == model_.parent_by_qname.end()) return;
        const ParentInfo& parent = model_.parents[static_cast<std::size_t>(it->second)];
        for (const BlockInfo& b : parent.blocks) mark_block(b.qname, rule, via);
    }

    void seed_parent_all(const ParentInfo& parent, const std::string& rule) {
        for (std::size_t b = 0; b < parent.blocks.size(); ++b) {
            mark_block(parent.blocks[b].qname, rule, "");
            for (std::size_t s = 0; s < parent.blocks[b].stmts.size(); ++s) {
                StmtRef ref{model_.parent_by_qname.at(parent.qname), static_cast<int>(b),
                            static_cast<int>(s)};
                if (visited_stmts_.insert({ref.parent, pack(ref)}).second) {
                    analyze_statement(ref, "", 0);
                }
            }
        }
    }

    static int pack(const StmtRef& ref) { return ref.block * 4096 + ref.stmt; }

    void seed() {
        for (const std::string& g : changes_.changed_globals) {
            mark_variable(g, "direct", "", 0);
        }
        for (const std::string& g : changes_.added_globals) mark_variable(g, "direct", "", 0);

        for (const std::string& name : changes_.added_pous) {
            auto it = model_.pou_info_by_name.find(name);
            if (it == model_.pou_info_by_name.end()) continue;
            for (int pi : model_.pous[static_cast<std::size_t>(it->second)].parents) {
                seed_parent_all(model_.parents[static_cast<std::size_t>(pi)], "direct");
            }
        }

        for (const PouChange& pc : changes_.modified_pous) {
            auto pou_it = model_.pou_info_by_name.find(pc.name);
            if (pou_it == model_.pou_info_by_name.end()) continue;
            const PouModelInfo& pou = model_.pous[static_cast<std::size_t>(pou_it->second)];

            for (const ParentDiff& pd : pc.parents) {
                auto it = model_.parent_by_qname.find(pd.qname);
                if (it == model_.parent_by_qname.end()) continue;
                const ParentInfo& parent = model_.parents[static_cast<std::size_t>(it->second)];
                if (pd.structural_fallback) {
                    seed_parent_all(parent, "fallback");
                    continue;
                }
                for (const ChangedPairDetail& cd : pd.changed_pairs) {
                    mark_block(parent.blocks[static_cast<std::size_t>(cd.new_index)].qname,
                               "direct", "");
                    for (int ordinal : cd.changed_new_stmt_ordinals) {
                        StmtRef ref{it->second, cd.new_index, ordinal};
                        if (visited_stmts_.insert({ref.parent, pack(ref)}).second) {
                            analyze_statement(ref, "", 0);
                        }
                    }
                    for (const StmtSummary& removed : cd.removed_old_stmts) {
                        analyze_detached_stmt(
                            removed,
                            parent.blocks[static_cast<std::size_t>(cd.new_index)].qname);
                    }
                }
                for (const DecisionChange& dc : pd.changed_decisions) {
                    mark_decision(DecisionRef{it->second, dc.ordinal}, "");
                }
            }

            auto transition_ordinal = [&](const std::string& name) {
                for (std::size_t t = 0; t < pou.transitions.size(); ++t) {
                    if (pou.transitions[t].name == name) return static_cast<int>(t);
                }
                return -1;
            };
            for (const std::string& name : pc.changed_transitions) {
                int t = transition_ordinal(name);
                if (t >= 0) mark_transition(TransitionRef{pou_it->second, t}, "");
            }
            for (const std::string& name : pc.added_transitions) {
                int t = transition_ordinal(name);
                if (t >= 0) mark_transition(TransitionRef{pou_it->second, t}, "");
            }
            for (const auto& [name, steps] : pc.removed_transition_steps) {
                mark_step_actions(pou, steps, pc.name + "." + name);
            }
            for (const std::string& parent_qname : pc.changed_step_action_parents) {
                mark_parent_blocks(parent_qname, "direct", "");
            }
            for (const std::string& parent_qname : pc.added_actions) {
                auto it = model_.parent_by_qname.find(parent_qname);
                if (it != model_.parent_by_qname.end()) {
                    seed_parent_all(model_.parents[static_cast<std::size_t>(it->second)],
                                    "direct");
                }
            }
        }
    }

    void drain() {
        while (!var_queue_.empty()) {
            auto [var, depth] = var_queue_.front();
            var_queue_.pop_front();
            if (max_depth_ > 0 && depth >= max_depth_) {
                depth_fallback(var);
                continue;
            }
            auto rit = readers_.find(var);
            if (rit != readers_.end()) {
                for (const StmtRef& ref : rit->second) {
                    // a statement may be re-analyzed once per causing variable
                    analyze_statement_for_cause(ref, var, depth + 1);
                }
            }
            auto dit = decision_readers_.find(var);
            if (dit != decision_readers_.end()) {
                for (const DecisionRef& ref : dit->second) mark_decision(ref, var);
            }
            auto tit = transition_readers_.find(var);
            if (tit != transition_readers_.end()) {
                for (const TransitionRef& ref : tit->second) mark_transition(ref, var);
            }
        }
    }

    // Propagation cap: every POU still reading the variable is marked whole.
    void depth_fallback(const std::string& var) {
        auto mark_pou_of_parent = [&](int parent_index) {
            mods_.depth_limited = true;
            int pou = model_.parents[static_cast<std::size_t>(parent_index)].pou_index;
            const PouModelInfo& info = model_.pous[static_cast<std::size_t>(pou)];
            for (int pi : info.parents) {
                for (const BlockInfo& b : model_.parents[static_cast<std::size_t>(pi)].blocks) {
                    mark_block(b.qname, "depth-fallback", var);
                }
            }
        };
        auto rit = readers_.find(var);
        if (rit != readers_.end()) {
            for (const StmtRef& ref : rit->second) mark_pou_of_parent(ref.parent);
        }
        auto dit = decision_readers_.find(var);
        if (dit != decision_readers_.end()) {
            for (const DecisionRef& ref : dit->second) mark_pou_of_parent(ref.parent);
        }
        auto tit = transition_readers_.find(var);
        if (tit != transition_readers_.end()) {
            for (const TransitionRef& ref : tit->second) {
                mods_.depth_limited = true;
                const PouModelInfo& info = model_.pous[static_cast<std::size_t>(ref.pou)];
                for (int pi : info.parents) {
                    for (const BlockInfo& b :
                         model_.parents[static_cast<std::size_t>(pi)].blocks) {
                        mark_block(b.qname, "depth-fallback", var);
                    }
                }
            }
        }
    }

    std::set<std::tuple<int, int, std::string>> stmt_cause_seen_;

    void analyze_statement_for_cause(const StmtRef& ref, const std::string& cause, int depth) {
        if (!stmt_cause_seen_.insert({ref.parent, pack(ref), cause}).second) return;
        analyze_statement(ref, cause, depth);
    }
};

} // namespace

ModificationSet impact(const DependencyModel& new_model, const ChangeSet& changes,
                       int max_depth) {
    if (new_model.version_id != changes.new_version) {
        fail(ErrorCode::VersionMismatch,
             "change set was computed against a different new revision");
    }
    ImpactEngine engine(new_model, changes, max_depth);
    return engine.run();
}

void map_to_old_trace_points(ModificationSet& mods, const ChangeSet& changes,
                             const TracePointDb& old_db) {
    if (old_db.version_id != changes.old_version) {
        fail(ErrorCode::VersionMismatch,
             "trace-point db belongs to a different revision than the change set");
    }
    mods.tp_universe = static_cast<int>(old_db.points.size());
    std::set<int> tps;
    std::set<std::string> untestable;

    auto parent_and_index = [](const std::string& block_qname, std::string& parent, int& index) {
        std::size_t pos = block_qname.rfind(".bb");
        if (pos == std::string::npos) return false;
        parent = block_qname.substr(0, pos);
        index = std::atoi(block_qname.c_str() + pos + 3);
        return true;
    };

    auto all_parent_tps = [&](const std::string& parent) {
        for (const TracePointEntry& e : old_db.points) {
            if (e.parent == parent) tps.insert(e.tp);
        }
    };

    std::set<std::string> added_pous(changes.added_pous.begin(), changes.added_pous.end());

    for (const std::string& block : mods.modified_blocks) {
        std::string parent;
        int index = 0;
        if (!parent_and_index(block, parent, index)) continue;
        std::string pou_name = parent.substr(0, parent.find('.'));
        if (added_pous.count(pou_name)) {
            untestable.insert(block);
            continue;
        }
        const ParentDiff* pd = changes.find_parent(parent);
        const PouChange* pc = changes.find_pou(pou_name);
        if (pc) {
            // new actions of a modified SFC POU have no old counterpart
            if (std::find(pc->added_actions.begin(), pc->added_actions.end(), parent) !=
                pc->added_actions.end()) {
                untestable.insert(block);
                continue;
            }
            if (pc->structural_fallback) {
                all_parent_tps(parent);
                continue;
            }
        }
        if (pd) {
            if (pd->structural_fallback) {
                all_parent_tps(parent);
                continue;
            }
            int old_index = -1;
            for (const BlockPair& pair : pd->pairs) {
                if (pair.new_index == index) {
                    old_index = pair.old_index;
                    break;
                }
            }
            if (old_index < 0) {
                untestable.insert(block);
                continue;
            }
            int tp = old_db.find_tp(parent + ".bb" + std::to_string(old_index));
            if (tp >= 0) tps.insert(tp);
            else untestable.insert(block);
            continue;
        }
        // POU (or action) untouched by the diff: identity mapping.
        int tp = old_db.find_tp(block);
        if (tp >= 0) tps.insert(tp);
        else untestable.insert(block);
    }

    // Tests that traversed removed code must be re-run.
    for (const std::string& pou : changes.removed_pous) {
        for (const TracePointEntry& e : old_db.points) {
            if (e.parent == pou || e.parent.rfind(pou + ".", 0) == 0) tps.insert(e.tp);
        }
    }
    for (const PouChange& pc : changes.modified_pous) {
        for (const std::string& parent : pc.removed_actions) all_parent_tps(parent);
        for (const ParentDiff& pd : pc.parents) {
            if (pd.structural_fallback) continue;
            std::set<int> paired_old;
            for (const BlockPair& pair : pd.pairs) paired_old.insert(pair.old_index);
            for (const TracePointEntry& e : old_db.points) {
                if (e.parent == pd.qname && !paired_old.count(e.block_index)) tps.insert(e.tp);
            }
        }
    }

    mods.mapped_tp_ids.assign(tps.begin(), tps.end());
    mods.untestable_blocks.assign(untestable.begin(), untestable.end());
}

std::string modification_set_to_json(const ModificationSet& mods) {
    json doc;
    doc["old_version_id"] = checksum_to_hex(mods.old_version);
    doc["new_version_id"] = checksum_to_hex(mods.new_version);
    doc["modified_blocks"] = std::vector<std::string>(mods.modified_blocks.begin(),
                                                      mods.modified_blocks.end());
    doc["modified_variables"] = std::vector<std::string>(mods.modified_variables.begin(),
                                                         mods.modified_variables.end());
    doc["modified_instances"] = std::vector<std::string>(mods.modified_instances.begin(),
                                                         mods.modified_instances.end());
    json prov = json::array();
    for (const Provenance& p : mods.provenance) {
        prov.push_back({{"item", p.item}, {"kind", p.kind}, {"rule", p.rule}, {"via", p.via}});
    }
    doc["provenance"] = std::move(prov);
    doc["depth_limited"] = mods.depth_limited;
    doc["mapped_tp_ids"] = mods.mapped_tp_ids;
    doc["untestable_blocks"] = mods.untestable_blocks;
    doc["tp_universe"] = mods.tp_universe;
    return doc.dump(2) + "\n";
}

ModificationSet modification_set_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) fail(ErrorCode::TraceIOError, "malformed modification-set JSON");
    ModificationSet mods;
    mods.old_version = std::stoull(doc.at("old_version_id").get<std::string>(), nullptr, 16);
    mods.new_version = std::stoull(doc.at("new_version_id").get<std::string>(), nullptr, 16);
    for (const auto& b : doc.at("modified_blocks")) mods.modified_blocks.insert(b.get<std::string>());
    for (const auto& v : doc.at("modified_variables")) {
        mods.modified_variables.insert(v.get<std::string>());
    }
    for (const auto& i : doc.at("modified_instances")) {
        mods.modified_instances.insert(i.get<std::string>());
    }
    for (const json& p : doc.at("provenance")) {
        mods.provenance.push_back(Provenance{p.at("item").get<std::string>(),
                                             p.at("kind").get<std::string>(),
                                             p.at("rule").get<std::string>(),
                                             p.at("via").get<std::string>()});
    }
    mods.depth_limited = doc.value("depth_limited", false);
    mods.mapped_tp_ids = doc.at("mapped_tp_ids").get<std::vector<int>>();
    mods.untestable_blocks = doc.at("untestable_blocks").get<std::vector<std::string>>();
    mods.tp_universe = doc.at("tp_universe").get<int>();
    return mods;
}

ModificationSet load_modification_set(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::TraceIOError, "cannot read modification set: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return modification_set_from_json(text);
}

} // namespace stprio
