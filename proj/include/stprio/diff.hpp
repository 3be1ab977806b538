#pragma once

#include "stprio/model.hpp"

#include <string>
#include <vector>

namespace stprio {

struct BlockPair {
    int old_index = -1;
    int new_index = -1;
    bool changed = false;
};

struct DecisionChange {
    int ordinal = -1; // construct position within the parent
    std::string old_text;
    std::string new_text;
};

struct ChangedPairDetail {
    int old_index = -1;
    int new_index = -1;
    std::vector<int> changed_new_stmt_ordinals;
    std::vector<StmtSummary> removed_old_stmts;
};

// Fine-grained result for one POU body or SFC action.
struct ParentDiff {
    std::string qname;
    bool structural_fallback = false; // shapes differ: every block counts as changed
    std::vector<BlockPair> pairs;
    std::vector<DecisionChange> changed_decisions;
    std::vector<ChangedPairDetail> changed_pairs;
};

struct PouChange {
    std::string name;
    bool structural_fallback = false; // main body (or body kind) changed shape
    std::vector<ParentDiff> parents;
    // SFC elements, matched by name.
    std::vector<std::string> added_steps, removed_steps, changed_steps;
    std::vector<std::string> added_transitions, removed_transitions, changed_transitions;
    // from/to step names of removed transitions, for adjacency marking
    std::vector<std::pair<std::string, std::vector<std::string>>> removed_transition_steps;
    std::vector<std::string> added_actions, removed_actions;        // parent qnames
    std::vector<std::string> changed_step_action_parents;           // parent qnames
};

struct ChangeSet {
    Checksum old_version = 0;
    Checksum new_version = 0;
    std::vector<std::string> added_pous, removed_pous;
    std::vector<PouChange> modified_pous;
    std::vector<std::string> added_globals, removed_globals, changed_globals;

    bool empty() const;
    const PouChange* find_pou(const std::string& name) const;
    const ParentDiff* find_parent(const std::string& qname) const;
};

// Top-down comparison of two revisions: project-level matching by qualified
// name and checksum, then control-flow comparison of modified POUs.
ChangeSet diff_models(const DependencyModel& old_model, const DependencyModel& new_model);

std::string changeset_to_json(const ChangeSet& changes);
ChangeSet changeset_from_json(const std::string& text);
ChangeSet load_changeset(const std::string& path);

} // namespace stprio
