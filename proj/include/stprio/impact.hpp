#pragma once

#include "stprio/diff.hpp"
#include "stprio/instrument.hpp"

#include <set>
#include <string>
#include <vector>

namespace stprio {

struct Provenance {
    std::string item;
    std::string kind; // block | variable | instance
    std::string rule; // direct | assignment | call | decision | fallback
    std::string via;  // the item that caused the marking ("" for direct)
};

// Directly changed plus impact-propagated items of the new revision, and
// their projection onto the previously tested revision's trace points.
struct ModificationSet {
    Checksum old_version = 0;
    Checksum new_version = 0;
    std::set<std::string> modified_blocks; // new-revision block qnames
    std::set<std::string> modified_variables;
    std::set<std::string> modified_instances;
    std::vector<Provenance> provenance;
    bool depth_limited = false; // propagation hit max_depth somewhere

    std::vector<int> mapped_tp_ids;            // old-revision trace points
    std::vector<std::string> untestable_blocks; // new blocks with no old point
    int tp_universe = 0;
};

// Worklist fixpoint over the three influence rules: assignments mark the
// written variable, calls with modified passed values mark the callee, and
// modified decisions mark their source and target blocks.
//
// max_depth 0 runs the fixpoint unbounded. With a positive cap, variables
// reached at the cap stop propagating: every POU still reading them has all
// of its blocks marked instead, and the result is flagged depth_limited.
ModificationSet impact(const DependencyModel& new_model, const ChangeSet& changes,
                       int max_depth = 0);

// Projects modified blocks onto the old revision's trace points using the
// diff's block pairing. Throws VersionMismatch when the db belongs to a
// different revision than the change set's old side.
void map_to_old_trace_points(ModificationSet& mods, const ChangeSet& changes,
                             const TracePointDb& old_db);

std::string modification_set_to_json(const ModificationSet& mods);
ModificationSet modification_set_from_json(const std::string& text);
ModificationSet load_modification_set(const std::string& path);

} // namespace stprio
