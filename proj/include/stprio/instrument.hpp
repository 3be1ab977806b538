#pragma once

#include "stprio/model.hpp"
#include "stprio/project.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace stprio {

struct TracePointEntry {
    int tp = -1;
    std::string parent; // owning POU body or action qname
    int block_index = -1;
    std::string file;
    int start = 0;
    int end = 0;

    std::string block_qname() const { return parent + ".bb" + std::to_string(block_index); }
};

struct TracePointDb {
    Checksum version_id = 0;
    std::vector<TracePointEntry> points; // ordered by tp, dense from 0
    std::map<std::string, int> tp_by_block;

    void rebuild_index();
    int find_tp(const std::string& block_qname) const;
};

struct InstrumentedProject {
    std::vector<std::pair<std::string, std::string>> files; // name -> rewritten text
    std::string tasks_cfg;
};

// Inserts the three trace statements in front of every basic block and
// declares the global trace structure `tp` (fields xN/cN/tN per point).
// One trace point per BasicBlock node, ids assigned per instrumentable in
// source order. Throws ModelProjectMismatch if the model was not built from
// this project or if the project is already instrumented.
std::pair<InstrumentedProject, TracePointDb> instrument(const ResolvedProject& project,
                                                        const DependencyModel& model);

// Persists rewritten sources plus tasks.cfg and tpdb.json into out_dir.
void write_instrumented(const InstrumentedProject& instr, const TracePointDb& db,
                        const std::string& out_dir);

std::string tracepoint_db_to_json(const TracePointDb& db);
TracePointDb tracepoint_db_from_json(const std::string& text);
TracePointDb load_tracepoint_db(const std::string& path);

// The exact statement text injected for one trace point.
std::string trace_statements_text(int tp);

} // namespace stprio
