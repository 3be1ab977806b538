#include "stprio/instrument.hpp"

#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace stprio {

namespace {

using nlohmann::json;

struct Insertion {
    int pos = 0;
    int seq = 0;
    std::string text;
};

} // namespace

void TracePointDb::rebuild_index() {
    tp_by_block.clear();
    for (const TracePointEntry& e : points) {
        tp_by_block.emplace(e.block_qname(), e.tp);
    }
}

int TracePointDb::find_tp(const std::string& block_qname) const {
    auto it = tp_by_block.find(block_qname);
    return it == tp_by_block.end() ? -1 : it->second;
}

std::string trace_statements_text(int tp) {
    std::string n = std::to_string(tp);
    return " IF NOT tp.x" + n + " THEN tp.t" + n + " := __NOW(); END_IF; tp.x" + n +
           " := TRUE; tp.c" + n + " := tp.c" + n + " + 1;\n";
}

std::pair<InstrumentedProject, TracePointDb> instrument(const ResolvedProject& project,
                                                        const DependencyModel& model) {
    if (model.version_id != project.version_id) {
        fail(ErrorCode::ModelProjectMismatch,
             "dependency model was built from a different project revision");
    }
    for (const std::string& s : project.struct_global_names) {
        if (s == "tp") {
            fail(ErrorCode::ModelProjectMismatch,
                 "project already declares a trace structure 'tp'");
        }
    }
    if (project.global_index.count("tp")) {
        fail(ErrorCode::ModelProjectMismatch, "global name 'tp' is reserved for tracing");
    }

    TracePointDb db;
    db.version_id = project.version_id;

    // Trace point ids follow the instrumentable iteration; insertions are
    // applied per file in source order with a running offset.
    std::map<std::string, std::vector<Insertion>> insertions_by_file;
    int tp_counter = 0;
    int seq = 0;
    for (const ParentInfo& parent : model.parents) {
        const PouAst& pou = project.pou(parent.pou_index);
        for (const BlockInfo& block : parent.blocks) {
            TracePointEntry entry;
            entry.tp = tp_counter;
            entry.parent = parent.qname;
            entry.block_index = block.index;
            entry.file = pou.file;
            entry.start = block.span.begin;
            entry.end = block.span.end;
            db.points.push_back(entry);
            insertions_by_file[pou.file].push_back(
                Insertion{block.insert_pos, seq++, trace_statements_text(tp_counter)});
            ++tp_counter;
        }
    }
    db.rebuild_index();

    InstrumentedProject out;
    for (const PouAst& pou : project.ast.pous) {
        std::string text = pou.source;
        auto it = insertions_by_file.find(pou.file);
        if (it != insertions_by_file.end()) {
            std::vector<Insertion>& ins = it->second;
            std::stable_sort(ins.begin(), ins.end(), [](const Insertion& a, const Insertion& b) {
                if (a.pos != b.pos) return a.pos < b.pos;
                return a.seq < b.seq;
            });
            int offset = 0;
            for (const Insertion& i : ins) {
                text.insert(static_cast<std::size_t>(i.pos + offset), i.text);
                offset += static_cast<int>(i.text.size());
            }
        }
        out.files.emplace_back(pou.file, std::move(text));
    }

    // Trace structure declaration appended to the globals file.
    std::string globals = project.ast.globals_source;
    std::string decl = "\nTYPE TRACE : STRUCT\n";
    for (int i = 0; i < tp_counter; ++i) {
        decl += "    x" + std::to_string(i) + " : BOOL; c" + std::to_string(i) +
                " : DINT; t" + std::to_string(i) + " : TIME;\n";
    }
    decl += "END_STRUCT END_TYPE\n\nVAR_GLOBAL\n    tp : TRACE;\nEND_VAR\n";
    globals += decl;
    std::string globals_name =
        project.ast.globals_file.empty() ? "globals.st" : project.ast.globals_file;
    out.files.emplace_back(globals_name, std::move(globals));

    std::string tasks;
    for (const TaskDecl& t : project.ast.tasks) {
        tasks += "task " + t.name + " program " + t.root + " cycle_ms " +
                 std::to_string(t.cycle_ms) + "\n";
    }
    out.tasks_cfg = std::move(tasks);
    return {std::move(out), std::move(db)};
}

void write_instrumented(const InstrumentedProject& instr, const TracePointDb& db,
                        const std::string& out_dir) {
    fs::create_directories(out_dir);
    for (const auto& [name, text] : instr.files) {
        std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
        if (!f) fail(ErrorCode::TraceIOError, "cannot write " + name + " in " + out_dir);
        f << text;
    }
    std::ofstream t(fs::path(out_dir) / "tasks.cfg", std::ios::binary);
    t << instr.tasks_cfg;
    std::ofstream d(fs::path(out_dir) / "tpdb.json", std::ios::binary);
    d << tracepoint_db_to_json(db);
}

std::string tracepoint_db_to_json(const TracePointDb& db) {
    json doc;
    doc["version_id"] = checksum_to_hex(db.version_id);
    json points = json::array();
    for (const TracePointEntry& e : db.points) {
        json p;
        p["tp"] = e.tp;
        p["pou"] = e.parent;
        p["block_index"] = e.block_index;
        p["file"] = e.file;
        p["start"] = e.start;
        p["end"] = e.end;
        points.push_back(std::move(p));
    }
    doc["points"] = std::move(points);
    return doc.dump(2) + "\n";
}

TracePointDb tracepoint_db_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) fail(ErrorCode::TraceIOError, "malformed trace-point db JSON");
    TracePointDb db;
    db.version_id = std::stoull(doc.at("version_id").get<std::string>(), nullptr, 16);
    for (const json& p : doc.at("points")) {
        TracePointEntry e;
        e.tp = p.at("tp").get<int>();
        e.parent = p.at("pou").get<std::string>();
        e.block_index = p.at("block_index").get<int>();
        e.file = p.at("file").get<std::string>();
        e.start = p.at("start").get<int>();
        e.end = p.at("end").get<int>();
        db.points.push_back(std::move(e));
    }
    for (std::size_t i = 0; i < db.points.size(); ++i) {
        if (db.points[i].tp != static_cast<int>(i)) {
            fail(ErrorCode::TraceIOError, "trace-point ids are not dense");
        }
    }
    db.rebuild_index();
    return db;
}

TracePointDb load_tracepoint_db(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::TraceIOError, "cannot read trace-point db: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return tracepoint_db_from_json(text);
}

} // namespace stprio
