#include "stprio/trace.hpp"

#include "stprio/diag.hpp"

#include "json.hpp"

#include <fstream>

namespace stprio {

using nlohmann::json;

std::string trace_to_json(const ExecutionTrace& trace) {
    json doc;
    doc["test_id"] = trace.test_id;
    doc["duration_ms"] = trace.duration_ms;
    doc["version_id"] = checksum_to_hex(trace.version_id);
    json points = json::array();
    for (const TracePointVisit& v : trace.points) {
        json p;
        p["tp"] = v.tp;
        p["visited"] = v.visited;
        p["count"] = v.count;
        p["first_visit_ms"] = v.visited ? json(v.first_visit_ms) : json(nullptr);
        points.push_back(std::move(p));
    }
    doc["points"] = std::move(points);
    return doc.dump(2) + "\n";
}

ExecutionTrace trace_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) fail(ErrorCode::TraceIOError, "malformed trace JSON");
    ExecutionTrace t;
    t.test_id = doc.at("test_id").get<std::string>();
    t.duration_ms = doc.at("duration_ms").get<std::int64_t>();
    t.version_id = std::stoull(doc.at("version_id").get<std::string>(), nullptr, 16);
    for (const json& p : doc.at("points")) {
        TracePointVisit v;
        v.tp = p.at("tp").get<int>();
        v.visited = p.at("visited").get<bool>();
        v.count = p.at("count").get<std::int64_t>();
        if (v.visited) v.first_visit_ms = p.at("first_visit_ms").get<std::int64_t>();
        t.points.push_back(v);
    }
    return t;
}

void save_trace(const ExecutionTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::TraceIOError, "cannot write trace file: " + path);
    out << trace_to_json(trace);
}

ExecutionTrace load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::TraceIOError, "cannot read trace file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return trace_from_json(text);
}

} // namespace stprio
