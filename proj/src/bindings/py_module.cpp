#include "stprio/diff.hpp"
#include "stprio/impact.hpp"
#include "stprio/instrument.hpp"
#include "stprio/interp.hpp"
#include "stprio/lexer.hpp"
#include "stprio/model.hpp"
#include "stprio/parser.hpp"
#include "stprio/prioritize.hpp"
#include "stprio/project.hpp"
#include "stprio/runner.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace stprio;

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::TraceIOError, "cannot write " + path);
    out << text;
}

struct Loaded {
    ResolvedProject project;
    DependencyModel model;
};

Loaded load(const std::string& dir) {
    Loaded out{resolve(load_project(dir)), {}};
    out.model = build_dependency_model(out.project);
    return out;
}

std::string py_checksum(const std::string& text) { return checksum_to_hex(checksum(text)); }

std::string py_build_model(const std::string& proj_dir) {
    return model_to_json(load(proj_dir).model);
}

int py_instrument(const std::string& proj_dir, const std::string& out_dir) {
    Loaded loaded = load(proj_dir);
    auto [instr, db] = instrument(loaded.project, loaded.model);
    write_instrumented(instr, db, out_dir);
    return static_cast<int>(db.points.size());
}

std::string py_run_suite(const std::string& instr_dir, const std::string& suite_path,
                         const std::string& report_path, const std::string& traces_dir) {
    ResolvedProject instr = resolve(load_project(instr_dir));
    TracePointDb db = load_tracepoint_db((fs::path(instr_dir) / "tpdb.json").string());
    std::vector<TestCase> suite = load_suite(suite_path);
    auto [report, traces] = run_suite(instr, db, suite);
    std::string text = report_to_json(report);
    if (!report_path.empty()) write_file(report_path, text);
    if (!traces_dir.empty()) {
        fs::create_directories(traces_dir);
        for (const ExecutionTrace& t : traces) {
            save_trace(t, (fs::path(traces_dir) / ("trace_" + t.test_id + ".json")).string());
        }
    }
    return text;
}

std::string py_diff(const std::string& old_dir, const std::string& new_dir) {
    Loaded o = load(old_dir);
    Loaded n = load(new_dir);
    return changeset_to_json(diff_models(o.model, n.model));
}

std::string py_impact(const std::string& new_dir, const std::string& changes_json,
                      const std::string& old_db_path) {
    Loaded n = load(new_dir);
    ChangeSet changes = changeset_from_json(changes_json);
    TracePointDb old_db = load_tracepoint_db(old_db_path);
    ModificationSet mods = impact(n.model, changes);
    map_to_old_trace_points(mods, changes, old_db);
    return modification_set_to_json(mods);
}

std::string py_prioritize(const std::string& strategy, const std::string& mods_json,
                          const std::string& report_json, const std::string& traces_dir) {
    ModificationSet mods = modification_set_from_json(mods_json);
    TestReport report = report_from_json(report_json);
    if (report.version_id != mods.old_version) {
        fail(ErrorCode::VersionMismatch,
             "report belongs to a different revision than the modification set");
    }
    std::vector<TestTraceData> tests;
    for (const TestResult& r : report.tests) {
        ExecutionTrace trace =
            load_trace((fs::path(traces_dir) / ("trace_" + r.id + ".json")).string());
        TestTraceData t;
        t.id = r.id;
        t.duration_ms = r.duration_ms;
        t.counts.assign(trace.points.size(), 0);
        t.first_visit.assign(trace.points.size(), -1);
        for (const TracePointVisit& v : trace.points) {
            t.counts[static_cast<std::size_t>(v.tp)] = v.count;
            if (v.visited) t.first_visit[static_cast<std::size_t>(v.tp)] = v.first_visit_ms;
        }
        tests.push_back(std::move(t));
    }
    std::set<int> mod_tps(mods.mapped_tp_ids.begin(), mods.mapped_tp_ids.end());
    PrioritizedPlan plan;
    if (strategy == "simple") plan = prioritize_simple(tests, mod_tps);
    else if (strategy == "intensity") plan = prioritize_intensity(tests, mod_tps);
    else if (strategy == "mttc") plan = prioritize_mttc(tests, mod_tps);
    else fail(ErrorCode::Usage, "unknown strategy '" + strategy + "'");
    plan.version_id = mods.old_version;
    return plan_to_json(plan);
}

bool py_compare_original(const std::string& instr_dir, const std::string& original_dir,
                         const std::string& suite_path) {
    ResolvedProject instr = resolve(load_project(instr_dir));
    TracePointDb db = load_tracepoint_db((fs::path(instr_dir) / "tpdb.json").string());
    Loaded original = load(original_dir);
    SuiteComparison cmp =
        run_suite_compared(instr, db, load_suite(suite_path), original.project, original.model);
    if (!cmp.ok) throw std::runtime_error(cmp.detail);
    return true;
}

} // namespace

PYBIND11_MODULE(_stprio, m) {
    m.doc() = "regression-test prioritization for ST/SFC control projects";

    m.def("checksum", &py_checksum, py::arg("text"),
          "64-bit content checksum of normalized source text, as hex");
    m.def("normalize", &normalize_tokens, py::arg("text"),
          "canonical single-spaced token text");
    m.def("parse_pou", [](const std::string& text) { return render_pou(parse_st(text)); },
          py::arg("text"), "parse one POU and return its pretty-printed form");
    m.def("build_model_json", &py_build_model, py::arg("project_dir"),
          "dependency model of a project directory as a JSON document");
    m.def("instrument_project", &py_instrument, py::arg("project_dir"), py::arg("out_dir"),
          "write instrumented sources plus tpdb.json; returns the trace point count");
    m.def("run_suite", &py_run_suite, py::arg("instrumented_dir"), py::arg("suite_path"),
          py::arg("report_path") = "", py::arg("traces_dir") = "",
          "execute a suite and return the report JSON");
    m.def("diff_projects", &py_diff, py::arg("old_dir"), py::arg("new_dir"),
          "coarse plus fine change identification; returns the change-set JSON");
    m.def("impact_analysis", &py_impact, py::arg("new_dir"), py::arg("changes_json"),
          py::arg("old_db_path"),
          "impact propagation and trace-point mapping; returns the modification-set JSON");
    m.def("prioritize", &py_prioritize, py::arg("strategy"), py::arg("mods_json"),
          py::arg("report_json"), py::arg("traces_dir"),
          "order the suite by 'simple', 'intensity' or 'mttc'; returns the plan JSON");
    m.def("check_instrumentation", &py_compare_original, py::arg("instrumented_dir"),
          py::arg("original_dir"), py::arg("suite_path"),
          "lockstep differential and trace-soundness check; raises on divergence");
}
