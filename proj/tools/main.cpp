#include "stprio/diff.hpp"
#include "stprio/impact.hpp"
#include "stprio/instrument.hpp"
#include "stprio/interp.hpp"
#include "stprio/model.hpp"
#include "stprio/prioritize.hpp"
#include "stprio/runner.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace stprio;

namespace {

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::Usage:
        return 1;
    case ErrorCode::VersionMismatch:
    case ErrorCode::ModelProjectMismatch:
    case ErrorCode::TraceDbMismatch:
        return 3;
    case ErrorCode::RuntimeFault:
    case ErrorCode::SaveWithoutReset:
        return 4;
    case ErrorCode::DifferentialMismatch:
        return 5;
    default:
        return 2;
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::TraceIOError, "cannot write " + path);
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::TraceIOError, "cannot read " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct LoadedModel {
    ResolvedProject project;
    DependencyModel model;
};

LoadedModel load_model(const std::string& dir) {
    LoadedModel out{resolve(load_project(dir)), {}};
    out.model = build_dependency_model(out.project);
    return out;
}

std::string trace_file_name(const std::string& test_id) { return "trace_" + test_id + ".json"; }

void write_traces(const std::vector<ExecutionTrace>& traces, const std::string& dir) {
    fs::create_directories(dir);
    for (const ExecutionTrace& t : traces) {
        save_trace(t, (fs::path(dir) / trace_file_name(t.test_id)).string());
    }
}

int cmd_build_model(const std::string& proj, const std::string& out_path) {
    LoadedModel loaded = load_model(proj);
    write_file(out_path, model_to_json(loaded.model));
    std::cout << "model: " << loaded.model.nodes.size() << " nodes, "
              << loaded.model.edges.size() << " edges, "
              << loaded.model.basic_block_count() << " basic blocks\n";
    std::cout << "version: " << checksum_to_hex(loaded.model.version_id) << "\n";
    return 0;
}

int cmd_instrument(const std::string& proj, const std::string& out_dir,
                   const std::string& db_path) {
    LoadedModel loaded = load_model(proj);
    auto [instr, db] = instrument(loaded.project, loaded.model);
    write_instrumented(instr, db, out_dir);
    if (!db_path.empty()) write_file(db_path, tracepoint_db_to_json(db));
    std::cout << "inserted " << db.points.size() << " trace points into "
              << instr.files.size() - 1 << " POU files\n";
    return 0;
}

int cmd_run(const std::string& instr_dir, const std::string& suite_path,
            const std::string& report_path, const std::string& traces_dir,
            const std::string& compare_original) {
    ResolvedProject instr = resolve(load_project(instr_dir));
    TracePointDb db = load_tracepoint_db((fs::path(instr_dir) / "tpdb.json").string());
    std::vector<TestCase> suite = load_suite(suite_path);

    if (!compare_original.empty()) {
        LoadedModel original = load_model(compare_original);
        if (original.model.version_id != db.version_id) {
            fail(ErrorCode::VersionMismatch,
                 "--compare-original project does not match the instrumented revision");
        }
        SuiteComparison cmp =
            run_suite_compared(instr, db, suite, original.project, original.model);
        write_file(report_path, report_to_json(cmp.report));
        write_traces(cmp.traces, traces_dir);
        std::cout << "suite: " << cmp.report.passed << " passed, " << cmp.report.failed
                  << " failed\n";
        std::cout << overhead_report_text(cmp.overhead);
        if (!cmp.ok) {
            std::cerr << "differential check FAILED: " << cmp.detail << "\n";
            return 5;
        }
        std::cout << "differential check passed\n";
        return 0;
    }

    auto [report, traces] = run_suite(instr, db, suite);
    write_file(report_path, report_to_json(report));
    write_traces(traces, traces_dir);
    std::cout << "suite: " << report.passed << " passed, " << report.failed << " failed, "
              << report.total_duration_ms << " ms simulated\n";
    return 0;
}

int cmd_diff(const std::string& old_dir, const std::string& new_dir,
             const std::string& out_path) {
    LoadedModel oldm = load_model(old_dir);
    LoadedModel newm = load_model(new_dir);
    ChangeSet changes = diff_models(oldm.model, newm.model);
    write_file(out_path, changeset_to_json(changes));
    std::cout << "pous: +" << changes.added_pous.size() << " -" << changes.removed_pous.size()
              << " ~" << changes.modified_pous.size() << "; globals: +"
              << changes.added_globals.size() << " -" << changes.removed_globals.size() << " ~"
              << changes.changed_globals.size() << "\n";
    return 0;
}

int cmd_impact(const std::string& new_dir, const std::string& changes_path,
               const std::string& old_db_path, const std::string& out_path, int max_depth) {
    LoadedModel newm = load_model(new_dir);
    ChangeSet changes = load_changeset(changes_path);
    TracePointDb old_db = load_tracepoint_db(old_db_path);
    ModificationSet mods = impact(newm.model, changes, max_depth);
    map_to_old_trace_points(mods, changes, old_db);
    if (mods.depth_limited) {
        std::cout << "propagation depth limit hit; whole POUs were marked\n";
    }
    write_file(out_path, modification_set_to_json(mods));
    std::cout << "modified blocks: " << mods.modified_blocks.size() << ", variables: "
              << mods.modified_variables.size() << ", mapped trace points: "
              << mods.mapped_tp_ids.size() << "\n";
    if (!mods.untestable_blocks.empty()) {
        std::cout << "untestable by old suite: " << mods.untestable_blocks.size()
                  << " block(s)\n";
    }
    return 0;
}

int cmd_prioritize(const std::string& strategy, const std::string& mods_path,
                   const std::string& report_path, const std::string& traces_dir,
                   const std::string& out_path) {
    ModificationSet mods = load_modification_set(mods_path);
    TestReport report = report_from_json(read_file(report_path));
    if (report.version_id != mods.old_version) {
        fail(ErrorCode::VersionMismatch,
             "report belongs to a different revision than the modification set");
    }
    std::vector<TestTraceData> tests;
    for (const TestResult& r : report.tests) {
        ExecutionTrace trace =
            load_trace((fs::path(traces_dir) / trace_file_name(r.id)).string());
        if (trace.version_id != mods.old_version) {
            fail(ErrorCode::VersionMismatch,
                 "trace of test '" + r.id + "' belongs to a different revision");
        }
        if (static_cast<int>(trace.points.size()) != mods.tp_universe) {
            fail(ErrorCode::TraceDbMismatch,
                 "trace of test '" + r.id + "' covers a different trace-point range");
        }
        TestTraceData t;
        t.id = r.id;
        t.duration_ms = r.duration_ms;
        t.counts.resize(trace.points.size());
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
    write_file(out_path, plan_to_json(plan));
    std::cout << plan_to_table(plan);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"regression-test prioritization for ST/SFC control projects"};
    app.require_subcommand(1);

    std::string proj, out_path, db_path, suite_path, report_path, traces_dir;
    std::string old_dir, new_dir, changes_path, old_db_path, strategy, compare_original;
    int max_depth = 0;

    CLI::App* build_model = app.add_subcommand("build-model", "export the dependency model");
    build_model->add_option("proj", proj, "project directory")->required();
    build_model->add_option("-o,--out", out_path, "output model.json")->required();

    CLI::App* instrument_cmd =
        app.add_subcommand("instrument", "insert trace statements in front of basic blocks");
    instrument_cmd->add_option("proj", proj, "project directory")->required();
    instrument_cmd->add_option("-o,--out", out_path, "output directory")->required();
    instrument_cmd->add_option("--db", db_path, "trace-point db output path");

    CLI::App* run_cmd = app.add_subcommand("run", "execute a test suite and record traces");
    run_cmd->add_option("instrumented", proj, "instrumented project directory")->required();
    run_cmd->add_option("--suite", suite_path, "suite JSON")->required();
    run_cmd->add_option("-o,--out", report_path, "report output path")->required();
    run_cmd->add_option("--traces", traces_dir, "trace output directory")->required();
    run_cmd->add_option("--compare-original", compare_original,
                        "original project directory for the differential check");

    CLI::App* diff_cmd = app.add_subcommand("diff", "coarse and fine change identification");
    diff_cmd->add_option("old", old_dir, "old project directory")->required();
    diff_cmd->add_option("new", new_dir, "new project directory")->required();
    diff_cmd->add_option("-o,--out", out_path, "changes output path")->required();

    CLI::App* impact_cmd =
        app.add_subcommand("impact", "change impact analysis and trace-point mapping");
    impact_cmd->add_option("new", new_dir, "new project directory")->required();
    impact_cmd->add_option("changes", changes_path, "changes.json from diff")->required();
    impact_cmd->add_option("--old-db", old_db_path, "trace-point db of the old revision")
        ->required();
    impact_cmd->add_option("-o,--out", out_path, "modification set output path")->required();
    impact_cmd->add_option("--max-depth", max_depth,
                           "cap on impact propagation depth (0 = unbounded)");

    CLI::App* prio_cmd = app.add_subcommand("prioritize", "order the suite by a strategy");
    prio_cmd->add_option("--strategy", strategy, "simple | intensity | mttc")->required();
    prio_cmd->add_option("mods", changes_path, "mods.json from impact")->required();
    prio_cmd->add_option("report", report_path, "report.json from run")->required();
    prio_cmd->add_option("--traces", traces_dir, "trace directory")->required();
    prio_cmd->add_option("-o,--out", out_path, "plan output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (build_model->parsed()) return cmd_build_model(proj, out_path);
        if (instrument_cmd->parsed()) return cmd_instrument(proj, out_path, db_path);
        if (run_cmd->parsed()) {
            return cmd_run(proj, suite_path, report_path, traces_dir, compare_original);
        }
        if (diff_cmd->parsed()) return cmd_diff(old_dir, new_dir, out_path);
        if (impact_cmd->parsed()) {
            return cmd_impact(new_dir, changes_path, old_db_path, out_path, max_depth);
        }
        if (prio_cmd->parsed()) {
            return cmd_prioritize(strategy, changes_path, report_path, traces_dir, out_path);
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
