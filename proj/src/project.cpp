#include "stprio/project.hpp"

#include "stprio/lexer.hpp"
#include "stprio/parser.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace stprio {

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::TraceIOError, "cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void parse_tasks_cfg(const std::string& text, const std::string& file, ProjectAst& project) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (word[0] == '#') continue;
        if (word != "task") {
            fail_at(ErrorCode::Syntax, file, SourcePos{0, line_no, 1},
                    "expected 'task', got '" + word + "'");
        }
        TaskDecl task;
        std::string kw_program, kw_cycle;
        if (!(ls >> task.name >> kw_program >> task.root >> kw_cycle >> task.cycle_ms) ||
            kw_program != "program" || kw_cycle != "cycle_ms" || task.cycle_ms <= 0) {
            fail_at(ErrorCode::Syntax, file, SourcePos{0, line_no, 1},
                    "expected 'task <name> program <qname> cycle_ms <int>'");
        }
        project.tasks.push_back(std::move(task));
    }
    if (project.tasks.empty()) {
        fail_at(ErrorCode::Syntax, file, SourcePos{0, 1, 1}, "tasks.cfg declares no task");
    }
}

void finish_project(ProjectAst& project) {
    // Task roots must resolve to programs.
    for (const TaskDecl& t : project.tasks) {
        bool found = false;
        for (const PouAst& pou : project.pous) {
            if (pou.name == t.root) {
                if (pou.kind != PouKind::Program) {
                    fail(ErrorCode::UnresolvedReference,
                         "task '" + t.name + "' root '" + t.root + "' is not a PROGRAM");
                }
                found = true;
                break;
            }
        }
        if (!found) {
            fail(ErrorCode::UnresolvedReference,
                 "task '" + t.name + "' names unknown program '" + t.root + "'");
        }
    }
    // Unique names.
    for (std::size_t i = 0; i < project.globals.size(); ++i) {
        for (std::size_t j = i + 1; j < project.globals.size(); ++j) {
            if (project.globals[i].name == project.globals[j].name) {
                fail(ErrorCode::DuplicateName,
                     "global '" + project.globals[i].name + "' declared twice");
            }
        }
    }
    for (std::size_t i = 0; i < project.pous.size(); ++i) {
        for (std::size_t j = i + 1; j < project.pous.size(); ++j) {
            if (project.pous[i].name == project.pous[j].name) {
                fail(ErrorCode::DuplicateName,
                     "POU '" + project.pous[i].name + "' declared twice");
            }
        }
    }
}

} // namespace

ProjectAst load_project(const std::string& root_dir) {
    fs::path root(root_dir);
    if (!fs::is_directory(root)) {
        fail(ErrorCode::TraceIOError, "project directory not found: " + root_dir);
    }
    fs::path tasks_path = root / "tasks.cfg";
    if (!fs::exists(tasks_path)) {
        fail(ErrorCode::MissingTasksConfig, "missing tasks.cfg in " + root_dir);
    }

    ProjectAst project;
    project.root_dir = root_dir;

    std::vector<fs::path> st_files;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".st") {
            st_files.push_back(entry.path());
        }
    }
    std::sort(st_files.begin(), st_files.end());

    for (const fs::path& p : st_files) {
        std::string text = read_file(p);
        std::string name = p.filename().string();
        if (name == "globals.st") {
            parse_globals(text, name, project);
        } else {
            project.pous.push_back(parse_st(text, name));
        }
    }
    parse_tasks_cfg(read_file(tasks_path), "tasks.cfg", project);
    finish_project(project);
    return project;
}

ProjectAst load_project_from_memory(
    const std::vector<std::pair<std::string, std::string>>& files,
    const std::string& tasks_cfg) {
    ProjectAst project;
    std::vector<std::pair<std::string, std::string>> sorted = files;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [name, text] : sorted) {
        if (name == "globals.st") {
            parse_globals(text, name, project);
        } else {
            project.pous.push_back(parse_st(text, name));
        }
    }
    parse_tasks_cfg(tasks_cfg, "tasks.cfg", project);
    finish_project(project);
    return project;
}

Checksum project_version_id(const ProjectAst& project) {
    // Order-independent of load path: POUs are already in sorted file order.
    Checksum acc = checksum_raw("stprio-project");
    for (const PouAst& pou : project.pous) {
        acc = checksum_combine(acc, checksum_raw(pou.file));
        acc = checksum_combine(acc, checksum(pou.source));
    }
    if (!project.globals_source.empty()) {
        acc = checksum_combine(acc, checksum_raw(project.globals_file));
        acc = checksum_combine(acc, checksum(project.globals_source));
    }
    for (const TaskDecl& t : project.tasks) {
        acc = checksum_combine(acc, checksum_raw(t.name + "|" + t.root + "|" +
                                                 std::to_string(t.cycle_ms)));
    }
    return acc;
}

} // namespace stprio
