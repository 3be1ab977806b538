#pragma once

#include "stprio/instrument.hpp"
#include "stprio/interp.hpp"
#include "stprio/model.hpp"
#include "stprio/project.hpp"
#include "stprio/runner.hpp"

#include <string>
#include <utility>
#include <vector>

namespace testutil {

using namespace stprio;

inline std::string fixture_dir() { return STPRIO_FIXTURE_DIR; }

struct Built {
    ResolvedProject project;
    DependencyModel model;
};

inline Built build(std::vector<std::pair<std::string, std::string>> files,
                   const std::string& tasks = "task main program P cycle_ms 10\n") {
    Built out{resolve(load_project_from_memory(files, tasks)), {}};
    out.model = build_dependency_model(out.project);
    return out;
}

inline Built build_dir(const std::string& dir) {
    Built out{resolve(load_project(dir)), {}};
    out.model = build_dependency_model(out.project);
    return out;
}

// Parses the instrumented sources back into a resolved project.
inline ResolvedProject reload_instrumented(const InstrumentedProject& instr) {
    std::string tasks = instr.tasks_cfg;
    return resolve(load_project_from_memory(instr.files, tasks));
}

} // namespace testutil
