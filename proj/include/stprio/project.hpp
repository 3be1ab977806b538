#pragma once

#include "stprio/ast.hpp"
#include "stprio/checksum.hpp"

#include <string>

namespace stprio {

// Loads a project directory: one POU per *.st file, optional globals.st,
// mandatory tasks.cfg (lines: task <name> program <qname> cycle_ms <int>).
ProjectAst load_project(const std::string& root_dir);

// Builds a ProjectAst from in-memory sources; used by tests and by the
// instrumenter round trip. `files` maps file name to content.
ProjectAst load_project_from_memory(const std::vector<std::pair<std::string, std::string>>& files,
                                    const std::string& tasks_cfg);

// Stable whole-project content checksum over normalized sources.
Checksum project_version_id(const ProjectAst& project);

} // namespace stprio
