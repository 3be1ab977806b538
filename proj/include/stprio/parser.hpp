#pragma once

#include "stprio/ast.hpp"

#include <string>

namespace stprio {

// Parses a single POU (PROGRAM / FUNCTION_BLOCK / FUNCTION) from source text.
PouAst parse_st(const std::string& source, const std::string& file = "<memory>");

// Parses a globals file: TYPE ... END_TYPE and VAR_GLOBAL ... END_VAR sections.
void parse_globals(const std::string& source, const std::string& file, ProjectAst& into);

} // namespace stprio
