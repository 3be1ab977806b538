#pragma once

#include "stprio/ast.hpp"
#include "stprio/project.hpp"

#include <map>
#include <string>
#include <vector>

namespace stprio {

// Builtin callee indices used in Expr::callee_index.
inline constexpr int kCalleeNow = -2; // __NOW() -> TIME since test start

struct PouLayout {
    struct Var {
        std::string name;
        VarType type = VarType::Bool;
        enum class Role { Input, Output, Local, Return } role = Role::Local;
        bool has_init = false;
        Value init;
    };
    struct Instance {
        std::string name;
        int pou_index = -1; // -1 => builtin TON
        std::string type_name;
    };
    std::vector<Var> vars;
    std::vector<Instance> instances;
    std::map<std::string, int> var_index;
    std::map<std::string, int> instance_index;
};

struct ResolvedProject {
    ProjectAst ast;
    std::vector<PouLayout> layouts; // parallel to ast.pous

    struct GlobalSlot {
        std::string qname; // "g" or "tp.x0"
        VarType type = VarType::Bool;
        bool has_init = false;
        Value init;
        bool is_struct_field = false;
        std::string struct_global; // owning struct variable name
    };
    std::vector<GlobalSlot> globals;
    std::map<std::string, int> global_index;
    std::map<std::string, int> pou_index;
    std::vector<std::string> struct_global_names;

    struct Task {
        std::string name;
        int root_pou = -1;
        int cycle_ms = 10;
    };
    std::vector<Task> tasks;

    Checksum version_id = 0;

    const PouAst& pou(int index) const { return ast.pous[static_cast<std::size_t>(index)]; }
    int find_pou(const std::string& name) const;
};

// Binds every name in the project; fills VarUse annotations in place.
// Throws UnresolvedReference / DuplicateName / UnknownType.
ResolvedProject resolve(ProjectAst project);

// TON builtin field slots within an instance frame.
inline constexpr int kTonIn = 0;
inline constexpr int kTonPt = 1;
inline constexpr int kTonQ = 2;
inline constexpr int kTonEt = 3;

} // namespace stprio
