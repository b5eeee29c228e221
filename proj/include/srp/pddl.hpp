// PDDL subset: STRIPS + typing, six pick-and-place schemas. Carries scene
// graphs to the planner and back.
#pragma once

#include <set>
#include <string>
#include <vector>

#include "srp/scenegraph.hpp"

namespace srp::plan {

struct Atom {
    std::string pred;
    std::vector<std::string> args;

    auto operator<=>(const Atom&) const = default;
    std::string str() const;  // "(on a table)"
};

inline Atom atom(std::string p, std::vector<std::string> a = {}) {
    return {std::move(p), std::move(a)};
}

// Grounded planner state: a set of true atoms.
struct GroundedState {
    std::set<Atom> atoms;

    bool holds(const Atom& a) const { return atoms.count(a) > 0; }
    bool entails(const std::set<Atom>& goal) const;
    // at most one holding(x); handempty xor holding
    void validate() const;
};

// Atom template inside a schema; args are parameter names (?x) or constants.
struct SchemaAtom {
    std::string pred;
    std::vector<std::string> args;
};

struct ActionSchema {
    std::string name;
    std::vector<std::pair<std::string, std::string>> params;  // (?x, type)
    std::vector<SchemaAtom> preconditions;
    std::vector<SchemaAtom> add_effects;
    std::vector<SchemaAtom> delete_effects;
};

struct Domain {
    std::string name;
    std::vector<std::pair<std::string, int>> predicates;  // (name, arity)
    std::vector<std::string> constants;                   // table
    std::vector<ActionSchema> schemas;

    int arity(const std::string& pred) const;  // -1 when unknown
};

struct TypedConstant {
    std::string name;
    std::string type;  // item | region
};

struct Problem {
    std::string name;
    std::string domain_name;
    std::vector<TypedConstant> objects;
    GroundedState init;
    std::set<Atom> goal;

    bool is_region(const std::string& name) const;
    std::vector<std::string> of_type(const std::string& type) const;  // includes domain constants for "object"
};

// `in` atoms put the virtual region first; normalize an atom to that order.
Atom normalize_in(Atom a, const std::set<std::string>& regions);

// The fixed six-schema domain text.
std::string emit_domain();

// Problem text: constants from the union of both graphs, init from the
// initial graph, goal from the goal graph's on/in/has axioms only.
// Deterministic and sorted.
std::string emit_problem(const scenegraph::SceneGraph& initial, const scenegraph::SceneGraph& goal);

std::pair<std::string, std::string> emit_pddl(const scenegraph::SceneGraph& initial,
                                              const scenegraph::SceneGraph& goal);

// Direct graph-to-state mapping (what parsing the emitted problem must
// reproduce). Statics (vessel/stackable, region clear flags) depend on the
// union of regions, hence both graphs are needed.
GroundedState state_from_graphs(const scenegraph::SceneGraph& initial,
                                const scenegraph::SceneGraph& goal);
std::set<Atom> goal_from_graph(const scenegraph::SceneGraph& goal);

struct ParsedPddl {
    Domain domain;
    Problem problem;
};

// Parses the emitted subset; anything else is rejected with file:line:col
// diagnostics (thrown as ParseError).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ParsedPddl parse_pddl(const std::string& domain_text, const std::string& problem_text);

}  // namespace srp::plan
