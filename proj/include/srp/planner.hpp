// Breadth-first STRIPS over grounded pick-and-place actions.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "srp/pddl.hpp"

namespace srp::plan {

struct GroundedAction {
    std::string name;
    std::vector<std::string> args;
    std::vector<Atom> preconditions;
    std::vector<Atom> add_effects;
    std::vector<Atom> delete_effects;

    std::string str() const;  // "stack(b,a)"
};

// All type-consistent instantiations of the schemas over the problem's
// constants, in a fixed order (schema order, then argument positions by
// constant declaration order). Static vessel/stackable preconditions are
// resolved against the initial state and pruned from the grounded actions.
std::vector<GroundedAction> ground_actions(const Domain& domain, const Problem& problem);

enum class PlanStatus { Found, Unsolvable, SearchLimit };

struct PlanResult {
    PlanStatus status = PlanStatus::Unsolvable;
    std::vector<GroundedAction> actions;
    size_t expanded = 0;

    bool found() const { return status == PlanStatus::Found; }
};

// Minimum-length plan from problem.init to a state entailing problem.goal,
// or Unsolvable after exhausting the reachable space. Deterministic.
PlanResult plan_bfs(const Problem& problem, const Domain& domain,
                    size_t max_states = 10'000'000);

struct Violation {
    int step = -1;  // -1: goal failure after the last step
    std::string reason;
};

struct ValidationResult {
    bool ok = false;
    std::optional<Violation> violation;
};

// Simulates the plan from the initial state; reports the first precondition
// violation, or goal failure.
ValidationResult validate(const std::vector<GroundedAction>& plan, const Problem& problem);

}  // namespace srp::plan
