// Geometric grounding of symbolic plans: sample placement poses that realize
// the intended scene-graph relation, and simulate whole plans.
#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "srp/planner.hpp"
#include "srp/registry.hpp"
#include "srp/scenegraph.hpp"

namespace srp::plan {

struct WorldState {
    std::map<std::string, scenegraph::Instance> objects;
    double table_height = 0.0;
    detect::TableBounds table_bounds;
    std::vector<scenegraph::ProximityDecl> proximity;

    static WorldState from_graph(const scenegraph::SceneGraph& g);
};

struct PlacementError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rejection-sample a pose for the object moved by a place/stack/place_in
// action: the derived scene graph of the hypothetical world must contain the
// action's intended relation and the object must not collide with any other
// object (2D footprint separation at overlapping heights). The placed object
// must currently be absent from (held out of) the world.
geom::Pose sample_placement(const GroundedAction& action, const WorldState& world,
                            const registry::ModelRegistry& reg, uint64_t seed,
                            int max_tries = 300);

struct ExecutedStep {
    GroundedAction action;
    std::optional<geom::Pose> pose;  // for place-family actions
};

struct SimulationResult {
    bool ok = false;
    std::string error;
    WorldState world;  // final poses
    std::vector<ExecutedStep> steps;
};

// Walk a plan, removing picked objects and sampling poses for placements.
// Models held by the instances map must cover every manipulated object.
SimulationResult simulate_plan(const std::vector<GroundedAction>& plan, WorldState world,
                               const registry::ModelRegistry& reg, uint64_t seed);

}  // namespace srp::plan
