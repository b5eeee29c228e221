// Axiomatic scene graphs (exist, clear, on, in, has) derived from object
// poses via the support and overlap heuristics.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "srp/detect.hpp"
#include "srp/digest.hpp"
#include "srp/geometry.hpp"
#include "srp/registry.hpp"

namespace srp::scenegraph {

using geom::ModelInfo;
using geom::Pose;

inline const std::string kTableId = "table";

enum class Predicate { Exist, Clear, On, In, Has };

std::string predicate_name(Predicate p);
Predicate predicate_from_name(const std::string& name);

struct Axiom {
    Predicate predicate;
    std::vector<std::string> args;

    auto operator<=>(const Axiom&) const = default;
    std::string str() const;
};

inline Axiom exist(std::string a) { return {Predicate::Exist, {std::move(a)}}; }
inline Axiom clear(std::string a) { return {Predicate::Clear, {std::move(a)}}; }
inline Axiom on(std::string a, std::string b) { return {Predicate::On, {std::move(a), std::move(b)}}; }
inline Axiom in(std::string a, std::string b) { return {Predicate::In, {std::move(a), std::move(b)}}; }
inline Axiom has(std::string a, std::string b) { return {Predicate::Has, {std::move(a), std::move(b)}}; }

struct Instance {
    std::string id;
    std::string model_id;
    Pose pose;
    bool concave = false;
};

// Declared proximity relation: region `region` of model of `parent`, with
// `child` expected inside it.
struct ProximityDecl {
    std::string parent;
    std::string region;
    std::string child;
};

struct SceneGraph {
    std::map<std::string, Instance> instances;
    std::set<Axiom> axioms;
    std::set<std::string> regions;  // region ids referenced by has/in axioms
    double table_height = 0.0;
    detect::TableBounds table_bounds;
    std::vector<ProximityDecl> proximity;

    bool contains(const Axiom& a) const { return axioms.count(a) > 0; }
};

// 2D convex polygon, CCW.
using Polygon = std::vector<Eigen::Vector2d>;

double polygon_area(const Polygon& poly);
// Area of intersection of two convex polygons (Sutherland-Hodgman clipping).
double overlap_area(const Polygon& a, const Polygon& b);

inline constexpr double kAlignTol = 10.0 * M_PI / 180.0;  // axis-gravity alignment
inline constexpr double kSupportSlack = 0.005;            // slack in the height rule, m

// Paper-style support test: if a model axis aligns with gravity, the object
// is off-table iff its center clears half the corresponding box dimension;
// if no axis aligns, it must be leaning on something.
bool is_supported_by_object(const Pose& pose, const ModelInfo& info, double table_height,
                            double align_tol = kAlignTol, double support_eps = kSupportSlack);

enum class Surface { Top, Bottom };

// Projection of the enclosing box's top (resp. bottom) face onto the table
// plane; the face is picked along world z.
Polygon footprint(const Pose& pose, const ModelInfo& info, Surface surface);

// Argmax over candidates of bottom-vs-top footprint overlap; ties go to the
// higher top surface, then the smaller id; zero overlap everywhere -> table.
std::string find_supporter(const Instance& item, const std::vector<Instance>& candidates,
                           const registry::ModelRegistry& reg);

SceneGraph derive_scene_graph(const std::vector<Instance>& instances,
                              const registry::ModelRegistry& reg, double table_height,
                              const std::vector<ProximityDecl>& proximity = {});

// Instance lists for derivation. Estimates name instances after their labels
// (duplicates get _2, _3, ... in candidate order).
std::vector<Instance> instances_from_scene(const detect::GroundTruthScene& scene,
                                           const registry::ModelRegistry& reg);
std::vector<Instance> instances_from_estimate(const digest::SceneEstimate& est,
                                              const registry::ModelRegistry& reg);

// Structural invariants: support relations form a forest rooted at table,
// and clear(i) holds exactly when no non-virtual object is on/in i.
bool support_forest_ok(const SceneGraph& g);
bool clear_duality_ok(const SceneGraph& g);

// The goal-relevant subset (on/in/has axioms).
std::set<Axiom> relational_axioms(const SceneGraph& g);

}  // namespace srp::scenegraph
