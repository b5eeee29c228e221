// Synthetic scene generation, closed-loop evaluation, and the end-to-end
// pipeline (perceive -> graph -> plan -> simulate).
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srp/detect.hpp"
#include "srp/digest.hpp"
#include "srp/placement.hpp"
#include "srp/planner.hpp"
#include "srp/registry.hpp"
#include "srp/scenegraph.hpp"

namespace srp::bench {

struct Thresholds {
    std::vector<double> dt_list;      // meters, ascending
    std::vector<double> dtheta_list;  // radians, ascending

    // dt {1,2,4,6} cm x dtheta {5,10,15,30} degrees
    static Thresholds default_grid();
    void validate() const;
};

struct ObjectError {
    std::string truth_id;
    std::string model_id;
    bool matched = false;
    double dt = 0.0;
    double dtheta = 0.0;
};

struct EvalReport {
    Thresholds thresholds;
    // accuracy[i][j]: fraction of ground-truth objects with dt <= dt_list[i]
    // and dtheta <= dtheta_list[j]
    std::vector<std::vector<double>> accuracy;
    std::vector<ObjectError> per_object;
    int total_objects = 0;
    double seconds = 0.0;

    bool monotone() const;
    std::string to_csv() const;
};

// Default benchmark camera: 160x120 over a desk-scale table.
geom::CameraIntrinsics default_intrinsics(int width = 160, int height = 120);
geom::Pose default_camera_extrinsic(double table_height);

struct SceneGenConfig {
    int n_objects = 3;
    double stacking_prob = 0.0;
    std::vector<std::string> model_pool;  // empty: every registry model
    double table_height = 0.70;
    detect::TableBounds bounds{-0.40, 0.40, -0.28, 0.28};
    int resolution_width = 160;
    int resolution_height = 120;
};

struct GeneratedScene {
    detect::GroundTruthScene scene;
    scenegraph::SceneGraph intended;  // the graph the generator built
};

// Rejection-sampled non-overlapping upright placements; with stacking_prob an
// object is placed exactly on an earlier one. Deterministic per seed.
GeneratedScene generate_scene(const registry::ModelRegistry& reg, const SceneGenConfig& cfg,
                              uint64_t seed);

// Observation render of a ground-truth scene, table slab included.
digest::Observation make_observation(const detect::GroundTruthScene& scene,
                                     const registry::ModelRegistry& reg);

struct ScenePoses {
    // (model_id, pose) per estimated object
    std::vector<std::pair<std::string, geom::Pose>> objects;

    static ScenePoses from_estimate(const digest::SceneEstimate& est);
};

// Greedy label-then-min-dt matching; unmatched ground-truth objects count as
// incorrect at every threshold.
EvalReport evaluate(const std::vector<ScenePoses>& estimates,
                    const std::vector<detect::GroundTruthScene>& truths,
                    const registry::ModelRegistry& reg, const Thresholds& th);

struct SuiteConfig {
    int n_scenes = 5;
    SceneGenConfig scene;
    digest::FilterConfig filter;
    detect::NoiseConfig noise;
    Thresholds thresholds = Thresholds::default_grid();
    bool use_gt_poses = false;  // skip estimation; evaluates the harness itself
    std::string out_dir;        // when set: accuracy.csv, report.json, exported scenes
    bool export_scenes = false;
};

struct SuiteResult {
    EvalReport report;
    std::string csv;
    std::vector<double> per_scene_seconds;
};

SuiteResult run_suite(const registry::ModelRegistry& reg, const SuiteConfig& cfg, uint64_t seed);

// ---------------------------------------------------------------------------
// End-to-end SRP pipeline
// ---------------------------------------------------------------------------

struct PairConfig {
    SceneGenConfig scene;  // n_objects counts every instance, tray included
    bool include_stack = true;
    bool include_proximity = true;
};

struct ScenePair {
    detect::GroundTruthScene initial;
    detect::GroundTruthScene goal;
    scenegraph::SceneGraph initial_intended;
    scenegraph::SceneGraph goal_intended;
    std::vector<scenegraph::ProximityDecl> proximity;
};

// Same instance set in two configurations; the goal demonstrates the
// requested stacking/proximity relations, the initial scene is flat.
ScenePair generate_scene_pair(const registry::ModelRegistry& reg, const PairConfig& cfg,
                              uint64_t seed);

struct PipelineConfig {
    digest::FilterConfig filter;
    detect::NoiseConfig noise;
    bool use_gt_poses = false;
    int max_hypotheses = 0;
    size_t max_states = 10'000'000;
};

struct PipelineResult {
    bool verdict = false;  // goal relational axioms hold in the final scene
    std::string failure;   // empty, or the stage error that stopped the run
    std::optional<digest::DigestResult> goal_estimate;
    std::optional<digest::DigestResult> initial_estimate;
    scenegraph::SceneGraph goal_graph;
    scenegraph::SceneGraph initial_graph;
    scenegraph::SceneGraph final_graph;
    std::string domain_text;
    std::string problem_text;
    plan::PlanResult plan_result;
    plan::SimulationResult simulation;
};

PipelineResult run_srp(const detect::GroundTruthScene& goal_scene,
                       const detect::GroundTruthScene& initial_scene,
                       const std::vector<scenegraph::ProximityDecl>& proximity,
                       const registry::ModelRegistry& reg, const PipelineConfig& cfg,
                       uint64_t seed);

}  // namespace srp::bench
