// DIGEST pose estimation: per-hypothesis iterated likelihood weighting over
// object poses, scored by rendered-vs-observed depth, with sequential
// per-object scheduling and cross-hypothesis ranking.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "srp/detect.hpp"
#include "srp/geometry.hpp"
#include "srp/registry.hpp"
#include "srp/render.hpp"

namespace srp::digest {

using detect::Detection;
using detect::SceneHypothesis;
using geom::CameraIntrinsics;
using geom::DepthImage;
using geom::Pose;

// One full assignment of poses to the hypothesized objects.
struct Particle {
    std::vector<Pose> poses;  // world frame, one per hypothesis candidate
    double weight = 0.0;
};

struct FilterConfig {
    int n_particles = 625;
    int n_iterations = 400;
    double lambda_r = 20.0;         // likelihood scale, 1/m
    double sigma_pos = 0.01;        // position diffusion std, m
    double sigma_rot = 0.05;        // rotation diffusion std, rad
    double missing_penalty = 0.10;  // cost of a dropped observed pixel, m
    bool upright_only = false;      // restrict orientations to yaw about +z
    int n_threads = 0;              // scoring workers; 0 = hardware. Never affects results.

    void validate() const;
};

// Depth snapshot plus the camera that took it.
struct Observation {
    DepthImage depth;
    CameraIntrinsics intrinsics;
    Pose camera_extrinsic;  // camera pose in the world frame
};

struct SceneEstimate {
    SceneHypothesis hypothesis;
    std::vector<Pose> poses;
    double log_likelihood = 0.0;
};

// All weights identically zero: the likelihood underflowed everywhere.
struct LikelihoodCollapse : std::runtime_error {
    LikelihoodCollapse() : std::runtime_error("likelihood collapse: all particle weights are zero") {}
};

// Optional per-run diagnostics.
struct FilterTrace {
    std::vector<double> normalized_weight_sums;  // one entry per iteration
    std::vector<std::pair<int, int>> blocks;     // [begin, end) per object
    int reinit_count = 0;
    bool record_weights = false;                 // when set, keep every scoring pass
    std::vector<std::vector<double>> weights;
};

// Seed handed to resample_diffuse at a given iteration of
// estimate_hypothesis; exposed so the filter can be replayed step by step.
uint64_t iteration_seed(uint64_t seed, int iteration);

// Seed digest() hands to estimate_hypothesis for the i-th hypothesis.
uint64_t hypothesis_seed(uint64_t seed, size_t hypothesis_index);

// Mean 3D distance between back-projected observed and rendered points over
// the pixels where the rendered mask hits an object; a missing observed
// pixel costs `missing_penalty`. Returns missing_penalty on an empty mask.
double distance(const DepthImage& observed, const DepthImage& rendered,
                const render::ObjectMask& mask, const CameraIntrinsics& cam,
                double missing_penalty);

// exp(-lambda_r * d)
double weight(double d, double lambda_r);

// Contiguous per-object iteration blocks: floor(T/K) each, the last block
// absorbing the remainder. Partitions [0, T) exactly.
std::vector<std::pair<int, int>> iteration_blocks(int n_iterations, int n_objects);

// Uniform pose seeds inside each candidate's bounding-box frustum: pixel
// uniform in the bbox, depth uniform over the observed range in the bbox
// (fallback [near, far]), orientation uniform (or yaw-only when upright).
std::vector<Particle> init_particles(const SceneHypothesis& hyp, const Observation& obs,
                                     const FilterConfig& cfg, uint64_t seed);

// Normalize weights, systematic-resample N particles, then diffuse only the
// active object's pose. Output weights are uniform. Throws
// LikelihoodCollapse when every weight is zero.
std::vector<Particle> resample_diffuse(const std::vector<Particle>& particles, int active_object,
                                       const FilterConfig& cfg, uint64_t seed);

// Full iterated-likelihood-weighting run for one hypothesis. Objects are
// processed in descending detection confidence; finished objects stay frozen
// at their best pose, unprocessed ones are absent from rendering. The
// returned log-likelihood re-scores the final poses with all objects
// rendered jointly.
SceneEstimate estimate_hypothesis(const SceneHypothesis& hyp, const Observation& obs,
                                  const registry::ModelRegistry& reg, const FilterConfig& cfg,
                                  uint64_t seed, FilterTrace* trace = nullptr);

struct HypothesisRecord {
    SceneHypothesis hypothesis;
    double log_likelihood = 0.0;
    double confidence_sum = 0.0;
};

struct DigestResult {
    SceneEstimate best;
    std::vector<HypothesisRecord> ranking;  // every evaluated hypothesis
    bool size_mismatch = false;             // fewer candidates than objects
    double seconds = 0.0;
};

// End-to-end estimator: candidates -> hypotheses -> per-hypothesis filtering
// (independent seeds) -> maximum-likelihood estimate. `max_hypotheses` > 0
// caps how many of the confidence-ordered hypotheses are evaluated.
DigestResult digest(const Observation& obs, const std::vector<Detection>& detections,
                    int n_objects, const registry::ModelRegistry& reg, const FilterConfig& cfg,
                    uint64_t seed, int max_hypotheses = 0);

}  // namespace srp::digest
