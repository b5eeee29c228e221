// Synthetic oracle detector plus candidate and scene-hypothesis generation.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "srp/geometry.hpp"
#include "srp/registry.hpp"
#include "srp/render.hpp"

namespace srp::detect {

using geom::CameraIntrinsics;
using geom::Pose;

struct BBox {
    double x = 0, y = 0;  // top-left corner, pixels
    double w = 1, h = 1;

    bool contains(double u, double v) const {
        return u >= x && u <= x + w && v >= y && v <= y + h;
    }
};

struct Detection {
    BBox bbox;
    std::map<std::string, double> scores;  // label -> confidence in [0,1]
};

struct Candidate {
    std::string label;
    double confidence = 0.0;
    BBox bbox;
    int detection_index = -1;  // index into the source detection list
};

struct SceneHypothesis {
    std::vector<Candidate> candidates;  // descending confidence

    double confidence_sum() const {
        double s = 0;
        for (const auto& c : candidates) s += c.confidence;
        return s;
    }
};

struct SceneObject {
    std::string instance_id;
    std::string model_id;
    Pose pose;
};

struct TableBounds {
    double min_x = -0.5, max_x = 0.5;
    double min_y = -0.35, max_y = 0.35;
};

// Ground-truth scene file contents; also consumed by bench.
struct GroundTruthScene {
    CameraIntrinsics intrinsics;
    Pose camera_extrinsic;  // camera pose in the world frame
    double table_height = 0.0;
    TableBounds table_bounds;
    std::vector<SceneObject> objects;

    render::SceneInstance instance() const;
};

struct NoiseConfig {
    double bbox_sigma = 0.0;   // pixel jitter on each bbox edge
    double label_noise = 0.0;  // confidence mass moved off the true label
    double miss_rate = 0.0;    // per-object drop probability
    double fp_rate = 0.0;      // expected false positives per scene
    int min_pixels = 50;       // visibility threshold in the rendered mask
};

// Oracle stand-in for a trained detector: bounding rectangles of the
// rendered object masks, with configurable noise. Deterministic per seed.
std::vector<Detection> detect_synthetic(const GroundTruthScene& scene,
                                        const CameraIntrinsics& cam,
                                        const registry::ModelRegistry& reg,
                                        const NoiseConfig& noise, uint64_t seed);

// One candidate per detection: the argmax-confidence label (lexicographically
// smallest label wins ties).
std::vector<Candidate> make_candidates(const std::vector<Detection>& detections);

// All C(m, n_objects) candidate subsets when m >= n_objects, otherwise the
// single all-candidate hypothesis. Each hypothesis sorts its candidates by
// descending confidence; the list is ordered by descending confidence sum.
std::vector<SceneHypothesis> enumerate_hypotheses(const std::vector<Candidate>& candidates,
                                                  int n_objects);

}  // namespace srp::detect
