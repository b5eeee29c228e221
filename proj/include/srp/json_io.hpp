// JSON serialization for the on-disk pipeline artifacts. Schemas are
// documented in docs/formats.md.
#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "srp/bench.hpp"
#include "srp/detect.hpp"
#include "srp/digest.hpp"
#include "srp/placement.hpp"
#include "srp/scenegraph.hpp"

namespace srp::io {

using nlohmann::json;

json pose_to_json(const geom::Pose& p);
geom::Pose pose_from_json(const json& j);

json camera_to_json(const geom::CameraIntrinsics& cam, const geom::Pose& extrinsic);
void camera_from_json(const json& j, geom::CameraIntrinsics& cam, geom::Pose& extrinsic);

json scene_to_json(const detect::GroundTruthScene& scene);
detect::GroundTruthScene scene_from_json(const json& j);

json detections_to_json(const std::vector<detect::Detection>& detections,
                        const geom::CameraIntrinsics& cam, const geom::Pose& extrinsic);
struct DetectionsFile {
    std::vector<detect::Detection> detections;
    geom::CameraIntrinsics intrinsics;
    geom::Pose camera_extrinsic;
};
DetectionsFile detections_from_json(const json& j);

json estimate_to_json(const digest::DigestResult& result);
digest::SceneEstimate estimate_from_json(const json& j);

json graph_to_json(const scenegraph::SceneGraph& g);
scenegraph::SceneGraph graph_from_json(const json& j);

json plan_to_json(const plan::PlanResult& plan, const plan::SimulationResult* sim = nullptr);

json report_to_json(const bench::EvalReport& report);

json load_json(const std::string& path);
void save_json(const json& j, const std::string& path);
void save_text(const std::string& text, const std::string& path);

}  // namespace srp::io
