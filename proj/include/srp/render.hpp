// Software depth rasterizer: perspective projection, z-buffered nearest
// surface, no back-face culling. Pure functions; renders of the same scene
// are bit-identical.
#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "srp/geometry.hpp"
#include "srp/registry.hpp"

namespace srp::render {

using geom::CameraIntrinsics;
using geom::DepthImage;
using geom::Pose;
using geom::TriMesh;

constexpr int32_t kNoObject = -1;

struct SceneInstance {
    // (model_id, pose in world frame) per object; index order defines mask labels.
    std::vector<std::pair<std::string, Pose>> objects;
    Pose camera_extrinsic;  // pose of the camera in the world frame
};

// Per-pixel index of the nearest-hit object, kNoObject where nothing hit.
struct ObjectMask {
    int width = 0;
    int height = 0;
    std::vector<int32_t> data;

    ObjectMask() = default;
    ObjectMask(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h, kNoObject) {}
    int32_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    int32_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
};

struct RenderOutput {
    DepthImage depth;
    ObjectMask mask;
};

// Screen-space rectangle a rasterization call touched, for targeted clears.
struct PixelRect {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;

    bool empty() const { return x1 < x0 || y1 < y0; }
    void expand(int ax0, int ay0, int ax1, int ay1) {
        if (empty()) {
            x0 = ax0; y0 = ay0; x1 = ax1; y1 = ay1;
        } else {
            x0 = std::min(x0, ax0); y0 = std::min(y0, ay0);
            x1 = std::max(x1, ax1); y1 = std::max(y1, ay1);
        }
    }
};

// Rasterize one mesh at a camera-frame pose into existing buffers, keeping
// the nearest surface per pixel. `label` is written into the mask (when
// given) where this mesh wins; `touched` (when given) grows to cover every
// scanned pixel. Pixels sample integer coordinates: pixel (u,v) lies on the
// ray through (u,v) exactly.
void rasterize_mesh(const TriMesh& mesh, const Pose& model_in_camera, const CameraIntrinsics& cam,
                    DepthImage& depth, ObjectMask* mask, int32_t label, PixelRect* touched);
void rasterize_mesh(const TriMesh& mesh, const Pose& model_in_camera, const CameraIntrinsics& cam,
                    DepthImage& depth, ObjectMask& mask, int32_t label);

RenderOutput render_scene(const SceneInstance& scene, const CameraIntrinsics& cam,
                          const registry::ModelRegistry& reg);
DepthImage render_depth(const SceneInstance& scene, const CameraIntrinsics& cam,
                        const registry::ModelRegistry& reg);
ObjectMask render_object_mask(const SceneInstance& scene, const CameraIntrinsics& cam,
                              const registry::ModelRegistry& reg);

}  // namespace srp::render
