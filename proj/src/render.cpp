#include "srp/render.hpp"

#include <algorithm>
#include <cmath>

namespace srp::render {

namespace {

struct CamVertex {
    geom::Vec3 p;  // camera frame
};

// Clip a camera-space triangle against the plane z = near.
// Returns 0..4 vertices.
int clip_near(const geom::Vec3 tri[3], double near, geom::Vec3 out[4]) {
    int n = 0;
    for (int i = 0; i < 3; ++i) {
        const geom::Vec3& a = tri[i];
        const geom::Vec3& b = tri[(i + 1) % 3];
        bool ain = a.z() >= near;
        bool bin = b.z() >= near;
        if (ain) out[n++] = a;
        if (ain != bin) {
            double t = (near - a.z()) / (b.z() - a.z());
            out[n++] = a + t * (b - a);
        }
    }
    return n;
}

struct ScreenVertex {
    double u, v, invz;
};

ScreenVertex project(const geom::Vec3& p, const CameraIntrinsics& cam) {
    double invz = 1.0 / p.z();
    return {cam.fx * p.x() * invz + cam.cx, cam.fy * p.y() * invz + cam.cy, invz};
}

}  // namespace

void rasterize_mesh(const TriMesh& mesh, const Pose& model_in_camera, const CameraIntrinsics& cam,
                    DepthImage& depth, ObjectMask& mask, int32_t label) {
    rasterize_mesh(mesh, model_in_camera, cam, depth, &mask, label, nullptr);
}

void rasterize_mesh(const TriMesh& mesh, const Pose& model_in_camera, const CameraIntrinsics& cam,
                    DepthImage& depth, ObjectMask* mask, int32_t label, PixelRect* touched) {
    std::vector<geom::Vec3> cam_pts(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i)
        cam_pts[i] = model_in_camera.transform(mesh.vertices[i]);

    for (const auto& tri : mesh.triangles) {
        geom::Vec3 t3[3] = {cam_pts[tri[0]], cam_pts[tri[1]], cam_pts[tri[2]]};
        geom::Vec3 poly[4];
        int n = clip_near(t3, cam.near, poly);
        if (n < 3) continue;

        ScreenVertex sv[4];
        for (int i = 0; i < n; ++i) sv[i] = project(poly[i], cam);

        // Fan-triangulate the clipped polygon.
        for (int k = 1; k + 1 < n; ++k) {
            const ScreenVertex& a = sv[0];
            const ScreenVertex& b = sv[k];
            const ScreenVertex& c = sv[k + 1];

            double area2 = (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
            if (std::abs(area2) < 1e-12) continue;
            double sign = area2 > 0 ? 1.0 : -1.0;  // both windings rasterize

            int x0 = std::max(0, static_cast<int>(std::ceil(std::min({a.u, b.u, c.u}))));
            int x1 = std::min(cam.width - 1, static_cast<int>(std::floor(std::max({a.u, b.u, c.u}))));
            int y0 = std::max(0, static_cast<int>(std::ceil(std::min({a.v, b.v, c.v}))));
            int y1 = std::min(cam.height - 1, static_cast<int>(std::floor(std::max({a.v, b.v, c.v}))));
            if (x0 > x1 || y0 > y1) continue;
            if (touched) touched->expand(x0, y0, x1, y1);

            double inv_area = 1.0 / area2;
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    double px = x, py = y;
                    double w0 = (b.u - a.u) * (py - a.v) - (b.v - a.v) * (px - a.u);
                    double w1 = (c.u - b.u) * (py - b.v) - (c.v - b.v) * (px - b.u);
                    double w2 = (a.u - c.u) * (py - c.v) - (a.v - c.v) * (px - c.u);
                    if (w0 * sign < 0 || w1 * sign < 0 || w2 * sign < 0) continue;
                    // Perspective-correct depth: 1/z is affine in screen space.
                    double invz = (w1 * a.invz + w2 * b.invz + w0 * c.invz) * inv_area;
                    if (invz <= 0) continue;
                    double z = 1.0 / invz;
                    if (z > cam.far) continue;
                    float cur = depth.at(x, y);
                    float zf = static_cast<float>(z);
                    if (cur <= 0.0f || zf < cur) {
                        depth.at(x, y) = zf;
                        if (mask) mask->at(x, y) = label;
                    }
                }
            }
        }
    }
}

RenderOutput render_scene(const SceneInstance& scene, const CameraIntrinsics& cam,
                          const registry::ModelRegistry& reg) {
    cam.validate();
    RenderOutput out;
    out.depth = DepthImage(cam.width, cam.height);
    out.mask = ObjectMask(cam.width, cam.height);
    Pose world_to_cam = scene.camera_extrinsic.inverse();
    for (size_t i = 0; i < scene.objects.size(); ++i) {
        const auto& [model_id, pose] = scene.objects[i];
        const geom::ModelInfo& info = reg.get(model_id);
        Pose model_in_camera = geom::compose(world_to_cam, pose);
        rasterize_mesh(info.mesh, model_in_camera, cam, out.depth, &out.mask,
                       static_cast<int32_t>(i), nullptr);
    }
    return out;
}

DepthImage render_depth(const SceneInstance& scene, const CameraIntrinsics& cam,
                        const registry::ModelRegistry& reg) {
    return render_scene(scene, cam, reg).depth;
}

ObjectMask render_object_mask(const SceneInstance& scene, const CameraIntrinsics& cam,
                              const registry::ModelRegistry& reg) {
    return render_scene(scene, cam, reg).mask;
}

}  // namespace srp::render
