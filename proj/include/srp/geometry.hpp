// Rigid-body math, camera model, mesh container and pose-error metrics.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace srp::geom {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

// 6-DOF rigid transform. Orientation is kept as a unit quaternion; Euler
// angles appear only at I/O boundaries (extrinsic X-Y-Z convention).
struct Pose {
    Vec3 position = Vec3::Zero();
    Quat orientation = Quat::Identity();

    static Pose identity() { return {}; }
    static Pose translation(double x, double y, double z) {
        return {Vec3(x, y, z), Quat::Identity()};
    }

    Vec3 transform(const Vec3& p) const { return orientation * p + position; }
    Vec3 rotate(const Vec3& v) const { return orientation * v; }

    Pose inverse() const {
        Quat qi = orientation.conjugate();
        return {qi * (-position), qi};
    }
};

// Applies b in a's frame.
Pose compose(const Pose& a, const Pose& b);

// Extrinsic rotations about fixed X, then Y, then Z (radians).
Quat quat_from_euler_xyz(const Vec3& euler);
Vec3 euler_xyz_from_quat(const Quat& q);

// Absolute rotation angle, in [0, pi].
double quat_angle(const Quat& q);

struct CameraIntrinsics {
    double fx = 0, fy = 0;
    double cx = 0, cy = 0;
    int width = 0, height = 0;
    double near = 0.05, far = 10.0;

    void validate() const;
    // Same camera at a different resolution (focal lengths and principal
    // point scale with width).
    CameraIntrinsics scaled(int new_width, int new_height) const;
};

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Eigen::Vector3i> triangles;

    void validate() const;
    Vec3 min_corner() const;
    Vec3 max_corner() const;
};

// Axis-aligned box in a model's local frame, used for virtual regions.
struct LocalBox {
    std::string id;
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();

    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
};

enum class Axis : uint8_t { X = 0, Y = 1, Z = 2 };

struct ModelInfo {
    std::string model_id;
    TriMesh mesh;
    Vec3 box_dims = Vec3::Zero();  // full extents of the enclosing box, centered at the origin
    std::optional<Axis> symmetry_axis;
    bool concave = false;
    std::vector<LocalBox> virtual_regions;

    void validate() const;
};

// Row-major depth map in meters; 0 marks a missing measurement.
struct DepthImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    DepthImage() = default;
    DepthImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h, 0.0f) {}

    float at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    float& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    bool missing(int x, int y) const { return at(x, y) <= 0.0f; }
};

// Pixel (u,v) at depth d -> ((u-cx)d/fx, (v-cy)d/fy, d), camera frame.
// Missing pixels produce no point.
std::vector<Vec3> backproject(const DepthImage& img, const CameraIntrinsics& cam);

// Single-pixel backprojection.
inline Vec3 backproject_pixel(double u, double v, double d, const CameraIntrinsics& cam) {
    return {(u - cam.cx) * d / cam.fx, (v - cam.cy) * d / cam.fy, d};
}

struct PoseError {
    double dt = 0.0;      // meters
    double dtheta = 0.0;  // radians, in [0, pi]
};

// Position and orientation error between two poses of the same model. For
// models with a declared symmetry axis the twist about that axis is removed
// (swing-twist decomposition) before the angle is measured.
PoseError pose_error(const Pose& estimate, const Pose& truth, const ModelInfo& info);

}  // namespace srp::geom
