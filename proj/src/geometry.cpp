#include "srp/geometry.hpp"

#include <cmath>

namespace srp::geom {

Pose compose(const Pose& a, const Pose& b) {
    Pose out;
    out.orientation = (a.orientation * b.orientation).normalized();
    out.position = a.position + a.orientation * b.position;
    return out;
}

Quat quat_from_euler_xyz(const Vec3& euler) {
    // Extrinsic X, Y, Z is Rz * Ry * Rx as a matrix product.
    Quat q = Eigen::AngleAxisd(euler.z(), Vec3::UnitZ()) *
             Eigen::AngleAxisd(euler.y(), Vec3::UnitY()) *
             Eigen::AngleAxisd(euler.x(), Vec3::UnitX());
    return q.normalized();
}

Vec3 euler_xyz_from_quat(const Quat& q) {
    Eigen::Matrix3d r = q.normalized().toRotationMatrix();
    double sy = -r(2, 0);
    sy = std::clamp(sy, -1.0, 1.0);
    double y = std::asin(sy);
    double x, z;
    if (std::abs(sy) < 1.0 - 1e-12) {
        x = std::atan2(r(2, 1), r(2, 2));
        z = std::atan2(r(1, 0), r(0, 0));
    } else {
        // Gimbal lock: only x+z (or x-z) is observable; put it all in z.
        x = 0.0;
        z = std::atan2(-r(0, 1), r(1, 1));
    }
    return {x, y, z};
}

double quat_angle(const Quat& q) {
    double v = q.vec().norm();
    double w = std::abs(q.w());
    return 2.0 * std::atan2(v, w);
}

void CameraIntrinsics::validate() const {
    if (fx <= 0 || fy <= 0) throw std::invalid_argument("camera: focal lengths must be positive");
    if (width < 1 || height < 1) throw std::invalid_argument("camera: image size must be >= 1");
    if (!(0 < near && near < far)) throw std::invalid_argument("camera: need 0 < near < far");
}

CameraIntrinsics CameraIntrinsics::scaled(int new_width, int new_height) const {
    CameraIntrinsics s = *this;
    double kx = static_cast<double>(new_width) / width;
    double ky = static_cast<double>(new_height) / height;
    s.fx *= kx;
    s.fy *= ky;
    s.cx *= kx;
    s.cy *= ky;
    s.width = new_width;
    s.height = new_height;
    return s;
}

void TriMesh::validate() const {
    if (triangles.empty()) throw std::invalid_argument("mesh: no triangles");
    for (const auto& v : vertices)
        if (!v.allFinite()) throw std::invalid_argument("mesh: non-finite vertex");
    int n = static_cast<int>(vertices.size());
    for (const auto& t : triangles)
        for (int k = 0; k < 3; ++k)
            if (t[k] < 0 || t[k] >= n) throw std::invalid_argument("mesh: triangle index out of range");
}

Vec3 TriMesh::min_corner() const {
    Vec3 m = Vec3::Constant(std::numeric_limits<double>::infinity());
    for (const auto& v : vertices) m = m.cwiseMin(v);
    return m;
}

Vec3 TriMesh::max_corner() const {
    Vec3 m = Vec3::Constant(-std::numeric_limits<double>::infinity());
    for (const auto& v : vertices) m = m.cwiseMax(v);
    return m;
}

void ModelInfo::validate() const {
    mesh.validate();
    if ((box_dims.array() <= 0).any())
        throw std::invalid_argument("model " + model_id + ": box_dims must be positive");
    Vec3 half = 0.5 * box_dims;
    Vec3 lo = mesh.min_corner(), hi = mesh.max_corner();
    if ((lo.array() < -half.array() - 1e-6).any() || (hi.array() > half.array() + 1e-6).any())
        throw std::invalid_argument("model " + model_id + ": enclosing box does not contain the mesh");
}

std::vector<Vec3> backproject(const DepthImage& img, const CameraIntrinsics& cam) {
    if (img.width != cam.width || img.height != cam.height)
        throw std::invalid_argument("backproject: image size does not match camera");
    std::vector<Vec3> pts;
    pts.reserve(img.data.size() / 4);
    for (int v = 0; v < img.height; ++v) {
        for (int u = 0; u < img.width; ++u) {
            float d = img.at(u, v);
            if (d <= 0.0f) continue;
            pts.push_back(backproject_pixel(u, v, d, cam));
        }
    }
    return pts;
}

namespace {

Vec3 axis_vector(Axis a) {
    switch (a) {
        case Axis::X: return Vec3::UnitX();
        case Axis::Y: return Vec3::UnitY();
        case Axis::Z: return Vec3::UnitZ();
    }
    return Vec3::UnitZ();
}

// Remove the twist about `axis` from q, returning the swing component.
Quat remove_twist(const Quat& q, const Vec3& axis) {
    Vec3 proj = q.vec().dot(axis) * axis;
    Quat twist(q.w(), proj.x(), proj.y(), proj.z());
    double n = twist.norm();
    if (n < 1e-12) return q;  // rotation nearly orthogonal to axis; nothing to remove
    twist.coeffs() /= n;
    return (q * twist.conjugate()).normalized();
}

}  // namespace

PoseError pose_error(const Pose& estimate, const Pose& truth, const ModelInfo& info) {
    PoseError e;
    e.dt = (estimate.position - truth.position).norm();
    Quat rel = (truth.orientation.conjugate() * estimate.orientation).normalized();
    if (info.symmetry_axis) rel = remove_twist(rel, axis_vector(*info.symmetry_axis));
    e.dtheta = quat_angle(rel);
    return e;
}

}  // namespace srp::geom
