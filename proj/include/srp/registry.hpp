// Model registry: id -> ModelInfo. Loadable from JSON (meshes either as OBJ
// paths or procedural primitives), plus the built-in demo set used by the
// benchmarks.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "srp/geometry.hpp"

namespace srp::registry {

using geom::ModelInfo;
using geom::TriMesh;
using geom::Vec3;

class ModelRegistry {
public:
    void add(ModelInfo info);
    bool has(const std::string& id) const { return models_.count(id) > 0; }
    const ModelInfo& get(const std::string& id) const;
    std::vector<std::string> ids() const;
    size_t size() const { return models_.size(); }

private:
    std::map<std::string, ModelInfo> models_;
};

// Axis-aligned box centered at the origin, full extents (sx, sy, sz).
TriMesh make_box_mesh(double sx, double sy, double sz);
// Regular n-gon prism about +z, centered at the origin.
TriMesh make_prism_mesh(double radius, double height, int sides);
// Open-top box: bottom slab plus four walls. Reads as concave from above.
TriMesh make_open_box_mesh(double sx, double sy, double sz, double wall);
// Translate all vertices.
TriMesh translated(TriMesh mesh, const Vec3& offset);
// Append another mesh.
void append_mesh(TriMesh& dst, const TriMesh& src);

// Registry file loader; "demo" or "builtin:demo" yields the built-in set.
// OBJ paths are resolved relative to the registry file.
ModelRegistry load_registry(const std::string& path);
void save_registry(const ModelRegistry& reg, const std::string& dir);

// Built-in desk-scale object set (asymmetric shapes for pose accuracy,
// boxes and vessels for stacking, a tray with virtual regions).
ModelRegistry make_demo_registry();

}  // namespace srp::registry
