#include "srp/registry.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "srp/mesh_obj.hpp"

namespace srp::registry {

namespace fs = std::filesystem;
using nlohmann::json;

void ModelRegistry::add(ModelInfo info) {
    info.validate();
    models_[info.model_id] = std::move(info);
}

const ModelInfo& ModelRegistry::get(const std::string& id) const {
    auto it = models_.find(id);
    if (it == models_.end()) throw std::runtime_error("unknown model_id: " + id);
    return it->second;
}

std::vector<std::string> ModelRegistry::ids() const {
    std::vector<std::string> out;
    out.reserve(models_.size());
    for (const auto& [id, _] : models_) out.push_back(id);
    return out;
}

TriMesh make_box_mesh(double sx, double sy, double sz) {
    TriMesh m;
    double hx = sx / 2, hy = sy / 2, hz = sz / 2;
    for (int i = 0; i < 8; ++i)
        m.vertices.emplace_back(i & 1 ? hx : -hx, i & 2 ? hy : -hy, i & 4 ? hz : -hz);
    auto quad = [&m](int a, int b, int c, int d) {
        m.triangles.emplace_back(a, b, c);
        m.triangles.emplace_back(a, c, d);
    };
    quad(0, 1, 3, 2);  // bottom
    quad(4, 6, 7, 5);  // top
    quad(0, 4, 5, 1);  // y-
    quad(2, 3, 7, 6);  // y+
    quad(0, 2, 6, 4);  // x-
    quad(1, 5, 7, 3);  // x+
    return m;
}

TriMesh make_prism_mesh(double radius, double height, int sides) {
    TriMesh m;
    double hz = height / 2;
    for (int k = 0; k < sides; ++k) {
        double a = 2.0 * M_PI * k / sides;
        m.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), -hz);
        m.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), hz);
    }
    int cb = static_cast<int>(m.vertices.size());
    m.vertices.emplace_back(0, 0, -hz);
    int ct = cb + 1;
    m.vertices.emplace_back(0, 0, hz);
    for (int k = 0; k < sides; ++k) {
        int k2 = (k + 1) % sides;
        int b0 = 2 * k, t0 = 2 * k + 1, b1 = 2 * k2, t1 = 2 * k2 + 1;
        m.triangles.emplace_back(b0, b1, t1);
        m.triangles.emplace_back(b0, t1, t0);
        m.triangles.emplace_back(cb, b1, b0);
        m.triangles.emplace_back(ct, t0, t1);
    }
    return m;
}

TriMesh translated(TriMesh mesh, const Vec3& offset) {
    for (auto& v : mesh.vertices) v += offset;
    return mesh;
}

void append_mesh(TriMesh& dst, const TriMesh& src) {
    int base = static_cast<int>(dst.vertices.size());
    dst.vertices.insert(dst.vertices.end(), src.vertices.begin(), src.vertices.end());
    for (const auto& t : src.triangles)
        dst.triangles.emplace_back(t[0] + base, t[1] + base, t[2] + base);
}

TriMesh make_open_box_mesh(double sx, double sy, double sz, double wall) {
    TriMesh m;
    double hz = sz / 2;
    // bottom slab
    append_mesh(m, translated(make_box_mesh(sx, sy, wall), {0, 0, -hz + wall / 2}));
    double wh = sz - wall;  // wall height
    double wz = -hz + wall + wh / 2;
    append_mesh(m, translated(make_box_mesh(sx, wall, wh), {0, -(sy - wall) / 2, wz}));
    append_mesh(m, translated(make_box_mesh(sx, wall, wh), {0, (sy - wall) / 2, wz}));
    append_mesh(m, translated(make_box_mesh(wall, sy - 2 * wall, wh), {-(sx - wall) / 2, 0, wz}));
    append_mesh(m, translated(make_box_mesh(wall, sy - 2 * wall, wh), {(sx - wall) / 2, 0, wz}));
    return m;
}

namespace {

ModelInfo make_model(std::string id, TriMesh mesh, bool concave = false,
                     std::optional<geom::Axis> sym = std::nullopt) {
    ModelInfo mi;
    mi.model_id = std::move(id);
    mi.mesh = std::move(mesh);
    // Smallest origin-centered box that encloses the mesh.
    Vec3 lo = mi.mesh.min_corner(), hi = mi.mesh.max_corner();
    mi.box_dims = hi.cwiseAbs().cwiseMax(lo.cwiseAbs()) * 2.0;
    mi.concave = concave;
    mi.symmetry_axis = sym;
    return mi;
}

std::optional<geom::Axis> axis_from_string(const std::string& s) {
    if (s == "x") return geom::Axis::X;
    if (s == "y") return geom::Axis::Y;
    if (s == "z") return geom::Axis::Z;
    throw std::runtime_error("bad symmetry_axis: " + s);
}

std::string axis_to_string(geom::Axis a) {
    switch (a) {
        case geom::Axis::X: return "x";
        case geom::Axis::Y: return "y";
        case geom::Axis::Z: return "z";
    }
    return "z";
}

TriMesh mesh_from_json(const json& spec, const fs::path& base_dir) {
    if (spec.contains("obj")) {
        fs::path p = spec.at("obj").get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        return geom::load_mesh(p.string());
    }
    if (spec.contains("box")) {
        auto d = spec.at("box").get<std::vector<double>>();
        if (d.size() != 3) throw std::runtime_error("mesh box needs [sx, sy, sz]");
        return make_box_mesh(d[0], d[1], d[2]);
    }
    if (spec.contains("prism")) {
        const auto& p = spec.at("prism");
        return make_prism_mesh(p.at("radius").get<double>(), p.at("height").get<double>(),
                               p.value("sides", 16));
    }
    if (spec.contains("open_box")) {
        auto d = spec.at("open_box").get<std::vector<double>>();
        if (d.size() != 4) throw std::runtime_error("mesh open_box needs [sx, sy, sz, wall]");
        return make_open_box_mesh(d[0], d[1], d[2], d[3]);
    }
    throw std::runtime_error("mesh spec needs one of: obj, box, prism, open_box");
}

}  // namespace

ModelRegistry load_registry(const std::string& path) {
    if (path == "demo" || path == "builtin:demo") return make_demo_registry();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open registry: " + path);
    json j;
    in >> j;
    fs::path base = fs::path(path).parent_path();
    ModelRegistry reg;
    for (const auto& jm : j.at("models")) {
        ModelInfo mi;
        mi.model_id = jm.at("id").get<std::string>();
        mi.mesh = mesh_from_json(jm.at("mesh"), base);
        if (jm.contains("box_dims")) {
            auto d = jm.at("box_dims").get<std::vector<double>>();
            if (d.size() != 3) throw std::runtime_error("box_dims needs three entries");
            mi.box_dims = Vec3(d[0], d[1], d[2]);
        } else {
            Vec3 lo = mi.mesh.min_corner(), hi = mi.mesh.max_corner();
            mi.box_dims = hi.cwiseAbs().cwiseMax(lo.cwiseAbs()) * 2.0;
        }
        if (jm.contains("symmetry_axis") && !jm.at("symmetry_axis").is_null())
            mi.symmetry_axis = axis_from_string(jm.at("symmetry_axis").get<std::string>());
        mi.concave = jm.value("concave", false);
        for (const auto& jr : jm.value("virtual_regions", json::array())) {
            geom::LocalBox box;
            box.id = jr.at("id").get<std::string>();
            auto lo = jr.at("min").get<std::vector<double>>();
            auto hi = jr.at("max").get<std::vector<double>>();
            if (lo.size() != 3 || hi.size() != 3) throw std::runtime_error("region min/max need three entries");
            box.min = Vec3(lo[0], lo[1], lo[2]);
            box.max = Vec3(hi[0], hi[1], hi[2]);
            mi.virtual_regions.push_back(box);
        }
        reg.add(std::move(mi));
    }
    return reg;
}

void save_registry(const ModelRegistry& reg, const std::string& dir) {
    fs::create_directories(dir);
    json models = json::array();
    for (const auto& id : reg.ids()) {
        const ModelInfo& mi = reg.get(id);
        std::string obj_name = id + ".obj";
        geom::save_mesh(mi.mesh, (fs::path(dir) / obj_name).string());
        json jm;
        jm["id"] = id;
        jm["mesh"] = {{"obj", obj_name}};
        jm["box_dims"] = {mi.box_dims.x(), mi.box_dims.y(), mi.box_dims.z()};
        if (mi.symmetry_axis) jm["symmetry_axis"] = axis_to_string(*mi.symmetry_axis);
        jm["concave"] = mi.concave;
        json regions = json::array();
        for (const auto& r : mi.virtual_regions) {
            regions.push_back({{"id", r.id},
                               {"min", {r.min.x(), r.min.y(), r.min.z()}},
                               {"max", {r.max.x(), r.max.y(), r.max.z()}}});
        }
        jm["virtual_regions"] = regions;
        models.push_back(jm);
    }
    std::ofstream out(fs::path(dir) / "registry.json");
    if (!out) throw std::runtime_error("cannot write registry.json in " + dir);
    out << json{{"models", models}}.dump(2) << "\n";
}

ModelRegistry make_demo_registry() {
    ModelRegistry reg;

    // Plain stackable boxes. Their 180-degree yaw ambiguity is fine for
    // relational tasks but keeps them out of the pose-accuracy pool.
    reg.add(make_model("block", make_box_mesh(0.08, 0.06, 0.05)));
    reg.add(make_model("slab", make_box_mesh(0.14, 0.11, 0.04)));

    // Asymmetric shapes whose depth image pins down yaw.
    {
        TriMesh l;
        append_mesh(l, translated(make_box_mesh(0.10, 0.035, 0.06), {0, -0.0225, 0}));
        append_mesh(l, translated(make_box_mesh(0.035, 0.045, 0.06), {-0.0325, 0.0175, 0}));
        reg.add(make_model("lblock", std::move(l)));
    }
    {
        // Right-triangular prism (ramp): slope direction disambiguates yaw.
        TriMesh w;
        double hx = 0.05, hy = 0.04, hz = 0.03;
        w.vertices = {{-hx, -hy, -hz}, {hx, -hy, -hz}, {hx, -hy, hz},
                      {-hx, hy, -hz},  {hx, hy, -hz},  {hx, hy, hz}};
        w.triangles = {{0, 1, 2}, {3, 5, 4}, {0, 2, 5}, {0, 5, 3},
                       {0, 3, 4}, {0, 4, 1}, {1, 4, 5}, {1, 5, 2}};
        reg.add(make_model("wedge", std::move(w)));
    }
    {
        TriMesh t;
        append_mesh(t, translated(make_box_mesh(0.11, 0.035, 0.055), {0, 0.02, 0}));
        append_mesh(t, translated(make_box_mesh(0.035, 0.045, 0.055), {0, -0.02, 0}));
        reg.add(make_model("tee", std::move(t)));
    }

    reg.add(make_model("cyl", make_prism_mesh(0.035, 0.10, 16), false, geom::Axis::Z));
    reg.add(make_model("bowl", make_open_box_mesh(0.11, 0.11, 0.05, 0.012), true));

    // Tray with two virtual regions above its surface, used for proximity goals.
    {
        ModelInfo tray = make_model("tray", make_box_mesh(0.28, 0.20, 0.03));
        tray.virtual_regions.push_back({"g1", Vec3(0.02, -0.085, 0.015), Vec3(0.125, 0.085, 0.15)});
        tray.virtual_regions.push_back({"g2", Vec3(-0.125, -0.085, 0.015), Vec3(-0.02, 0.085, 0.15)});
        reg.add(std::move(tray));
    }
    return reg;
}

}  // namespace srp::registry
