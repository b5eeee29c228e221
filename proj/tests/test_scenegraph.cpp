#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "srp/bench.hpp"
#include "srp/registry.hpp"
#include "srp/rng.hpp"
#include "srp/scenegraph.hpp"

using namespace srp;
using namespace srp::scenegraph;
using geom::Pose;
using geom::Quat;
using geom::Vec3;

namespace {

Pose upright_at(double x, double y, double z, double yaw = 0.0) {
    return {Vec3(x, y, z), Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()))};
}

Instance make_inst(std::string id, std::string model, Pose pose) {
    Instance i;
    i.id = std::move(id);
    i.model_id = std::move(model);
    i.pose = pose;
    return i;
}

// Independent hull oracle: project all 8 box corners, gift-wrap them.
Polygon hull_oracle(const Pose& pose, const geom::ModelInfo& info) {
    std::vector<Eigen::Vector2d> pts;
    Vec3 half = 0.5 * info.box_dims;
    for (int i = 0; i < 8; ++i) {
        Vec3 c(i & 1 ? half.x() : -half.x(), i & 2 ? half.y() : -half.y(),
               i & 4 ? half.z() : -half.z());
        Vec3 w = pose.transform(c);
        pts.emplace_back(w.x(), w.y());
    }
    // jarvis march
    size_t start = 0;
    for (size_t i = 1; i < pts.size(); ++i)
        if (pts[i].x() < pts[start].x() ||
            (pts[i].x() == pts[start].x() && pts[i].y() < pts[start].y()))
            start = i;
    Polygon hull;
    size_t cur = start;
    do {
        hull.push_back(pts[cur]);
        size_t next = (cur + 1) % pts.size();
        for (size_t i = 0; i < pts.size(); ++i) {
            double cr = (pts[next].x() - pts[cur].x()) * (pts[i].y() - pts[cur].y()) -
                        (pts[next].y() - pts[cur].y()) * (pts[i].x() - pts[cur].x());
            if (cr > 1e-15) next = i;
        }
        cur = next;
    } while (cur != start && hull.size() <= pts.size());
    return hull;
}

}  // namespace

TEST_CASE("overlap_area on squares") {
    Polygon unit = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(overlap_area(unit, unit) == doctest::Approx(1.0));
    Polygon far = {{5, 5}, {6, 5}, {6, 6}, {5, 6}};
    CHECK(overlap_area(unit, far) == doctest::Approx(0.0));
    Polygon shifted = {{0.5, 0}, {1.5, 0}, {1.5, 1}, {0.5, 1}};
    CHECK(overlap_area(unit, shifted) == doctest::Approx(0.5));
    // orientation of the inputs must not matter
    Polygon cw = {{0, 1}, {1, 1}, {1, 0}, {0, 0}};
    CHECK(overlap_area(cw, shifted) == doctest::Approx(0.5));
}

TEST_CASE("overlap_area is symmetric and bounded by both areas") {
    rng::Stream st(rng::stream_key(81));
    for (int i = 0; i < 100; ++i) {
        auto rand_rect = [&]() {
            double cx = st.uniform(-1, 1), cy = st.uniform(-1, 1);
            double hx = st.uniform(0.1, 0.8), hy = st.uniform(0.1, 0.8);
            double a = st.uniform(0, M_PI);
            Polygon p;
            for (auto [sx, sy] : {std::pair{1, 1}, {1, -1}, {-1, -1}, {-1, 1}}) {
                double x = sx * hx, y = sy * hy;
                p.emplace_back(cx + x * std::cos(a) - y * std::sin(a),
                               cy + x * std::sin(a) + y * std::cos(a));
            }
            return p;
        };
        Polygon a = rand_rect(), b = rand_rect();
        double ab = overlap_area(a, b), ba = overlap_area(b, a);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
        CHECK(ab <= polygon_area(a) + 1e-12);
        CHECK(ab <= polygon_area(b) + 1e-12);
    }
}

TEST_CASE("support rule: resting, elevated, tilted") {
    auto reg = registry::make_demo_registry();
    const auto& info = reg.get("block");
    double h_table = 0.7;
    double hz = info.box_dims.z();

    // resting exactly on the table: not supported by an object
    CHECK_FALSE(is_supported_by_object(upright_at(0, 0, h_table + 0.5 * hz), info, h_table));
    // elevated by 1.5 box heights: supported
    CHECK(is_supported_by_object(upright_at(0, 0, h_table + 1.5 * hz), info, h_table));
    // just above the slack: supported
    CHECK(is_supported_by_object(upright_at(0, 0, h_table + 0.5 * hz + 0.006), info, h_table));
    // tilted 40 degrees: no axis aligned, always supported
    Pose tilted = upright_at(0, 0, h_table + 0.5 * hz);
    tilted.orientation = Quat(Eigen::AngleAxisd(40.0 * M_PI / 180.0, Vec3::UnitX()));
    CHECK(is_supported_by_object(tilted, info, h_table));
    // lying on its side: the x-axis is vertical, so h is box_dims.x
    Pose side = upright_at(0, 0, h_table + 0.5 * info.box_dims.x());
    side.orientation = Quat(Eigen::AngleAxisd(M_PI / 2, Vec3::UnitY()));
    CHECK_FALSE(is_supported_by_object(side, info, h_table));
}

TEST_CASE("footprint of upright and rotated cubes") {
    geom::ModelInfo cube;
    cube.model_id = "cube";
    cube.mesh = registry::make_box_mesh(1, 1, 1);
    cube.box_dims = Vec3(1, 1, 1);

    auto top = footprint(upright_at(0, 0, 0), cube, Surface::Top);
    auto bottom = footprint(upright_at(0, 0, 0), cube, Surface::Bottom);
    CHECK(polygon_area(top) == doctest::Approx(1.0));
    CHECK(polygon_area(bottom) == doctest::Approx(1.0));
    CHECK(overlap_area(top, bottom) == doctest::Approx(1.0));

    auto rot = footprint(upright_at(0, 0, 0, M_PI / 4), cube, Surface::Top);
    CHECK(polygon_area(rot) == doctest::Approx(1.0));
    // rotated square still overlaps the axis-aligned one by 2*(sqrt(2)-1)
    CHECK(overlap_area(top, rot) == doctest::Approx(2 * (std::sqrt(2.0) - 1.0)).epsilon(1e-9));
}

TEST_CASE("footprint of a tilted cube matches the hull oracle") {
    geom::ModelInfo cube;
    cube.model_id = "cube";
    cube.mesh = registry::make_box_mesh(0.4, 0.3, 0.2);
    cube.box_dims = Vec3(0.4, 0.3, 0.2);
    Pose tilted = upright_at(0.1, -0.2, 0.5);
    tilted.orientation = Quat(Eigen::AngleAxisd(0.3, Vec3::UnitX()));

    auto top = footprint(tilted, cube, Surface::Top);
    auto oracle = hull_oracle(tilted, cube);
    // the top-face projection must lie inside the full-box hull and carry
    // the face's area scaled by the tilt cosine
    CHECK(overlap_area(top, oracle) == doctest::Approx(polygon_area(top)).epsilon(1e-9));
    CHECK(polygon_area(top) == doctest::Approx(0.4 * 0.3 * std::cos(0.3)).epsilon(1e-9));
}

TEST_CASE("find_supporter picks the dominant overlap") {
    auto reg = registry::make_demo_registry();
    double h = 0.7;
    auto slab_z = h + 0.5 * reg.get("slab").box_dims.z();
    std::vector<Instance> candidates = {
        make_inst("left", "slab", upright_at(-0.10, 0, slab_z)),
        make_inst("right", "slab", upright_at(0.10, 0, slab_z)),
    };
    double block_z = slab_z + 0.5 * reg.get("slab").box_dims.z() + 0.5 * reg.get("block").box_dims.z();

    // fully over the left slab
    Instance b1 = make_inst("b", "block", upright_at(-0.10, 0, block_z));
    CHECK(find_supporter(b1, candidates, reg) == "left");

    // bridging 60/40 toward the right slab: the slabs span x in
    // [-0.17,-0.03] and [0.03,0.17]; the block is 0.08 wide
    Instance b2 = make_inst("b", "block", upright_at(0.058, 0, block_z));
    // oracle via overlap areas
    double left_ov = overlap_area(footprint(b2.pose, reg.get("block"), Surface::Bottom),
                                  footprint(candidates[0].pose, reg.get("slab"), Surface::Top));
    double right_ov = overlap_area(footprint(b2.pose, reg.get("block"), Surface::Bottom),
                                   footprint(candidates[1].pose, reg.get("slab"), Surface::Top));
    REQUIRE(right_ov > left_ov);
    CHECK(find_supporter(b2, candidates, reg) == "right");

    // overlapping nothing: fall back to the table
    Instance b3 = make_inst("b", "block", upright_at(0.5, 0.5, block_z));
    CHECK(find_supporter(b3, candidates, reg) == "table");
}

TEST_CASE("derive: single object on the table") {
    auto reg = registry::make_demo_registry();
    double h = 0.7;
    auto g = derive_scene_graph(
        {make_inst("a", "block", upright_at(0, 0, h + 0.5 * reg.get("block").box_dims.z()))}, reg, h);
    CHECK(g.axioms == std::set<Axiom>{exist("a"), clear("a"), on("a", "table")});
    CHECK(support_forest_ok(g));
    CHECK(clear_duality_ok(g));
}

TEST_CASE("derive: two-object stack") {
    auto reg = registry::make_demo_registry();
    double h = 0.7;
    double slab_h = reg.get("slab").box_dims.z();
    double block_h = reg.get("block").box_dims.z();
    auto g = derive_scene_graph(
        {
            make_inst("a", "slab", upright_at(0, 0, h + 0.5 * slab_h)),
            make_inst("b", "block", upright_at(0.01, -0.01, h + slab_h + 0.5 * block_h)),
        },
        reg, h);
    std::set<Axiom> expect = {exist("a"), exist("b"), on("a", "table"), on("b", "a"), clear("b")};
    CHECK(g.axioms == expect);
    CHECK_FALSE(g.contains(clear("a")));
    CHECK(support_forest_ok(g));
    CHECK(clear_duality_ok(g));
}

TEST_CASE("derive: concave supporter yields in()") {
    auto reg = registry::make_demo_registry();
    double h = 0.7;
    double bowl_h = reg.get("bowl").box_dims.z();
    double cyl_h = reg.get("cyl").box_dims.z();
    auto g = derive_scene_graph(
        {
            make_inst("bowl", "bowl", upright_at(0, 0, h + 0.5 * bowl_h)),
            make_inst("spoon", "cyl", upright_at(0.01, 0, h + bowl_h + 0.5 * cyl_h)),
        },
        reg, h);
    CHECK(g.contains(in("spoon", "bowl")));
    CHECK_FALSE(g.contains(clear("bowl")));
    CHECK(g.contains(clear("spoon")));
}

TEST_CASE("derive: three-level chain keeps the forest property") {
    // nested footprints tie on overlap, so the elevation tie-break must pick
    // the nearest supporter
    auto reg = registry::make_demo_registry();
    double h = 0.7;
    double tray_h = reg.get("tray").box_dims.z();
    double slab_h = reg.get("slab").box_dims.z();
    double block_h = reg.get("block").box_dims.z();
    auto g = derive_scene_graph(
        {
            make_inst("base", "tray", upright_at(0, 0, h + 0.5 * tray_h)),
            make_inst("mid", "slab", upright_at(0, 0, h + tray_h + 0.5 * slab_h)),
            make_inst("top", "block", upright_at(0, 0, h + tray_h + slab_h + 0.5 * block_h)),
        },
        reg, h);
    CHECK(g.contains(on("mid", "base")));
    CHECK(g.contains(on("top", "mid")));
    CHECK(g.contains(clear("top")));
    CHECK_FALSE(g.contains(clear("mid")));
    CHECK(support_forest_ok(g));
    CHECK(clear_duality_ok(g));
}

TEST_CASE("derive: proximity regions emit has() and in()") {
    auto reg = registry::make_demo_registry();
    double h = 0.7;
    double tray_h = reg.get("tray").box_dims.z();
    double cyl_h = reg.get("cyl").box_dims.z();
    Pose tray_pose = upright_at(0.1, 0.05, h + 0.5 * tray_h, 0.4);
    // put the cylinder inside region g1 expressed in the tray frame
    Vec3 local(0.07, 0.0, 0.5 * tray_h + 0.5 * cyl_h);
    Vec3 world = tray_pose.transform(local);
    std::vector<Instance> instances = {
        make_inst("tray", "tray", tray_pose),
        make_inst("cup", "cyl", {world, tray_pose.orientation}),
        make_inst("far", "block", upright_at(-0.3, -0.2, h + 0.5 * reg.get("block").box_dims.z())),
    };
    std::vector<ProximityDecl> prox = {{"tray", "g1", "cup"}, {"tray", "g2", "far"}};
    auto g = derive_scene_graph(instances, reg, h, prox);
    CHECK(g.contains(has("tray", "g1")));
    CHECK(g.contains(has("tray", "g2")));
    CHECK(g.contains(in("g1", "cup")));        // region argument first
    CHECK_FALSE(g.contains(in("g2", "far")));  // far object is outside its region
    CHECK(g.contains(on("cup", "tray")));
    CHECK(support_forest_ok(g));
    CHECK(clear_duality_ok(g));
    // the virtual in() must not break clear duality for the child
    CHECK(g.contains(clear("cup")));

    CHECK_THROWS(derive_scene_graph(instances, reg, h, {{"tray", "g1", "ghost"}}));
    CHECK_THROWS(derive_scene_graph(instances, reg, h, {{"ghost", "g1", "cup"}}));
    CHECK_THROWS(derive_scene_graph(instances, reg, h, {{"tray", "nope", "cup"}}));
}

TEST_CASE("derive is idempotent on rebuilt instances") {
    auto reg = registry::make_demo_registry();
    bench::SceneGenConfig cfg;
    cfg.n_objects = 5;
    cfg.stacking_prob = 0.6;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        auto gen = bench::generate_scene(reg, cfg, seed);
        std::vector<Instance> instances;
        for (const auto& [id, inst] : gen.intended.instances) instances.push_back(inst);
        auto g1 = derive_scene_graph(instances, reg, cfg.table_height);
        std::vector<Instance> rebuilt;
        for (const auto& [id, inst] : g1.instances) rebuilt.push_back(inst);
        auto g2 = derive_scene_graph(rebuilt, reg, cfg.table_height);
        CHECK(g1.axioms == g2.axioms);
    }
}

TEST_CASE("ground-truth closure: derived graphs equal the generator's intent") {
    auto reg = registry::make_demo_registry();
    bench::SceneGenConfig cfg;
    cfg.n_objects = 5;
    cfg.stacking_prob = 0.5;
    int agree = 0;
    const int n = 60;
    for (uint64_t seed = 0; seed < n; ++seed) {
        auto gen = bench::generate_scene(reg, cfg, seed);
        std::vector<Instance> instances;
        for (const auto& [id, inst] : gen.intended.instances) instances.push_back(inst);
        auto g = derive_scene_graph(instances, reg, cfg.table_height);
        if (g.axioms == gen.intended.axioms) ++agree;
        CHECK(support_forest_ok(g));
        CHECK(clear_duality_ok(g));
    }
    CHECK(agree == n);
}
