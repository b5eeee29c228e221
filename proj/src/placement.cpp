#include "srp/placement.hpp"

#include <algorithm>
#include <cmath>

#include "srp/rng.hpp"

namespace srp::plan {

using scenegraph::Instance;
using scenegraph::Polygon;

WorldState WorldState::from_graph(const scenegraph::SceneGraph& g) {
    WorldState w;
    w.objects = g.instances;
    w.table_height = g.table_height;
    w.table_bounds = g.table_bounds;
    w.proximity = g.proximity;
    return w;
}

namespace {

constexpr uint64_t kTagPlacement = 0x97AC;

// Full-box projection onto the table plane; conservative collision footprint.
Polygon box_hull_2d(const Instance& inst, const geom::ModelInfo& info) {
    Polygon top = scenegraph::footprint(inst.pose, info, scenegraph::Surface::Top);
    Polygon bottom = scenegraph::footprint(inst.pose, info, scenegraph::Surface::Bottom);
    Polygon pts = top;
    pts.insert(pts.end(), bottom.begin(), bottom.end());
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const auto& a, const auto& b) { return a == b; }),
              pts.end());
    if (pts.size() < 3) return pts;
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    // Andrew monotone chain
    Polygon hull(2 * pts.size());
    size_t k = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

struct ZInterval {
    double lo, hi;
};

ZInterval z_interval(const Instance& inst, const geom::ModelInfo& info) {
    Eigen::Matrix3d r = inst.pose.orientation.toRotationMatrix();
    double half = 0.0;
    for (int a = 0; a < 3; ++a) half += std::abs(r(2, a)) * 0.5 * info.box_dims[a];
    return {inst.pose.position.z() - half, inst.pose.position.z() + half};
}

bool collides(const Instance& cand, const WorldState& world, const registry::ModelRegistry& reg) {
    const geom::ModelInfo& info = reg.get(cand.model_id);
    ZInterval zc = z_interval(cand, info);
    Polygon hull = box_hull_2d(cand, info);
    for (const auto& [id, other] : world.objects) {
        if (id == cand.id) continue;
        const geom::ModelInfo& oinfo = reg.get(other.model_id);
        ZInterval zo = z_interval(other, oinfo);
        if (zc.lo >= zo.hi - 1e-9 || zc.hi <= zo.lo + 1e-9) continue;  // resting contact is fine
        if (scenegraph::overlap_area(hull, box_hull_2d(other, oinfo)) > 1e-12) return true;
    }
    return false;
}

bool inside_table(const Instance& cand, const geom::ModelInfo& info, const detect::TableBounds& b) {
    for (const auto& p : box_hull_2d(cand, info))
        if (p.x() < b.min_x || p.x() > b.max_x || p.y() < b.min_y || p.y() > b.max_y) return false;
    return true;
}

struct PlacementGoal {
    enum class Kind { Table, OnObject, InVessel, InRegion } kind;
    scenegraph::Axiom relation;
    std::string target;
};

PlacementGoal placement_goal(const GroundedAction& action, const WorldState& world) {
    if (action.name == "place")
        return {PlacementGoal::Kind::Table, scenegraph::on(action.args[0], scenegraph::kTableId),
                scenegraph::kTableId};
    if (action.name == "stack")
        return {PlacementGoal::Kind::OnObject, scenegraph::on(action.args[0], action.args[1]),
                action.args[1]};
    if (action.name == "place_in") {
        const std::string& target = action.args[1];
        if (world.objects.count(target))
            return {PlacementGoal::Kind::InVessel, scenegraph::in(action.args[0], target), target};
        return {PlacementGoal::Kind::InRegion, scenegraph::in(target, action.args[0]), target};
    }
    throw PlacementError("sample_placement: action " + action.str() + " places nothing");
}

geom::Pose upright_yaw(const geom::Vec3& position, double yaw) {
    return {position, geom::Quat(Eigen::AngleAxisd(yaw, geom::Vec3::UnitZ()))};
}

double top_z(const Instance& inst, const geom::ModelInfo& info) {
    return z_interval(inst, info).hi;
}

Eigen::Vector2d polygon_centroid(const Polygon& poly) {
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto& p : poly) c += p;
    return c / static_cast<double>(poly.size());
}

geom::Pose propose(const PlacementGoal& goal, const Instance& held, const geom::ModelInfo& info,
                   const WorldState& world, const registry::ModelRegistry& reg, rng::Stream& st) {
    double yaw = st.uniform(0.0, 2.0 * M_PI);
    switch (goal.kind) {
        case PlacementGoal::Kind::Table: {
            const auto& b = world.table_bounds;
            double margin = 0.5 * std::hypot(info.box_dims.x(), info.box_dims.y()) + 0.005;
            double x0 = b.min_x + margin, x1 = b.max_x - margin;
            double y0 = b.min_y + margin, y1 = b.max_y - margin;
            if (x0 >= x1 || y0 >= y1)
                throw PlacementError("sample_placement: object does not fit the table bounds");
            geom::Vec3 pos(st.uniform(x0, x1), st.uniform(y0, y1),
                           world.table_height + 0.5 * info.box_dims.z());
            return upright_yaw(pos, yaw);
        }
        case PlacementGoal::Kind::OnObject:
        case PlacementGoal::Kind::InVessel: {
            auto it = world.objects.find(goal.target);
            if (it == world.objects.end())
                throw PlacementError("sample_placement: target " + goal.target + " is not in the world");
            const geom::ModelInfo& tinfo = reg.get(it->second.model_id);
            Polygon top = scenegraph::footprint(it->second.pose, tinfo, scenegraph::Surface::Top);
            Eigen::Vector2d c = polygon_centroid(top);
            // jitter within the central part of the supporter's top face
            double rx = 0.0, ry = 0.0;
            for (const auto& p : top) {
                rx = std::max(rx, std::abs(p.x() - c.x()));
                ry = std::max(ry, std::abs(p.y() - c.y()));
            }
            double jx = st.uniform(-0.3, 0.3) * rx;
            double jy = st.uniform(-0.3, 0.3) * ry;
            geom::Vec3 pos(c.x() + jx, c.y() + jy,
                           top_z(it->second, tinfo) + 0.5 * info.box_dims.z());
            return upright_yaw(pos, yaw);
        }
        case PlacementGoal::Kind::InRegion: {
            const scenegraph::ProximityDecl* decl = nullptr;
            for (const auto& d : world.proximity)
                if (d.region == goal.target) decl = &d;
            if (!decl)
                throw PlacementError("sample_placement: region " + goal.target + " is not declared");
            auto it = world.objects.find(decl->parent);
            if (it == world.objects.end())
                throw PlacementError("sample_placement: region parent " + decl->parent + " is not in the world");
            const geom::ModelInfo& pinfo = reg.get(it->second.model_id);
            const geom::LocalBox* box = nullptr;
            for (const auto& r : pinfo.virtual_regions)
                if (r.id == decl->region) box = &r;
            if (!box)
                throw PlacementError("sample_placement: model " + pinfo.model_id + " has no region " + decl->region);
            geom::Vec3 local(st.uniform(box->min.x(), box->max.x()),
                             st.uniform(box->min.y(), box->max.y()),
                             st.uniform(box->min.z(), box->max.z()));
            geom::Vec3 pos = it->second.pose.transform(local);
            // prefer resting on the parent when that stays inside the region
            double rest_z = top_z(it->second, pinfo) + 0.5 * info.box_dims.z();
            geom::Vec3 rest_world(pos.x(), pos.y(), rest_z);
            if (box->contains(it->second.pose.inverse().transform(rest_world))) pos = rest_world;
            return upright_yaw(pos, yaw);
        }
    }
    throw PlacementError("sample_placement: unknown goal kind");
}

geom::Pose sample_placement_impl(const Instance& held, const GroundedAction& action,
                                 const WorldState& world, const registry::ModelRegistry& reg,
                                 uint64_t seed, int max_tries) {
    PlacementGoal goal = placement_goal(action, world);
    const geom::ModelInfo& info = reg.get(held.model_id);
    rng::Stream st(rng::stream_key(seed, kTagPlacement));

    for (int attempt = 0; attempt < max_tries; ++attempt) {
        Instance cand = held;
        cand.pose = propose(goal, held, info, world, reg, st);
        if (goal.kind == PlacementGoal::Kind::Table && !inside_table(cand, info, world.table_bounds))
            continue;
        if (collides(cand, world, reg)) continue;
        std::vector<Instance> hypothetical;
        hypothetical.reserve(world.objects.size() + 1);
        for (const auto& [id, inst] : world.objects) hypothetical.push_back(inst);
        hypothetical.push_back(cand);
        auto graph = scenegraph::derive_scene_graph(hypothetical, reg, world.table_height, world.proximity);
        if (!graph.contains(goal.relation)) continue;
        return cand.pose;
    }
    throw PlacementError("sample_placement: no valid pose for " + action.str() + " after " +
                         std::to_string(max_tries) + " tries");
}

}  // namespace

geom::Pose sample_placement(const GroundedAction& action, const WorldState& world,
                            const registry::ModelRegistry& reg, uint64_t seed, int max_tries) {
    if (action.args.empty()) throw PlacementError("sample_placement: action has no arguments");
    auto it = world.objects.find(action.args[0]);
    if (it == world.objects.end())
        throw PlacementError("sample_placement: " + action.args[0] + " is not in the world");
    Instance held = it->second;
    WorldState without = world;
    without.objects.erase(action.args[0]);
    return sample_placement_impl(held, action, without, reg, seed, max_tries);
}

SimulationResult simulate_plan(const std::vector<GroundedAction>& plan, WorldState world,
                               const registry::ModelRegistry& reg, uint64_t seed) {
    SimulationResult result;
    result.steps.reserve(plan.size());
    std::optional<Instance> held;

    for (size_t i = 0; i < plan.size(); ++i) {
        const GroundedAction& a = plan[i];
        if (a.name == "pick" || a.name == "unstack" || a.name == "remove_from") {
            auto it = world.objects.find(a.args.empty() ? "" : a.args[0]);
            if (held || it == world.objects.end()) {
                result.error = a.str() + (held ? ": hand is not empty" : ": object not in the world");
                result.world = world;
                return result;
            }
            held = it->second;
            world.objects.erase(it);
            result.steps.push_back({a, std::nullopt});
        } else if (a.name == "place" || a.name == "stack" || a.name == "place_in") {
            if (!held || held->id != a.args[0]) {
                result.error = a.str() + ": object is not held";
                result.world = world;
                return result;
            }
            geom::Pose pose;
            try {
                pose = sample_placement_impl(*held, a, world, reg, rng::stream_key(seed, 0x57E9, i), 300);
            } catch (const PlacementError& e) {
                result.error = e.what();
                result.world = world;
                return result;
            }
            held->pose = pose;
            world.objects[held->id] = *held;
            held.reset();
            result.steps.push_back({a, pose});
        } else {
            result.error = a.str() + ": unknown action";
            result.world = world;
            return result;
        }
    }
    result.ok = true;
    result.world = world;
    return result;
}

}  // namespace srp::plan
