#include "srp/scenegraph.hpp"

#include <algorithm>
#include <cmath>

namespace srp::scenegraph {

std::string predicate_name(Predicate p) {
    switch (p) {
        case Predicate::Exist: return "exist";
        case Predicate::Clear: return "clear";
        case Predicate::On: return "on";
        case Predicate::In: return "in";
        case Predicate::Has: return "has";
    }
    return "?";
}

Predicate predicate_from_name(const std::string& name) {
    if (name == "exist") return Predicate::Exist;
    if (name == "clear") return Predicate::Clear;
    if (name == "on") return Predicate::On;
    if (name == "in") return Predicate::In;
    if (name == "has") return Predicate::Has;
    throw std::runtime_error("unknown predicate: " + name);
}

std::string Axiom::str() const {
    std::string s = predicate_name(predicate) + "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) s += ",";
        s += args[i];
    }
    return s + ")";
}

double polygon_area(const Polygon& poly) {
    if (poly.size() < 3) return 0.0;
    double twice = 0.0;
    for (size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        twice += a.x() * b.y() - b.x() * a.y();
    }
    return std::abs(twice) / 2.0;
}

namespace {

Polygon ensure_ccw(Polygon poly) {
    double twice = 0.0;
    for (size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        twice += a.x() * b.y() - b.x() * a.y();
    }
    if (twice < 0) std::reverse(poly.begin(), poly.end());
    return poly;
}

// Clip `subject` against the half-plane left of edge a->b.
Polygon clip_edge(const Polygon& subject, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    Polygon out;
    auto side = [&](const Eigen::Vector2d& p) {
        return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    };
    size_t n = subject.size();
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d& cur = subject[i];
        const Eigen::Vector2d& nxt = subject[(i + 1) % n];
        double sc = side(cur), sn = side(nxt);
        if (sc >= 0) out.push_back(cur);
        if ((sc > 0 && sn < 0) || (sc < 0 && sn > 0)) {
            double t = sc / (sc - sn);
            out.push_back(cur + t * (nxt - cur));
        }
    }
    return out;
}

}  // namespace

double overlap_area(const Polygon& a, const Polygon& b) {
    if (a.size() < 3 || b.size() < 3) return 0.0;
    Polygon clip = ensure_ccw(b);
    Polygon poly = ensure_ccw(a);
    for (size_t i = 0; i < clip.size() && !poly.empty(); ++i)
        poly = clip_edge(poly, clip[i], clip[(i + 1) % clip.size()]);
    return polygon_area(poly);
}

namespace {

struct VerticalAxis {
    int axis = 2;        // model axis index most aligned with world z
    double alignment = 0;  // |cos| of the angle to gravity
    double direction = 1;  // sign of the world-z component
};

VerticalAxis vertical_axis(const Pose& pose) {
    Eigen::Matrix3d r = pose.orientation.toRotationMatrix();
    VerticalAxis best;
    best.alignment = -1;
    for (int a = 0; a < 3; ++a) {
        double wz = r(2, a);
        if (std::abs(wz) > best.alignment) {
            best.alignment = std::abs(wz);
            best.axis = a;
            best.direction = wz >= 0 ? 1.0 : -1.0;
        }
    }
    return best;
}

}  // namespace

bool is_supported_by_object(const Pose& pose, const ModelInfo& info, double table_height,
                            double align_tol, double support_eps) {
    VerticalAxis v = vertical_axis(pose);
    if (v.alignment < std::cos(align_tol)) return true;  // leaning: must rest on something
    double h = info.box_dims[v.axis];
    return pose.position.z() - table_height > 0.5 * h + support_eps;
}

Polygon footprint(const Pose& pose, const ModelInfo& info, Surface surface) {
    VerticalAxis v = vertical_axis(pose);
    double sign = (surface == Surface::Top) ? v.direction : -v.direction;
    geom::Vec3 half = 0.5 * info.box_dims;

    geom::Vec3 face_center = geom::Vec3::Zero();
    face_center[v.axis] = sign * half[v.axis];
    int a1 = (v.axis + 1) % 3, a2 = (v.axis + 2) % 3;

    Polygon poly;
    const double su[4] = {1, 1, -1, -1};
    const double sv[4] = {1, -1, -1, 1};
    for (int c = 0; c < 4; ++c) {
        geom::Vec3 corner = face_center;
        corner[a1] += su[c] * half[a1];
        corner[a2] += sv[c] * half[a2];
        geom::Vec3 world = pose.transform(corner);
        poly.emplace_back(world.x(), world.y());
    }
    return ensure_ccw(poly);
}

namespace {

double top_surface_height(const Instance& inst, const registry::ModelRegistry& reg) {
    const ModelInfo& info = reg.get(inst.model_id);
    VerticalAxis v = vertical_axis(inst.pose);
    geom::Vec3 half = 0.5 * info.box_dims;
    geom::Vec3 face_center = geom::Vec3::Zero();
    face_center[v.axis] = v.direction * half[v.axis];
    int a1 = (v.axis + 1) % 3, a2 = (v.axis + 2) % 3;
    double best = -std::numeric_limits<double>::infinity();
    const double su[4] = {1, 1, -1, -1};
    const double sv[4] = {1, -1, -1, 1};
    for (int c = 0; c < 4; ++c) {
        geom::Vec3 corner = face_center;
        corner[a1] += su[c] * half[a1];
        corner[a2] += sv[c] * half[a2];
        best = std::max(best, inst.pose.transform(corner).z());
    }
    return best;
}

}  // namespace

std::string find_supporter(const Instance& item, const std::vector<Instance>& candidates,
                           const registry::ModelRegistry& reg) {
    Polygon bottom = footprint(item.pose, reg.get(item.model_id), Surface::Bottom);
    std::string best_id = kTableId;
    double best_overlap = 0.0;
    double best_height = -std::numeric_limits<double>::infinity();
    for (const Instance& cand : candidates) {
        if (cand.id == item.id) continue;
        Polygon top = footprint(cand.pose, reg.get(cand.model_id), Surface::Top);
        double ov = overlap_area(bottom, top);
        if (ov <= 0.0) continue;
        double height = top_surface_height(cand, reg);
        bool better = ov > best_overlap ||
                      (ov == best_overlap &&
                       (height > best_height || (height == best_height && cand.id < best_id)));
        if (best_id == kTableId) better = ov > 0.0;  // first real supporter beats the fallback
        if (better) {
            best_id = cand.id;
            best_overlap = ov;
            best_height = height;
        }
    }
    return best_id;
}

SceneGraph derive_scene_graph(const std::vector<Instance>& instances,
                              const registry::ModelRegistry& reg, double table_height,
                              const std::vector<ProximityDecl>& proximity) {
    SceneGraph g;
    g.table_height = table_height;
    g.proximity = proximity;
    for (const Instance& inst : instances) {
        if (inst.id == kTableId) throw std::runtime_error("instance id 'table' is reserved");
        if (g.instances.count(inst.id)) throw std::runtime_error("duplicate instance id: " + inst.id);
        Instance copy = inst;
        copy.concave = reg.get(inst.model_id).concave;
        g.instances[inst.id] = copy;
        g.axioms.insert(exist(inst.id));
    }

    std::vector<Instance> supported, resting;
    for (const auto& [id, inst] : g.instances) {
        if (is_supported_by_object(inst.pose, reg.get(inst.model_id), table_height))
            supported.push_back(inst);
        else
            resting.push_back(inst);
    }
    std::sort(supported.begin(), supported.end(), [](const Instance& a, const Instance& b) {
        if (a.pose.position.z() != b.pose.position.z())
            return a.pose.position.z() < b.pose.position.z();
        return a.id < b.id;
    });

    for (const Instance& inst : resting) g.axioms.insert(on(inst.id, kTableId));

    // Supported objects pick supporters bottom-up, then become candidates
    // themselves so stacks chain.
    for (const Instance& inst : supported) {
        std::string supporter = find_supporter(inst, resting, reg);
        if (supporter == kTableId) {
            g.axioms.insert(on(inst.id, kTableId));
        } else if (g.instances.at(supporter).concave) {
            g.axioms.insert(in(inst.id, supporter));
        } else {
            g.axioms.insert(on(inst.id, supporter));
        }
        resting.push_back(inst);
    }

    // clear(i) iff nothing rests on/in i.
    std::set<std::string> occupied;
    for (const Axiom& a : g.axioms)
        if ((a.predicate == Predicate::On || a.predicate == Predicate::In) && a.args[1] != kTableId)
            occupied.insert(a.args[1]);
    for (const auto& [id, inst] : g.instances)
        if (!occupied.count(id)) g.axioms.insert(clear(id));

    // Declared proximity relations: has(parent, region) always; in(region,
    // child) when the child's position falls inside the region box expressed
    // in the parent's current frame. (The paper's argument order puts the
    // region first.)
    std::map<std::string, std::string> region_parent;
    for (const ProximityDecl& d : proximity) {
        auto pit = g.instances.find(d.parent);
        if (pit == g.instances.end()) throw std::runtime_error("proximity: unknown parent instance " + d.parent);
        if (!g.instances.count(d.child)) throw std::runtime_error("proximity: unknown child instance " + d.child);
        const ModelInfo& pinfo = reg.get(pit->second.model_id);
        const geom::LocalBox* box = nullptr;
        for (const auto& r : pinfo.virtual_regions)
            if (r.id == d.region) box = &r;
        if (!box) throw std::runtime_error("proximity: model " + pinfo.model_id + " has no region " + d.region);
        if (g.instances.count(d.region)) throw std::runtime_error("proximity: region id collides with instance: " + d.region);
        auto [it, inserted] = region_parent.emplace(d.region, d.parent);
        if (!inserted && it->second != d.parent)
            throw std::runtime_error("proximity: region id " + d.region + " used with two parents");

        g.regions.insert(d.region);
        g.axioms.insert(has(d.parent, d.region));
        geom::Vec3 child_local = pit->second.pose.inverse().transform(g.instances.at(d.child).pose.position);
        if (box->contains(child_local)) g.axioms.insert(in(d.region, d.child));
    }
    return g;
}

std::vector<Instance> instances_from_scene(const detect::GroundTruthScene& scene,
                                           const registry::ModelRegistry& reg) {
    std::vector<Instance> out;
    out.reserve(scene.objects.size());
    for (const auto& o : scene.objects) {
        Instance inst;
        inst.id = o.instance_id;
        inst.model_id = o.model_id;
        inst.pose = o.pose;
        inst.concave = reg.get(o.model_id).concave;
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<Instance> instances_from_estimate(const digest::SceneEstimate& est,
                                              const registry::ModelRegistry& reg) {
    std::vector<Instance> out;
    std::map<std::string, int> seen;
    for (size_t k = 0; k < est.hypothesis.candidates.size(); ++k) {
        const auto& cand = est.hypothesis.candidates[k];
        int n = ++seen[cand.label];
        Instance inst;
        inst.id = n == 1 ? cand.label : cand.label + "_" + std::to_string(n);
        inst.model_id = cand.label;
        inst.pose = est.poses[k];
        inst.concave = reg.get(cand.label).concave;
        out.push_back(std::move(inst));
    }
    return out;
}

bool support_forest_ok(const SceneGraph& g) {
    // exactly one support parent per instance
    std::map<std::string, std::string> parent;
    for (const Axiom& a : g.axioms) {
        if (a.predicate != Predicate::On && a.predicate != Predicate::In) continue;
        if (!g.instances.count(a.args[0])) continue;  // virtual-region atom
        if (parent.count(a.args[0])) return false;
        parent[a.args[0]] = a.args[1];
    }
    for (const auto& [id, inst] : g.instances) {
        if (!parent.count(id)) return false;
        // walk to the root; cycles would loop forever, so bound the walk
        std::string cur = id;
        size_t steps = 0;
        while (cur != kTableId) {
            auto it = parent.find(cur);
            if (it == parent.end()) return false;
            cur = it->second;
            if (++steps > g.instances.size() + 1) return false;  // cycle
        }
    }
    return true;
}

bool clear_duality_ok(const SceneGraph& g) {
    std::set<std::string> occupied;
    for (const Axiom& a : g.axioms)
        if ((a.predicate == Predicate::On || a.predicate == Predicate::In) &&
            g.instances.count(a.args[0]))
            occupied.insert(a.args[1]);
    for (const auto& [id, inst] : g.instances) {
        bool is_clear = g.contains(clear(id));
        if (is_clear == occupied.count(id)) return false;
    }
    return true;
}

std::set<Axiom> relational_axioms(const SceneGraph& g) {
    std::set<Axiom> out;
    for (const Axiom& a : g.axioms)
        if (a.predicate == Predicate::On || a.predicate == Predicate::In ||
            a.predicate == Predicate::Has)
            out.insert(a);
    return out;
}

}  // namespace srp::scenegraph
