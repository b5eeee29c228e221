#include "srp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "srp/pddl.hpp"
#include "srp/rng.hpp"

namespace srp::bench {

namespace {

constexpr uint64_t kTagScene = 0x5CE4E;
constexpr uint64_t kTagDetect = 0xDE7;
constexpr uint64_t kTagDigest = 0xD16;
constexpr uint64_t kTagPair = 0x9A12;
constexpr uint64_t kTagSim = 0x51A;

}  // namespace

Thresholds Thresholds::default_grid() {
    Thresholds t;
    t.dt_list = {0.01, 0.02, 0.04, 0.06};
    for (double deg : {5.0, 10.0, 15.0, 30.0}) t.dtheta_list.push_back(deg * M_PI / 180.0);
    return t;
}

void Thresholds::validate() const {
    auto check = [](const std::vector<double>& v, const char* what) {
        if (v.empty()) throw std::invalid_argument(std::string(what) + ": empty threshold list");
        double prev = 0.0;
        for (double x : v) {
            if (x <= prev) throw std::invalid_argument(std::string(what) + ": thresholds must be positive and ascending");
            prev = x;
        }
    };
    check(dt_list, "dt");
    check(dtheta_list, "dtheta");
}

bool EvalReport::monotone() const {
    for (size_t i = 0; i < accuracy.size(); ++i) {
        for (size_t j = 0; j < accuracy[i].size(); ++j) {
            if (i > 0 && accuracy[i][j] < accuracy[i - 1][j] - 1e-12) return false;
            if (j > 0 && accuracy[i][j] < accuracy[i][j - 1] - 1e-12) return false;
        }
    }
    return true;
}

std::string EvalReport::to_csv() const {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out << "dt_m\\dtheta_deg";
    for (double th : thresholds.dtheta_list) {
        out.precision(2);
        out << "," << th * 180.0 / M_PI;
    }
    out << "\n";
    for (size_t i = 0; i < accuracy.size(); ++i) {
        out.precision(3);
        out << thresholds.dt_list[i];
        out.precision(6);
        for (double a : accuracy[i]) out << "," << a;
        out << "\n";
    }
    return out.str();
}

geom::CameraIntrinsics default_intrinsics(int width, int height) {
    geom::CameraIntrinsics cam;
    cam.width = width;
    cam.height = height;
    cam.fx = 150.0 * width / 160.0;
    cam.fy = 150.0 * height / 120.0;
    cam.cx = width / 2.0;
    cam.cy = height / 2.0;
    cam.near = 0.2;
    cam.far = 5.0;
    return cam;
}

geom::Pose default_camera_extrinsic(double table_height) {
    geom::Vec3 eye(0.0, -0.75, table_height + 0.72);
    geom::Vec3 target(0.0, 0.0, table_height);
    geom::Vec3 forward = (target - eye).normalized();
    geom::Vec3 right = forward.cross(geom::Vec3::UnitZ()).normalized();
    geom::Vec3 down = forward.cross(right);
    Eigen::Matrix3d r;
    r.col(0) = right;
    r.col(1) = down;
    r.col(2) = forward;
    return {eye, geom::Quat(r)};
}

namespace {

// Conservative footprint radius for placement separation.
double footprint_radius(const geom::ModelInfo& info) {
    return 0.5 * std::hypot(info.box_dims.x(), info.box_dims.y());
}

bool top_is_flat(const std::string& model_id) { return model_id != "wedge"; }

struct PlacedObject {
    scenegraph::Instance inst;
    bool has_child = false;
    bool at_table_level = false;
};

geom::Pose upright(double x, double y, double z, double yaw) {
    return {geom::Vec3(x, y, z), geom::Quat(Eigen::AngleAxisd(yaw, geom::Vec3::UnitZ()))};
}

}  // namespace

namespace {

GeneratedScene generate_scene_attempt(const registry::ModelRegistry& reg, const SceneGenConfig& cfg,
                                      uint64_t seed) {
    std::vector<std::string> pool = cfg.model_pool.empty() ? reg.ids() : cfg.model_pool;
    if (pool.empty()) throw std::invalid_argument("generate_scene: empty model pool");
    rng::Stream st(rng::stream_key(seed, kTagScene));

    // choose models: cycle a shuffled pool, so duplicates appear only when
    // n_objects exceeds the pool
    std::vector<std::string> shuffled = pool;
    for (size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[st.uniform_index(i)]);
    std::vector<scenegraph::Instance> chosen;
    std::map<std::string, int> counts;
    for (int i = 0; i < cfg.n_objects; ++i) {
        const std::string& model = shuffled[static_cast<size_t>(i) % shuffled.size()];
        int n = ++counts[model];
        scenegraph::Instance inst;
        inst.model_id = model;
        inst.id = n == 1 ? model : model + "_" + std::to_string(n);
        inst.concave = reg.get(model).concave;
        chosen.push_back(std::move(inst));
    }

    std::vector<PlacedObject> placed;
    std::set<scenegraph::Axiom> axioms;
    for (auto& inst : chosen) {
        const geom::ModelInfo& info = reg.get(inst.model_id);
        bool stacked = false;
        if (st.uniform() < cfg.stacking_prob) {
            // candidate supporters: flat-topped, childless, big enough
            std::vector<PlacedObject*> eligible;
            for (auto& p : placed) {
                const geom::ModelInfo& sup = reg.get(p.inst.model_id);
                bool fits = info.box_dims.x() <= 0.8 * sup.box_dims.x() &&
                            info.box_dims.y() <= 0.8 * sup.box_dims.y();
                if (!p.has_child && top_is_flat(p.inst.model_id) && fits) eligible.push_back(&p);
            }
            if (!eligible.empty()) {
                PlacedObject* sup = eligible[st.uniform_index(eligible.size())];
                const geom::ModelInfo& sup_info = reg.get(sup->inst.model_id);
                double top = sup->inst.pose.position.z() + 0.5 * sup_info.box_dims.z();
                double z = top + 0.5 * info.box_dims.z();
                // the child's footprint must stay inside the supporter's top
                // face, or the overlap argmax would hand it to an ancestor
                scenegraph::Polygon sup_top =
                    scenegraph::footprint(sup->inst.pose, sup_info, scenegraph::Surface::Top);
                double sup_yaw = 2.0 * std::atan2(sup->inst.pose.orientation.z(),
                                                  sup->inst.pose.orientation.w());
                bool contained = false;
                for (int attempt = 0; attempt < 40 && !contained; ++attempt) {
                    double jx = st.uniform(-0.05, 0.05) * sup_info.box_dims.x();
                    double jy = st.uniform(-0.05, 0.05) * sup_info.box_dims.y();
                    double yaw = attempt < 30 ? st.uniform(0.0, 2.0 * M_PI) : sup_yaw;
                    geom::Pose candidate = upright(sup->inst.pose.position.x() + jx,
                                                   sup->inst.pose.position.y() + jy, z, yaw);
                    auto fp = scenegraph::footprint(candidate, info, scenegraph::Surface::Bottom);
                    if (scenegraph::overlap_area(fp, sup_top) >=
                        scenegraph::polygon_area(fp) - 1e-12) {
                        inst.pose = candidate;
                        contained = true;
                    }
                }
                if (!contained) inst.pose = upright(sup->inst.pose.position.x(),
                                                    sup->inst.pose.position.y(), z, sup_yaw);
                axioms.insert(sup->inst.concave ? scenegraph::in(inst.id, sup->inst.id)
                                                : scenegraph::on(inst.id, sup->inst.id));
                sup->has_child = true;
                placed.push_back({inst, false, false});
                stacked = true;
            }
        }
        if (!stacked) {
            double radius = footprint_radius(info);
            double x0 = cfg.bounds.min_x + radius, x1 = cfg.bounds.max_x - radius;
            double y0 = cfg.bounds.min_y + radius, y1 = cfg.bounds.max_y - radius;
            if (x0 >= x1 || y0 >= y1)
                throw std::runtime_error("generate_scene: object " + inst.model_id + " does not fit the table");
            bool ok = false;
            for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
                double x = st.uniform(x0, x1);
                double y = st.uniform(y0, y1);
                ok = true;
                for (const auto& p : placed) {
                    if (!p.at_table_level) continue;
                    double need = radius + footprint_radius(reg.get(p.inst.model_id)) + 0.01;
                    double dx = x - p.inst.pose.position.x();
                    double dy = y - p.inst.pose.position.y();
                    if (dx * dx + dy * dy < need * need) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    inst.pose = upright(x, y, cfg.table_height + 0.5 * info.box_dims.z(),
                                        st.uniform(0.0, 2.0 * M_PI));
                }
            }
            if (!ok)
                throw std::runtime_error("generate_scene: cannot fit " + std::to_string(cfg.n_objects) +
                                         " objects inside the table bounds");
            axioms.insert(scenegraph::on(inst.id, scenegraph::kTableId));
            placed.push_back({inst, false, true});
        }
    }

    GeneratedScene out;
    out.scene.intrinsics = default_intrinsics(cfg.resolution_width, cfg.resolution_height);
    out.scene.camera_extrinsic = default_camera_extrinsic(cfg.table_height);
    out.scene.table_height = cfg.table_height;
    out.scene.table_bounds = cfg.bounds;
    out.intended.table_height = cfg.table_height;
    out.intended.table_bounds = cfg.bounds;
    std::set<std::string> with_child;
    for (const auto& a : axioms)
        if (a.predicate == scenegraph::Predicate::On || a.predicate == scenegraph::Predicate::In)
            if (a.args[1] != scenegraph::kTableId) with_child.insert(a.args[1]);
    for (const auto& p : placed) {
        out.scene.objects.push_back({p.inst.id, p.inst.model_id, p.inst.pose});
        out.intended.instances[p.inst.id] = p.inst;
        out.intended.axioms.insert(scenegraph::exist(p.inst.id));
        if (!with_child.count(p.inst.id)) out.intended.axioms.insert(scenegraph::clear(p.inst.id));
    }
    out.intended.axioms.insert(axioms.begin(), axioms.end());
    return out;
}

}  // namespace

GeneratedScene generate_scene(const registry::ModelRegistry& reg, const SceneGenConfig& cfg,
                              uint64_t seed) {
    if (cfg.n_objects < 1) throw std::invalid_argument("generate_scene: n_objects must be >= 1");
    // rejection over whole layouts: a crowded draw gets a fresh start
    std::string last_error;
    for (int attempt = 0; attempt < 16; ++attempt) {
        try {
            return generate_scene_attempt(reg, cfg, rng::stream_key(seed, 0xA77E, attempt));
        } catch (const std::runtime_error& e) {
            last_error = e.what();
        }
    }
    throw std::runtime_error(last_error);
}

digest::Observation make_observation(const detect::GroundTruthScene& scene,
                                     const registry::ModelRegistry& reg) {
    registry::ModelRegistry with_table = reg;
    geom::ModelInfo table;
    table.model_id = "__table__";
    double sx = scene.table_bounds.max_x - scene.table_bounds.min_x + 0.2;
    double sy = scene.table_bounds.max_y - scene.table_bounds.min_y + 0.2;
    table.mesh = registry::make_box_mesh(sx, sy, 0.02);
    table.box_dims = geom::Vec3(sx, sy, 0.02);
    with_table.add(std::move(table));

    render::SceneInstance inst = scene.instance();
    geom::Pose table_pose;
    table_pose.position = geom::Vec3((scene.table_bounds.min_x + scene.table_bounds.max_x) / 2,
                                     (scene.table_bounds.min_y + scene.table_bounds.max_y) / 2,
                                     scene.table_height - 0.01);
    inst.objects.emplace_back("__table__", table_pose);

    digest::Observation obs;
    obs.intrinsics = scene.intrinsics;
    obs.camera_extrinsic = scene.camera_extrinsic;
    obs.depth = render::render_depth(inst, scene.intrinsics, with_table);
    return obs;
}

ScenePoses ScenePoses::from_estimate(const digest::SceneEstimate& est) {
    ScenePoses out;
    for (size_t k = 0; k < est.hypothesis.candidates.size(); ++k)
        out.objects.emplace_back(est.hypothesis.candidates[k].label, est.poses[k]);
    return out;
}

EvalReport evaluate(const std::vector<ScenePoses>& estimates,
                    const std::vector<detect::GroundTruthScene>& truths,
                    const registry::ModelRegistry& reg, const Thresholds& th) {
    th.validate();
    if (estimates.size() != truths.size())
        throw std::invalid_argument("evaluate: estimate/truth scene lists differ in length");

    EvalReport report;
    report.thresholds = th;

    for (size_t s = 0; s < truths.size(); ++s) {
        // greedy matching, label first then minimal dt
        std::vector<bool> est_used(estimates[s].objects.size(), false);
        for (const auto& gt : truths[s].objects) {
            const geom::ModelInfo& info = reg.get(gt.model_id);
            int best = -1;
            geom::PoseError best_err;
            for (size_t e = 0; e < estimates[s].objects.size(); ++e) {
                if (est_used[e] || estimates[s].objects[e].first != gt.model_id) continue;
                geom::PoseError err = geom::pose_error(estimates[s].objects[e].second, gt.pose, info);
                if (best < 0 || err.dt < best_err.dt) {
                    best = static_cast<int>(e);
                    best_err = err;
                }
            }
            ObjectError oe;
            oe.truth_id = gt.instance_id;
            oe.model_id = gt.model_id;
            if (best >= 0) {
                est_used[static_cast<size_t>(best)] = true;
                oe.matched = true;
                oe.dt = best_err.dt;
                oe.dtheta = best_err.dtheta;
            }
            report.per_object.push_back(oe);
        }
    }

    report.total_objects = static_cast<int>(report.per_object.size());
    report.accuracy.assign(th.dt_list.size(), std::vector<double>(th.dtheta_list.size(), 0.0));
    if (report.total_objects > 0) {
        for (size_t i = 0; i < th.dt_list.size(); ++i) {
            for (size_t j = 0; j < th.dtheta_list.size(); ++j) {
                int correct = 0;
                for (const auto& oe : report.per_object)
                    if (oe.matched && oe.dt <= th.dt_list[i] && oe.dtheta <= th.dtheta_list[j]) ++correct;
                report.accuracy[i][j] = static_cast<double>(correct) / report.total_objects;
            }
        }
    }
    return report;
}

SuiteResult run_suite(const registry::ModelRegistry& reg, const SuiteConfig& cfg, uint64_t seed) {
    namespace fs = std::filesystem;
    auto t0 = std::chrono::steady_clock::now();

    SuiteResult result;
    std::vector<ScenePoses> estimates;
    std::vector<detect::GroundTruthScene> truths;

    for (int s = 0; s < cfg.n_scenes; ++s) {
        auto scene_t0 = std::chrono::steady_clock::now();
        GeneratedScene gen = generate_scene(reg, cfg.scene, rng::stream_key(seed, kTagScene, s));
        digest::Observation obs = make_observation(gen.scene, reg);

        ScenePoses poses;
        if (cfg.use_gt_poses) {
            for (const auto& o : gen.scene.objects) poses.objects.emplace_back(o.model_id, o.pose);
        } else {
            auto detections = detect::detect_synthetic(gen.scene, obs.intrinsics, reg, cfg.noise,
                                                       rng::stream_key(seed, kTagDetect, s));
            if (!detections.empty()) {
                auto digest_result =
                    digest::digest(obs, detections, static_cast<int>(gen.scene.objects.size()), reg,
                                   cfg.filter, rng::stream_key(seed, kTagDigest, s));
                poses = ScenePoses::from_estimate(digest_result.best);
            }
        }
        estimates.push_back(std::move(poses));
        truths.push_back(gen.scene);
        result.per_scene_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - scene_t0).count());
    }

    result.report = evaluate(estimates, truths, reg, cfg.thresholds);
    result.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.csv = result.report.to_csv();

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        std::ofstream csv(fs::path(cfg.out_dir) / "accuracy.csv");
        csv << result.csv;
    }
    return result;
}

ScenePair generate_scene_pair(const registry::ModelRegistry& reg, const PairConfig& cfg,
                              uint64_t seed) {
    if (cfg.scene.n_objects < 2)
        throw std::invalid_argument("generate_scene_pair: need at least two objects");
    rng::Stream st(rng::stream_key(seed, kTagPair));

    // fixed roles first, fillers after: tray carries the proximity region,
    // block/lblock form the stack
    std::vector<std::string> models;
    if (cfg.include_proximity) {
        models.push_back("tray");
        models.push_back("cyl");
    }
    if (cfg.include_stack) {
        models.push_back("block");
        models.push_back("lblock");
    }
    const std::vector<std::string> fillers = {"wedge", "tee", "bowl", "slab"};
    for (const auto& f : fillers) {
        if (static_cast<int>(models.size()) >= cfg.scene.n_objects) break;
        if (std::find(models.begin(), models.end(), f) == models.end()) models.push_back(f);
    }
    if (static_cast<int>(models.size()) > cfg.scene.n_objects)
        models.resize(static_cast<size_t>(cfg.scene.n_objects));
    for (const auto& m : models) (void)reg.get(m);  // must exist

    auto flat_scene = [&](uint64_t s) {
        SceneGenConfig flat = cfg.scene;
        flat.n_objects = static_cast<int>(models.size());
        flat.model_pool = models;
        flat.stacking_prob = 0.0;
        return generate_scene(reg, flat, s);
    };

    ScenePair pair;
    GeneratedScene initial = flat_scene(rng::stream_key(seed, kTagPair, 1));
    GeneratedScene goal = flat_scene(rng::stream_key(seed, kTagPair, 2));

    auto relocate = [&](GeneratedScene& gs, const std::string& id, const geom::Pose& pose) {
        for (auto& o : gs.scene.objects)
            if (o.instance_id == id) o.pose = pose;
        gs.intended.instances.at(id).pose = pose;
    };

    if (cfg.include_stack) {
        // stack lblock on block in the goal scene
        const auto& block = goal.intended.instances.at("block");
        const geom::ModelInfo& block_info = reg.get("block");
        const geom::ModelInfo& lblock_info = reg.get("lblock");
        geom::Pose p = upright(block.pose.position.x(), block.pose.position.y(),
                               block.pose.position.z() + 0.5 * block_info.box_dims.z() +
                                   0.5 * lblock_info.box_dims.z(),
                               st.uniform(0.0, 2.0 * M_PI));
        relocate(goal, "lblock", p);
    }
    if (cfg.include_proximity) {
        pair.proximity.push_back({"tray", "g1", "cyl"});
        // move the cylinder inside the tray's g1 region in the goal scene
        const auto& tray = goal.intended.instances.at("tray");
        const geom::ModelInfo& tray_info = reg.get("tray");
        const geom::ModelInfo& cyl_info = reg.get("cyl");
        const geom::LocalBox* box = nullptr;
        for (const auto& r : tray_info.virtual_regions)
            if (r.id == "g1") box = &r;
        if (!box) throw std::runtime_error("generate_scene_pair: tray has no region g1");
        double margin = 0.02;
        geom::Vec3 local(st.uniform(box->min.x() + margin, box->max.x() - margin),
                         st.uniform(box->min.y() + margin + 0.015, box->max.y() - margin - 0.015),
                         0.0);
        geom::Vec3 world = tray.pose.transform(local);
        double z = tray.pose.position.z() + 0.5 * tray_info.box_dims.z() + 0.5 * cyl_info.box_dims.z();
        relocate(goal, "cyl", upright(world.x(), world.y(), z, st.uniform(0.0, 2.0 * M_PI)));
    }

    // rebuild the goal graph from the final poses so the intended axioms
    // match the derivation exactly (incl. proximity atoms)
    std::vector<scenegraph::Instance> goal_instances;
    for (const auto& [id, inst] : goal.intended.instances) goal_instances.push_back(inst);
    pair.goal_intended = scenegraph::derive_scene_graph(goal_instances, reg,
                                                        cfg.scene.table_height, pair.proximity);
    std::vector<scenegraph::Instance> init_instances;
    for (const auto& [id, inst] : initial.intended.instances) init_instances.push_back(inst);
    pair.initial_intended = scenegraph::derive_scene_graph(init_instances, reg,
                                                           cfg.scene.table_height, pair.proximity);
    pair.goal_intended.table_bounds = cfg.scene.bounds;
    pair.initial_intended.table_bounds = cfg.scene.bounds;
    pair.initial = initial.scene;
    pair.goal = goal.scene;
    return pair;
}

PipelineResult run_srp(const detect::GroundTruthScene& goal_scene,
                       const detect::GroundTruthScene& initial_scene,
                       const std::vector<scenegraph::ProximityDecl>& proximity,
                       const registry::ModelRegistry& reg, const PipelineConfig& cfg,
                       uint64_t seed) {
    PipelineResult result;

    auto perceive = [&](const detect::GroundTruthScene& scene, uint64_t scene_tag,
                        std::optional<digest::DigestResult>& est_out) {
        if (cfg.use_gt_poses) return scenegraph::instances_from_scene(scene, reg);
        digest::Observation obs = make_observation(scene, reg);
        auto detections = detect::detect_synthetic(scene, obs.intrinsics, reg, cfg.noise,
                                                   rng::stream_key(seed, kTagDetect, scene_tag));
        if (detections.empty()) throw std::runtime_error("detector returned no detections");
        est_out = digest::digest(obs, detections, static_cast<int>(scene.objects.size()), reg,
                                 cfg.filter, rng::stream_key(seed, kTagDigest, scene_tag),
                                 cfg.max_hypotheses);
        return scenegraph::instances_from_estimate(est_out->best, reg);
    };

    try {
        auto goal_instances = perceive(goal_scene, 1, result.goal_estimate);
        result.goal_graph = scenegraph::derive_scene_graph(goal_instances, reg,
                                                           goal_scene.table_height, proximity);
        result.goal_graph.table_bounds = goal_scene.table_bounds;
    } catch (const std::exception& e) {
        result.failure = std::string("goal perception: ") + e.what();
        return result;
    }
    try {
        auto initial_instances = perceive(initial_scene, 2, result.initial_estimate);
        result.initial_graph = scenegraph::derive_scene_graph(initial_instances, reg,
                                                              initial_scene.table_height, proximity);
        result.initial_graph.table_bounds = initial_scene.table_bounds;
    } catch (const std::exception& e) {
        result.failure = std::string("initial perception: ") + e.what();
        return result;
    }

    try {
        auto [domain_text, problem_text] = plan::emit_pddl(result.initial_graph, result.goal_graph);
        result.domain_text = domain_text;
        result.problem_text = problem_text;
        plan::ParsedPddl parsed = plan::parse_pddl(domain_text, problem_text);
        result.plan_result = plan::plan_bfs(parsed.problem, parsed.domain, cfg.max_states);
        if (!result.plan_result.found()) {
            result.failure = result.plan_result.status == plan::PlanStatus::Unsolvable
                                 ? "planning: goal unreachable"
                                 : "planning: state limit exceeded";
            return result;
        }
        auto check = plan::validate(result.plan_result.actions, parsed.problem);
        if (!check.ok) {
            result.failure = "planning: plan failed validation: " + check.violation->reason;
            return result;
        }
    } catch (const std::exception& e) {
        result.failure = std::string("planning: ") + e.what();
        return result;
    }

    try {
        plan::WorldState world = plan::WorldState::from_graph(result.initial_graph);
        result.simulation = plan::simulate_plan(result.plan_result.actions, world, reg,
                                                rng::stream_key(seed, kTagSim));
        if (!result.simulation.ok) {
            result.failure = "execution: " + result.simulation.error;
            return result;
        }
        std::vector<scenegraph::Instance> final_instances;
        for (const auto& [id, inst] : result.simulation.world.objects) final_instances.push_back(inst);
        result.final_graph = scenegraph::derive_scene_graph(final_instances, reg,
                                                            result.initial_graph.table_height, proximity);
        result.final_graph.table_bounds = result.initial_graph.table_bounds;
    } catch (const std::exception& e) {
        result.failure = std::string("execution: ") + e.what();
        return result;
    }

    result.verdict = true;
    for (const auto& a : scenegraph::relational_axioms(result.goal_graph)) {
        if (!result.final_graph.contains(a)) {
            result.verdict = false;
            result.failure = "goal axiom not reached: " + a.str();
            break;
        }
    }
    return result;
}

}  // namespace srp::bench
