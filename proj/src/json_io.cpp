#include "srp/json_io.hpp"

#include <fstream>

namespace srp::io {

json pose_to_json(const geom::Pose& p) {
    const auto& q = p.orientation;
    geom::Vec3 e = geom::euler_xyz_from_quat(q);
    return {{"position", {p.position.x(), p.position.y(), p.position.z()}},
            {"quaternion_wxyz", {q.w(), q.x(), q.y(), q.z()}},
            {"euler_xyz_rad", {e.x(), e.y(), e.z()}}};
}

geom::Pose pose_from_json(const json& j) {
    geom::Pose p;
    auto pos = j.at("position").get<std::vector<double>>();
    if (pos.size() != 3) throw std::runtime_error("pose: position needs three entries");
    p.position = geom::Vec3(pos[0], pos[1], pos[2]);
    if (j.contains("quaternion_wxyz")) {
        auto q = j.at("quaternion_wxyz").get<std::vector<double>>();
        if (q.size() != 4) throw std::runtime_error("pose: quaternion needs four entries (w x y z)");
        p.orientation = geom::Quat(q[0], q[1], q[2], q[3]).normalized();
    } else if (j.contains("euler_xyz_rad")) {
        auto e = j.at("euler_xyz_rad").get<std::vector<double>>();
        if (e.size() != 3) throw std::runtime_error("pose: euler needs three entries");
        p.orientation = geom::quat_from_euler_xyz(geom::Vec3(e[0], e[1], e[2]));
    } else {
        throw std::runtime_error("pose: needs quaternion_wxyz or euler_xyz_rad");
    }
    return p;
}

json camera_to_json(const geom::CameraIntrinsics& cam, const geom::Pose& extrinsic) {
    return {{"intrinsics",
             {{"fx", cam.fx},
              {"fy", cam.fy},
              {"cx", cam.cx},
              {"cy", cam.cy},
              {"width", cam.width},
              {"height", cam.height},
              {"near", cam.near},
              {"far", cam.far}}},
            {"extrinsic", pose_to_json(extrinsic)}};
}

void camera_from_json(const json& j, geom::CameraIntrinsics& cam, geom::Pose& extrinsic) {
    const json& i = j.at("intrinsics");
    cam.fx = i.at("fx").get<double>();
    cam.fy = i.at("fy").get<double>();
    cam.cx = i.at("cx").get<double>();
    cam.cy = i.at("cy").get<double>();
    cam.width = i.at("width").get<int>();
    cam.height = i.at("height").get<int>();
    cam.near = i.value("near", 0.05);
    cam.far = i.value("far", 10.0);
    cam.validate();
    extrinsic = pose_from_json(j.at("extrinsic"));
}

json scene_to_json(const detect::GroundTruthScene& scene) {
    json objects = json::array();
    for (const auto& o : scene.objects)
        objects.push_back({{"instance_id", o.instance_id},
                           {"model_id", o.model_id},
                           {"pose", pose_to_json(o.pose)}});
    return {{"camera", camera_to_json(scene.intrinsics, scene.camera_extrinsic)},
            {"table_height", scene.table_height},
            {"table_bounds",
             {{"min", {scene.table_bounds.min_x, scene.table_bounds.min_y}},
              {"max", {scene.table_bounds.max_x, scene.table_bounds.max_y}}}},
            {"objects", objects}};
}

detect::GroundTruthScene scene_from_json(const json& j) {
    detect::GroundTruthScene scene;
    camera_from_json(j.at("camera"), scene.intrinsics, scene.camera_extrinsic);
    scene.table_height = j.at("table_height").get<double>();
    if (!std::isfinite(scene.table_height)) throw std::runtime_error("scene: table_height must be finite");
    if (j.contains("table_bounds")) {
        auto lo = j.at("table_bounds").at("min").get<std::vector<double>>();
        auto hi = j.at("table_bounds").at("max").get<std::vector<double>>();
        scene.table_bounds = {lo.at(0), hi.at(0), lo.at(1), hi.at(1)};
    }
    std::set<std::string> ids;
    for (const auto& jo : j.at("objects")) {
        detect::SceneObject o;
        o.instance_id = jo.at("instance_id").get<std::string>();
        o.model_id = jo.at("model_id").get<std::string>();
        o.pose = pose_from_json(jo.at("pose"));
        if (!ids.insert(o.instance_id).second)
            throw std::runtime_error("scene: duplicate instance_id " + o.instance_id);
        scene.objects.push_back(std::move(o));
    }
    return scene;
}

json detections_to_json(const std::vector<detect::Detection>& detections,
                        const geom::CameraIntrinsics& cam, const geom::Pose& extrinsic) {
    json list = json::array();
    for (const auto& d : detections) {
        json scores = json::object();
        for (const auto& [label, conf] : d.scores) scores[label] = conf;
        list.push_back({{"bbox", {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}}, {"scores", scores}});
    }
    return {{"camera", camera_to_json(cam, extrinsic)}, {"detections", list}};
}

DetectionsFile detections_from_json(const json& j) {
    DetectionsFile out;
    camera_from_json(j.at("camera"), out.intrinsics, out.camera_extrinsic);
    for (const auto& jd : j.at("detections")) {
        detect::Detection d;
        auto b = jd.at("bbox").get<std::vector<double>>();
        if (b.size() != 4) throw std::runtime_error("detection: bbox needs [x, y, w, h]");
        d.bbox = {b[0], b[1], b[2], b[3]};
        for (const auto& [label, conf] : jd.at("scores").items()) d.scores[label] = conf.get<double>();
        out.detections.push_back(std::move(d));
    }
    return out;
}

namespace {

json hypothesis_to_json(const detect::SceneHypothesis& hyp) {
    json c = json::array();
    for (const auto& cand : hyp.candidates)
        c.push_back({{"label", cand.label},
                     {"confidence", cand.confidence},
                     {"bbox", {cand.bbox.x, cand.bbox.y, cand.bbox.w, cand.bbox.h}},
                     {"detection_index", cand.detection_index}});
    return c;
}

detect::SceneHypothesis hypothesis_from_json(const json& j) {
    detect::SceneHypothesis hyp;
    for (const auto& jc : j) {
        detect::Candidate c;
        c.label = jc.at("label").get<std::string>();
        c.confidence = jc.at("confidence").get<double>();
        auto b = jc.at("bbox").get<std::vector<double>>();
        c.bbox = {b.at(0), b.at(1), b.at(2), b.at(3)};
        c.detection_index = jc.value("detection_index", -1);
        hyp.candidates.push_back(std::move(c));
    }
    return hyp;
}

}  // namespace

json estimate_to_json(const digest::DigestResult& result) {
    json poses = json::array();
    for (const auto& p : result.best.poses) poses.push_back(pose_to_json(p));
    json ranking = json::array();
    for (const auto& r : result.ranking)
        ranking.push_back({{"log_likelihood", r.log_likelihood},
                           {"confidence_sum", r.confidence_sum},
                           {"hypothesis", hypothesis_to_json(r.hypothesis)}});
    return {{"hypothesis", hypothesis_to_json(result.best.hypothesis)},
            {"poses", poses},
            {"log_likelihood", result.best.log_likelihood},
            {"size_mismatch", result.size_mismatch},
            {"hypotheses", ranking},
            {"timing_seconds", result.seconds}};
}

digest::SceneEstimate estimate_from_json(const json& j) {
    digest::SceneEstimate est;
    est.hypothesis = hypothesis_from_json(j.at("hypothesis"));
    for (const auto& jp : j.at("poses")) est.poses.push_back(pose_from_json(jp));
    est.log_likelihood = j.at("log_likelihood").get<double>();
    if (est.poses.size() != est.hypothesis.candidates.size())
        throw std::runtime_error("estimate: poses and hypothesis candidates differ in length");
    return est;
}

json graph_to_json(const scenegraph::SceneGraph& g) {
    json instances = json::array();
    for (const auto& [id, inst] : g.instances)
        instances.push_back({{"id", id},
                             {"model_id", inst.model_id},
                             {"pose", pose_to_json(inst.pose)},
                             {"concave", inst.concave}});
    json axioms = json::array();
    for (const auto& a : g.axioms)
        axioms.push_back({{"predicate", scenegraph::predicate_name(a.predicate)}, {"args", a.args}});
    json proximity = json::array();
    for (const auto& d : g.proximity)
        proximity.push_back({{"parent", d.parent}, {"region", d.region}, {"child", d.child}});
    return {{"table_height", g.table_height},
            {"table_bounds",
             {{"min", {g.table_bounds.min_x, g.table_bounds.min_y}},
              {"max", {g.table_bounds.max_x, g.table_bounds.max_y}}}},
            {"instances", instances},
            {"axioms", axioms},
            {"proximity", proximity}};
}

scenegraph::SceneGraph graph_from_json(const json& j) {
    scenegraph::SceneGraph g;
    g.table_height = j.at("table_height").get<double>();
    if (j.contains("table_bounds")) {
        auto lo = j.at("table_bounds").at("min").get<std::vector<double>>();
        auto hi = j.at("table_bounds").at("max").get<std::vector<double>>();
        g.table_bounds = {lo.at(0), hi.at(0), lo.at(1), hi.at(1)};
    }
    for (const auto& ji : j.at("instances")) {
        scenegraph::Instance inst;
        inst.id = ji.at("id").get<std::string>();
        inst.model_id = ji.at("model_id").get<std::string>();
        inst.pose = pose_from_json(ji.at("pose"));
        inst.concave = ji.value("concave", false);
        g.instances[inst.id] = std::move(inst);
    }
    for (const auto& ja : j.at("axioms")) {
        scenegraph::Axiom a;
        a.predicate = scenegraph::predicate_from_name(ja.at("predicate").get<std::string>());
        a.args = ja.at("args").get<std::vector<std::string>>();
        size_t want = (a.predicate == scenegraph::Predicate::Exist ||
                       a.predicate == scenegraph::Predicate::Clear)
                          ? 1
                          : 2;
        if (a.args.size() != want)
            throw std::runtime_error("graph: axiom has wrong arity: " + a.str());
        g.axioms.insert(std::move(a));
    }
    for (const auto& jp : j.value("proximity", json::array())) {
        g.proximity.push_back({jp.at("parent").get<std::string>(), jp.at("region").get<std::string>(),
                               jp.at("child").get<std::string>()});
    }
    for (const auto& a : g.axioms)
        if (a.predicate == scenegraph::Predicate::Has) g.regions.insert(a.args[1]);
    return g;
}

json plan_to_json(const plan::PlanResult& plan, const plan::SimulationResult* sim) {
    json actions = json::array();
    for (size_t i = 0; i < plan.actions.size(); ++i) {
        json ja = {{"name", plan.actions[i].name}, {"args", plan.actions[i].args}};
        if (sim && i < sim->steps.size() && sim->steps[i].pose)
            ja["pose"] = pose_to_json(*sim->steps[i].pose);
        actions.push_back(ja);
    }
    std::string status = plan.status == plan::PlanStatus::Found
                             ? "found"
                             : (plan.status == plan::PlanStatus::Unsolvable ? "unsolvable" : "search_limit");
    json out = {{"status", status}, {"actions", actions}, {"states_expanded", plan.expanded}};
    if (sim) out["execution_ok"] = sim->ok;
    return out;
}

json report_to_json(const bench::EvalReport& report) {
    json dts = report.thresholds.dt_list;
    json dthetas = report.thresholds.dtheta_list;
    json per_object = json::array();
    for (const auto& oe : report.per_object)
        per_object.push_back({{"truth_id", oe.truth_id},
                              {"model_id", oe.model_id},
                              {"matched", oe.matched},
                              {"dt", oe.dt},
                              {"dtheta", oe.dtheta}});
    return {{"dt_thresholds_m", dts},
            {"dtheta_thresholds_rad", dthetas},
            {"accuracy", report.accuracy},
            {"per_object", per_object},
            {"total_objects", report.total_objects},
            {"seconds", report.seconds}};
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

void save_text(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace srp::io
