// srp: semantic robot programming pipeline CLI.
// Subcommands: render, detect, estimate, graph, plan, bench, run.
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "srp/bench.hpp"
#include "srp/config.hpp"
#include "srp/json_io.hpp"
#include "srp/pddl.hpp"
#include "srp/pgm.hpp"
#include "srp/registry.hpp"
#include "srp/rng.hpp"

namespace {

namespace fs = std::filesystem;
using namespace srp;

constexpr int kExitOk = 0;
constexpr int kExitGoalFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

// Thrown while loading inputs; maps to the configuration exit code.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename Fn>
auto load_or_config_error(Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

std::vector<scenegraph::ProximityDecl> parse_proximity(const std::vector<std::string>& specs) {
    std::vector<scenegraph::ProximityDecl> out;
    for (const auto& s : specs) {
        size_t a = s.find(':');
        size_t b = s.rfind(':');
        if (a == std::string::npos || b == a)
            throw ConfigError("--proximity expects parent:region:child, got '" + s + "'");
        out.push_back({s.substr(0, a), s.substr(a + 1, b - a - 1), s.substr(b + 1)});
    }
    return out;
}

config::Toml load_config(const std::string& path) {
    if (path.empty()) return config::Toml::parse("", "<empty>");
    return load_or_config_error([&] { return config::Toml::parse_file(path); });
}

struct CommonArgs {
    std::string models = "demo";
    std::string config_path;
    uint64_t seed = 0;
    int threads = 0;
};

digest::FilterConfig filter_config(const CommonArgs& args, const config::Toml& toml) {
    digest::FilterConfig f = config::filter_from_toml(toml);
    if (args.threads > 0) f.n_threads = args.threads;
    return f;
}

int cmd_render(const std::string& scene_path, const std::string& models, const std::string& out_path,
               const std::string& mask_path, bool with_table) {
    auto reg = load_or_config_error([&] { return registry::load_registry(models); });
    auto scene = load_or_config_error([&] { return io::scene_from_json(io::load_json(scene_path)); });
    geom::DepthImage depth;
    if (with_table) {
        depth = bench::make_observation(scene, reg).depth;
    } else {
        depth = render::render_depth(scene.instance(), scene.intrinsics, reg);
    }
    geom::write_pgm16(depth, out_path);
    if (!mask_path.empty()) {
        render::ObjectMask mask = render::render_object_mask(scene.instance(), scene.intrinsics, reg);
        geom::DepthImage as_depth(mask.width, mask.height);
        for (size_t i = 0; i < mask.data.size(); ++i)
            as_depth.data[i] = mask.data[i] == render::kNoObject ? 0.0f
                                                                 : static_cast<float>(mask.data[i] + 1) * 0.001f;
        geom::write_pgm16(as_depth, mask_path);
    }
    std::cerr << "rendered " << scene.objects.size() << " objects to " << out_path << "\n";
    return kExitOk;
}

int cmd_detect(const std::string& scene_path, const std::string& models, uint64_t seed,
               const config::Toml& toml, const std::string& out_path) {
    auto reg = load_or_config_error([&] { return registry::load_registry(models); });
    auto scene = load_or_config_error([&] { return io::scene_from_json(io::load_json(scene_path)); });
    detect::NoiseConfig noise = config::noise_from_toml(toml);
    auto detections = detect::detect_synthetic(scene, scene.intrinsics, reg, noise, seed);
    io::save_json(io::detections_to_json(detections, scene.intrinsics, scene.camera_extrinsic), out_path);
    std::cerr << detections.size() << " detections -> " << out_path << "\n";
    return kExitOk;
}

int cmd_estimate(const std::string& depth_path, const std::string& detections_path, int n_objects,
                 const CommonArgs& args, const config::Toml& toml, int max_hypotheses,
                 const std::string& out_path) {
    auto reg = load_or_config_error([&] { return registry::load_registry(args.models); });
    auto det_file = load_or_config_error([&] { return io::detections_from_json(io::load_json(detections_path)); });
    digest::Observation obs;
    obs.depth = load_or_config_error([&] { return geom::read_pgm16(depth_path); });
    obs.intrinsics = det_file.intrinsics;
    obs.camera_extrinsic = det_file.camera_extrinsic;
    if (obs.depth.width != obs.intrinsics.width || obs.depth.height != obs.intrinsics.height)
        throw ConfigError("depth image size does not match the camera in the detections file");

    digest::FilterConfig filter = filter_config(args, toml);
    auto result = digest::digest(obs, det_file.detections, n_objects, reg, filter, args.seed,
                                 max_hypotheses);
    io::save_json(io::estimate_to_json(result), out_path);
    std::cerr << "best hypothesis log-likelihood " << result.best.log_likelihood << " over "
              << result.ranking.size() << " hypotheses (" << result.seconds << "s) -> " << out_path
              << "\n";
    return kExitOk;
}

int cmd_graph(const std::string& scene_path, const std::string& estimate_path,
              const std::string& models, double table_height,
              const std::vector<std::string>& proximity_specs, const std::string& out_path) {
    auto reg = load_or_config_error([&] { return registry::load_registry(models); });
    auto proximity = parse_proximity(proximity_specs);

    std::vector<scenegraph::Instance> instances;
    double height = table_height;
    detect::TableBounds bounds;
    if (!scene_path.empty()) {
        auto scene = load_or_config_error([&] { return io::scene_from_json(io::load_json(scene_path)); });
        instances = scenegraph::instances_from_scene(scene, reg);
        height = scene.table_height;
        bounds = scene.table_bounds;
    } else if (!estimate_path.empty()) {
        auto est = load_or_config_error([&] { return io::estimate_from_json(io::load_json(estimate_path)); });
        instances = scenegraph::instances_from_estimate(est, reg);
    } else {
        throw ConfigError("graph: need --scene or --estimate");
    }
    auto graph = scenegraph::derive_scene_graph(instances, reg, height, proximity);
    graph.table_bounds = bounds;
    io::save_json(io::graph_to_json(graph), out_path);
    std::cerr << graph.axioms.size() << " axioms -> " << out_path << "\n";
    return kExitOk;
}

int cmd_plan(const std::string& init_path, const std::string& goal_path, const std::string& models,
             uint64_t seed, size_t max_states, const std::string& out_path,
             const std::string& domain_out, const std::string& problem_out, bool skip_placement) {
    auto reg = load_or_config_error([&] { return registry::load_registry(models); });
    auto initial = load_or_config_error([&] { return io::graph_from_json(io::load_json(init_path)); });
    auto goal = load_or_config_error([&] { return io::graph_from_json(io::load_json(goal_path)); });

    auto [domain_text, problem_text] = plan::emit_pddl(initial, goal);
    if (!domain_out.empty()) io::save_text(domain_text, domain_out);
    if (!problem_out.empty()) io::save_text(problem_text, problem_out);

    auto parsed = plan::parse_pddl(domain_text, problem_text);
    auto result = plan::plan_bfs(parsed.problem, parsed.domain, max_states);
    if (!result.found()) {
        io::save_json(io::plan_to_json(result), out_path);
        std::cerr << (result.status == plan::PlanStatus::Unsolvable ? "unsolvable" : "search limit exceeded")
                  << " after " << result.expanded << " expansions\n";
        return kExitGoalFailed;
    }
    auto check = plan::validate(result.actions, parsed.problem);
    if (!check.ok) {
        std::cerr << "internal: plan failed validation: " << check.violation->reason << "\n";
        return kExitInternal;
    }

    if (skip_placement) {
        io::save_json(io::plan_to_json(result), out_path);
    } else {
        plan::WorldState world = plan::WorldState::from_graph(initial);
        auto sim = plan::simulate_plan(result.actions, world, reg, seed);
        if (!sim.ok) {
            std::cerr << "placement failed: " << sim.error << "\n";
            io::save_json(io::plan_to_json(result), out_path);
            return kExitInternal;
        }
        io::save_json(io::plan_to_json(result, &sim), out_path);
    }
    std::cerr << result.actions.size() << " actions -> " << out_path << "\n";
    return kExitOk;
}

int cmd_bench(const CommonArgs& args, const config::Toml& toml, const std::string& out_dir) {
    auto reg = load_or_config_error([&] { return registry::load_registry(args.models); });
    bench::SuiteConfig cfg = config::suite_from_toml(toml);
    cfg.out_dir = out_dir;
    if (args.threads > 0) cfg.filter.n_threads = args.threads;
    auto result = bench::run_suite(reg, cfg, args.seed);

    if (!out_dir.empty()) {
        io::save_json(io::report_to_json(result.report), (fs::path(out_dir) / "report.json").string());
        if (cfg.export_scenes) {
            for (int s = 0; s < cfg.n_scenes; ++s) {
                auto gen = bench::generate_scene(reg, cfg.scene, rng::stream_key(args.seed, 0x5CE4E, s));
                auto obs = bench::make_observation(gen.scene, reg);
                std::string base = (fs::path(out_dir) / ("scene_" + std::to_string(s))).string();
                io::save_json(io::scene_to_json(gen.scene), base + ".json");
                geom::write_pgm16(obs.depth, base + "_depth.pgm");
            }
            registry::save_registry(reg, (fs::path(out_dir) / "models").string());
        }
    }
    std::cout << result.csv;
    std::cerr << "evaluated " << cfg.n_scenes << " scenes, " << result.report.total_objects
              << " objects in " << result.report.seconds << "s\n";
    return kExitOk;
}

int cmd_run(const std::string& goal_path, const std::string& initial_path, const CommonArgs& args,
            const config::Toml& toml, const std::vector<std::string>& proximity_specs,
            bool use_gt_poses, const std::string& out_dir) {
    auto reg = load_or_config_error([&] { return registry::load_registry(args.models); });
    auto goal_scene = load_or_config_error([&] { return io::scene_from_json(io::load_json(goal_path)); });
    auto initial_scene = load_or_config_error([&] { return io::scene_from_json(io::load_json(initial_path)); });
    auto proximity = parse_proximity(proximity_specs);

    bench::PipelineConfig cfg;
    cfg.filter = filter_config(args, toml);
    cfg.noise = config::noise_from_toml(toml);
    cfg.use_gt_poses = use_gt_poses;

    auto result = bench::run_srp(goal_scene, initial_scene, proximity, reg, cfg, args.seed);

    fs::create_directories(out_dir);
    auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
    if (result.goal_estimate) io::save_json(io::estimate_to_json(*result.goal_estimate), path("goal_estimate.json"));
    if (result.initial_estimate)
        io::save_json(io::estimate_to_json(*result.initial_estimate), path("initial_estimate.json"));
    if (!result.goal_graph.instances.empty())
        io::save_json(io::graph_to_json(result.goal_graph), path("goal_graph.json"));
    if (!result.initial_graph.instances.empty())
        io::save_json(io::graph_to_json(result.initial_graph), path("initial_graph.json"));
    if (!result.domain_text.empty()) io::save_text(result.domain_text, path("domain.pddl"));
    if (!result.problem_text.empty()) io::save_text(result.problem_text, path("problem.pddl"));
    io::save_json(io::plan_to_json(result.plan_result, &result.simulation), path("plan.json"));
    if (result.simulation.ok) {
        detect::GroundTruthScene final_scene = initial_scene;
        final_scene.objects.clear();
        for (const auto& [id, inst] : result.simulation.world.objects)
            final_scene.objects.push_back({id, inst.model_id, inst.pose});
        io::save_json(io::scene_to_json(final_scene), path("final_scene.json"));
        io::save_json(io::graph_to_json(result.final_graph), path("final_graph.json"));
    }
    io::save_json({{"verdict", result.verdict ? "yes" : "no"},
                   {"failure", result.failure},
                   {"plan_length", result.plan_result.actions.size()}},
                  path("verdict.json"));

    if (result.verdict) {
        std::cerr << "verdict: yes (" << result.plan_result.actions.size() << " actions)\n";
        return kExitOk;
    }
    std::cerr << "verdict: no (" << result.failure << ")\n";
    return kExitGoalFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic robot programming: scene estimation, scene graphs, task planning"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string scene_path, estimate_path, depth_path, detections_path;
    std::string out_path, out_dir, mask_path, domain_out, problem_out;
    std::string init_path, goal_path, initial_scene_path, goal_scene_path;
    std::vector<std::string> proximity_specs;
    int n_objects = 1;
    int max_hypotheses = 0;
    size_t max_states = 10'000'000;
    double table_height = 0.70;
    bool with_table = false, skip_placement = false, use_gt_poses = false;

    auto add_common = [&](CLI::App* cmd, bool needs_seed) {
        cmd->add_option("--models", common.models, "model registry JSON, or 'demo'");
        cmd->add_option("--config", common.config_path, "TOML config file");
        cmd->add_option("--threads", common.threads, "worker threads (0 = hardware); never changes results");
        auto* seed = cmd->add_option("--seed", common.seed, "random seed");
        if (needs_seed) seed->required();
    };

    auto* render_cmd = app.add_subcommand("render", "render a scene file to a depth PGM");
    render_cmd->add_option("--scene", scene_path, "scene JSON")->required();
    render_cmd->add_option("--out", out_path, "output 16-bit PGM (millimeters)")->required();
    render_cmd->add_option("--mask", mask_path, "also write the object-index mask as PGM");
    render_cmd->add_flag("--with-table", with_table, "include the table slab");
    add_common(render_cmd, false);

    auto* detect_cmd = app.add_subcommand("detect", "run the synthetic oracle detector");
    detect_cmd->add_option("--scene", scene_path, "scene JSON")->required();
    detect_cmd->add_option("--out", out_path, "output detections JSON")->required();
    add_common(detect_cmd, true);

    auto* estimate_cmd = app.add_subcommand("estimate", "DIGEST pose estimation from depth + detections");
    estimate_cmd->add_option("--depth", depth_path, "observed depth PGM")->required();
    estimate_cmd->add_option("--detections", detections_path, "detections JSON")->required();
    estimate_cmd->add_option("--n-objects", n_objects, "number of objects in the scene")->required();
    estimate_cmd->add_option("--max-hypotheses", max_hypotheses, "cap on evaluated hypotheses (0 = all)");
    estimate_cmd->add_option("--out", out_path, "output estimate JSON")->required();
    add_common(estimate_cmd, true);

    auto* graph_cmd = app.add_subcommand("graph", "derive the axiomatic scene graph");
    graph_cmd->add_option("--scene", scene_path, "ground-truth scene JSON");
    graph_cmd->add_option("--estimate", estimate_path, "estimate JSON");
    graph_cmd->add_option("--table-height", table_height, "table height (m), used with --estimate");
    graph_cmd->add_option("--proximity", proximity_specs, "declared region triple parent:region:child");
    graph_cmd->add_option("--out", out_path, "output graph JSON")->required();
    add_common(graph_cmd, false);

    auto* plan_cmd = app.add_subcommand("plan", "breadth-first STRIPS between two scene graphs");
    plan_cmd->add_option("--init", init_path, "initial graph JSON")->required();
    plan_cmd->add_option("--goal", goal_path, "goal graph JSON")->required();
    plan_cmd->add_option("--out", out_path, "output plan JSON")->required();
    plan_cmd->add_option("--domain", domain_out, "also write the PDDL domain");
    plan_cmd->add_option("--problem", problem_out, "also write the PDDL problem");
    plan_cmd->add_option("--max-states", max_states, "visited-state cap");
    plan_cmd->add_flag("--skip-placement", skip_placement, "symbolic plan only, no pose sampling");
    add_common(plan_cmd, true);

    auto* bench_cmd = app.add_subcommand("bench", "closed-loop accuracy suite");
    bench_cmd->add_option("--out-dir", out_dir, "artifact directory");
    add_common(bench_cmd, true);

    auto* run_cmd = app.add_subcommand("run", "full pipeline: perceive both scenes, plan, simulate");
    run_cmd->add_option("--goal-scene", goal_scene_path, "goal scene JSON")->required();
    run_cmd->add_option("--initial-scene", initial_scene_path, "initial scene JSON")->required();
    run_cmd->add_option("--out-dir", out_dir, "artifact directory")->required();
    run_cmd->add_option("--proximity", proximity_specs, "declared region triple parent:region:child");
    run_cmd->add_flag("--use-gt-poses", use_gt_poses, "bypass estimation with ground-truth poses");
    add_common(run_cmd, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        config::Toml toml = load_config(common.config_path);
        if (render_cmd->parsed())
            return cmd_render(scene_path, common.models, out_path, mask_path, with_table);
        if (detect_cmd->parsed())
            return cmd_detect(scene_path, common.models, common.seed, toml, out_path);
        if (estimate_cmd->parsed())
            return cmd_estimate(depth_path, detections_path, n_objects, common, toml, max_hypotheses, out_path);
        if (graph_cmd->parsed())
            return cmd_graph(scene_path, estimate_path, common.models, table_height, proximity_specs, out_path);
        if (plan_cmd->parsed())
            return cmd_plan(init_path, goal_path, common.models, common.seed, max_states, out_path,
                            domain_out, problem_out, skip_placement);
        if (bench_cmd->parsed()) return cmd_bench(common, toml, out_dir);
        if (run_cmd->parsed())
            return cmd_run(goal_scene_path, initial_scene_path, common, toml, proximity_specs,
                           use_gt_poses, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitConfig;
}
