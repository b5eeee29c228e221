#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "srp/bench.hpp"
#include "srp/digest.hpp"
#include "srp/registry.hpp"
#include "srp/rng.hpp"

using namespace srp;
using geom::Pose;
using geom::Vec3;

namespace {

geom::CameraIntrinsics small_cam() {
    geom::CameraIntrinsics cam;
    cam.fx = cam.fy = 100;
    cam.cx = 40;
    cam.cy = 30;
    cam.width = 80;
    cam.height = 60;
    cam.near = 0.1;
    cam.far = 10.0;
    return cam;
}

struct ClosedLoopScene {
    detect::GroundTruthScene scene;
    digest::Observation obs;
    std::vector<detect::Detection> detections;
};

ClosedLoopScene make_closed_loop(const registry::ModelRegistry& reg,
                                 const std::vector<std::string>& pool, int n, uint64_t seed) {
    bench::SceneGenConfig cfg;
    cfg.n_objects = n;
    cfg.model_pool = pool;
    ClosedLoopScene out;
    auto gen = bench::generate_scene(reg, cfg, seed);
    out.scene = gen.scene;
    out.obs = bench::make_observation(gen.scene, reg);
    out.detections = detect::detect_synthetic(gen.scene, gen.scene.intrinsics, reg, {}, seed + 1);
    return out;
}

digest::FilterConfig quick_filter() {
    digest::FilterConfig cfg;
    cfg.n_particles = 400;
    cfg.n_iterations = 120;
    cfg.upright_only = true;
    return cfg;
}

}  // namespace

TEST_CASE("weight is the exponential likelihood law") {
    CHECK(digest::weight(0.0, 20.0) == 1.0);
    CHECK(digest::weight(std::log(2.0), 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(digest::weight(0.1, 20.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    double prev = 1.0;
    for (double d = 0.01; d < 1.0; d += 0.01) {
        double w = digest::weight(d, 20.0);
        CHECK(w < prev);
        prev = w;
    }
}

TEST_CASE("iteration blocks partition the run") {
    auto b4 = digest::iteration_blocks(400, 4);
    REQUIRE(b4.size() == 4);
    for (int k = 0; k < 4; ++k) {
        CHECK(b4[k].first == 100 * k);
        CHECK(b4[k].second == 100 * (k + 1));
    }
    auto b3 = digest::iteration_blocks(400, 3);
    CHECK(b3[0] == std::pair(0, 133));
    CHECK(b3[1] == std::pair(133, 266));
    CHECK(b3[2] == std::pair(266, 400));
    // exact partition for many shapes
    for (int t : {1, 7, 100, 399, 400}) {
        for (int k = 1; k <= 8; ++k) {
            auto blocks = digest::iteration_blocks(t, k);
            REQUIRE(static_cast<int>(blocks.size()) == k);
            int prev = 0;
            for (const auto& [lo, hi] : blocks) {
                CHECK(lo == prev);
                CHECK(hi >= lo);
                prev = hi;
            }
            CHECK(prev == t);
        }
    }
}

TEST_CASE("distance: exact match, penalties, and the backprojection oracle") {
    auto cam = small_cam();
    geom::DepthImage obs(cam.width, cam.height);
    geom::DepthImage rend(cam.width, cam.height);
    render::ObjectMask mask(cam.width, cam.height);

    SUBCASE("rendered equals observed over the mask") {
        obs.at(40, 30) = rend.at(40, 30) = 1.0f;
        obs.at(41, 30) = rend.at(41, 30) = 1.7f;
        mask.at(40, 30) = 0;
        mask.at(41, 30) = 0;
        CHECK(digest::distance(obs, rend, mask, cam, 0.1) == doctest::Approx(0.0));
    }
    SUBCASE("missing observed pixel costs the penalty") {
        rend.at(10, 10) = 1.0f;
        mask.at(10, 10) = 0;
        CHECK(digest::distance(obs, rend, mask, cam, 0.1) == doctest::Approx(0.1));
    }
    SUBCASE("empty mask returns the penalty") {
        CHECK(digest::distance(obs, rend, mask, cam, 0.07) == doctest::Approx(0.07));
    }
    SUBCASE("two-pixel example against an independent backprojection oracle") {
        // optical-axis pixel and its neighbor
        rend.at(40, 30) = 1.0f;
        rend.at(41, 30) = 1.0f;
        obs.at(40, 30) = 1.1f;
        obs.at(41, 30) = 1.0f;
        mask.at(40, 30) = 0;
        mask.at(41, 30) = 0;
        auto point = [&](double u, double v, double d) {
            return Vec3((u - cam.cx) * d / cam.fx, (v - cam.cy) * d / cam.fy, d);
        };
        double expect = ((point(40, 30, obs.at(40, 30)) - point(40, 30, 1.0)).norm() +
                         (point(41, 30, obs.at(41, 30)) - point(41, 30, 1.0)).norm()) /
                        2.0;
        CHECK(digest::distance(obs, rend, mask, cam, 0.1) == doctest::Approx(expect).epsilon(1e-9));
    }
    SUBCASE("size mismatch is an error") {
        geom::DepthImage other(10, 10);
        CHECK_THROWS(digest::distance(other, rend, mask, cam, 0.1));
    }
}

TEST_CASE("init_particles: counts, frustum containment, determinism") {
    auto reg = registry::make_demo_registry();
    auto cl = make_closed_loop(reg, {"lblock"}, 1, 31);
    auto cands = detect::make_candidates(cl.detections);
    auto hyps = detect::enumerate_hypotheses(cands, 1);
    REQUIRE(hyps.size() == 1);

    digest::FilterConfig cfg;
    cfg.n_particles = 625;
    auto particles = digest::init_particles(hyps[0], cl.obs, cfg, 5);
    CHECK(particles.size() == 625);

    Pose cam_inv = cl.obs.camera_extrinsic.inverse();
    const auto& bbox = hyps[0].candidates[0].bbox;
    for (const auto& p : particles) {
        CHECK(p.weight == doctest::Approx(1.0 / 625));
        REQUIRE(p.poses.size() == 1);
        // project the position back into the image: must land in the bbox
        Vec3 pc = cam_inv.transform(p.poses[0].position);
        REQUIRE(pc.z() > 0);
        double u = cl.obs.intrinsics.fx * pc.x() / pc.z() + cl.obs.intrinsics.cx;
        double v = cl.obs.intrinsics.fy * pc.y() / pc.z() + cl.obs.intrinsics.cy;
        CHECK(u >= bbox.x - 1e-9);
        CHECK(u <= bbox.x + bbox.w + 1e-9);
        CHECK(v >= bbox.y - 1e-9);
        CHECK(v <= bbox.y + bbox.h + 1e-9);
        CHECK(std::abs(p.poses[0].orientation.norm() - 1.0) < 1e-12);
    }

    auto again = digest::init_particles(hyps[0], cl.obs, cfg, 5);
    for (size_t j = 0; j < particles.size(); ++j) {
        CHECK(particles[j].poses[0].position == again[j].poses[0].position);
        CHECK(particles[j].poses[0].orientation.coeffs() == again[j].poses[0].orientation.coeffs());
    }

    // upright mode keeps z-axis vertical
    cfg.upright_only = true;
    for (const auto& p : digest::init_particles(hyps[0], cl.obs, cfg, 6)) {
        Vec3 up = p.poses[0].orientation * Vec3::UnitZ();
        CHECK(up.z() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("resample_diffuse: degenerate weight, permutation, collapse") {
    digest::FilterConfig cfg;
    cfg.n_particles = 20;
    cfg.sigma_pos = 0.0;
    cfg.sigma_rot = 0.0;

    std::vector<digest::Particle> particles(20);
    for (size_t j = 0; j < 20; ++j) {
        particles[j].poses.resize(1);
        particles[j].poses[0].position = Vec3(static_cast<double>(j), 0, 0);
        particles[j].weight = 0.0;
    }

    SUBCASE("single surviving particle wins every slot") {
        particles[7].weight = 1.0;
        auto out = digest::resample_diffuse(particles, 0, cfg, 99);
        for (const auto& p : out) {
            CHECK(p.poses[0].position.x() == doctest::Approx(7.0));
            CHECK(p.weight == doctest::Approx(1.0 / 20));
        }
    }
    SUBCASE("uniform weights with zero diffusion reproduce each input once") {
        for (auto& p : particles) p.weight = 0.05;
        auto out = digest::resample_diffuse(particles, 0, cfg, 123);
        std::vector<int> counts(20, 0);
        for (const auto& p : out) counts[static_cast<size_t>(p.poses[0].position.x())]++;
        for (int c : counts) CHECK(c == 1);
    }
    SUBCASE("weights that do not sum to one are normalized first") {
        for (auto& p : particles) p.weight = 3.7;
        auto out = digest::resample_diffuse(particles, 0, cfg, 5);
        CHECK(out.size() == 20);
    }
    SUBCASE("all-zero weights collapse") {
        CHECK_THROWS_AS(digest::resample_diffuse(particles, 0, cfg, 1), digest::LikelihoodCollapse);
    }
    SUBCASE("fixed seed gives identical output; diffusion touches only the active object") {
        for (auto& p : particles) {
            p.poses.push_back(Pose::translation(0, 5, 0));
            p.weight = 1.0;
        }
        cfg.sigma_pos = 0.02;
        cfg.sigma_rot = 0.1;
        auto a = digest::resample_diffuse(particles, 1, cfg, 77);
        auto b = digest::resample_diffuse(particles, 1, cfg, 77);
        for (size_t j = 0; j < a.size(); ++j) {
            CHECK(a[j].poses[1].position == b[j].poses[1].position);
            CHECK(a[j].poses[1].orientation.coeffs() == b[j].poses[1].orientation.coeffs());
            // object 0 untouched
            CHECK(a[j].poses[0].position.x() == doctest::Approx(std::floor(a[j].poses[0].position.x())));
            CHECK(geom::quat_angle(a[j].poses[0].orientation) == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("estimate_hypothesis replays exactly from the public pieces") {
    auto reg = registry::make_demo_registry();
    auto cl = make_closed_loop(reg, {"lblock", "cyl"}, 2, 41);
    auto hyps = detect::enumerate_hypotheses(detect::make_candidates(cl.detections), 2);
    REQUIRE(hyps.size() == 1);
    const auto& hyp = hyps[0];

    digest::FilterConfig cfg;
    cfg.n_particles = 40;
    cfg.n_iterations = 2;  // one iteration per object
    cfg.upright_only = true;

    digest::FilterTrace trace;
    trace.record_weights = true;
    const uint64_t seed = 2024;
    auto est = digest::estimate_hypothesis(hyp, cl.obs, reg, cfg, seed, &trace);
    REQUIRE(trace.weights.size() == 2);
    REQUIRE(trace.blocks == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});

    auto score_subset = [&](const std::vector<Pose>& poses, size_t count) {
        render::SceneInstance inst;
        inst.camera_extrinsic = cl.obs.camera_extrinsic;
        for (size_t k = 0; k < count; ++k) inst.objects.emplace_back(hyp.candidates[k].label, poses[k]);
        auto out = render::render_scene(inst, cl.obs.intrinsics, reg);
        double d = digest::distance(cl.obs.depth, out.depth, out.mask, cl.obs.intrinsics, cfg.missing_penalty);
        return digest::weight(d, cfg.lambda_r);
    };

    // iteration 0: only object 0 rendered, particles straight from init
    auto p0 = digest::init_particles(hyp, cl.obs, cfg, seed);
    size_t best0 = 0;
    for (size_t j = 0; j < p0.size(); ++j) {
        double w = score_subset(p0[j].poses, 1);
        CHECK(w == doctest::Approx(trace.weights[0][j]).epsilon(1e-12));
        p0[j].weight = trace.weights[0][j];
        if (trace.weights[0][j] > trace.weights[0][best0]) best0 = j;
    }
    Pose frozen0 = p0[best0].poses[0];

    // iteration 1: object 0 frozen, object 1 active after one resample
    auto p1 = digest::resample_diffuse(p0, 0, cfg, digest::iteration_seed(seed, 0));
    size_t best1 = 0;
    for (size_t j = 0; j < p1.size(); ++j) {
        std::vector<Pose> poses = {frozen0, p1[j].poses[1]};
        double w = score_subset(poses, 2);
        CHECK(w == doctest::Approx(trace.weights[1][j]).epsilon(1e-12));
        if (trace.weights[1][j] > trace.weights[1][best1]) best1 = j;
    }

    CHECK(est.poses[0].position == frozen0.position);
    CHECK(est.poses[1].position == p1[best1].poses[1].position);

    // the reported likelihood re-scores the final poses jointly
    double expect_ll = std::log(score_subset(est.poses, 2));
    CHECK(est.log_likelihood == doctest::Approx(expect_ll).epsilon(1e-9));
}

TEST_CASE("normalized weight sums stay at one") {
    auto reg = registry::make_demo_registry();
    auto cl = make_closed_loop(reg, {"wedge"}, 1, 43);
    auto hyps = detect::enumerate_hypotheses(detect::make_candidates(cl.detections), 1);
    digest::FilterConfig cfg;
    cfg.n_particles = 64;
    cfg.n_iterations = 30;
    cfg.upright_only = true;
    digest::FilterTrace trace;
    digest::estimate_hypothesis(hyps[0], cl.obs, reg, cfg, 11, &trace);
    REQUIRE(trace.normalized_weight_sums.size() == 30);
    for (double s : trace.normalized_weight_sums) CHECK(std::abs(s - 1.0) <= 1e-9);
}

TEST_CASE("single-object upright closed loop recovers the pose") {
    auto reg = registry::make_demo_registry();
    auto cl = make_closed_loop(reg, {"lblock"}, 1, 47);
    auto result = digest::digest(cl.obs, cl.detections, 1, reg, quick_filter(), 7);
    REQUIRE(result.best.poses.size() == 1);
    auto err = geom::pose_error(result.best.poses[0], cl.scene.objects[0].pose, reg.get("lblock"));
    CHECK(err.dt <= 0.02);
    CHECK(err.dtheta <= 0.15);
}

TEST_CASE("digest output is identical across 1, 2 and 8 worker threads") {
    auto reg = registry::make_demo_registry();
    auto cl = make_closed_loop(reg, {"wedge", "cyl"}, 2, 53);
    digest::FilterConfig cfg;
    cfg.n_particles = 96;
    cfg.n_iterations = 12;
    cfg.upright_only = true;

    std::vector<digest::DigestResult> results;
    for (int threads : {1, 2, 8}) {
        cfg.n_threads = threads;
        results.push_back(digest::digest(cl.obs, cl.detections, 2, reg, cfg, 33));
    }
    for (size_t i = 1; i < results.size(); ++i) {
        CHECK(results[i].best.log_likelihood == results[0].best.log_likelihood);
        REQUIRE(results[i].best.poses.size() == results[0].best.poses.size());
        for (size_t k = 0; k < results[0].best.poses.size(); ++k) {
            CHECK(results[i].best.poses[k].position == results[0].best.poses[k].position);
            CHECK(results[i].best.poses[k].orientation.coeffs() ==
                  results[0].best.poses[k].orientation.coeffs());
        }
    }
}

TEST_CASE("digest is deterministic for a fixed seed and sensitive to it") {
    auto reg = registry::make_demo_registry();
    auto cl = make_closed_loop(reg, {"tee"}, 1, 59);
    digest::FilterConfig cfg;
    cfg.n_particles = 50;
    cfg.n_iterations = 10;
    cfg.upright_only = true;
    auto a = digest::digest(cl.obs, cl.detections, 1, reg, cfg, 101);
    auto b = digest::digest(cl.obs, cl.detections, 1, reg, cfg, 101);
    CHECK(a.best.log_likelihood == b.best.log_likelihood);
    CHECK(a.best.poses[0].position == b.best.poses[0].position);
    auto c = digest::digest(cl.obs, cl.detections, 1, reg, cfg, 102);
    CHECK(a.best.poses[0].position != c.best.poses[0].position);
}

TEST_CASE("likelihood dominance: truth beats 5cm perturbations") {
    auto reg = registry::make_demo_registry();
    bench::SceneGenConfig gen_cfg;
    gen_cfg.n_objects = 1;
    gen_cfg.model_pool = {"block"};
    auto gen = bench::generate_scene(reg, gen_cfg, 61);
    auto obs_depth = render::render_depth(gen.scene.instance(), gen.scene.intrinsics, reg);

    auto score = [&](const Pose& pose) {
        render::SceneInstance inst;
        inst.camera_extrinsic = gen.scene.camera_extrinsic;
        inst.objects.emplace_back("block", pose);
        auto out = render::render_scene(inst, gen.scene.intrinsics, reg);
        return digest::weight(
            digest::distance(obs_depth, out.depth, out.mask, gen.scene.intrinsics, 0.1), 20.0);
    };

    const Pose truth = gen.scene.objects[0].pose;
    double w_truth = score(truth);
    CHECK(w_truth == doctest::Approx(1.0));
    rng::Stream st(rng::stream_key(63));
    for (int i = 0; i < 100; ++i) {
        Pose perturbed = truth;
        perturbed.position += st.unit_vector() * st.uniform(0.05, 0.20);
        CHECK(w_truth >= score(perturbed));
    }
}

TEST_CASE("digest rejects a false positive over empty table") {
    auto reg = registry::make_demo_registry();
    auto cl = make_closed_loop(reg, {"lblock", "cyl", "wedge"}, 3, 67);
    REQUIRE(cl.detections.size() == 3);

    // forge a detection over an empty patch of table
    detect::Detection fp;
    fp.bbox = {5, 5, 22, 18};
    fp.scores = {{"block", 0.5}};
    auto detections = cl.detections;
    detections.push_back(fp);

    digest::FilterConfig cfg;
    cfg.n_particles = 200;
    cfg.n_iterations = 90;
    cfg.upright_only = true;
    auto result = digest::digest(cl.obs, detections, 3, reg, cfg, 71);
    REQUIRE(result.ranking.size() == 4);

    // the winning hypothesis keeps exactly the three true detections
    std::set<int> best_indices;
    for (const auto& c : result.best.hypothesis.candidates) best_indices.insert(c.detection_index);
    CHECK(best_indices == std::set<int>{0, 1, 2});
    CHECK_FALSE(result.size_mismatch);

    // and it does so by likelihood, not by default ordering
    for (const auto& r : result.ranking) {
        bool has_fp = false;
        for (const auto& c : r.hypothesis.candidates)
            if (c.detection_index == 3) has_fp = true;
        if (has_fp) CHECK(r.log_likelihood < result.best.log_likelihood);
    }
}

TEST_CASE("digest errors without detections; single detection reduces to one hypothesis") {
    auto reg = registry::make_demo_registry();
    auto cl = make_closed_loop(reg, {"cyl"}, 1, 73);
    digest::FilterConfig cfg;
    cfg.n_particles = 30;
    cfg.n_iterations = 6;
    CHECK_THROWS(digest::digest(cl.obs, {}, 1, reg, cfg, 1));
    auto result = digest::digest(cl.obs, cl.detections, 1, reg, cfg, 1);
    CHECK(result.ranking.size() == 1);

    auto est = digest::estimate_hypothesis(
        detect::enumerate_hypotheses(detect::make_candidates(cl.detections), 1)[0], cl.obs, reg,
        cfg, digest::hypothesis_seed(1, 0));
    CHECK(est.log_likelihood == result.best.log_likelihood);
    REQUIRE(est.poses.size() == 1);
    CHECK(est.poses[0].position == result.best.poses[0].position);
}
