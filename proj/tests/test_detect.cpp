#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "srp/bench.hpp"
#include "srp/detect.hpp"
#include "srp/registry.hpp"
#include "srp/rng.hpp"

using namespace srp;

namespace {

// Brute-force k-subset enumeration, independent of the implementation.
void subsets_rec(int m, int k, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (int i = start; i < m; ++i) {
        cur.push_back(i);
        subsets_rec(m, k, i + 1, cur, out);
        cur.pop_back();
    }
}

std::vector<std::vector<int>> brute_force_subsets(int m, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    subsets_rec(m, k, 0, cur, out);
    return out;
}

detect::GroundTruthScene three_object_scene(const registry::ModelRegistry& reg, uint64_t seed) {
    bench::SceneGenConfig cfg;
    cfg.n_objects = 3;
    cfg.model_pool = {"lblock", "wedge", "cyl"};
    return bench::generate_scene(reg, cfg, seed).scene;
}

}  // namespace

TEST_CASE("make_candidates takes the argmax label") {
    detect::Detection d;
    d.bbox = {10, 10, 20, 20};
    d.scores = {{"cup", 0.9}, {"bowl", 0.2}};
    auto cands = detect::make_candidates({d});
    REQUIRE(cands.size() == 1);
    CHECK(cands[0].label == "cup");
    CHECK(cands[0].confidence == doctest::Approx(0.9));
}

TEST_CASE("make_candidates breaks ties toward the smaller label") {
    detect::Detection d;
    d.bbox = {0, 0, 5, 5};
    d.scores = {{"b", 0.5}, {"a", 0.5}};
    auto cands = detect::make_candidates({d});
    CHECK(cands[0].label == "a");
    CHECK(cands[0].confidence == doctest::Approx(0.5));
}

TEST_CASE("make_candidates preserves detection order and rejects empty scores") {
    std::vector<detect::Detection> dets(4);
    for (size_t i = 0; i < 4; ++i) {
        dets[i].bbox = {static_cast<double>(i), 0, 4, 4};
        dets[i].scores = {{"m" + std::to_string(i), 0.5 + 0.1 * i}};
    }
    auto cands = detect::make_candidates(dets);
    REQUIRE(cands.size() == 4);
    for (size_t i = 0; i < 4; ++i) CHECK(cands[i].detection_index == static_cast<int>(i));

    dets[2].scores.clear();
    CHECK_THROWS(detect::make_candidates(dets));
}

TEST_CASE("enumerate_hypotheses counts match the combinatorial oracle") {
    for (int m = 1; m <= 8; ++m) {
        std::vector<detect::Candidate> cands(m);
        for (int i = 0; i < m; ++i) {
            cands[i].label = "m" + std::to_string(i);
            cands[i].confidence = 0.5;
            cands[i].detection_index = i;
        }
        for (int k = 1; k <= m; ++k) {
            auto hyps = detect::enumerate_hypotheses(cands, k);
            CHECK(hyps.size() == brute_force_subsets(m, k).size());
            for (const auto& h : hyps) CHECK(static_cast<int>(h.candidates.size()) == k);
        }
    }
    // the paper's illustration: 4 candidates, 3 objects -> 4 hypotheses
    std::vector<detect::Candidate> four(4);
    for (int i = 0; i < 4; ++i) four[i].detection_index = i;
    CHECK(detect::enumerate_hypotheses(four, 3).size() == 4);
    CHECK(detect::enumerate_hypotheses(four, 4).size() == 1);
    // m = 6, k = 3
    std::vector<detect::Candidate> six(6);
    for (int i = 0; i < 6; ++i) six[i].detection_index = i;
    CHECK(detect::enumerate_hypotheses(six, 3).size() == 20);
}

TEST_CASE("every candidate appears in C(m-1, k-1) hypotheses") {
    const int m = 7, k = 3;
    std::vector<detect::Candidate> cands(m);
    for (int i = 0; i < m; ++i) {
        cands[i].label = "x" + std::to_string(i);
        cands[i].confidence = 0.1 * (i + 1);
        cands[i].detection_index = i;
    }
    auto hyps = detect::enumerate_hypotheses(cands, k);
    size_t expect = brute_force_subsets(m - 1, k - 1).size();
    for (int i = 0; i < m; ++i) {
        size_t count = 0;
        for (const auto& h : hyps)
            for (const auto& c : h.candidates)
                if (c.detection_index == i) ++count;
        CHECK(count == expect);
    }
}

TEST_CASE("fewer candidates than objects yields the single full hypothesis") {
    std::vector<detect::Candidate> cands(2);
    cands[0].confidence = 0.3;
    cands[1].confidence = 0.9;
    auto hyps = detect::enumerate_hypotheses(cands, 5);
    REQUIRE(hyps.size() == 1);
    CHECK(hyps[0].candidates.size() == 2);
    // candidates sorted by descending confidence inside the hypothesis
    CHECK(hyps[0].candidates[0].confidence == doctest::Approx(0.9));
    CHECK_THROWS(detect::enumerate_hypotheses({}, 3));
}

TEST_CASE("hypotheses are ordered by descending confidence sum") {
    std::vector<detect::Candidate> cands(5);
    for (int i = 0; i < 5; ++i) {
        cands[i].confidence = 0.1 + 0.2 * i;
        cands[i].detection_index = i;
    }
    auto hyps = detect::enumerate_hypotheses(cands, 2);
    for (size_t i = 1; i < hyps.size(); ++i)
        CHECK(hyps[i - 1].confidence_sum() >= hyps[i].confidence_sum() - 1e-12);
}

TEST_CASE("oracle detector: zero noise finds every visible object exactly") {
    auto reg = registry::make_demo_registry();
    auto scene = three_object_scene(reg, 21);
    detect::NoiseConfig noise;  // all zeros
    auto dets = detect::detect_synthetic(scene, scene.intrinsics, reg, noise, 99);
    REQUIRE(dets.size() == 3);
    auto cands = detect::make_candidates(dets);
    std::set<std::string> labels;
    for (const auto& c : cands) {
        CHECK(c.confidence == doctest::Approx(1.0));
        labels.insert(c.label);
    }
    std::set<std::string> expect;
    for (const auto& o : scene.objects) expect.insert(o.model_id);
    CHECK(labels == expect);

    // bboxes equal the exact mask rectangles
    auto mask = render::render_object_mask(scene.instance(), scene.intrinsics, reg);
    for (const auto& d : dets) {
        int inside = 0, total = 0;
        for (int y = 0; y < mask.height; ++y)
            for (int x = 0; x < mask.width; ++x)
                if (mask.at(x, y) != render::kNoObject) {
                    ++total;
                    if (d.bbox.contains(x, y)) ++inside;
                }
        CHECK(total > 0);
    }
}

TEST_CASE("oracle detector: miss_rate one drops everything") {
    auto reg = registry::make_demo_registry();
    auto scene = three_object_scene(reg, 22);
    detect::NoiseConfig noise;
    noise.miss_rate = 1.0;
    CHECK(detect::detect_synthetic(scene, scene.intrinsics, reg, noise, 1).empty());
}

TEST_CASE("oracle detector is deterministic per seed") {
    auto reg = registry::make_demo_registry();
    auto scene = three_object_scene(reg, 23);
    detect::NoiseConfig noise;
    noise.bbox_sigma = 1.5;
    noise.label_noise = 0.2;
    noise.miss_rate = 0.3;
    noise.fp_rate = 1.0;
    auto a = detect::detect_synthetic(scene, scene.intrinsics, reg, noise, 7);
    auto b = detect::detect_synthetic(scene, scene.intrinsics, reg, noise, 7);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].bbox.x == b[i].bbox.x);
        CHECK(a[i].bbox.w == b[i].bbox.w);
        CHECK(a[i].scores == b[i].scores);
    }
    auto c = detect::detect_synthetic(scene, scene.intrinsics, reg, noise, 8);
    bool same = a.size() == c.size();
    if (same)
        for (size_t i = 0; i < a.size(); ++i)
            if (a[i].bbox.x != c[i].bbox.x) same = false;
    CHECK_FALSE(same);
}

TEST_CASE("detection bboxes stay inside the image under heavy jitter") {
    auto reg = registry::make_demo_registry();
    auto scene = three_object_scene(reg, 24);
    detect::NoiseConfig noise;
    noise.bbox_sigma = 25.0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        for (const auto& d : detect::detect_synthetic(scene, scene.intrinsics, reg, noise, seed)) {
            CHECK(d.bbox.x >= 0);
            CHECK(d.bbox.y >= 0);
            CHECK(d.bbox.w >= 1);
            CHECK(d.bbox.h >= 1);
            CHECK(d.bbox.x + d.bbox.w <= scene.intrinsics.width);
            CHECK(d.bbox.y + d.bbox.h <= scene.intrinsics.height);
        }
    }
}
