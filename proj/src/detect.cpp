#include "srp/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "srp/rng.hpp"

namespace srp::detect {

render::SceneInstance GroundTruthScene::instance() const {
    render::SceneInstance si;
    si.camera_extrinsic = camera_extrinsic;
    si.objects.reserve(objects.size());
    for (const auto& o : objects) si.objects.emplace_back(o.model_id, o.pose);
    return si;
}

namespace {

struct MaskRect {
    int min_x = 1 << 30, min_y = 1 << 30, max_x = -1, max_y = -1;
    int pixels = 0;
};

BBox clamp_bbox(double x, double y, double w, double h, const CameraIntrinsics& cam) {
    double x1 = std::clamp(x + w, 1.0, static_cast<double>(cam.width - 1));
    double y1 = std::clamp(y + h, 1.0, static_cast<double>(cam.height - 1));
    BBox b;
    b.x = std::clamp(x, 0.0, x1 - 1.0);
    b.y = std::clamp(y, 0.0, y1 - 1.0);
    b.w = std::max(1.0, x1 - b.x);
    b.h = std::max(1.0, y1 - b.y);
    return b;
}

std::map<std::string, double> label_scores(const std::string& true_label, double label_noise,
                                           const std::vector<std::string>& all_labels) {
    std::map<std::string, double> scores;
    scores[true_label] = 1.0 - label_noise;
    if (label_noise > 0.0) {
        int distractors = 0;
        for (const auto& l : all_labels)
            if (l != true_label) ++distractors;
        if (distractors > 0) {
            double share = label_noise / distractors;
            for (const auto& l : all_labels)
                if (l != true_label) scores[l] = share;
        }
    }
    return scores;
}

}  // namespace

std::vector<Detection> detect_synthetic(const GroundTruthScene& scene,
                                        const CameraIntrinsics& cam,
                                        const registry::ModelRegistry& reg,
                                        const NoiseConfig& noise, uint64_t seed) {
    render::ObjectMask mask = render::render_object_mask(scene.instance(), cam, reg);

    std::vector<MaskRect> rects(scene.objects.size());
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            int32_t id = mask.at(x, y);
            if (id == render::kNoObject) continue;
            MaskRect& r = rects[id];
            r.min_x = std::min(r.min_x, x);
            r.min_y = std::min(r.min_y, y);
            r.max_x = std::max(r.max_x, x);
            r.max_y = std::max(r.max_y, y);
            ++r.pixels;
        }
    }

    std::vector<std::string> labels = reg.ids();
    std::vector<Detection> out;
    for (size_t i = 0; i < scene.objects.size(); ++i) {
        const MaskRect& r = rects[i];
        if (r.pixels < noise.min_pixels) continue;
        rng::Stream st(rng::stream_key(seed, 0x0DE7EC7, i));
        if (noise.miss_rate > 0.0 && st.uniform() < noise.miss_rate) continue;
        double x = r.min_x + st.normal(0.0, noise.bbox_sigma);
        double y = r.min_y + st.normal(0.0, noise.bbox_sigma);
        double w = (r.max_x - r.min_x + 1) + st.normal(0.0, noise.bbox_sigma);
        double h = (r.max_y - r.min_y + 1) + st.normal(0.0, noise.bbox_sigma);
        Detection det;
        det.bbox = clamp_bbox(x, y, w, h, cam);
        det.scores = label_scores(scene.objects[i].model_id, noise.label_noise, labels);
        out.push_back(std::move(det));
    }

    if (noise.fp_rate > 0.0) {
        rng::Stream st(rng::stream_key(seed, 0x0DE7EC7, 0xFA15E));
        int n_fp = st.poisson(noise.fp_rate);
        for (int k = 0; k < n_fp; ++k) {
            double w = st.uniform(8.0, cam.width / 3.0);
            double h = st.uniform(8.0, cam.height / 3.0);
            double x = st.uniform(0.0, cam.width - w);
            double y = st.uniform(0.0, cam.height - h);
            Detection det;
            det.bbox = clamp_bbox(x, y, w, h, cam);
            const std::string& label = labels[st.uniform_index(labels.size())];
            det.scores = label_scores(label, std::max(noise.label_noise, 0.3), labels);
            out.push_back(std::move(det));
        }
    }
    return out;
}

std::vector<Candidate> make_candidates(const std::vector<Detection>& detections) {
    std::vector<Candidate> out;
    out.reserve(detections.size());
    for (size_t i = 0; i < detections.size(); ++i) {
        const Detection& d = detections[i];
        if (d.scores.empty())
            throw std::invalid_argument("detection " + std::to_string(i) + " has no scores");
        // std::map iterates labels in lexicographic order, so keeping a
        // strictly-greater comparison picks the smallest label among ties.
        Candidate c;
        c.confidence = -1.0;
        for (const auto& [label, conf] : d.scores) {
            if (conf > c.confidence) {
                c.label = label;
                c.confidence = conf;
            }
        }
        c.bbox = d.bbox;
        c.detection_index = static_cast<int>(i);
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<SceneHypothesis> enumerate_hypotheses(const std::vector<Candidate>& candidates,
                                                  int n_objects) {
    if (candidates.empty()) throw std::invalid_argument("no candidates: cannot build a scene hypothesis");
    if (n_objects < 1) throw std::invalid_argument("n_objects must be >= 1");

    const int m = static_cast<int>(candidates.size());
    std::vector<std::vector<int>> subsets;
    if (m < n_objects) {
        std::vector<int> all(m);
        std::iota(all.begin(), all.end(), 0);
        subsets.push_back(std::move(all));
    } else {
        // Lexicographic k-subset enumeration.
        std::vector<int> idx(n_objects);
        std::iota(idx.begin(), idx.end(), 0);
        for (;;) {
            subsets.push_back(idx);
            int i = n_objects - 1;
            while (i >= 0 && idx[i] == m - n_objects + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < n_objects; ++j) idx[j] = idx[j - 1] + 1;
        }
    }

    std::vector<std::pair<double, size_t>> order(subsets.size());
    for (size_t s = 0; s < subsets.size(); ++s) {
        double sum = 0;
        for (int i : subsets[s]) sum += candidates[i].confidence;
        order[s] = {sum, s};
    }
    // Descending confidence sum; ties keep lexicographic subset order.
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    std::vector<SceneHypothesis> out;
    out.reserve(subsets.size());
    for (const auto& [sum, s] : order) {
        SceneHypothesis hyp;
        for (int i : subsets[s]) hyp.candidates.push_back(candidates[i]);
        std::stable_sort(hyp.candidates.begin(), hyp.candidates.end(),
                         [](const Candidate& a, const Candidate& b) {
                             return a.confidence > b.confidence;
                         });
        out.push_back(std::move(hyp));
    }
    return out;
}

}  // namespace srp::detect
