#include "srp/digest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "srp/parallel.hpp"
#include "srp/rng.hpp"

namespace srp::digest {

namespace {

constexpr uint64_t kTagInit = 0x1217;
constexpr uint64_t kTagIter = 0x17E2;
constexpr uint64_t kTagResample = 0x2E5A;
constexpr uint64_t kTagDiffuse = 0xD1FF;
constexpr uint64_t kTagReinit = 0x2E11;
constexpr uint64_t kTagHyp = 0x47F0;

}  // namespace

void FilterConfig::validate() const {
    if (n_particles < 2) throw std::invalid_argument("filter: n_particles must be >= 2");
    if (n_iterations < 1) throw std::invalid_argument("filter: n_iterations must be >= 1");
    if (lambda_r <= 0) throw std::invalid_argument("filter: lambda_r must be positive");
    if (sigma_pos < 0 || sigma_rot < 0) throw std::invalid_argument("filter: sigma must be >= 0");
    if (missing_penalty <= 0) throw std::invalid_argument("filter: missing_penalty must be positive");
}

double weight(double d, double lambda_r) { return std::exp(-lambda_r * d); }

uint64_t iteration_seed(uint64_t seed, int iteration) {
    return rng::stream_key(seed, kTagIter, static_cast<uint64_t>(iteration));
}

uint64_t hypothesis_seed(uint64_t seed, size_t hypothesis_index) {
    return rng::stream_key(seed, kTagHyp, hypothesis_index);
}

std::vector<std::pair<int, int>> iteration_blocks(int n_iterations, int n_objects) {
    std::vector<std::pair<int, int>> blocks;
    int base = n_iterations / n_objects;
    int begin = 0;
    for (int k = 0; k < n_objects; ++k) {
        int len = (k == n_objects - 1) ? n_iterations - begin : base;
        blocks.emplace_back(begin, begin + len);
        begin += len;
    }
    return blocks;
}

namespace {

// |p_obs - p_rend| for two depths on the same pixel ray collapses to
// |d_obs - d_rend| * |ray(u,v)|.
inline double ray_norm(int u, int v, const CameraIntrinsics& cam) {
    double xu = (u - cam.cx) / cam.fx;
    double yv = (v - cam.cy) / cam.fy;
    return std::sqrt(xu * xu + yv * yv + 1.0);
}

std::vector<double> make_ray_table(const CameraIntrinsics& cam) {
    std::vector<double> t(static_cast<size_t>(cam.width) * cam.height);
    for (int v = 0; v < cam.height; ++v)
        for (int u = 0; u < cam.width; ++u)
            t[static_cast<size_t>(v) * cam.width + u] = ray_norm(u, v, cam);
    return t;
}

}  // namespace

double distance(const DepthImage& observed, const DepthImage& rendered,
                const render::ObjectMask& mask, const CameraIntrinsics& cam,
                double missing_penalty) {
    if (observed.width != rendered.width || observed.height != rendered.height ||
        mask.width != rendered.width || mask.height != rendered.height)
        throw std::invalid_argument("distance: image sizes do not match");
    double sum = 0.0;
    size_t count = 0;
    for (int v = 0; v < rendered.height; ++v) {
        for (int u = 0; u < rendered.width; ++u) {
            if (mask.at(u, v) == render::kNoObject) continue;
            ++count;
            float obs = observed.at(u, v);
            if (obs <= 0.0f) {
                sum += missing_penalty;
            } else {
                sum += std::abs(static_cast<double>(obs) - rendered.at(u, v)) * ray_norm(u, v, cam);
            }
        }
    }
    return count == 0 ? missing_penalty : sum / static_cast<double>(count);
}

namespace {

// Pose seeds for one candidate: pixel uniform in the bbox, depth uniform over
// the observed range inside the bbox.
struct CandidateSampler {
    detect::BBox bbox;
    double dmin = 0, dmax = 0;

    CandidateSampler(const detect::Candidate& cand, const Observation& obs) : bbox(cand.bbox) {
        const auto& img = obs.depth;
        int x0 = std::clamp(static_cast<int>(std::ceil(bbox.x)), 0, img.width - 1);
        int x1 = std::clamp(static_cast<int>(std::floor(bbox.x + bbox.w)), 0, img.width - 1);
        int y0 = std::clamp(static_cast<int>(std::ceil(bbox.y)), 0, img.height - 1);
        int y1 = std::clamp(static_cast<int>(std::floor(bbox.y + bbox.h)), 0, img.height - 1);
        dmin = std::numeric_limits<double>::infinity();
        dmax = -dmin;
        for (int v = y0; v <= y1; ++v) {
            for (int u = x0; u <= x1; ++u) {
                float d = img.at(u, v);
                if (d <= 0.0f) continue;
                dmin = std::min(dmin, static_cast<double>(d));
                dmax = std::max(dmax, static_cast<double>(d));
            }
        }
        if (!(dmin < dmax)) {
            dmin = obs.intrinsics.near;
            dmax = obs.intrinsics.far;
        }
    }

    Pose sample(rng::Stream& st, const Observation& obs, bool upright) const {
        double u = st.uniform(bbox.x, bbox.x + bbox.w);
        double v = st.uniform(bbox.y, bbox.y + bbox.h);
        double d = st.uniform(dmin, dmax);
        Pose p;
        p.position = obs.camera_extrinsic.transform(geom::backproject_pixel(u, v, d, obs.intrinsics));
        if (upright) {
            p.orientation = geom::Quat(Eigen::AngleAxisd(st.uniform(0.0, 2.0 * M_PI), geom::Vec3::UnitZ()));
        } else {
            p.orientation = st.uniform_quaternion();
        }
        return p;
    }
};

std::vector<CandidateSampler> make_samplers(const SceneHypothesis& hyp, const Observation& obs) {
    std::vector<CandidateSampler> s;
    s.reserve(hyp.candidates.size());
    for (const auto& c : hyp.candidates) s.emplace_back(c, obs);
    return s;
}

}  // namespace

std::vector<Particle> init_particles(const SceneHypothesis& hyp, const Observation& obs,
                                     const FilterConfig& cfg, uint64_t seed) {
    cfg.validate();
    if (hyp.candidates.empty()) throw std::invalid_argument("init_particles: empty hypothesis");
    auto samplers = make_samplers(hyp, obs);
    const size_t k = hyp.candidates.size();
    std::vector<Particle> particles(static_cast<size_t>(cfg.n_particles));
    for (size_t j = 0; j < particles.size(); ++j) {
        particles[j].poses.resize(k);
        for (size_t o = 0; o < k; ++o) {
            rng::Stream st(rng::stream_key(seed, kTagInit, j, o));
            particles[j].poses[o] = samplers[o].sample(st, obs, cfg.upright_only);
        }
        particles[j].weight = 1.0 / cfg.n_particles;
    }
    return particles;
}

std::vector<Particle> resample_diffuse(const std::vector<Particle>& particles, int active_object,
                                       const FilterConfig& cfg, uint64_t seed) {
    if (particles.empty()) throw std::invalid_argument("resample_diffuse: no particles");
    if (active_object < 0 || active_object >= static_cast<int>(particles[0].poses.size()))
        throw std::invalid_argument("resample_diffuse: active_object out of range");

    double total = 0.0;
    for (const auto& p : particles) total += p.weight;
    if (!(total > 0.0)) throw LikelihoodCollapse();

    const size_t n = particles.size();
    // Systematic resampling: one uniform offset, evenly spaced probes over
    // the normalized cumulative weights.
    rng::Stream offset_stream(rng::stream_key(seed, kTagResample));
    double u0 = offset_stream.uniform() / static_cast<double>(n);
    std::vector<Particle> out;
    out.reserve(n);
    size_t src = 0;
    double cumulative = particles[0].weight / total;
    for (size_t i = 0; i < n; ++i) {
        double probe = u0 + static_cast<double>(i) / static_cast<double>(n);
        while (probe > cumulative && src + 1 < n) {
            ++src;
            cumulative += particles[src].weight / total;
        }
        out.push_back(particles[src]);
    }

    for (size_t i = 0; i < n; ++i) {
        rng::Stream st(rng::stream_key(seed, kTagDiffuse, i));
        Pose& pose = out[i].poses[active_object];
        pose.position += st.normal3(cfg.sigma_pos);
        geom::Vec3 axis = cfg.upright_only ? geom::Vec3::UnitZ() : st.unit_vector();
        double angle = st.normal(0.0, cfg.sigma_rot);
        pose.orientation = (geom::Quat(Eigen::AngleAxisd(angle, axis)) * pose.orientation).normalized();
        out[i].weight = 1.0 / static_cast<double>(n);
    }
    return out;
}

namespace {

// Scores particles for one active object against a fixed composite of the
// already-frozen objects. Per particle only the active mesh is rasterized;
// the frozen contribution enters through precomputed per-pixel terms.
class BlockScorer {
public:
    BlockScorer(const Observation& obs, const registry::ModelRegistry& reg,
                const SceneHypothesis& hyp, const FilterConfig& cfg)
        : obs_(obs),
          cam_(obs.intrinsics),
          reg_(reg),
          hyp_(hyp),
          cfg_(cfg),
          rays_(make_ray_table(obs.intrinsics)),
          world_to_cam_(obs.camera_extrinsic.inverse()),
          frozen_(obs.intrinsics.width, obs.intrinsics.height),
          frozen_term_(static_cast<size_t>(obs.intrinsics.width) * obs.intrinsics.height, 0.0) {}

    void begin_block(int active, const std::vector<Pose>& frozen_poses) {
        active_ = active;
        active_mesh_ = &reg_.get(hyp_.candidates[active].label).mesh;
        frozen_ = DepthImage(cam_.width, cam_.height);
        for (int k = 0; k < active; ++k) {
            const auto& mesh = reg_.get(hyp_.candidates[k].label).mesh;
            render::rasterize_mesh(mesh, geom::compose(world_to_cam_, frozen_poses[k]), cam_,
                                   frozen_, nullptr, 0, nullptr);
        }
        frozen_sum_ = 0.0;
        frozen_count_ = 0;
        for (size_t i = 0; i < frozen_.data.size(); ++i) {
            if (frozen_.data[i] <= 0.0f) {
                frozen_term_[i] = 0.0;
                continue;
            }
            frozen_term_[i] = pixel_term(frozen_.data[i], i);
            frozen_sum_ += frozen_term_[i];
            ++frozen_count_;
        }
    }

    struct Scratch {
        DepthImage depth;
        render::PixelRect dirty;
    };

    Scratch make_scratch() const { return {DepthImage(cam_.width, cam_.height), {}}; }

    double score(const Pose& active_pose, Scratch& s) const {
        // clear what the previous particle touched
        if (!s.dirty.empty()) {
            for (int y = s.dirty.y0; y <= s.dirty.y1; ++y) {
                float* row = &s.depth.at(s.dirty.x0, y);
                std::fill(row, row + (s.dirty.x1 - s.dirty.x0 + 1), 0.0f);
            }
        }
        s.dirty = {};
        render::rasterize_mesh(*active_mesh_, geom::compose(world_to_cam_, active_pose), cam_,
                               s.depth, nullptr, 0, &s.dirty);
        double sum = frozen_sum_;
        size_t count = frozen_count_;
        if (!s.dirty.empty()) {
            for (int y = s.dirty.y0; y <= s.dirty.y1; ++y) {
                for (int x = s.dirty.x0; x <= s.dirty.x1; ++x) {
                    size_t i = static_cast<size_t>(y) * cam_.width + x;
                    float za = s.depth.data[i];
                    if (za <= 0.0f) continue;
                    float zf = frozen_.data[i];
                    if (zf <= 0.0f) {
                        sum += pixel_term(za, i);
                        ++count;
                    } else if (za < zf) {
                        sum += pixel_term(za, i) - frozen_term_[i];
                    }
                }
            }
        }
        double d = count == 0 ? cfg_.missing_penalty : sum / static_cast<double>(count);
        return d;
    }

private:
    double pixel_term(float rendered_z, size_t i) const {
        float obs = obs_.depth.data[i];
        if (obs <= 0.0f) return cfg_.missing_penalty;
        return std::abs(static_cast<double>(obs) - rendered_z) * rays_[i];
    }

    const Observation& obs_;
    const CameraIntrinsics& cam_;
    const registry::ModelRegistry& reg_;
    const SceneHypothesis& hyp_;
    const FilterConfig& cfg_;
    std::vector<double> rays_;
    Pose world_to_cam_;
    int active_ = 0;
    const geom::TriMesh* active_mesh_ = nullptr;
    DepthImage frozen_;
    std::vector<double> frozen_term_;
    double frozen_sum_ = 0.0;
    size_t frozen_count_ = 0;
};

}  // namespace

SceneEstimate estimate_hypothesis(const SceneHypothesis& hyp, const Observation& obs,
                                  const registry::ModelRegistry& reg, const FilterConfig& cfg,
                                  uint64_t seed, FilterTrace* trace) {
    cfg.validate();
    obs.intrinsics.validate();
    if (hyp.candidates.empty()) throw std::invalid_argument("estimate_hypothesis: empty hypothesis");
    if (obs.depth.width != obs.intrinsics.width || obs.depth.height != obs.intrinsics.height)
        throw std::invalid_argument("estimate_hypothesis: depth image size does not match camera");

    const int k_objects = static_cast<int>(hyp.candidates.size());
    const auto blocks = iteration_blocks(cfg.n_iterations, k_objects);
    if (trace) trace->blocks = blocks;

    auto particles = init_particles(hyp, obs, cfg, seed);
    auto samplers = make_samplers(hyp, obs);
    const size_t n = particles.size();
    std::vector<double> weights(n, 0.0);

    BlockScorer scorer(obs, reg, hyp, cfg);
    const int workers = resolve_threads(cfg.n_threads);
    std::vector<BlockScorer::Scratch> scratch;
    scratch.reserve(static_cast<size_t>(workers));
    for (int t = 0; t < workers; ++t) scratch.push_back(scorer.make_scratch());

    std::vector<Pose> frozen_poses(static_cast<size_t>(k_objects));

    for (int k = 0; k < k_objects; ++k) {
        scorer.begin_block(k, frozen_poses);
        if (blocks[k].first == blocks[k].second) {
            frozen_poses[k] = particles[0].poses[k];  // degenerate: more objects than iterations
            continue;
        }
        int reinits = 0;
        for (int it = blocks[k].first; it < blocks[k].second; ++it) {
            parallel_for(n, cfg.n_threads, [&](size_t begin, size_t end, int tid) {
                for (size_t j = begin; j < end; ++j)
                    weights[j] = weight(scorer.score(particles[j].poses[k], scratch[tid]), cfg.lambda_r);
            });
            double total = 0.0;
            size_t best = 0;
            for (size_t j = 0; j < n; ++j) {
                particles[j].weight = weights[j];
                total += weights[j];
                if (weights[j] > weights[best]) best = j;
            }
            if (trace) {
                double norm_sum = 0.0;
                if (total > 0.0)
                    for (size_t j = 0; j < n; ++j) norm_sum += weights[j] / total;
                trace->normalized_weight_sums.push_back(norm_sum);
                if (trace->record_weights) trace->weights.push_back(weights);
            }
            if (total > 0.0 && it == blocks[k].second - 1) frozen_poses[k] = particles[best].poses[k];
            try {
                particles = resample_diffuse(particles, k, cfg, iteration_seed(seed, it));
            } catch (const LikelihoodCollapse&) {
                if (++reinits > 1) throw;
                if (trace) ++trace->reinit_count;
                for (size_t j = 0; j < n; ++j) {
                    rng::Stream st(rng::stream_key(seed, kTagReinit, j, it));
                    particles[j].poses[k] = samplers[k].sample(st, obs, cfg.upright_only);
                    particles[j].weight = 1.0 / static_cast<double>(n);
                }
                --it;  // restart this iteration with the re-seeded object
            }
        }
    }

    SceneEstimate est;
    est.hypothesis = hyp;
    est.poses = frozen_poses;

    // Rank hypotheses by the joint fit of the final poses.
    render::SceneInstance inst;
    inst.camera_extrinsic = obs.camera_extrinsic;
    for (int k = 0; k < k_objects; ++k) inst.objects.emplace_back(hyp.candidates[k].label, frozen_poses[k]);
    render::RenderOutput out = render::render_scene(inst, obs.intrinsics, reg);
    double d = distance(obs.depth, out.depth, out.mask, obs.intrinsics, cfg.missing_penalty);
    est.log_likelihood = -cfg.lambda_r * d;
    return est;
}

DigestResult digest(const Observation& obs, const std::vector<Detection>& detections,
                    int n_objects, const registry::ModelRegistry& reg, const FilterConfig& cfg,
                    uint64_t seed, int max_hypotheses) {
    if (detections.empty()) throw std::invalid_argument("digest: no detections");
    auto t0 = std::chrono::steady_clock::now();

    auto candidates = detect::make_candidates(detections);
    auto hypotheses = detect::enumerate_hypotheses(candidates, n_objects);
    if (max_hypotheses > 0 && static_cast<int>(hypotheses.size()) > max_hypotheses)
        hypotheses.resize(static_cast<size_t>(max_hypotheses));

    DigestResult result;
    result.size_mismatch = static_cast<int>(candidates.size()) < n_objects;

    double best_ll = -std::numeric_limits<double>::infinity();
    double best_conf = -1.0;
    for (size_t h = 0; h < hypotheses.size(); ++h) {
        SceneEstimate est = estimate_hypothesis(hypotheses[h], obs, reg, cfg, hypothesis_seed(seed, h));
        double conf = hypotheses[h].confidence_sum();
        result.ranking.push_back({hypotheses[h], est.log_likelihood, conf});
        bool better = est.log_likelihood > best_ll ||
                      (est.log_likelihood == best_ll && conf > best_conf);
        if (better) {
            best_ll = est.log_likelihood;
            best_conf = conf;
            result.best = std::move(est);
        }
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace srp::digest
