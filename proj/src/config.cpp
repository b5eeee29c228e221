#include "srp/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace srp::config {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
    throw std::runtime_error(name + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

Toml Toml::parse(const std::string& text, const std::string& name) {
    Toml out;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // strip comments outside strings
        std::string stripped;
        bool in_string = false;
        for (char c : line) {
            if (c == '"') in_string = !in_string;
            if (c == '#' && !in_string) break;
            stripped.push_back(c);
        }
        stripped = trim(stripped);
        if (stripped.empty()) continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']') fail(name, lineno, "unterminated section header");
            section = trim(stripped.substr(1, stripped.size() - 2));
            if (section.empty()) fail(name, lineno, "empty section name");
            continue;
        }
        size_t eq = stripped.find('=');
        if (eq == std::string::npos) fail(name, lineno, "expected key = value");
        std::string key = trim(stripped.substr(0, eq));
        std::string val = trim(stripped.substr(eq + 1));
        if (key.empty()) fail(name, lineno, "empty key");
        if (val.empty()) fail(name, lineno, "empty value");
        Value v;
        if (val.front() == '"') {
            if (val.size() < 2 || val.back() != '"') fail(name, lineno, "unterminated string");
            v.raw = val.substr(1, val.size() - 2);
            v.is_string = true;
        } else if (val.front() == '[') {
            if (val.back() != ']') fail(name, lineno, "unterminated array");
            v.is_array = true;
            std::string inner = val.substr(1, val.size() - 2);
            std::string elem;
            bool elem_string = false;
            for (char c : inner) {
                if (c == '"') elem_string = !elem_string;
                if (c == ',' && !elem_string) {
                    v.array.push_back(trim(elem));
                    elem.clear();
                } else {
                    elem.push_back(c);
                }
            }
            if (!trim(elem).empty()) v.array.push_back(trim(elem));
            for (auto& e : v.array) {
                if (!e.empty() && e.front() == '"' && e.back() == '"') e = e.substr(1, e.size() - 2);
            }
        } else {
            v.raw = val;
        }
        std::string full = section.empty() ? key : section + "." + key;
        out.values_[full] = std::move(v);
    }
    return out;
}

Toml Toml::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

double Toml::number(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stod(it->second.raw);
    } catch (const std::exception&) {
        throw std::runtime_error("config key " + key + ": not a number: " + it->second.raw);
    }
}

int Toml::integer(const std::string& key, int fallback) const {
    double d = number(key, fallback);
    if (d != std::floor(d)) throw std::runtime_error("config key " + key + ": not an integer");
    return static_cast<int>(d);
}

bool Toml::boolean(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second.raw == "true") return true;
    if (it->second.raw == "false") return false;
    throw std::runtime_error("config key " + key + ": not a boolean: " + it->second.raw);
}

std::string Toml::text(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second.raw;
}

std::vector<double> Toml::numbers(const std::string& key, std::vector<double> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (!it->second.is_array) throw std::runtime_error("config key " + key + ": not an array");
    std::vector<double> out;
    for (const auto& e : it->second.array) out.push_back(std::stod(e));
    return out;
}

std::vector<std::string> Toml::texts(const std::string& key, std::vector<std::string> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (!it->second.is_array) throw std::runtime_error("config key " + key + ": not an array");
    return it->second.array;
}

std::vector<std::string> Toml::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
}

digest::FilterConfig filter_from_toml(const Toml& t) {
    digest::FilterConfig f;
    f.n_particles = t.integer("filter.n_particles", f.n_particles);
    f.n_iterations = t.integer("filter.n_iterations", f.n_iterations);
    f.lambda_r = t.number("filter.lambda_r", f.lambda_r);
    f.sigma_pos = t.number("filter.sigma_pos", f.sigma_pos);
    f.sigma_rot = t.number("filter.sigma_rot", f.sigma_rot);
    f.missing_penalty = t.number("filter.missing_penalty", f.missing_penalty);
    f.upright_only = t.boolean("filter.upright_only", f.upright_only);
    f.n_threads = t.integer("filter.threads", f.n_threads);
    f.validate();
    return f;
}

detect::NoiseConfig noise_from_toml(const Toml& t) {
    detect::NoiseConfig n;
    n.bbox_sigma = t.number("noise.bbox_sigma", n.bbox_sigma);
    n.label_noise = t.number("noise.label_noise", n.label_noise);
    n.miss_rate = t.number("noise.miss_rate", n.miss_rate);
    n.fp_rate = t.number("noise.fp_rate", n.fp_rate);
    n.min_pixels = t.integer("noise.min_pixels", n.min_pixels);
    return n;
}

bench::Thresholds thresholds_from_toml(const Toml& t) {
    bench::Thresholds th = bench::Thresholds::default_grid();
    th.dt_list = t.numbers("thresholds.dt_m", th.dt_list);
    if (t.has("thresholds.dtheta_deg")) {
        th.dtheta_list.clear();
        for (double deg : t.numbers("thresholds.dtheta_deg", {}))
            th.dtheta_list.push_back(deg * M_PI / 180.0);
    }
    th.validate();
    return th;
}

bench::SceneGenConfig scene_from_toml(const Toml& t) {
    bench::SceneGenConfig s;
    s.n_objects = t.integer("scene.n_objects", s.n_objects);
    s.stacking_prob = t.number("scene.stacking_prob", s.stacking_prob);
    s.model_pool = t.texts("scene.models", s.model_pool);
    s.table_height = t.number("scene.table_height", s.table_height);
    auto bounds = t.numbers("scene.table_bounds",
                            {s.bounds.min_x, s.bounds.max_x, s.bounds.min_y, s.bounds.max_y});
    if (bounds.size() != 4) throw std::runtime_error("scene.table_bounds needs [min_x, max_x, min_y, max_y]");
    s.bounds = {bounds[0], bounds[1], bounds[2], bounds[3]};
    s.resolution_width = t.integer("scene.width", s.resolution_width);
    s.resolution_height = t.integer("scene.height", s.resolution_height);
    return s;
}

bench::SuiteConfig suite_from_toml(const Toml& t) {
    bench::SuiteConfig c;
    c.n_scenes = t.integer("bench.n_scenes", c.n_scenes);
    c.scene = scene_from_toml(t);
    c.filter = filter_from_toml(t);
    c.noise = noise_from_toml(t);
    c.thresholds = thresholds_from_toml(t);
    c.use_gt_poses = t.boolean("bench.use_gt_poses", c.use_gt_poses);
    c.export_scenes = t.boolean("bench.export_scenes", c.export_scenes);
    return c;
}

}  // namespace srp::config
