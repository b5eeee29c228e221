// Flat TOML subset ([section] headers, key = value scalars and arrays) plus
// bindings into the pipeline config structs.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srp/bench.hpp"
#include "srp/detect.hpp"
#include "srp/digest.hpp"

namespace srp::config {

// Parsed key/value table; section names are flattened into dotted keys
// ("filter.n_particles").
class Toml {
public:
    static Toml parse(const std::string& text, const std::string& name = "<config>");
    static Toml parse_file(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    double number(const std::string& key, double fallback) const;
    int integer(const std::string& key, int fallback) const;
    bool boolean(const std::string& key, bool fallback) const;
    std::string text(const std::string& key, const std::string& fallback) const;
    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;
    std::vector<std::string> texts(const std::string& key, std::vector<std::string> fallback) const;

    // keys actually present (for unknown-key warnings)
    std::vector<std::string> keys() const;

private:
    struct Value {
        std::string raw;
        bool is_string = false;
        std::vector<std::string> array;  // raw elements when the value is an array
        bool is_array = false;
    };
    std::map<std::string, Value> values_;
};

// Sections: [filter], [noise], [scene], [thresholds], [bench], [run]
digest::FilterConfig filter_from_toml(const Toml& t);
detect::NoiseConfig noise_from_toml(const Toml& t);
bench::Thresholds thresholds_from_toml(const Toml& t);
bench::SceneGenConfig scene_from_toml(const Toml& t);
bench::SuiteConfig suite_from_toml(const Toml& t);

}  // namespace srp::config
