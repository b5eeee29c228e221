// Counter-based random streams (Philox 4x32-10). A stream is a pure function
// of its key, so any number of streams can be drawn from concurrently and the
// sequence never depends on thread scheduling.
#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace srp::rng {

// One Philox 4x32-10 block: 128-bit counter, 64-bit key -> 128 random bits.
std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& counter,
                                   const std::array<uint32_t, 2>& key);

// 64-bit mixer used to fold structured stream tags into a key.
uint64_t mix64(uint64_t x);

// Combine a seed with up to four tags into a stream key. Distinct tag tuples
// give statistically independent streams.
uint64_t stream_key(uint64_t seed, uint64_t a = 0, uint64_t b = 0,
                    uint64_t c = 0, uint64_t d = 0);

class Stream {
public:
    explicit Stream(uint64_t key) : key_{static_cast<uint32_t>(key), static_cast<uint32_t>(key >> 32)} {}

    uint32_t next_u32();
    uint64_t next_u64();

    // Uniform in [0, 1).
    double uniform();
    // Uniform in [lo, hi).
    double uniform(double lo, double hi);
    // Integer uniform in [0, n). n must be > 0.
    uint64_t uniform_index(uint64_t n);
    // Standard normal via Box-Muller (second draw cached).
    double normal();
    double normal(double mean, double sigma);
    // Poisson-distributed count (Knuth; fine for small means).
    int poisson(double mean);

    Eigen::Vector3d normal3(double sigma);
    // Uniform direction on the unit sphere.
    Eigen::Vector3d unit_vector();
    // Uniform random rotation (Shoemake).
    Eigen::Quaterniond uniform_quaternion();

private:
    std::array<uint32_t, 2> key_;
    uint64_t counter_ = 0;
    std::array<uint32_t, 4> block_{};
    int block_pos_ = 4;  // empty
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace srp::rng
