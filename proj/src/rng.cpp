#include "srp/rng.hpp"

#include <cmath>

namespace srp::rng {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline uint32_t mulhi32(uint32_t a, uint32_t b, uint32_t* lo) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    *lo = static_cast<uint32_t>(p);
    return static_cast<uint32_t>(p >> 32);
}

inline void philox_round(std::array<uint32_t, 4>& ctr, std::array<uint32_t, 2>& key) {
    uint32_t lo0, lo1;
    uint32_t hi0 = mulhi32(kPhiloxM0, ctr[0], &lo0);
    uint32_t hi1 = mulhi32(kPhiloxM1, ctr[2], &lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
}

}  // namespace

std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& counter,
                                   const std::array<uint32_t, 2>& key) {
    std::array<uint32_t, 4> ctr = counter;
    std::array<uint32_t, 2> k = key;
    for (int i = 0; i < 10; ++i) philox_round(ctr, k);
    return ctr;
}

uint64_t mix64(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

uint64_t stream_key(uint64_t seed, uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    uint64_t k = mix64(seed);
    k = mix64(k ^ a);
    k = mix64(k ^ b);
    k = mix64(k ^ c);
    k = mix64(k ^ d);
    return k;
}

uint32_t Stream::next_u32() {
    if (block_pos_ == 4) {
        std::array<uint32_t, 4> ctr = {static_cast<uint32_t>(counter_),
                                       static_cast<uint32_t>(counter_ >> 32), 0u, 0u};
        block_ = philox4x32(ctr, key_);
        ++counter_;
        block_pos_ = 0;
    }
    return block_[block_pos_++];
}

uint64_t Stream::next_u64() {
    uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
}

double Stream::uniform() {
    // 53 random bits -> [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

uint64_t Stream::uniform_index(uint64_t n) {
    return static_cast<uint64_t>(uniform() * static_cast<double>(n)) % n;
}

double Stream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(a);
    has_cached_normal_ = true;
    return r * std::cos(a);
}

double Stream::normal(double mean, double sigma) { return mean + sigma * normal(); }

int Stream::poisson(double mean) {
    if (mean <= 0.0) return 0;
    double limit = std::exp(-mean);
    double prod = uniform();
    int n = 0;
    while (prod > limit) {
        ++n;
        prod *= uniform();
    }
    return n;
}

Eigen::Vector3d Stream::normal3(double sigma) {
    return {normal(0.0, sigma), normal(0.0, sigma), normal(0.0, sigma)};
}

Eigen::Vector3d Stream::unit_vector() {
    // Marsaglia rejection on the disk
    for (;;) {
        double x = uniform(-1.0, 1.0);
        double y = uniform(-1.0, 1.0);
        double s = x * x + y * y;
        if (s > 0.0 && s < 1.0) {
            double f = 2.0 * std::sqrt(1.0 - s);
            return {x * f, y * f, 1.0 - 2.0 * s};
        }
    }
}

Eigen::Quaterniond Stream::uniform_quaternion() {
    double u1 = uniform();
    double u2 = uniform();
    double u3 = uniform();
    double a = std::sqrt(1.0 - u1);
    double b = std::sqrt(u1);
    return Eigen::Quaterniond(b * std::cos(2.0 * M_PI * u3), a * std::sin(2.0 * M_PI * u2),
                              a * std::cos(2.0 * M_PI * u2), b * std::sin(2.0 * M_PI * u3));
}

}  // namespace srp::rng
