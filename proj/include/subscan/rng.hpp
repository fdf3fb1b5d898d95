#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace subscan {

// Name of the generator recorded in evaluation reports so runs can be
// reproduced outside this codebase.
inline constexpr std::string_view k_rng_name = "mt19937-64/box-muller";

// Seeded random source built on mt19937_64 with hand-rolled output
// transforms. std::normal_distribution and std::uniform_int_distribution
// are implementation-defined, so they are avoided: every draw here is a
// fixed function of the mt19937_64 word stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform double in (0, 1], 53-bit resolution.
    double uniform01() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via the Box-Muller transform; pairs are consumed in
    // order (cos first, sin second).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = gen_();
        } while (r >= limit);
        return r % n;
    }

    std::uint64_t next() { return gen_(); }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace subscan
