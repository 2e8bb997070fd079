#pragma once

// Platform-stable random source for tests. std::normal_distribution and
// friends are implementation-defined, so only raw mt19937_64 output is used.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace repscope::testing {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi].
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(gen_() % span);
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }
    double normal(double mean, double sd) { return mean + sd * normal(); }

    std::vector<float> floats(std::size_t n, double lo, double hi) {
        std::vector<float> v(n);
        for (auto& x : v) {
            x = static_cast<float>(uniform(lo, hi));
        }
        return v;
    }

    std::uint64_t bits() { return gen_(); }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace repscope::testing
