#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace sst {

// Seeded random source used across the toolkit. All distribution
// transforms are implemented here (rather than via std:: distribution
// objects) so that a given seed produces the same stream on every
// platform and standard library.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double uniform() {
        return (gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer in [lo, hi], inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int64_t>(gen_() % span);
    }

    // Box-Muller; one normal per call keeps the stream position simple.
    double normal(double mean, double stddev) {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + stddev * z;
    }

    double exponential(double mean) {
        double u = uniform();
        while (u >= 1.0) u = uniform();
        return -mean * std::log1p(-u);
    }

    // Dirichlet(1, ..., 1): normalized unit-rate exponentials.
    std::vector<double> dirichlet_uniform(int k) {
        std::vector<double> w(k);
        double total = 0.0;
        for (int i = 0; i < k; ++i) {
            w[i] = exponential(1.0);
            total += w[i];
        }
        for (int i = 0; i < k; ++i) w[i] /= total;
        return w;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace sst
