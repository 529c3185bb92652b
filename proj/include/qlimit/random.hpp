#ifndef QLIMIT_RANDOM_HPP
#define QLIMIT_RANDOM_HPP

// Seeded generator with explicit real mappings. The standard distributions
// are implementation-defined, so they are avoided to keep outputs
// byte-identical across toolchains.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

namespace qlimit {

class rng {
public:
    explicit rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal by Box-Muller, one value per call.
    double normal() {
        const double u = 1.0 - uniform();
        const double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
    }

    int index(int n) { return static_cast<int>(uniform() * n); }

    Eigen::VectorXd normal_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    std::uint64_t next() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

} // namespace qlimit

#endif
