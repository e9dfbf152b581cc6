#pragma once

// Deterministic seeded randomness for measurement sampling.
//
// Stream layout: one master seed; each (arm, basis) pair gets its own
// stream key via splitmix64 chaining, and each shot reseeds a fresh
// generator from (stream key, shot index). Sampling results therefore do
// not depend on evaluation order and can be reproduced shot-by-shot.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "eprsim/linalg.hpp"

namespace eprsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double gaussian() {
        double u1 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

// Key of the per-(arm, basis) sample stream.
inline std::uint64_t derive_stream_key(std::uint64_t master_seed, std::uint64_t arm_tag,
                                       std::uint64_t basis_tag) {
    return splitmix64(splitmix64(master_seed ^ (0xA5A5A5A5A5A5A5A5ull + arm_tag)) ^
                      (0x5A5A5A5A5A5A5A5Aull + basis_tag));
}

// Generator for a single shot within a stream.
inline SplitMix64 shot_rng(std::uint64_t stream_key, std::uint64_t shot_index) {
    return SplitMix64(stream_key ^ splitmix64(shot_index + 1));
}

// Haar-ish random pure state (Gaussian amplitudes, normalized).
inline StateVector random_pure_state(SplitMix64& rng, std::size_t dim) {
    std::vector<cplx> a(dim);
    double n2 = 0.0;
    for (cplx& z : a) {
        z = cplx{rng.gaussian(), rng.gaussian()};
        n2 += std::norm(z);
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (cplx& z : a) z *= inv;
    return StateVector::from_amplitudes(std::move(a));
}

// Full-rank random density operator from a Ginibre matrix G: G G^dag / tr.
inline DensityOperator random_density_operator(SplitMix64& rng, std::size_t dim) {
    ComplexMatrix g(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            g(i, j) = cplx{rng.gaussian(), rng.gaussian()};
    ComplexMatrix m = g * g.adjoint();
    const double tr = m.trace().real();
    m = cplx{1.0 / tr, 0.0} * m;
    // Symmetrize away the last bits of roundoff before validation.
    m = cplx{0.5, 0.0} * (m + m.adjoint());
    return DensityOperator::from_matrix(std::move(m));
}

} // namespace eprsim
