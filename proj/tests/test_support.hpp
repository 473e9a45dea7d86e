#pragma once

#include <complex>
#include <random>

#include <revmap/family.hpp>
#include <revmap/series.hpp>

namespace revmap::testing {

inline cplx random_unit_disk(std::mt19937_64 &rng, double radius = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        const cplx z{u(rng), u(rng)};
        if (std::abs(z) <= 1.0) {
            return radius * z;
        }
    }
}

// Random jet with coefficients of modulus ≤ radius in degrees [lo, hi].
inline Jet random_jet(std::mt19937_64 &rng, int order, int lo = 0, int hi = -1, double radius = 1.0) {
    if (hi < 0) {
        hi = order;
    }
    Jet f(order);
    for (int d = lo; d <= hi && d <= order; ++d) {
        for (int j = 0; j <= d; ++j) {
            f.at(d - j, j) = random_unit_disk(rng, radius);
        }
    }
    return f;
}

// Near-identity map id + (higher-order terms of size ≤ radius).
inline MapJet random_near_identity(std::mt19937_64 &rng, int order, double radius) {
    return {Jet::xi(order) + random_jet(rng, order, 2, order, radius),
            Jet::eta(order) + random_jet(rng, order, 2, order, radius)};
}

// Near-identity map commuting with (η, ξ) and with the standard ρ: real coefficients and Ψ₂(i,j) = Ψ₁(j,i).
inline MapJet random_symmetric_near_identity(std::mt19937_64 &rng, int order, double radius) {
    std::uniform_real_distribution<double> u(-radius, radius);
    Jet f = Jet::xi(order);
    for (int d = 2; d <= order; ++d) {
        for (int j = 0; j <= d; ++j) {
            f.at(d - j, j) = u(rng);
        }
    }
    return {f, f.swapped()};
}

// Hermitian family with |a_{ij}| ≤ radius on indices with 2s < i+j ≤ max_degree.
inline CoefficientFamily random_hermitian_family(std::mt19937_64 &rng, int s, int max_degree, double radius,
                                                 int terms) {
    CoefficientFamily fam(s, true);
    std::uniform_int_distribution<int> deg(2 * s + 1, max_degree);
    for (int t = 0; t < terms; ++t) {
        const int d = deg(rng);
        std::uniform_int_distribution<int> pick(0, d);
        const int i = pick(rng);
        cplx v = random_unit_disk(rng, radius);
        if (2 * i == d) {
            v = v.real();
        }
        fam.set(i, d - i, v);
    }
    return fam;
}

inline CoefficientFamily random_family(std::mt19937_64 &rng, int s, int max_degree, double radius, int terms) {
    CoefficientFamily fam(s, false);
    std::uniform_int_distribution<int> deg(2 * s + 1, max_degree);
    for (int t = 0; t < terms; ++t) {
        const int d = deg(rng);
        std::uniform_int_distribution<int> pick(0, d);
        const int i = pick(rng);
        fam.set(i, d - i, random_unit_disk(rng, radius));
    }
    return fam;
}

} // namespace revmap::testing
