#pragma once

// Linear response of the periodic-point curves ζ(w, a) to the perturbation, the w^n Laurent
// coefficients H_k and the interval witness built from them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "family.hpp"
#include "twist.hpp"

namespace revmap {

struct ResonanceSchedule {
    std::vector<ResonanceData> entries;
    bool complete; // false when fewer than the requested count exist below n_max
};

// First `count` n ≤ n_max with β(n) ∈ (−δ, 0), ascending.
inline ResonanceSchedule select_resonant_n(double alpha, double delta, std::size_t count, std::int64_t n_max) {
    if (!(delta > 0.0 && delta < std::numbers::pi)) {
        throw invalid_input("select_resonant_n: need 0 < delta < pi");
    }
    ResonanceSchedule out{{}, false};
    for (std::int64_t n = 1; n <= n_max && out.entries.size() < count; ++n) {
        const ResonanceData r = beta_reduce(n, alpha);
        if (r.beta < 0.0 && r.beta > -delta) {
            out.entries.push_back(r);
        }
    }
    out.complete = out.entries.size() == count;
    return out;
}

// Real branch j = 2s at a = 0: ζ₀ = (−β/n)^{1/(2s)}.
inline double zeta0(int s, const ResonanceData &res) {
    if (!(res.beta < 0.0)) {
        throw hypothesis_violation("zeta0: beta must be negative");
    }
    return std::pow(-res.beta / static_cast<double>(res.n), 1.0 / (2.0 * s));
}

// First-order correction of the j = 2s branch,
//   Lζ(w) = −ζ₀/(2snζ₀^{2s}) Σ_{j<n} [ã(ζ₀wu^{j+1}, ζ₀w⁻¹ū^{j+1}) + ã(ζ₀w⁻¹ū^j, ζ₀wu^j)],  u = e^{iω(ζ₀²)}.
inline cplx predicted_linear_zeta(const CoefficientFamily &a, const TwistParams &tp, const ResonanceData &res,
                                  const CurveDomain &dom, cplx w) {
    if (!(res.beta < 0.0 && res.beta > -dom.delta)) {
        throw hypothesis_violation("predicted_linear_zeta: beta violates -delta < beta < 0");
    }
    if (a.empty()) {
        return {};
    }
    const int s = tp.s;
    const double z0 = zeta0(s, res);
    const cplx u = std::exp(I * tp.omega(z0 * z0));
    cplx sum{};
    cplx uj{1.0, 0.0};
    for (std::int64_t j = 0; j < res.n; ++j) {
        const cplx uj1 = uj * u;
        sum += a.evaluate(z0 * w * uj1, z0 / (w * uj1)) + a.evaluate(z0 / (w * uj), z0 * w * uj);
        uj = uj1;
    }
    return -z0 * sum / (2.0 * s * static_cast<double>(res.n) * std::pow(z0, 2 * s));
}

// −ζ₀^{n−2s+1}(a_{n,0} + a_{0,n})/(2s)
inline cplx leading_H(const CoefficientFamily &a, int s, const ResonanceData &res) {
    if (res.n > CoefficientFamily::max_exponent) {
        return {};
    }
    const int n = static_cast<int>(res.n);
    const double z0 = zeta0(s, res);
    return -std::pow(z0, n - 2 * s + 1) * (a(n, 0) + a(0, n)) / (2.0 * s);
}

struct HkEstimate {
    cplx numeric;
    cplx leading;
};

template <class Map>
HkEstimate Hk_estimate_with(const Map &map, const CoefficientFamily &a, int s, const ResonanceData &res,
                            const CurveDomain &dom, int grid_size) {
    if (grid_size < 4 * res.n) {
        throw invalid_input("Hk_estimate: grid must have at least 4n points");
    }
    std::vector<CurveSample> samples;
    samples.reserve(static_cast<std::size_t>(grid_size));
    for (const cplx w : unit_circle_grid(grid_size)) {
        const BranchSolution b = solve_branch_with(map, s, res, dom, 2 * s, w);
        samples.push_back({w, b.zeta, b.return_residual});
    }
    return {laurent_coefficient(samples, static_cast<int>(res.n)), leading_H(a, s, res)};
}

inline HkEstimate Hk_estimate(const TwistMap &map, const ResonanceData &res, const CurveDomain &dom, int grid_size) {
    return Hk_estimate_with(map, map.family(), map.params().s, res, dom, grid_size);
}

struct ObstructionEntry {
    std::int64_t n;
    double beta;
    cplx Hk_numeric;
    cplx Hk_leading;
    double I_min;
    double I_max;
    double predicted_width; // peak-to-peak of ζ₀ + H w^n + H̄ w^{−n}: 4|H|
    double threshold;
    bool nonconstant;
    double max_residual;
    int grid_size;
};

struct ObstructionReport {
    std::vector<ObstructionEntry> entries;
    std::size_t nonconstant_count = 0;

    std::string conclusion() const {
        if (nonconstant_count == 0) {
            return "no nonconstant interval found; no divergence witness at the scanned scales";
        }
        return std::to_string(nonconstant_count) + " of " + std::to_string(entries.size()) +
               " scales carry a periodic-point curve of nonconstant modulus; persistence at infinitely many "
               "scales is incompatible with a convergent normalization";
    }
};

struct WitnessOptions {
    int min_grid = 64;
    double solver_tolerance = 1e-13;
};

// For each scheduled n: the j = 2s curve on |w| = 1, I = [min|ζ|, max|ζ|], and the Laurent coefficient at w^n.
template <class Map>
ObstructionReport divergence_witness_with(const Map &map, const CoefficientFamily &a, int s,
                                          const std::vector<ResonanceData> &schedule, const TwistParams &tp, double c2,
                                          const WitnessOptions &opt = {}) {
    ObstructionReport rep;
    for (const ResonanceData &res : schedule) {
        const CurveDomain dom = compute_constants(tp, res.n, c2);
        int grid = opt.min_grid;
        while (grid < 4 * res.n) {
            grid *= 2;
        }
        const int K = grid / 2 - 1;
        const PeriodicCurve c = periodic_curve_with(map, s, res, dom, 2 * s, grid, K);
        ObstructionEntry e{};
        e.n = res.n;
        e.beta = res.beta;
        e.grid_size = grid;
        e.Hk_numeric = laurent_coefficient(c.samples, static_cast<int>(res.n));
        e.Hk_leading = leading_H(a, s, res);
        e.I_min = std::numeric_limits<double>::infinity();
        e.I_max = 0.0;
        for (const CurveSample &smp : c.samples) {
            e.I_min = std::min(e.I_min, std::abs(smp.zeta));
            e.I_max = std::max(e.I_max, std::abs(smp.zeta));
        }
        // Aliasing estimate from the top quarter of resolved modes.
        double alias = 0.0;
        for (int k = (3 * K) / 4; k <= K; ++k) {
            alias = std::max({alias, std::abs(c.laurent_coefficient(k)), std::abs(c.laurent_coefficient(-k))});
        }
        e.threshold = 10.0 * (opt.solver_tolerance + alias);
        e.nonconstant = e.I_max - e.I_min > e.threshold;
        e.predicted_width = 4.0 * std::abs(e.Hk_leading);
        e.max_residual = c.max_residual;
        rep.nonconstant_count += e.nonconstant ? 1 : 0;
        rep.entries.push_back(e);
    }
    return rep;
}

inline ObstructionReport divergence_witness(const TwistMap &map, const std::vector<ResonanceData> &schedule, double c2,
                                            const WitnessOptions &opt = {}) {
    return divergence_witness_with(map, map.family(), map.params().s, schedule, map.params(), c2, opt);
}

} // namespace revmap
