#pragma once

// Hyperbolic complex tangents: the Bishop invariant γ, the involution pair
//   τ₁ = φ_a∘T₁∘φ_a⁻¹,  T₁(ξ,η) = (e^{iω/2}η, e^{−iω/2}ξ),  τ₂ = ρτ₁ρ,  ρ(ξ,η) = (ξ̄, η̄),
// the periodic-point curves of φ = τ₁τ₂ and their intersection with the totally real space ξ, η ∈ ℝ.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "family.hpp"
#include "normal_form.hpp"
#include "series.hpp"
#include "twist.hpp"

namespace revmap {

struct BishopData {
    double gamma;
    cplx lambda;
    bool exceptional;
    int order; // witnessing k when exceptional, else the scanned bound
};

struct RootOfUnity {
    bool found;
    int k; // smallest k with |λ^k − 1| < 1e−10, or max_order when none
};

inline RootOfUnity is_exceptional(cplx lambda, int max_order = 64) {
    if (std::abs(std::abs(lambda) - 1.0) > 1e-10) {
        throw invalid_input("is_exceptional: lambda is not on the unit circle");
    }
    cplx p{1.0, 0.0};
    for (int k = 1; k <= max_order; ++k) {
        p *= lambda;
        if (std::abs(p - 1.0) < 1e-10) {
            return {true, k};
        }
    }
    return {false, max_order};
}

// Root of γλ² − λ + γ = 0 with Im λ > 0, for hyperbolic γ > 1/2.
inline BishopData lambda_from_gamma(double gamma, int max_order = 64) {
    if (!(gamma > 0.5) || !std::isfinite(gamma)) {
        throw invalid_input("lambda_from_gamma: only hyperbolic gamma > 1/2 is supported");
    }
    const cplx lambda = cplx{1.0, std::sqrt(4.0 * gamma * gamma - 1.0)} / (2.0 * gamma);
    const RootOfUnity r = is_exceptional(lambda, max_order);
    return {gamma, lambda, r.found, r.k};
}

// Rotation angle of φ = τ₁τ₂ for the eigenvalue λ of τ₁: α = 2 arg λ.
inline double alpha_from_lambda(cplx lambda) { return 2.0 * std::arg(lambda); }

class SurfaceMap {
public:
    using Step = TwistMap::Step;

    SurfaceMap(CoefficientFamily a, TwistParams tp) : inner_(std::move(a), tp) {}

    const CoefficientFamily &family() const noexcept { return inner_.family(); }
    const TwistParams &params() const noexcept { return inner_.params(); }

    point2 tau1(point2 p) const {
        const cplx th = half_omega(p) + extra(p[0], p[1]);
        return guard({p[1] * std::exp(I * th), p[0] * std::exp(-I * th)});
    }

    point2 tau2(point2 p) const {
        const point2 q = tau1({std::conj(p[0]), std::conj(p[1])});
        return {std::conj(q[0]), std::conj(q[1])};
    }

    // φ = τ₁τ₂ with ξ′ = ξe^{i(ω+D)}, η′ = ηe^{−i(ω+D)}.
    Step advance(point2 p) const {
        const cplx e2 = std::conj(extra(std::conj(p[0]), std::conj(p[1])));
        const cplx th2 = -half_omega(p) - e2;
        const point2 q = guard({p[1] * std::exp(I * th2), p[0] * std::exp(-I * th2)});
        const cplx e1 = extra(q[0], q[1]);
        const cplx th1 = half_omega(q) + e1;
        return {guard({q[1] * std::exp(I * th1), q[0] * std::exp(-I * th1)}), e1 + e2};
    }

    point2 operator()(point2 p) const { return advance(p).point; }

    point2 inverse(point2 p) const { return tau2(tau1(p)); }

private:
    cplx half_omega(const point2 &p) const { return 0.5 * inner_.params().omega(p[0] * p[1]); }

    // Phase added by conjugating T₁ with φ_a: b + ã(X, Y) where φ_a⁻¹(x,y) = (xe^{−ib}, ye^{ib}).
    cplx extra(cplx x, cplx y) const {
        const CoefficientFamily &a = inner_.family();
        if (a.empty()) {
            return {};
        }
        const cplx b = inner_.inverse_phase(x, y);
        const cplx hw = half_omega({x, y});
        const cplx X = std::exp(I * hw) * y * std::exp(I * b);
        const cplx Y = std::exp(-I * hw) * x * std::exp(-I * b);
        return b + a.evaluate(X, Y);
    }

    static point2 guard(point2 p) {
        if (!(std::abs(p[0]) < 1.0 && std::abs(p[1]) < 1.0)) {
            throw hypothesis_violation("SurfaceMap: orbit left the unit polydisc");
        }
        return p;
    }

    TwistMap inner_;
};

// Jets of τ₁ and τ₂ through the given order.
inline MapJet surface_tau1_jet(const CoefficientFamily &a, const TwistParams &tp, int order) {
    const Jet t = Jet::xi(order) * Jet::eta(order);
    Jet ts = Jet::constant(order, 1.0);
    for (int k = 0; k < tp.s; ++k) {
        ts = ts * t;
    }
    const Jet half = ts * 0.5;
    const MapJet T1{jet_exp_i(half) * std::polar(1.0, tp.alpha / 2.0) * Jet::eta(order),
                    jet_exp_i(-half) * std::polar(1.0, -tp.alpha / 2.0) * Jet::xi(order)};
    const MapJet Pa = perturbation_jet(a, order);
    return compose(Pa, compose(T1, map_inverse(Pa)));
}

inline InvolutionPair surface_pair_jet(const CoefficientFamily &a, const TwistParams &tp, int order) {
    const MapJet t1 = surface_tau1_jet(a, tp, order);
    return {t1, rho_conjugate(t1, RhoKind::surface)};
}

// (ε, s) of φ = τ₁τ₂ read from the normalized pair.
inline EpsS surface_invariants(const CoefficientFamily &a, const TwistParams &tp, int order) {
    const MoserWebsterForm mw = mw_normalize(surface_pair_jet(a, tp, order), order);
    return extract_eps_s(gamma_from_M(mw.M));
}

struct RealPoint {
    cplx w;
    cplx zeta;
};

struct RealIntersection {
    std::vector<RealPoint> points;      // isolated crossings
    std::array<bool, 4> ray_continuum{}; // w ∈ (0,∞), (0,−∞), i(0,∞), −i(0,∞) lying entirely in ℝ²
    bool continuum = false;
    double max_defect = 0.0; // largest |Im ξ|, |Im η| seen along the rays

    std::size_t count() const { return points.size(); }
};

struct IntersectionOptions {
    int samples = 256;      // per ray on |w| ∈ [w_min, w_max]
    double w_min = 0.55;
    double w_max = 1.8;
    double tol = 1e-12;     // relative to |ζ|
};

// ξ = ζw, η = ζ/w are both real iff w² is real and ζ is real (w real) or imaginary (w imaginary),
// so the search runs along the four half-axes of w.
template <class Map>
RealIntersection real_intersection_with(const Map &map, int s, const ResonanceData &res, const CurveDomain &dom, int j,
                                        const IntersectionOptions &opt = {}) {
    if (opt.samples < 2) {
        throw invalid_input("real_intersection: need at least two samples per ray");
    }
    RealIntersection out;
    const std::array<cplx, 4> dirs{cplx{1.0, 0.0}, cplx{-1.0, 0.0}, I, -I};
    for (std::size_t r = 0; r < dirs.size(); ++r) {
        const cplx dir = dirs[r];
        // Signed defect: Im ζ on the real rays, Re ζ on the imaginary rays.
        auto defect = [&](double v, cplx &zeta) {
            zeta = solve_branch_with(map, s, res, dom, j, dir * v).zeta;
            return r < 2 ? zeta.imag() : zeta.real();
        };
        const double ratio = std::pow(opt.w_max / opt.w_min, 1.0 / (opt.samples - 1));
        std::vector<double> vs(static_cast<std::size_t>(opt.samples));
        std::vector<double> fs(vs.size());
        std::vector<cplx> zs(vs.size());
        bool all_small = true;
        for (std::size_t m = 0; m < vs.size(); ++m) {
            vs[m] = opt.w_min * std::pow(ratio, static_cast<double>(m));
            fs[m] = defect(vs[m], zs[m]);
            const double scale = std::abs(zs[m]);
            out.max_defect = std::max(out.max_defect, std::abs(fs[m]));
            all_small = all_small && std::abs(fs[m]) <= opt.tol * scale;
        }
        if (all_small) {
            out.ray_continuum[r] = true;
            out.continuum = true;
            continue;
        }
        for (std::size_t m = 0; m < vs.size(); ++m) {
            const double scale = opt.tol * std::abs(zs[m]);
            if (std::abs(fs[m]) <= scale) {
                // A sample on the real set; keep it only if its neighbours are not.
                const bool left = m > 0 && std::abs(fs[m - 1]) <= opt.tol * std::abs(zs[m - 1]);
                if (!left) {
                    out.points.push_back({dir * vs[m], zs[m]});
                }
                continue;
            }
            if (m + 1 < vs.size() && std::abs(fs[m + 1]) > opt.tol * std::abs(zs[m + 1]) &&
                std::signbit(fs[m]) != std::signbit(fs[m + 1])) {
                double lo = vs[m], hi = vs[m + 1], flo = fs[m];
                cplx z{};
                for (int it = 0; it < 60 && hi - lo > 1e-15 * hi; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = defect(mid, z);
                    if (std::signbit(fm) == std::signbit(flo)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                const double v = 0.5 * (lo + hi);
                defect(v, z);
                out.points.push_back({dir * v, z});
            }
        }
    }
    return out;
}

inline RealIntersection real_intersection(const SurfaceMap &map, const ResonanceData &res, const CurveDomain &dom,
                                          int j, const IntersectionOptions &opt = {}) {
    return real_intersection_with(map, map.params().s, res, dom, j, opt);
}

struct SurfaceCurve {
    PeriodicCurve curve;
    RealIntersection real;
};

inline SurfaceCurve surface_curves(const SurfaceMap &map, const ResonanceData &res, const CurveDomain &dom, int j,
                                   int grid_size, int K, const IntersectionOptions &opt = {}) {
    return {periodic_curve_with(map, map.params().s, res, dom, j, grid_size, K),
            real_intersection(map, res, dom, j, opt)};
}

// Quadratic response of the w^{2n} coefficient to a single mode ã = a_{n,0}ξⁿ:
//   Q ζ_{j,2n} ≈ A a² + B |a|² + C ā²,
// estimated from four phases a = t e^{iθ}, θ ∈ {0, π/4, π/2, 3π/4}, at t and t/2 with Richardson extrapolation.
struct QuadraticProbe {
    int j;
    cplx A, B, C;
    cplx K;             // i n ζ_j(0)^{2n−2s+1}/s, the predicted a² coefficient
    double relative_error; // |(A − C)/K − 1|
};

struct ProbeOptions {
    double t = 1e-3;
    int min_grid = 64;
};

inline QuadraticProbe q_zeta_probe(const TwistParams &tp, const ResonanceData &res, const CurveDomain &dom, int j,
                                   const ProbeOptions &opt = {}) {
    const int s = tp.s;
    if (res.n % (4 * s) != 0) {
        throw invalid_input("q_zeta_check: n must be divisible by 4s");
    }
    if (res.n > CoefficientFamily::max_exponent) {
        throw invalid_input("q_zeta_check: n exceeds the largest supported exponent");
    }
    const int n = static_cast<int>(res.n);
    int grid = opt.min_grid;
    while (grid < 4 * 2 * n) {
        grid *= 2;
    }
    auto coefficients = [&](double t) {
        std::array<cplx, 3> abc{};
        for (int k = 0; k < 4; ++k) {
            const double theta = k * std::numbers::pi / 4.0;
            CoefficientFamily fam(s, false);
            fam.set(n, 0, std::polar(t, theta));
            const SurfaceMap map(fam, tp);
            std::vector<CurveSample> samples;
            samples.reserve(static_cast<std::size_t>(grid));
            for (const cplx w : unit_circle_grid(grid)) {
                samples.push_back({w, solve_branch_with(map, s, res, dom, j, w).zeta, 0.0});
            }
            const cplx f = laurent_coefficient(samples, 2 * n) / (t * t);
            abc[0] += f * std::polar(1.0, -2.0 * theta) / 4.0;
            abc[1] += f / 4.0;
            abc[2] += f * std::polar(1.0, 2.0 * theta) / 4.0;
        }
        return abc;
    };
    const auto full = coefficients(2.0 * opt.t);
    const auto half = coefficients(opt.t);
    QuadraticProbe q{};
    q.j = j;
    q.A = 2.0 * half[0] - full[0];
    q.B = 2.0 * half[1] - full[1];
    q.C = 2.0 * half[2] - full[2];
    const cplx z0 = unperturbed_zeta(s, res.n, res.beta, j);
    q.K = I * static_cast<double>(n) * std::pow(z0, 2 * n - 2 * s + 1) / static_cast<double>(s);
    q.relative_error = std::abs((q.A - q.C) / q.K - 1.0);
    return q;
}

struct HnEstimate {
    cplx value;                 // Π_j (a² + ā² + 2 Re h_{n,j})
    std::vector<cplx> factors;  // one per branch j = 1..2s
    std::vector<QuadraticProbe> probes;
};

// h_{n,j}(a) = Qζ_{j,2n}/K_j − a², evaluated with the probed quadratic form at a = a_{n,0}.
inline HnEstimate Hn_obstruction(cplx a_n0, const TwistParams &tp, const ResonanceData &res, const CurveDomain &dom,
                                 const ProbeOptions &opt = {}) {
    HnEstimate out{cplx{1.0, 0.0}, {}, {}};
    if (a_n0 == cplx{}) {
        return {cplx{}, std::vector<cplx>(static_cast<std::size_t>(2 * tp.s)), {}};
    }
    for (int j = 1; j <= 2 * tp.s; ++j) {
        const QuadraticProbe q = q_zeta_probe(tp, res, dom, j, opt);
        const cplx a = a_n0, ab = std::conj(a_n0);
        const cplx h = (q.A * a * a + q.B * a * ab + q.C * ab * ab) / q.K - a * a;
        const cplx factor = a * a + ab * ab + 2.0 * h.real();
        out.factors.push_back(factor);
        out.probes.push_back(q);
        out.value *= factor;
    }
    return out;
}

} // namespace revmap
