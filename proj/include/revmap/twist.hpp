#pragma once

// Perturbed twist maps φ_a = P_a∘T∘τ∘P_a⁻¹∘τ in complexified coordinates, with
//   T(ξ,η)   = (e^{iω(ξη)}ξ, e^{−iω(ξη)}η),  ω(κ) = α + κ^s,
//   P_a(ξ,η) = (ξe^{iã(ξ,η)}, ηe^{−iã(ξ,η)}),  τ(ξ,η) = (η,ξ),
// and the periodic-point curves ξ = ζw, η = ζ/w of φ_a^n near the resonant circle.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "family.hpp"
#include "series.hpp"

namespace revmap {

using point2 = std::array<cplx, 2>;

struct TwistParams {
    double alpha; // rotation angle α (radians)
    int s;        // twist order
    double m0;    // bound on the perturbation
    double R;     // radius of convergence bound, 0 < R < 1

    void validate() const {
        if (s < 1) {
            throw invalid_input("TwistParams: s must be at least 1");
        }
        if (!(R > 0.0 && R < 1.0)) {
            throw invalid_input("TwistParams: R must lie in (0, 1)");
        }
        if (!(m0 > 0.0)) {
            throw invalid_input("TwistParams: m0 must be positive");
        }
        if (!std::isfinite(alpha)) {
            throw invalid_input("TwistParams: alpha must be finite");
        }
    }

    cplx omega(cplx kappa) const { return alpha + std::pow(kappa, s); }
};

struct ResonanceData {
    std::int64_t n;
    std::int64_t g;
    double beta;
    bool boundary; // |β| within 1e−14 of π: the sign of β is not determined
};

// nα = 2gπ + β with −π < β ≤ π, computed in extended precision.
inline ResonanceData beta_reduce(std::int64_t n, double alpha) {
    if (n < 1) {
        throw invalid_input("beta_reduce: n must be at least 1");
    }
    using ld = long double;
    const ld two_pi = 2.0L * std::numbers::pi_v<long double>;
    const ld x = static_cast<ld>(n) * static_cast<ld>(alpha);
    ld g = std::nearbyint(x / two_pi);
    ld beta = x - g * two_pi;
    if (beta <= -std::numbers::pi_v<long double>) {
        beta += two_pi;
        g -= 1.0L;
    } else if (beta > std::numbers::pi_v<long double>) {
        beta -= two_pi;
        g += 1.0L;
    }
    const double b = static_cast<double>(beta);
    return {n, static_cast<std::int64_t>(g), b, std::numbers::pi - std::abs(b) < 1e-14};
}

// Complexified φ_a with numeric (not truncated-series) evaluation.
class TwistMap {
public:
    struct Step {
        point2 point;
        cplx phase; // D with ξ' = ξe^{i(ω+D)}, η' = ηe^{−i(ω+D)}
    };

    TwistMap(CoefficientFamily a, TwistParams tp) : a_(std::move(a)), tp_(tp) {
        tp_.validate();
        if (a_.s() != tp_.s) {
            throw invalid_input("TwistMap: family and twist parameters disagree on s");
        }
    }

    const CoefficientFamily &family() const noexcept { return a_; }
    const TwistParams &params() const noexcept { return tp_; }

    // b with b = ã(e^{−ib}x, e^{ib}y), so that P_a⁻¹(x,y) = (xe^{−ib}, ye^{ib}).
    cplx inverse_phase(cplx x, cplx y) const {
        if (a_.empty()) {
            return {};
        }
        cplx b = a_.evaluate(x, y);
        for (int it = 0; it < 60; ++it) {
            const cplx e = std::exp(I * b);
            const cplx X = x / e, Y = y * e;
            const auto [f, fx, fy] = a_.evaluate_with_gradient(X, Y);
            const cplx F = b - f;
            const cplx dF = 1.0 - (fx * (-I) * X + fy * I * Y);
            const cplx step = F / dF;
            b -= step;
            if (std::abs(step) <= 1e-17 + 4e-16 * std::abs(b)) {
                return b;
            }
        }
        throw convergence_error("TwistMap: inverse of the perturbation did not converge", std::abs(b));
    }

    Step advance(point2 p) const {
        guard(p);
        const cplx x = p[0], y = p[1];
        const cplx om = tp_.omega(x * y);
        const cplx b = inverse_phase(y, x);
        const cplx th = om + b;
        const cplx x2 = x * std::exp(I * th), y2 = y * std::exp(-I * th);
        const cplx c = a_.empty() ? cplx{} : a_.evaluate(x2, y2);
        const point2 out{x2 * std::exp(I * c), y2 * std::exp(-I * c)};
        guard(out);
        return {out, b + c};
    }

    point2 operator()(point2 p) const { return advance(p).point; }

    // φ_a⁻¹ = τ∘P_a∘τ∘T⁻¹∘P_a⁻¹
    point2 inverse(point2 p) const {
        guard(p);
        const cplx c = inverse_phase(p[0], p[1]);
        const cplx x1 = p[0] * std::exp(-I * c), y1 = p[1] * std::exp(I * c);
        const cplx om = tp_.omega(x1 * y1);
        const cplx x2 = x1 * std::exp(-I * om), y2 = y1 * std::exp(I * om);
        const cplx d = a_.empty() ? cplx{} : a_.evaluate(y2, x2);
        const point2 out{x2 * std::exp(-I * d), y2 * std::exp(I * d)};
        guard(out);
        return out;
    }

private:
    static void guard(const point2 &p) {
        if (!(std::abs(p[0]) < 1.0 && std::abs(p[1]) < 1.0)) {
            throw hypothesis_violation("TwistMap: orbit left the unit polydisc");
        }
    }

    CoefficientFamily a_;
    TwistParams tp_;
};

// Unperturbed twist (e^{iω}ξ, e^{−iω}η).
inline point2 twist_eval(const TwistParams &tp, point2 p) {
    const cplx om = tp.omega(p[0] * p[1]);
    return {p[0] * std::exp(I * om), p[1] * std::exp(-I * om)};
}

// n-fold composition of any point map.
template <class Map>
point2 iterate(const Map &map, std::int64_t n, point2 p) {
    if (n < 1) {
        throw invalid_input("iterate: n must be at least 1");
    }
    for (std::int64_t k = 0; k < n; ++k) {
        p = map(p);
    }
    return p;
}

struct Orbit {
    point2 end;
    cplx phase_sum; // Σ D over the n steps
};

// Any map exposing advance(point) -> {point, phase}.
template <class Map>
Orbit orbit(const Map &map, std::int64_t n, point2 p) {
    cplx sum{};
    for (std::int64_t k = 0; k < n; ++k) {
        const auto st = map.advance(p);
        p = st.point;
        sum += st.phase;
    }
    return {p, sum};
}

// Jets of T and φ_a through the given order.
inline MapJet twist_jet(const TwistParams &tp, int order) {
    const Jet t = Jet::xi(order) * Jet::eta(order);
    Jet ts = Jet::constant(order, 1.0);
    for (int k = 0; k < tp.s; ++k) {
        ts = ts * t;
    }
    return {jet_exp_i(ts) * std::polar(1.0, tp.alpha) * Jet::xi(order),
            jet_exp_i(-ts) * std::polar(1.0, -tp.alpha) * Jet::eta(order)};
}

inline MapJet perturbation_jet(const CoefficientFamily &a, int order) {
    const Jet at = a.to_jet(order);
    return {Jet::xi(order) * jet_exp_i(at), Jet::eta(order) * jet_exp_i(-at)};
}

inline MapJet varphi_jet(const CoefficientFamily &a, const TwistParams &tp, int order) {
    const MapJet Pa = perturbation_jet(a, order);
    const MapJet S = MapJet::swap(order);
    return compose(Pa, compose(twist_jet(tp, order), compose(S, compose(map_inverse(Pa), S))));
}

struct CurveDomain {
    std::int64_t n;
    double d0;
    double epsilon0; // = c₂
    double delta;    // (c₂/4)^{2s}
    double r0;       // c₂ n^{−1/(2s)}/2
    bool r0_below_half_d0;
};

// d₀ = min{R^{2s+1}/(2^{6s+6} m₀), (1/(2n))^{1/(2s)}, R/16}
inline double compute_d0(const TwistParams &tp, std::int64_t n) {
    const int s = tp.s;
    const double t1 = std::pow(tp.R, 2 * s + 1) / (std::ldexp(1.0, 6 * s + 6) * tp.m0);
    const double t2 = std::pow(1.0 / (2.0 * static_cast<double>(n)), 1.0 / (2.0 * s));
    return std::min({t1, t2, tp.R / 16.0});
}

// Worst-case family of the calibration: a_{ij} = min(m₀, 1) for 2s < i+j ≤ 2s+4.
inline CoefficientFamily calibration_family(const TwistParams &tp) {
    CoefficientFamily fam(tp.s, false);
    const double v = std::min(tp.m0, 1.0);
    for (int d = 2 * tp.s + 1; d <= 2 * tp.s + 4; ++d) {
        for (int i = 0; i <= d; ++i) {
            fam.set(i, d - i, v);
        }
    }
    return fam;
}

struct HValue {
    cplx h;
    cplx pn;          // p_n = e^{iΣD} − 1
    double residual;  // max |φⁿ(p) − p| over the two coordinates
};

// h(ζ,w) = log(1 + p_n(ζw, ζ/w)) / (i n ζ^{2s}) on the principal branch.
template <class Map>
HValue h_eval_with(const Map &map, int s, std::int64_t n, cplx zeta, cplx w) {
    if (zeta == cplx{}) {
        throw invalid_input("h_eval: zeta must be nonzero");
    }
    const point2 p{zeta * w, zeta / w};
    const Orbit o = orbit(map, n, p);
    const cplx pn = std::exp(I * o.phase_sum) - 1.0;
    if (std::abs(pn) > 0.5) {
        throw hypothesis_violation("h_eval: |p_n| > 1/2, point outside the validated region");
    }
    // log(e^{iΣD}) on the principal branch: shift Re ΣD into (−π, π].
    const double two_pi = 2.0 * std::numbers::pi;
    const cplx wrapped = o.phase_sum - two_pi * std::round(o.phase_sum.real() / two_pi);
    const cplx h = wrapped / (static_cast<double>(n) * std::pow(zeta, 2 * s));
    const double res = std::max(std::abs(o.end[0] - p[0]), std::abs(o.end[1] - p[1]));
    return {h, pn, res};
}

inline HValue h_eval(const TwistMap &map, std::int64_t n, cplx zeta, cplx w) {
    return h_eval_with(map, map.params().s, n, zeta, w);
}

// Largest c₂ = 2^{−k} < R with |h| ≤ 1/4 and |p_n| ≤ 1/2 over the calibration lattice.
inline double calibrate_c2(const TwistParams &tp) {
    tp.validate();
    const TwistMap map(calibration_family(tp), tp);
    const double two_pi = 2.0 * std::numbers::pi;
    auto passes = [&](double c2) {
        for (std::int64_t n = 1; n <= 64; n *= 2) {
            const double r0 = c2 * std::pow(static_cast<double>(n), -1.0 / (2.0 * tp.s)) / 2.0;
            for (double fz : {0.25, 0.5, 0.75, 0.99}) {
                for (int az = 0; az < 4; ++az) {
                    const cplx zeta = std::polar(fz * r0, two_pi * (az + 0.5) / 4.0);
                    for (double fw : {0.55, 1.0, 1.8}) {
                        for (int aw = 0; aw < 4; ++aw) {
                            const cplx w = std::polar(fw, two_pi * aw / 4.0);
                            try {
                                const HValue hv = h_eval(map, n, zeta, w);
                                if (std::abs(hv.h) > 0.25) {
                                    return false;
                                }
                            } catch (const error &) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        return true;
    };
    for (int k = 0; k <= 40; ++k) {
        const double c2 = std::ldexp(1.0, -k);
        if (c2 < tp.R && passes(c2)) {
            return c2;
        }
    }
    throw convergence_error("calibrate_c2: no candidate passed the validation lattice", 0.0);
}

inline CurveDomain compute_constants(const TwistParams &tp, std::int64_t n, double c2) {
    if (n < 1) {
        throw invalid_input("compute_constants: n must be at least 1");
    }
    const double d0 = compute_d0(tp, n);
    const double delta = std::pow(c2 / 4.0, 2 * tp.s);
    const double r0 = c2 * std::pow(static_cast<double>(n), -1.0 / (2.0 * tp.s)) / 2.0;
    return {n, d0, c2, delta, r0, r0 < d0 / 2.0};
}

inline CurveDomain compute_constants(const TwistParams &tp, std::int64_t n) {
    return compute_constants(tp, n, calibrate_c2(tp));
}

struct MajorantReport {
    std::int64_t n;
    double d0;
    std::vector<double> f;   // f_k(d₀, d₀), k = 0..K
    std::int64_t violations; // count of k with f_k > k/(4n)
};

// f_{k+1} = f_k + (m₀/R^{2s+1}) (2d₀)^{2s+1} e^{k(2s+1)d₀^{2s}} (1−f_k)^{−2s−2}
//                 / (1 − (2d₀/R) e^{k d₀^{2s}} (1−f_k)^{−1}),  evaluated at ξ = η = d₀.
inline MajorantReport majorant_sequence(const TwistParams &tp, std::int64_t n, std::int64_t K) {
    tp.validate();
    if (K > n || K < 0) {
        throw invalid_input("majorant_sequence: need 0 <= K <= n");
    }
    const int s = tp.s;
    const double d0 = compute_d0(tp, n);
    const double d2s = std::pow(d0, 2 * s);
    const double pref = tp.m0 / std::pow(tp.R, 2 * s + 1) * std::pow(2.0 * d0, 2 * s + 1);
    MajorantReport rep{n, d0, {0.0}, 0};
    rep.f.reserve(static_cast<std::size_t>(K) + 1);
    double f = 0.0;
    for (std::int64_t k = 0; k < K; ++k) {
        const double kk = static_cast<double>(k);
        const double denom = 1.0 - (2.0 * d0 / tp.R) * std::exp(kk * d2s) / (1.0 - f);
        if (!(f < 1.0) || !(denom > 0.0)) {
            throw convergence_error("majorant_sequence: recursion left its domain of convergence", f);
        }
        f += pref * std::exp(kk * (2 * s + 1) * d2s) * std::pow(1.0 - f, -2.0 * s - 2.0) / denom;
        rep.f.push_back(f);
        if (f > static_cast<double>(k + 1) / (4.0 * static_cast<double>(n))) {
            ++rep.violations;
        }
    }
    return rep;
}

struct BranchSolution {
    cplx zeta;
    double equation_residual; // |ζ(1+h)^{1/(2s)} − e^{ijπ/s}(−β/n)^{1/(2s)}|
    double return_residual;   // max |φⁿ(p) − p|
    int iterations;
};

struct SolverOptions {
    double tolerance = 1e-13;
    int max_iterations = 50;
    double return_tolerance = 1e-10;
};

// e^{ijπ/s}(−β/n)^{1/(2s)}
inline cplx unperturbed_zeta(int s, std::int64_t n, double beta, int j) {
    return std::polar(std::pow(-beta / static_cast<double>(n), 1.0 / (2.0 * s)), j * std::numbers::pi / s);
}

// Solves ζ(1 + h(ζ,w))^{1/(2s)} = e^{ijπ/s}(−β/n)^{1/(2s)} for any map with advance().
template <class Map>
BranchSolution solve_branch_with(const Map &map, int s, const ResonanceData &res, const CurveDomain &dom, int j,
                                 cplx w, const SolverOptions &opt = {}) {
    if (j < 1 || j > 2 * s) {
        throw invalid_input("solve_branch: branch index j must lie in 1..2s");
    }
    if (!(res.beta < 0.0 && res.beta > -dom.delta)) {
        throw hypothesis_violation("solve_branch: beta = " + std::to_string(res.beta) +
                                   " violates -delta < beta < 0 (delta = " + std::to_string(dom.delta) + ")");
    }
    if (!(std::abs(w) > 0.5 && std::abs(w) < 2.0)) {
        throw invalid_input("solve_branch: need 1/2 < |w| < 2");
    }
    const std::int64_t n = res.n;
    const cplx rhs = unperturbed_zeta(s, n, res.beta, j);
    const double root = 1.0 / (2.0 * s);
    auto F = [&](cplx z, HValue &hv) {
        hv = h_eval_with(map, s, n, z, w);
        return z * std::pow(1.0 + hv.h, root) - rhs;
    };

    cplx zeta = rhs;
    HValue hv{};
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        hv = h_eval_with(map, s, n, zeta, w);
        const cplx next = rhs * std::pow(1.0 + hv.h, -root);
        const double step = std::abs(next - zeta);
        zeta = next;
        if (step <= 1e-16 * std::abs(zeta)) {
            break;
        }
    }
    // Newton polish with a finite-difference derivative; kept only if it lowers the residual.
    double resid = std::abs(F(zeta, hv));
    if (resid > 0.0) {
        HValue tmp{};
        const cplx dz = 1e-7 * std::abs(zeta);
        const cplx deriv = (F(zeta + dz, tmp) - (zeta * std::pow(1.0 + hv.h, root) - rhs)) / dz;
        const cplx cand = zeta - (zeta * std::pow(1.0 + hv.h, root) - rhs) / deriv;
        const double cand_res = std::abs(F(cand, tmp));
        if (cand_res < resid) {
            zeta = cand;
            resid = cand_res;
            hv = tmp;
        }
    }
    if (resid > opt.tolerance) {
        throw convergence_error("solve_branch: no convergence at w = (" + std::to_string(w.real()) + ", " +
                                    std::to_string(w.imag()) + ")",
                                resid);
    }
    if (std::abs(zeta) >= dom.r0) {
        throw hypothesis_violation("solve_branch: solution left the disk |zeta| < r0");
    }
    return {zeta, resid, hv.residual, it + 1};
}

inline BranchSolution solve_branch(const TwistMap &map, const ResonanceData &res, const CurveDomain &dom, int j,
                                   cplx w, const SolverOptions &opt = {}) {
    return solve_branch_with(map, map.params().s, res, dom, j, w, opt);
}

struct CurveSample {
    cplx w;
    cplx zeta;
    double residual; // n-step return residual
};

struct PeriodicCurve {
    std::int64_t n;
    int j;
    std::vector<CurveSample> samples;
    int K;                     // laurent[k + K] is the coefficient of w^k
    std::vector<cplx> laurent;
    double max_residual;

    cplx laurent_coefficient(int k) const {
        return k >= -K && k <= K ? laurent[static_cast<std::size_t>(k + K)] : cplx{};
    }
};

// (1/G) Σ_m ζ(w_m) w_m^{−k} over the uniform grid w_m = e^{2πim/G}.
inline cplx laurent_coefficient(const std::vector<CurveSample> &samples, int k) {
    const std::size_t G = samples.size();
    cplx sum{};
    for (std::size_t m = 0; m < G; ++m) {
        const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) *
                           static_cast<double>(static_cast<std::int64_t>(m) % static_cast<std::int64_t>(G)) /
                           static_cast<double>(G);
        sum += samples[m].zeta * std::polar(1.0, ang);
    }
    return sum / static_cast<double>(G);
}

inline std::vector<cplx> unit_circle_grid(int G) {
    std::vector<cplx> w(static_cast<std::size_t>(G));
    for (int m = 0; m < G; ++m) {
        w[static_cast<std::size_t>(m)] = std::polar(1.0, 2.0 * std::numbers::pi * m / G);
    }
    return w;
}

template <class Map>
PeriodicCurve periodic_curve_with(const Map &map, int s, const ResonanceData &res, const CurveDomain &dom, int j,
                                  int grid_size, int K, const SolverOptions &opt = {}) {
    if (grid_size < 2 * K + 1) {
        throw invalid_input("periodic_curve: grid size must be at least 2K+1");
    }
    PeriodicCurve c{res.n, j, {}, K, {}, 0.0};
    c.samples.reserve(static_cast<std::size_t>(grid_size));
    for (const cplx w : unit_circle_grid(grid_size)) {
        const BranchSolution b = solve_branch_with(map, s, res, dom, j, w, opt);
        c.samples.push_back({w, b.zeta, b.return_residual});
        c.max_residual = std::max(c.max_residual, b.return_residual);
    }
    c.laurent.resize(static_cast<std::size_t>(2 * K + 1));
    for (int k = -K; k <= K; ++k) {
        c.laurent[static_cast<std::size_t>(k + K)] = laurent_coefficient(c.samples, k);
    }
    return c;
}

inline PeriodicCurve periodic_curve(const TwistMap &map, const ResonanceData &res, const CurveDomain &dom, int j,
                                    int grid_size, int K, const SolverOptions &opt = {}) {
    return periodic_curve_with(map, map.params().s, res, dom, j, grid_size, K, opt);
}

} // namespace revmap
