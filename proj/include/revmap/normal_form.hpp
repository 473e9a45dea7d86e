#pragma once

// Formal normal forms of reversible maps: a pair of involutions is conjugated to
// τ_j = (Λ_j(ξη)η, Λ_j⁻¹(ξη)ξ), and φ = τ₁τ₂ to ξ ↦ λξ e^{iε(ξη)^s}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "error.hpp"
#include "series.hpp"

namespace revmap {

// s marker for ε = 0 (the rotation does not depend on ξη to any order).
inline constexpr int infinite_order = std::numeric_limits<int>::max();

// c(P) for a one-variable series c and a jet P with zero constant term.
inline Jet apply_series(const SeriesOneVar &c, const Jet &p) {
    const int n = p.order();
    Jet r = Jet::constant(n, c[c.order()]);
    for (int k = c.order() - 1; k >= 0; --k) {
        r = r * p + Jet::constant(n, c[k]);
    }
    return r;
}

// (c(ξη)ξ, d(ξη)η)
inline MapJet diagonal_product_map(const SeriesOneVar &c, const SeriesOneVar &d, int order) {
    const Jet t = Jet::xi(order) * Jet::eta(order);
    return {apply_series(c, t) * Jet::xi(order), apply_series(d, t) * Jet::eta(order)};
}

// (c(ξη)η, d(ξη)ξ)
inline MapJet antidiagonal_product_map(const SeriesOneVar &c, const SeriesOneVar &d, int order) {
    const Jet t = Jet::xi(order) * Jet::eta(order);
    return {apply_series(c, t) * Jet::eta(order), apply_series(d, t) * Jet::xi(order)};
}

// Highest power of t = ξη that a degree-N jet can carry in a term t^k ξ.
inline int product_order(int order) { return std::max((order - 1) / 2, 0); }

// Maximum coefficient modulus scale used for relative tolerances.
inline double coefficient_scale(const MapJet &m) { return std::max(1.0, m.max_abs()); }

struct InvolutionPair {
    MapJet tau1;
    MapJet tau2;
    cplx lambda1;
    cplx lambda2;

    // Validates τ_j∘τ_j = id and the linear form ξ → λ_jη, η → λ_j⁻¹ξ.
    InvolutionPair(MapJet t1, MapJet t2) : tau1(std::move(t1)), tau2(std::move(t2)) {
        if (tau1.order() != tau2.order()) {
            throw invalid_input("InvolutionPair: truncation orders differ");
        }
        lambda1 = check(tau1, "tau1");
        lambda2 = check(tau2, "tau2");
    }

    int order() const { return tau1.order(); }

private:
    static cplx check(const MapJet &t, const char *name) {
        const auto [a, b, c, d] = t.linear_part();
        const double scale = coefficient_scale(t);
        if (std::abs(a) > 1e-10 * scale || std::abs(d) > 1e-10 * scale || std::abs(b * c - 1.0) > 1e-10 ||
            std::abs(std::abs(b) - 1.0) > 1e-10) {
            throw hypothesis_violation(std::string("InvolutionPair: ") + name +
                                       " linear part is not (lambda eta, lambda^-1 xi) with |lambda| = 1");
        }
        if (!t.fixes_origin()) {
            throw hypothesis_violation(std::string("InvolutionPair: ") + name + " does not fix the origin");
        }
        const double res = max_abs_diff(compose(t, t), MapJet::identity(t.order()));
        if (res > 1e-10 * scale) {
            throw hypothesis_violation(std::string("InvolutionPair: ") + name + " is not an involution (residual " +
                                       std::to_string(res) + ")");
        }
        return b;
    }
};

struct Linearization {
    MapJet change;   // C
    MapJet tau_std;  // CτC⁻¹, equal to (η, ξ) through the truncation order
    cplx lambda0;
    double residual; // max coefficient of CτC⁻¹ − (η, ξ)
};

// Conjugates an involution with linear part (λ₀η, λ̄₀ξ) to (η, ξ) by
// ξ' = λ₀^{−1/2}(ξ + λ₀·τ₂)/2, η' = λ₀^{1/2}(η + λ̄₀·τ₁)/2.
inline Linearization linearize_involution(const MapJet &tau) {
    const int n = tau.order();
    if (!tau.fixes_origin()) {
        throw hypothesis_violation("linearize_involution: tau does not fix the origin");
    }
    const double scale = coefficient_scale(tau);
    const auto [a, b, c, d] = tau.linear_part();
    if (std::abs(a) > 1e-10 * scale || std::abs(d) > 1e-10 * scale) {
        throw hypothesis_violation("linearize_involution: linear part is not antidiagonal");
    }
    const cplx l0 = b;
    if (std::abs(std::abs(l0) - 1.0) > 1e-10 || std::abs(c - std::conj(l0)) > 1e-10) {
        throw hypothesis_violation("linearize_involution: linear part is not (lambda0 eta, conj(lambda0) xi) "
                                   "with |lambda0| = 1");
    }
    const double inv_res = max_abs_diff(compose(tau, tau), MapJet::identity(n));
    if (inv_res > 1e-10 * scale) {
        throw hypothesis_violation("linearize_involution: tau is not an involution (residual " +
                                   std::to_string(inv_res) + ")");
    }
    const cplx root = std::sqrt(l0);
    const MapJet change{(Jet::xi(n) + tau.eta() * l0) * (0.5 / root),
                        (Jet::eta(n) + tau.xi() * std::conj(l0)) * (0.5 * root)};
    MapJet tau_std = compose(change, compose(tau, map_inverse(change)));
    const double res = max_abs_diff(tau_std, MapJet::swap(n));
    if (res > 1e-9 * scale) {
        throw hypothesis_violation("linearize_involution: conjugated involution differs from (eta, xi) by " +
                                   std::to_string(res));
    }
    return {change, tau_std, l0, res};
}

enum class SweepOrder {
    by_degree,    // solve degree 2, then 3, ... each against the completed lower degrees
    simultaneous, // update a growing band of degrees at once from the full residual, one degree ahead
};

struct MoserWebsterForm {
    MapJet Phi0;
    SeriesOneVar M;
    SeriesOneVar Lambda1;
    SeriesOneVar Lambda2;
    double conjugation_residual; // Φ₀φΦ₀⁻¹ against (Mξ, M⁻¹η)
    double involution_residual;  // Φ₀τ_jΦ₀⁻¹ against (Λ_jη, Λ_j⁻¹ξ), max over j
};

// min |μ^k − 1| over 1 ≤ k ≤ N
inline double min_small_divisor(cplx mu, int order) {
    double m = std::numeric_limits<double>::infinity();
    cplx p = 1.0;
    for (int k = 1; k <= order; ++k) {
        p *= mu;
        m = std::min(m, std::abs(p - 1.0));
    }
    return m;
}

// Throws resonance_error at the first k ≤ N with |μ^k − 1| < 1e−8.
inline void check_nonresonant(cplx mu, int order) {
    cplx p = 1.0;
    for (int k = 1; k <= order; ++k) {
        p *= mu;
        const double div = std::abs(p - 1.0);
        if (div < 1e-8) {
            throw resonance_error(k, div);
        }
    }
}

inline MoserWebsterForm mw_normalize(const InvolutionPair &pair, int order, SweepOrder sweep = SweepOrder::by_degree) {
    const int n = order;
    const MapJet t1 = pair.tau1.with_order(n);
    const MapJet t2 = pair.tau2.with_order(n);
    const MapJet phi = compose(t1, t2);
    const cplx mu = pair.lambda1 / pair.lambda2;
    check_nonresonant(mu, n);

    const int kt = product_order(n);
    SeriesOneVar M = SeriesOneVar::constant(kt, mu);
    SeriesOneVar Ninv = SeriesOneVar::constant(kt, 1.0 / mu);
    Jet u(n), v(n);

    auto residual = [&]() {
        const MapJet Phi{Jet::xi(n) + u, Jet::eta(n) + v};
        const Jet t = Phi.xi() * Phi.eta();
        const MapJet lhs = compose(Phi, phi);
        return MapJet{lhs.xi() - apply_series(M, t) * Phi.xi(), lhs.eta() - apply_series(Ninv, t) * Phi.eta()};
    };
    // Degree-d homological equations; corrections are added to the current unknowns.
    auto solve_degree = [&](const MapJet &E, int d) {
        for (int j = 0; j <= d; ++j) {
            const int i = d - j;
            const cplx e1 = E.xi()(i, j);
            const cplx e2 = E.eta()(i, j);
            if (i == j + 1) {
                M[j] += e1;
            } else {
                u.at(i, j) -= e1 / (std::pow(mu, i - j) - mu);
            }
            if (j == i + 1) {
                Ninv[i] += e2;
            } else {
                v.at(i, j) -= e2 / (std::pow(mu, i - j) - 1.0 / mu);
            }
        }
    };

    if (sweep == SweepOrder::by_degree) {
        for (int d = 2; d <= n; ++d) {
            solve_degree(residual(), d);
        }
    } else {
        // Pass p updates degrees 2..p+3 together from the full residual, so the top degree of the band
        // gets a provisional correction that the next pass revises. A degree whose residual is already
        // at rounding level is left alone: re-solving it injects noise that the higher degrees amplify
        // on every pass.
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * coefficient_scale(phi);
        double last = std::numeric_limits<double>::infinity();
        for (int pass = 0; pass < 2 * n; ++pass) {
            const MapJet E = residual();
            const double size = E.max_abs();
            if (pass >= n - 1 && !(size < 0.5 * last)) {
                break;
            }
            last = size;
            for (int d = 2; d <= std::min(n, pass + 3); ++d) {
                double e = 0.0;
                for (int j = 0; j <= d; ++j) {
                    e = std::max({e, std::abs(E.xi()(d - j, j)), std::abs(E.eta()(d - j, j))});
                }
                if (e > floor) {
                    solve_degree(E, d);
                }
            }
        }
    }

    const MapJet Phi0{Jet::xi(n) + u, Jet::eta(n) + v};
    const MapJet Phi0_inv = map_inverse(Phi0);
    const MapJet phi_c = compose(Phi0, compose(phi, Phi0_inv));
    const MapJet t1_c = compose(Phi0, compose(t1, Phi0_inv));
    const MapJet t2_c = compose(Phi0, compose(t2, Phi0_inv));

    const SeriesOneVar L1 = read_product_series(t1_c.xi(), 0, 1);
    const SeriesOneVar L2 = read_product_series(t2_c.xi(), 0, 1);

    const double conj_res = max_abs_diff(phi_c, diagonal_product_map(M, M.reciprocal(), n));
    const double inv_res = std::max(max_abs_diff(t1_c, antidiagonal_product_map(L1, L1.reciprocal(), n)),
                                    max_abs_diff(t2_c, antidiagonal_product_map(L2, L2.reciprocal(), n)));
    return {Phi0, M, L1, L2, conj_res, inv_res};
}

// Γ = −i log M with Γ(0) the principal argument of M(0).
inline SeriesOneVar gamma_from_M(const SeriesOneVar &M) {
    if (std::abs(std::abs(M[0]) - 1.0) > 1e-10) {
        throw hypothesis_violation("gamma_from_M: |M(0)| is not 1");
    }
    return M.log() * cplx{0.0, -1.0};
}

struct EpsS {
    int eps; // −1, 0, +1
    int s;   // infinite_order when eps == 0
};

inline EpsS extract_eps_s(const SeriesOneVar &gamma) {
    const double threshold = 1e-9 * std::max(1.0, gamma.max_abs());
    for (int k = 1; k <= gamma.order(); ++k) {
        const double c = gamma[k].real();
        if (std::abs(gamma[k]) > threshold) {
            return {c > 0.0 ? 1 : -1, k};
        }
    }
    return {0, infinite_order};
}

// r(t) with Γ − Γ(0) = ε t^s r^{2s}, r(0) > 0; real parts are taken since Γ is real for real maps.
inline SeriesOneVar r_from_gamma(const SeriesOneVar &gamma, int eps, int s) {
    if (eps == 0) {
        throw invalid_input("r_from_gamma: eps = 0 needs no renormalization");
    }
    SeriesOneVar g = gamma.shifted_down(s) * cplx{static_cast<double>(eps)};
    for (int k = 0; k <= g.order(); ++k) {
        g[k] = g[k].real();
    }
    if (g[0].real() <= 0.0) {
        throw invalid_input("r_from_gamma: leading coefficient at order s does not have sign eps");
    }
    SeriesOneVar r = g.pow(1.0 / (2.0 * s));
    // r_k for k > order(Γ) − s would need coefficients of Γ beyond its order; leave them zero.
    for (int k = std::max(gamma.order() - s + 1, 0); k <= r.order(); ++k) {
        r[k] = 0.0;
    }
    return r;
}

// Φ₂ = (ξ r(ξη), η r(ξη))
inline MapJet phi2_from_gamma(const SeriesOneVar &gamma, int eps, int s, int order) {
    const SeriesOneVar r = r_from_gamma(gamma, eps, s);
    return diagonal_product_map(r, r, order);
}

// (λξe^{iε(ξη)^s}, λ⁻¹ηe^{−iε(ξη)^s})
inline MapJet normal_form_map(cplx lambda, int eps, int s, int order) {
    const int kt = product_order(order);
    SeriesOneVar g(kt);
    if (eps != 0 && s <= kt) {
        g[s] = cplx{0.0, static_cast<double>(eps)};
    }
    const SeriesOneVar e = g.exp() * lambda;
    return diagonal_product_map(e, e.reciprocal(), order);
}

struct NormalFormResult {
    MapJet Phi;
    cplx lambda;
    int eps;
    int s; // infinite_order when eps == 0
    SeriesOneVar M;
    SeriesOneVar Lambda1;
    SeriesOneVar Lambda2;
    SeriesOneVar Gamma;
    double conjugation_residual; // ΦφΦ⁻¹ against the normal form
    double tau_residual;         // ΦτΦ⁻¹ against (η, ξ)
    double reality_defect;       // of Φ under the standard ρ
};

// Real linear map commuting with (η, ξ) that diagonalizes the linear part of a map reversible
// under (η, ξ); the eigenvalue with positive imaginary part is placed on ξ.
inline MapJet reversible_diagonalizer(const MapJet &phi) {
    const int n = phi.order();
    const auto [a, b, c, d] = phi.linear_part();
    const cplx tr = a + d;
    const cplx disc = std::sqrt(tr * tr - 4.0 * (a * d - b * c));
    cplx lam = (tr + disc) / 2.0;
    if (lam.imag() < 0.0) {
        lam = (tr - disc) / 2.0;
    }
    if (std::abs(b) < 1e-14 && std::abs(c) < 1e-14) {
        return lam == a || std::abs(lam - a) < std::abs(lam - d) ? MapJet::identity(n) : MapJet::swap(n);
    }
    // Eigenvector (p, q) of the linear part, then P = [[p, q], [q, p]] maps the diagonal frame back.
    cplx p = b, q = lam - a;
    if (std::abs(p) + std::abs(q) < 1e-12) {
        p = lam - d;
        q = c;
    }
    // p and q share a phase for reversible, real maps; remove it.
    const cplx phase = std::abs(p) >= std::abs(q) ? p / std::abs(p) : q / std::abs(q);
    p /= phase;
    q /= phase;
    const cplx det = p * p - q * q;
    // P⁻¹ = [[p, −q], [−q, p]] / det
    return MapJet::linear(n, p / det, -q / det, -q / det, p / det);
}

// Full invariant set {λ, ε, s} of a map reversible under τ, with the composite normalizer.
inline NormalFormResult full_normalize(const MapJet &phi_in, const MapJet &tau_in, int order) {
    const int n = order;
    const MapJet phi = phi_in.with_order(n);
    const MapJet tau = tau_in.with_order(n);
    const double scale = coefficient_scale(phi);

    const double rev = max_abs_diff(compose(tau, compose(phi, tau)), map_inverse(phi));
    if (rev > 1e-9 * scale) {
        throw hypothesis_violation("full_normalize: phi is not reversible under tau (residual " +
                                   std::to_string(rev) + ")");
    }
    const double real = reality_defect(phi, RhoKind::standard);
    if (real > 1e-9 * scale) {
        throw hypothesis_violation("full_normalize: phi violates the reality condition (defect " +
                                   std::to_string(real) + ")");
    }

    const Linearization lin = linearize_involution(tau);
    MapJet phi1 = compose(lin.change, compose(phi, map_inverse(lin.change)));
    const MapJet P = reversible_diagonalizer(phi1);
    const MapJet D = compose(P, lin.change);
    const MapJet phi2 = compose(D, compose(phi, map_inverse(D)));
    const cplx lambda = phi2.xi()(1, 0);

    const MapJet t1 = MapJet::swap(n);
    const InvolutionPair pair(t1, compose(t1, phi2));
    const MoserWebsterForm mw = mw_normalize(pair, n);

    // a = Λ₁^{−1/2} turns Λ₁(ξη)η into η.
    const SeriesOneVar a = mw.Lambda1.pow(-0.5);
    const MapJet Phi1 = diagonal_product_map(a, a.reciprocal(), n);

    const SeriesOneVar gamma = gamma_from_M(mw.M);
    const EpsS es = extract_eps_s(gamma);
    MapJet Phi = compose(Phi1, compose(mw.Phi0, D));
    if (es.eps != 0) {
        Phi = compose(phi2_from_gamma(gamma, es.eps, es.s, n), Phi);
    }

    const MapJet Phi_inv = map_inverse(Phi);
    const double conj_res =
        max_abs_diff(compose(Phi, compose(phi, Phi_inv)), normal_form_map(lambda, es.eps, es.s, n));
    const double tau_res = max_abs_diff(compose(Phi, compose(tau, Phi_inv)), MapJet::swap(n));
    return {Phi,          lambda,   es.eps,   es.s,  mw.M, mw.Lambda1, mw.Lambda2, gamma,
            conj_res,     tau_res,  reality_defect(Phi, RhoKind::standard)};
}

} // namespace revmap
