#pragma once

// Truncated power series over complex coefficients.
//
// Jet        bivariate series f(ξ, η) = Σ_{i+j≤N} f_{ij} ξ^i η^j (dense triangular storage)
// MapJet     formal map of the plane, a pair of jets with a common order
// SeriesOneVar  univariate series c(t) = Σ_{k≤N} c_k t^k, used for functions of t = ξη

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace revmap {

using cplx = std::complex<double>;

inline constexpr cplx I{0.0, 1.0};

class Jet {
public:
    Jet() : Jet(0) {}

    explicit Jet(int order) : order_(order) {
        if (order < 0) {
            throw invalid_input("Jet: negative truncation order");
        }
        coeffs_.assign(size_for(order), cplx{});
    }

    static Jet constant(int order, cplx c) {
        Jet r(order);
        r.coeffs_[0] = c;
        return r;
    }

    static Jet monomial(int order, int i, int j, cplx c = 1.0) {
        Jet r(order);
        if (i + j <= order) {
            r.at(i, j) = c;
        }
        return r;
    }

    static Jet xi(int order) { return monomial(order, 1, 0); }
    static Jet eta(int order) { return monomial(order, 0, 1); }

    static constexpr std::size_t size_for(int order) {
        return static_cast<std::size_t>(order + 1) * static_cast<std::size_t>(order + 2) / 2;
    }

    // Offset of the first coefficient of total degree d.
    static constexpr std::size_t degree_offset(int d) {
        return static_cast<std::size_t>(d) * static_cast<std::size_t>(d + 1) / 2;
    }

    static constexpr std::size_t index(int i, int j) { return degree_offset(i + j) + static_cast<std::size_t>(j); }

    int order() const noexcept { return order_; }

    // Coefficient of ξ^i η^j; zero beyond the truncation order.
    cplx operator()(int i, int j) const {
        if (i < 0 || j < 0 || i + j > order_) {
            return {};
        }
        return coeffs_[index(i, j)];
    }

    cplx &at(int i, int j) {
        if (i < 0 || j < 0 || i + j > order_) {
            throw invalid_input("Jet::at: index (" + std::to_string(i) + "," + std::to_string(j) +
                                ") beyond order " + std::to_string(order_));
        }
        return coeffs_[index(i, j)];
    }

    std::span<const cplx> coefficients() const noexcept { return coeffs_; }
    std::span<cplx> coefficients() noexcept { return coeffs_; }

    cplx constant_term() const { return coeffs_[0]; }

    // Σ f_{ij} ξ^i η^j evaluated numerically.
    cplx evaluate(cplx x, cplx y) const {
        // Horner in η within each ξ power is awkward for triangular storage; plain power tables suffice.
        std::vector<cplx> xp(static_cast<std::size_t>(order_) + 1), yp(static_cast<std::size_t>(order_) + 1);
        xp[0] = yp[0] = 1.0;
        for (int k = 1; k <= order_; ++k) {
            xp[k] = xp[k - 1] * x;
            yp[k] = yp[k - 1] * y;
        }
        cplx sum{};
        for (int d = order_; d >= 0; --d) {
            for (int j = 0; j <= d; ++j) {
                sum += coeffs_[index(d - j, j)] * xp[d - j] * yp[j];
            }
        }
        return sum;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto &c : coeffs_) {
            m = std::max(m, std::abs(c));
        }
        return m;
    }

    // Same series truncated (or zero-extended) to a new order.
    Jet with_order(int order) const {
        Jet r(order);
        const int top = std::min(order, order_);
        std::copy_n(coeffs_.begin(), size_for(top), r.coeffs_.begin());
        return r;
    }

    // Homogeneous part of total degree d.
    Jet degree_part(int d) const {
        Jet r(order_);
        if (d >= 0 && d <= order_) {
            std::copy_n(coeffs_.begin() + static_cast<std::ptrdiff_t>(degree_offset(d)), d + 1,
                        r.coeffs_.begin() + static_cast<std::ptrdiff_t>(degree_offset(d)));
        }
        return r;
    }

    // Lowest total degree with a nonzero coefficient, or order()+1 for the zero series.
    int valuation() const {
        for (int d = 0; d <= order_; ++d) {
            for (int j = 0; j <= d; ++j) {
                if (coeffs_[index(d - j, j)] != cplx{}) {
                    return d;
                }
            }
        }
        return order_ + 1;
    }

    Jet &operator+=(const Jet &o) {
        require_same_order(o, "add");
        for (std::size_t k = 0; k < coeffs_.size(); ++k) {
            coeffs_[k] += o.coeffs_[k];
        }
        return *this;
    }

    Jet &operator-=(const Jet &o) {
        require_same_order(o, "subtract");
        for (std::size_t k = 0; k < coeffs_.size(); ++k) {
            coeffs_[k] -= o.coeffs_[k];
        }
        return *this;
    }

    Jet &operator*=(cplx c) {
        for (auto &v : coeffs_) {
            v *= c;
        }
        return *this;
    }

    friend Jet operator+(Jet a, const Jet &b) { return a += b; }
    friend Jet operator-(Jet a, const Jet &b) { return a -= b; }
    friend Jet operator-(Jet a) { return a *= -1.0; }
    friend Jet operator*(Jet a, cplx c) { return a *= c; }
    friend Jet operator*(cplx c, Jet a) { return a *= c; }

    // Cauchy product truncated at the common order.
    friend Jet operator*(const Jet &a, const Jet &b) {
        a.require_same_order(b, "multiply");
        const int n = a.order_;
        Jet r(n);
        for (int d1 = 0; d1 <= n; ++d1) {
            const std::size_t o1 = degree_offset(d1);
            for (int j1 = 0; j1 <= d1; ++j1) {
                const cplx av = a.coeffs_[o1 + static_cast<std::size_t>(j1)];
                if (av == cplx{}) {
                    continue;
                }
                for (int d2 = 0; d2 <= n - d1; ++d2) {
                    const std::size_t o2 = degree_offset(d2);
                    cplx *out = r.coeffs_.data() + degree_offset(d1 + d2) + j1;
                    const cplx *bv = b.coeffs_.data() + o2;
                    for (int j2 = 0; j2 <= d2; ++j2) {
                        out[j2] += av * bv[j2];
                    }
                }
            }
        }
        return r;
    }

    Jet &operator*=(const Jet &o) { return *this = *this * o; }

    friend bool operator==(const Jet &, const Jet &) = default;

    // Complex-conjugate every coefficient.
    Jet conj() const {
        Jet r = *this;
        for (auto &v : r.coeffs_) {
            v = std::conj(v);
        }
        return r;
    }

    // f(η, ξ): swap the roles of the variables.
    Jet swapped() const {
        Jet r(order_);
        for (int d = 0; d <= order_; ++d) {
            for (int j = 0; j <= d; ++j) {
                r.coeffs_[index(j, d - j)] = coeffs_[index(d - j, j)];
            }
        }
        return r;
    }

    // ∂f/∂ξ and ∂f/∂η (the top degree is lost).
    Jet d_xi() const {
        Jet r(order_);
        for (int d = 1; d <= order_; ++d) {
            for (int j = 0; j < d; ++j) {
                const int i = d - j;
                r.coeffs_[index(i - 1, j)] = static_cast<double>(i) * coeffs_[index(i, j)];
            }
        }
        return r;
    }

    Jet d_eta() const {
        Jet r(order_);
        for (int d = 1; d <= order_; ++d) {
            for (int j = 1; j <= d; ++j) {
                const int i = d - j;
                r.coeffs_[index(i, j - 1)] = static_cast<double>(j) * coeffs_[index(i, j)];
            }
        }
        return r;
    }

private:
    void require_same_order(const Jet &o, const char *op) const {
        if (o.order_ != order_) {
            throw invalid_input(std::string("Jet: cannot ") + op + " jets of order " + std::to_string(order_) +
                                " and " + std::to_string(o.order_));
        }
    }

    int order_;
    std::vector<cplx> coeffs_;
};

// Max coefficient modulus of a − b.
inline double max_abs_diff(const Jet &a, const Jet &b) { return (a - b).max_abs(); }

// Hat operator: every coefficient replaced by its modulus.
inline Jet majorant(const Jet &f) {
    Jet r = f;
    for (auto &v : r.coefficients()) {
        v = std::abs(v);
    }
    return r;
}

// e^{g} for g with zero constant term.
inline Jet jet_exp(const Jet &g) {
    if (g.constant_term() != cplx{}) {
        throw invalid_input("jet_exp: argument must have zero constant term");
    }
    const int n = g.order();
    // Horner: 1 + g(1 + g/2(1 + g/3(...)))
    Jet r = Jet::constant(n, 1.0);
    for (int k = n; k >= 1; --k) {
        r = Jet::constant(n, 1.0) + (g * r) * (1.0 / k);
    }
    return r;
}

inline Jet jet_exp_i(const Jet &g) { return jet_exp(g * I); }

// 1/f for f with nonzero constant term.
inline Jet jet_reciprocal(const Jet &f) {
    const cplx c0 = f.constant_term();
    if (c0 == cplx{}) {
        throw invalid_input("jet_reciprocal: zero constant term");
    }
    const int n = f.order();
    Jet x = f * (1.0 / c0);
    x.at(0, 0) = 0.0;
    // 1/(1+x) = Σ (−x)^k
    Jet r = Jet::constant(n, 1.0);
    for (int k = n; k >= 1; --k) {
        r = Jet::constant(n, 1.0) - x * r;
    }
    return r * (1.0 / c0);
}

class MapJet {
public:
    MapJet() = default;

    MapJet(Jet xi_component, Jet eta_component) : xi_(std::move(xi_component)), eta_(std::move(eta_component)) {
        if (xi_.order() != eta_.order()) {
            throw invalid_input("MapJet: components have different truncation orders");
        }
    }

    static MapJet identity(int order) { return {Jet::xi(order), Jet::eta(order)}; }

    // Linear map (ξ,η) ↦ (a ξ + b η, c ξ + d η).
    static MapJet linear(int order, cplx a, cplx b, cplx c, cplx d) {
        return {Jet::xi(order) * a + Jet::eta(order) * b, Jet::xi(order) * c + Jet::eta(order) * d};
    }

    // (ξ,η) ↦ (η,ξ)
    static MapJet swap(int order) { return {Jet::eta(order), Jet::xi(order)}; }

    const Jet &xi() const noexcept { return xi_; }
    const Jet &eta() const noexcept { return eta_; }
    int order() const noexcept { return xi_.order(); }

    bool fixes_origin() const { return xi_.constant_term() == cplx{} && eta_.constant_term() == cplx{}; }

    // Degree-one coefficient matrix [[a, b], [c, d]] in row-major order.
    std::array<cplx, 4> linear_part() const { return {xi_(1, 0), xi_(0, 1), eta_(1, 0), eta_(0, 1)}; }

    double max_abs() const { return std::max(xi_.max_abs(), eta_.max_abs()); }

    MapJet with_order(int order) const { return {xi_.with_order(order), eta_.with_order(order)}; }

    friend MapJet operator+(const MapJet &a, const MapJet &b) { return {a.xi_ + b.xi_, a.eta_ + b.eta_}; }
    friend MapJet operator-(const MapJet &a, const MapJet &b) { return {a.xi_ - b.xi_, a.eta_ - b.eta_}; }
    friend bool operator==(const MapJet &, const MapJet &) = default;

    std::array<cplx, 2> evaluate(cplx x, cplx y) const { return {xi_.evaluate(x, y), eta_.evaluate(x, y)}; }

private:
    Jet xi_;
    Jet eta_;
};

inline double max_abs_diff(const MapJet &a, const MapJet &b) { return (a - b).max_abs(); }

// f∘Φ, exact through the truncation order when Φ fixes the origin.
inline Jet compose(const Jet &f, const MapJet &phi) {
    if (f.order() != phi.order()) {
        throw invalid_input("compose: truncation orders differ");
    }
    if (!phi.fixes_origin()) {
        throw invalid_input("compose: inner map has a nonzero constant term");
    }
    const int n = f.order();
    std::vector<Jet> eta_pow;
    eta_pow.reserve(static_cast<std::size_t>(n) + 1);
    eta_pow.push_back(Jet::constant(n, 1.0));
    for (int k = 1; k <= n; ++k) {
        eta_pow.push_back(eta_pow.back() * phi.eta());
    }
    // f∘Φ = Σ_i X^i G_i(Y),  G_i = Σ_j f_{ij} Y^j, evaluated by Horner in X.
    auto inner = [&](int i) {
        Jet g(n);
        for (int j = 0; i + j <= n; ++j) {
            const cplx c = f(i, j);
            if (c == cplx{}) {
                continue;
            }
            auto dst = g.coefficients();
            auto src = eta_pow[static_cast<std::size_t>(j)].coefficients();
            for (std::size_t k = 0; k < dst.size(); ++k) {
                dst[k] += c * src[k];
            }
        }
        return g;
    };
    Jet r = inner(n);
    for (int i = n - 1; i >= 0; --i) {
        r = r * phi.xi() + inner(i);
    }
    return r;
}

// Φ∘Ψ
inline MapJet compose(const MapJet &phi, const MapJet &psi) { return {compose(phi.xi(), psi), compose(phi.eta(), psi)}; }

// Formal inverse, built one degree per sweep from Ψ ← L⁻¹(id − H∘Ψ) where Φ = L + H.
inline MapJet map_inverse(const MapJet &phi) {
    if (!phi.fixes_origin()) {
        throw invalid_input("map_inverse: map does not fix the origin");
    }
    const int n = phi.order();
    const auto [a, b, c, d] = phi.linear_part();
    const cplx det = a * d - b * c;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d), 1e-300});
    if (std::abs(det) <= 1e-14 * scale * scale) {
        throw invalid_input("map_inverse: singular linear part");
    }
    const cplx ia = d / det, ib = -b / det, ic = -c / det, id = a / det;
    auto apply_linv = [&](const MapJet &m) {
        return MapJet{m.xi() * ia + m.eta() * ib, m.xi() * ic + m.eta() * id};
    };
    const MapJet lin = MapJet::linear(n, a, b, c, d);
    const MapJet higher = phi - lin;
    const MapJet ident = MapJet::identity(n);
    MapJet psi = MapJet::linear(n, ia, ib, ic, id);
    for (int sweep = 2; sweep <= n; ++sweep) {
        psi = apply_linv(ident - compose(higher, psi));
    }
    return psi;
}

// Complexification of a series f(z, z̄): (ξ,η) ↦ (f(ξ,η), f̄(η,ξ)).
inline MapJet complexify(const Jet &f_z) { return {f_z, f_z.conj().swapped()}; }

enum class RhoKind {
    standard, // ρ(ξ,η) = (η̄, ξ̄)
    surface,  // ρ(ξ,η) = (ξ̄, η̄)
};

// ρ∘Φ∘ρ as a holomorphic formal map.
inline MapJet rho_conjugate(const MapJet &phi, RhoKind kind) {
    if (kind == RhoKind::standard) {
        return {phi.eta().conj().swapped(), phi.xi().conj().swapped()};
    }
    return {phi.xi().conj(), phi.eta().conj()};
}

// Max coefficient modulus of ρΦ − Φρ; zero iff Φ satisfies the reality condition at this order.
inline double reality_defect(const MapJet &phi, RhoKind kind) { return max_abs_diff(rho_conjugate(phi, kind), phi); }

class SeriesOneVar {
public:
    SeriesOneVar() : SeriesOneVar(0) {}
    explicit SeriesOneVar(int order) : coeffs_(static_cast<std::size_t>(order) + 1) {
        if (order < 0) {
            throw invalid_input("SeriesOneVar: negative order");
        }
    }
    explicit SeriesOneVar(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) {
            coeffs_.push_back(0.0);
        }
    }

    static SeriesOneVar constant(int order, cplx c) {
        SeriesOneVar r(order);
        r.coeffs_[0] = c;
        return r;
    }

    int order() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    cplx operator[](int k) const { return k >= 0 && k <= order() ? coeffs_[static_cast<std::size_t>(k)] : cplx{}; }
    cplx &operator[](int k) { return coeffs_.at(static_cast<std::size_t>(k)); }
    std::span<const cplx> coefficients() const noexcept { return coeffs_; }

    cplx evaluate(cplx t) const {
        cplx r{};
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            r = r * t + *it;
        }
        return r;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto &c : coeffs_) {
            m = std::max(m, std::abs(c));
        }
        return m;
    }

    friend SeriesOneVar operator+(SeriesOneVar a, const SeriesOneVar &b) {
        a.require_same_order(b);
        for (std::size_t k = 0; k < a.coeffs_.size(); ++k) {
            a.coeffs_[k] += b.coeffs_[k];
        }
        return a;
    }
    friend SeriesOneVar operator-(SeriesOneVar a, const SeriesOneVar &b) {
        a.require_same_order(b);
        for (std::size_t k = 0; k < a.coeffs_.size(); ++k) {
            a.coeffs_[k] -= b.coeffs_[k];
        }
        return a;
    }
    friend SeriesOneVar operator*(SeriesOneVar a, cplx c) {
        for (auto &v : a.coeffs_) {
            v *= c;
        }
        return a;
    }
    friend SeriesOneVar operator*(const SeriesOneVar &a, const SeriesOneVar &b) {
        a.require_same_order(b);
        const int n = a.order();
        SeriesOneVar r(n);
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; i + j <= n; ++j) {
                r.coeffs_[static_cast<std::size_t>(i + j)] += a[i] * b[j];
            }
        }
        return r;
    }

    SeriesOneVar derivative() const {
        SeriesOneVar r(order());
        for (int k = 1; k <= order(); ++k) {
            r.coeffs_[static_cast<std::size_t>(k - 1)] = static_cast<double>(k) * coeffs_[static_cast<std::size_t>(k)];
        }
        return r;
    }

    // Antiderivative with zero constant term (the top coefficient is dropped).
    SeriesOneVar integral() const {
        SeriesOneVar r(order());
        for (int k = 1; k <= order(); ++k) {
            r.coeffs_[static_cast<std::size_t>(k)] = coeffs_[static_cast<std::size_t>(k - 1)] / static_cast<double>(k);
        }
        return r;
    }

    SeriesOneVar reciprocal() const {
        if (coeffs_[0] == cplx{}) {
            throw invalid_input("SeriesOneVar::reciprocal: zero constant term");
        }
        const int n = order();
        SeriesOneVar r(n);
        r.coeffs_[0] = 1.0 / coeffs_[0];
        for (int k = 1; k <= n; ++k) {
            cplx s{};
            for (int j = 1; j <= k; ++j) {
                s += (*this)[j] * r[k - j];
            }
            r.coeffs_[static_cast<std::size_t>(k)] = -s * r.coeffs_[0];
        }
        return r;
    }

    // Principal-branch logarithm at t = 0: log c₀ + ∫ c'/c.
    SeriesOneVar log() const {
        if (coeffs_[0] == cplx{}) {
            throw invalid_input("SeriesOneVar::log: zero constant term");
        }
        SeriesOneVar r = (derivative() * reciprocal()).integral();
        r.coeffs_[0] = std::log(coeffs_[0]);
        return r;
    }

    SeriesOneVar exp() const {
        const int n = order();
        SeriesOneVar r(n);
        r.coeffs_[0] = std::exp(coeffs_[0]);
        // E' = c' E
        for (int k = 1; k <= n; ++k) {
            cplx s{};
            for (int j = 1; j <= k; ++j) {
                s += static_cast<double>(j) * (*this)[j] * r[k - j];
            }
            r.coeffs_[static_cast<std::size_t>(k)] = s / static_cast<double>(k);
        }
        return r;
    }

    // c^p with the principal branch of c₀^p.
    SeriesOneVar pow(double p) const { return (log() * cplx{p}).exp(); }

    // Same coefficients with t^k shifted down by `shift` (the first `shift` must vanish within tol).
    SeriesOneVar shifted_down(int shift) const {
        SeriesOneVar r(order());
        for (int k = shift; k <= order(); ++k) {
            r.coeffs_[static_cast<std::size_t>(k - shift)] = coeffs_[static_cast<std::size_t>(k)];
        }
        return r;
    }

    SeriesOneVar with_order(int order) const {
        SeriesOneVar r(order);
        for (int k = 0; k <= std::min(order, this->order()); ++k) {
            r.coeffs_[static_cast<std::size_t>(k)] = coeffs_[static_cast<std::size_t>(k)];
        }
        return r;
    }

private:
    void require_same_order(const SeriesOneVar &o) const {
        if (o.order() != order()) {
            throw invalid_input("SeriesOneVar: order mismatch");
        }
    }

    std::vector<cplx> coeffs_;
};

inline double max_abs_diff(const SeriesOneVar &a, const SeriesOneVar &b) { return (a - b).max_abs(); }

// Σ c_k (ξη)^k as a jet of the given order.
inline Jet in_product(const SeriesOneVar &c, int order) {
    Jet r(order);
    for (int k = 0; 2 * k <= order && k <= c.order(); ++k) {
        r.at(k, k) = c[k];
    }
    return r;
}

// Read c(t) off the (ξη)^k · ξ^shift_xi η^shift_eta coefficients of a jet.
inline SeriesOneVar read_product_series(const Jet &f, int shift_xi, int shift_eta) {
    const int top = (f.order() - shift_xi - shift_eta) / 2;
    SeriesOneVar r(std::max(top, 0));
    for (int k = 0; k <= top; ++k) {
        r[k] = f(k + shift_xi, k + shift_eta);
    }
    return r;
}

} // namespace revmap
