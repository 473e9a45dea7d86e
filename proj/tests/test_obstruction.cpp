#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <revmap/obstruction.hpp>

#include "test_support.hpp"

using namespace revmap;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct Setup {
    TwistParams tp;
    double c2;
    ResonanceData res;
    CurveDomain dom;
};

// s = 1 with a resonance planted at period n, β = −δ·frac.
Setup planted(std::int64_t n, double frac = 0.5) {
    TwistParams tp{1.0, 1, 0.1, 0.9};
    const double c2 = calibrate_c2(tp);
    const double delta = std::pow(c2 / 4.0, 2);
    tp.alpha = (two_pi - frac * delta) / static_cast<double>(n);
    const ResonanceData res = beta_reduce(n, tp.alpha);
    return {tp, c2, res, compute_constants(tp, n, c2)};
}

CoefficientFamily single_mode(int n, cplx v) {
    CoefficientFamily fam(1, true);
    fam.set(n, 0, v);
    return fam;
}

cplx grid_coefficient(const std::vector<cplx> &values, int k) {
    const std::size_t G = values.size();
    cplx sum{};
    for (std::size_t m = 0; m < G; ++m) {
        sum += values[m] * std::polar(1.0, -two_pi * k * static_cast<double>(m) / static_cast<double>(G));
    }
    return sum / static_cast<double>(G);
}

// Absolute resolution of a DFT of values of size ζ₀.
double rounding_floor(double z0) { return 10.0 * std::numeric_limits<double>::epsilon() * z0; }

} // namespace

TEST_CASE("resonance schedule", "[obstruction]") {
    const double alpha = two_pi * 0.6180339887498949;
    const auto sched = select_resonant_n(alpha, 0.5, 6, 1000);
    REQUIRE(sched.complete);
    REQUIRE(sched.entries.size() == 6);
    std::int64_t first = 0;
    for (std::int64_t n = 1; n <= 1000; ++n) {
        const double b = beta_reduce(n, alpha).beta;
        if (b < 0.0 && b > -0.5) {
            first = n;
            break;
        }
    }
    CHECK(sched.entries.front().n == first);
    for (std::size_t k = 0; k < sched.entries.size(); ++k) {
        const auto &e = sched.entries[k];
        CHECK(e.beta == beta_reduce(e.n, alpha).beta);
        if (k > 0) {
            CHECK(e.n > sched.entries[k - 1].n);
        }
    }

    const double delta = 1e-3;
    const double planted_alpha = (2.0 * two_pi - delta / 2.0) / 37.0;
    const auto p = select_resonant_n(planted_alpha, delta, 3, 2000);
    bool found = false;
    for (const auto &e : p.entries) {
        found = found || e.n == 37;
        CHECK(e.beta < 0.0);
        CHECK(e.beta > -delta);
    }
    CHECK(found);

    const auto tiny = select_resonant_n(std::sqrt(2.0), 1e-6, 50, 3000);
    CHECK_FALSE(tiny.complete);
    for (const auto &e : tiny.entries) {
        CHECK(e.beta < 0.0);
        CHECK(e.beta > -1e-6);
    }
    CHECK_THROWS_AS(select_resonant_n(1.0, 0.0, 1, 10), invalid_input);
}

TEST_CASE("linear response", "[obstruction]") {
    const int n = 6;
    const Setup S = planted(n);
    const double z0 = zeta0(1, S.res);

    SECTION("zero family") {
        CHECK(predicted_linear_zeta(CoefficientFamily(1, true), S.tp, S.res, S.dom, 1.0) == cplx{});
    }

    SECTION("w^n coefficient of the linear response") {
        const auto fam = single_mode(n, {0.3, 0.2});
        std::vector<cplx> values;
        for (const cplx w : unit_circle_grid(4 * n)) {
            values.push_back(predicted_linear_zeta(fam, S.tp, S.res, S.dom, w));
        }
        const cplx expected = -std::pow(z0, n - 1) * (fam(n, 0) + fam(0, n)) / 2.0;
        CHECK(std::abs(grid_coefficient(values, n) - expected) < 1e-12 * std::abs(expected));
        CHECK(std::abs(leading_H(fam, 1, S.res) - expected) < 1e-15 * std::abs(expected));
    }

    SECTION("shift invariance of the resonant sum") {
        const auto fam = single_mode(n, {0.3, 0.2});
        const cplx u = std::exp(I * S.tp.omega(z0 * z0));
        CHECK(std::abs(std::pow(u, n) - 1.0) < 1e-12);
        const cplx w = std::polar(1.0, 0.3);
        cplx s0{}, s1{};
        for (int j = 0; j < n; ++j) {
            s0 += fam.evaluate(z0 * w * std::pow(u, j), z0 / w * std::pow(u, -j));
            s1 += fam.evaluate(z0 * w * std::pow(u, j + 1), z0 / w * std::pow(u, -j - 1));
        }
        CHECK(std::abs(s0 - s1) < 1e-12 * std::abs(s0));
    }

    SECTION("finite differences converge at first order") {
        CoefficientFamily fam(1, true);
        fam.set(n, 0, {0.6, -0.3});
        fam.set(4, 1, {0.2, 0.5});
        fam.set(2, 2, 0.4);
        const TwistParams tp = S.tp;
        for (const cplx w : {cplx{1.0, 0.0}, std::polar(1.0, 0.8), std::polar(1.0, 2.1)}) {
            const cplx lin = predicted_linear_zeta(fam, tp, S.res, S.dom, w);
            std::vector<double> errs;
            for (double t : {1e-3, 5e-4, 2.5e-4}) {
                const TwistMap map(fam.scaled(t), tp);
                const cplx z = solve_branch(map, S.res, S.dom, 2, w).zeta;
                errs.push_back(std::abs((z - z0) / t - lin));
            }
            CHECK(errs[0] / errs[1] == Catch::Approx(2.0).epsilon(0.1));
            CHECK(errs[1] / errs[2] == Catch::Approx(2.0).epsilon(0.1));
            CHECK(errs[2] < 1e-2 * std::abs(lin));
        }
    }
}

TEST_CASE("H_k estimates", "[obstruction]") {
    const int n = 6;
    const Setup S = planted(n);
    const double z0 = zeta0(1, S.res);

    SECTION("zero family") {
        const TwistMap map(CoefficientFamily(1, true), S.tp);
        const auto h = Hk_estimate(map, S.res, S.dom, 4 * n);
        CHECK(std::abs(h.numeric) < rounding_floor(z0));
        CHECK(h.leading == cplx{});
        CHECK_THROWS_AS(Hk_estimate(map, S.res, S.dom, 4 * n - 1), invalid_input);
    }

    SECTION("modes off the n-th diagonal pairs have no linear contribution") {
        CoefficientFamily fam(1, true);
        fam.set(5, 1, {1e-4, 2e-4});
        fam.set(2, 2, 3e-4);
        const TwistMap map(fam, S.tp);
        const auto h = Hk_estimate(map, S.res, S.dom, 4 * n);
        CHECK(h.leading == cplx{});
        CHECK(std::abs(h.numeric) < 1e-6 * std::pow(z0, n - 1));
    }

    SECTION("quadratic remainder") {
        // The weight-zero mode supplies a second-order w^n term through its product with a_{n,0}.
        CoefficientFamily base(1, true);
        base.set(n, 0, 1.0);
        base.set(2, 2, 1.0);
        std::vector<double> rem;
        for (double t : {2e-3, 1e-3, 5e-4}) {
            const TwistMap map(base.scaled(t), S.tp);
            const auto h = Hk_estimate(map, S.res, S.dom, 4 * n);
            CHECK(std::abs(h.leading - t * (-std::pow(z0, n - 1) * 2.0 / 2.0)) < 1e-15 * std::abs(h.leading));
            rem.push_back(std::abs(h.numeric - h.leading));
        }
        CHECK(rem[0] / rem[1] == Catch::Approx(4.0).epsilon(0.1));
        CHECK(rem[1] / rem[2] == Catch::Approx(4.0).epsilon(0.1));
    }

    SECTION("Hermitian families give real coefficients") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 4; ++trial) {
            auto fam = revmap::testing::random_hermitian_family(rng, 1, 9, 0.05, 5);
            fam.set(n, 0, revmap::testing::random_unit_disk(rng, 0.05));
            const TwistMap map(fam, S.tp);
            const auto h = Hk_estimate(map, S.res, S.dom, 8 * n);
            CHECK(std::abs(h.numeric.imag()) < 1e-9 * std::abs(h.numeric) + rounding_floor(z0));
            CHECK(std::abs(h.leading.imag()) == 0.0);
        }
    }
}

TEST_CASE("divergence witness", "[obstruction]") {
    const int n1 = 6;
    const Setup S = planted(n1);
    const auto sched = select_resonant_n(S.tp.alpha, S.dom.delta, 4, 500);
    REQUIRE(!sched.entries.empty());
    REQUIRE(sched.entries.front().n == n1);

    SECTION("zero family: all intervals degenerate") {
        const TwistMap map(CoefficientFamily(1, true), S.tp);
        const auto rep = divergence_witness(map, sched.entries, S.c2);
        REQUIRE(rep.entries.size() == sched.entries.size());
        for (const auto &e : rep.entries) {
            CHECK(e.I_max - e.I_min < 1e-12);
            CHECK_FALSE(e.nonconstant);
        }
        CHECK(rep.nonconstant_count == 0);
    }

    SECTION("planted mode") {
        const auto fam = single_mode(n1, 0.1);
        const TwistMap map(fam, S.tp);
        const auto rep = divergence_witness(map, sched.entries, S.c2);
        const auto &e = rep.entries.front();
        CHECK(e.nonconstant);
        CHECK(e.predicted_width == Catch::Approx(4.0 * std::pow(zeta0(1, S.res), n1 - 1) * 0.2 / 2.0));
        CHECK((e.I_max - e.I_min) == Catch::Approx(e.predicted_width).epsilon(0.25));
        for (const auto &x : rep.entries) {
            CHECK(x.max_residual < 1e-10);
        }
        CHECK(rep.nonconstant_count >= 1);
    }
}
