#include <catch_amalgamated.hpp>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <revmap/twist.hpp>

#include "test_support.hpp"

using namespace revmap;
using revmap::testing::random_hermitian_family;
using revmap::testing::random_unit_disk;

namespace {

constexpr double pi = std::numbers::pi;

TwistParams standard_params(int s = 1) { return {std::sqrt(2.0), s, 0.1, 0.5}; }

point2 random_point(std::mt19937_64 &rng, double radius) {
    return {radius * random_unit_disk(rng), radius * random_unit_disk(rng)};
}

double dist(const point2 &p, const point2 &q) { return std::max(std::abs(p[0] - q[0]), std::abs(p[1] - q[1])); }

// First n with β(n) in (−δ, 0).
ResonanceData first_resonance(double alpha, double delta, std::int64_t start = 1) {
    for (std::int64_t n = start; n < 1000000; ++n) {
        const auto r = beta_reduce(n, alpha);
        if (r.beta < 0.0 && r.beta > -delta) {
            return r;
        }
    }
    throw std::runtime_error("no resonance found");
}

} // namespace

TEST_CASE("beta reduction", "[twist]") {
    auto r = beta_reduce(1, 0.1);
    CHECK(r.g == 0);
    CHECK(r.beta == Catch::Approx(0.1).margin(1e-16));

    r = beta_reduce(2, pi - 0.05);
    CHECK(r.g == 1);
    CHECK(r.beta == Catch::Approx(-0.1).margin(1e-14));

    r = beta_reduce(1, pi);
    CHECK(r.boundary);
    CHECK_FALSE(beta_reduce(3, 1.0).boundary);
    CHECK_THROWS_AS(beta_reduce(0, 1.0), invalid_input);

    SECTION("large n against a 50-digit reduction") {
        using big = boost::multiprecision::cpp_bin_float_50;
        const double alpha = std::sqrt(2.0);
        const std::int64_t n = 1000000;
        const big x = big(n) * big(alpha);
        const big two_pi = 2 * boost::math::constants::pi<big>();
        const big g = boost::multiprecision::round(x / two_pi);
        const big beta = x - g * two_pi;
        r = beta_reduce(n, alpha);
        CHECK(r.g == g.convert_to<long long>());
        CHECK(std::abs(r.beta - beta.convert_to<double>()) < 1e-6);
        CHECK(std::abs(r.beta - beta.convert_to<double>()) < 1e-9);
    }
}

TEST_CASE("twist map evaluation", "[twist]") {
    std::mt19937_64 rng(31);
    const TwistParams tp = standard_params();

    SECTION("zero family is the twist") {
        const TwistMap map(CoefficientFamily(1, true), tp);
        for (int k = 0; k < 20; ++k) {
            const point2 p = random_point(rng, 0.4);
            CHECK(dist(map(p), twist_eval(tp, p)) < 1e-15);
            const cplx om = tp.omega(p[0] * p[1]);
            const point2 closed{p[0] * std::exp(I * 7.0 * om), p[1] * std::exp(-I * 7.0 * om)};
            CHECK(dist(iterate(map, 7, p), closed) < 1e-14);
        }
    }

    SECTION("the product is an integral") {
        for (int k = 0; k < 200; ++k) {
            const auto fam = random_hermitian_family(rng, 1 + k % 2, 8, 0.3, 5);
            const TwistMap map(fam, {tp.alpha, fam.s(), 0.1, 0.5});
            const point2 p = random_point(rng, 0.3);
            const point2 q = map(p);
            const cplx k0 = p[0] * p[1];
            CHECK(std::abs(q[0] * q[1] - k0) <= 1e-13 * std::abs(k0));
        }
    }

    SECTION("inverse and real-slice reversibility") {
        for (int k = 0; k < 100; ++k) {
            const auto fam = random_hermitian_family(rng, 1, 8, 0.3, 5);
            const TwistMap map(fam, tp);
            const cplx z = 0.3 * random_unit_disk(rng);
            const point2 p{z, std::conj(z)};
            const point2 fp = map(p);
            CHECK(std::abs(fp[1] - std::conj(fp[0])) < 1e-15);
            const point2 tpt = map(point2{p[1], p[0]});
            CHECK(dist(map.inverse(p), point2{tpt[1], tpt[0]}) < 1e-11);
            CHECK(dist(map.inverse(fp), p) < 1e-14);
        }
    }

    SECTION("iterate is repeated evaluation") {
        const auto fam = random_hermitian_family(rng, 1, 8, 0.2, 4);
        const TwistMap map(fam, tp);
        const point2 p = random_point(rng, 0.2);
        point2 q = p;
        for (int k = 0; k < 5; ++k) {
            q = map(q);
        }
        CHECK(iterate(map, 5, p) == q);
        CHECK(iterate(map, 1, p) == map(p));
        CHECK_THROWS_AS(iterate(map, 0, p), invalid_input);
    }

    SECTION("overflow guard") {
        const TwistMap map(CoefficientFamily(1, true), tp);
        CHECK_THROWS_AS(map(point2{1.5, 0.1}), hypothesis_violation);
    }

    SECTION("first-order response of a single mode") {
        CoefficientFamily base(1, false);
        base.set(5, 0, {0.6, 0.3});
        const point2 p{cplx{0.2, 0.1}, cplx{-0.15, 0.05}};
        const cplx om = tp.omega(p[0] * p[1]);
        const cplx predicted =
            I * base.evaluate(p[0] * std::exp(I * om), p[1] * std::exp(-I * om)) + I * base.evaluate(p[1], p[0]);
        double prev = 0.0;
        for (double t : {1e-3, 5e-4}) {
            const TwistMap map(base.scaled(t), tp);
            const point2 q = map(p);
            const cplx pcorr = q[0] * std::exp(-I * om) / p[0] - 1.0;
            const double err = std::abs(pcorr / t - predicted);
            CHECK(err < 10.0 * t * std::abs(predicted) + 1e-12);
            if (prev > 0.0) {
                CHECK(prev / err == Catch::Approx(2.0).epsilon(0.1));
            }
            prev = err;
        }
    }

    SECTION("jet agrees with the numeric map") {
        const auto fam = random_hermitian_family(rng, 1, 6, 0.4, 4);
        const TwistMap map(fam, tp);
        const MapJet J = varphi_jet(fam, tp, 16);
        const point2 p{cplx{0.03, 0.01}, cplx{0.02, -0.02}};
        const auto [x, y] = J.evaluate(p[0], p[1]);
        CHECK(dist(map(p), point2{x, y}) < 1e-15 * std::abs(p[0]));
    }
}

TEST_CASE("constants", "[twist]") {
    const TwistParams tp{1.0, 1, 1.0, 0.5};
    const double d0 = compute_d0(tp, 100);
    CHECK(d0 == Catch::Approx(1.0 / 32768.0).epsilon(1e-14));
    CHECK(d0 == Catch::Approx(3.0518e-5).epsilon(1e-4));

    for (int s : {1, 2, 3}) {
        for (double m0 : {0.01, 0.1, 1.0}) {
            for (double R : {0.1, 0.5, 0.9}) {
                for (std::int64_t n : {1, 10, 100, 10000}) {
                    const TwistParams p{1.0, s, m0, R};
                    const double d = compute_d0(p, n);
                    CHECK(d <= R / 16.0);
                    const double nd = static_cast<double>(n) * std::pow(d, 2 * s);
                    CHECK(nd > 0.0);
                    CHECK(nd <= 0.5 * (1.0 + 1e-15));
                }
            }
        }
    }

    SECTION("calibrated domain") {
        const TwistParams p = standard_params();
        const double c2 = calibrate_c2(p);
        CHECK(c2 < p.R);
        const CurveDomain dom = compute_constants(p, 100, c2);
        CHECK(dom.epsilon0 == c2);
        CHECK(dom.delta == Catch::Approx(std::pow(c2 / 4.0, 2)));
        CHECK(dom.r0 == Catch::Approx(c2 / 20.0));
        // The calibrated radius does not meet r0 < d0/2; the flag records it.
        CHECK(dom.r0_below_half_d0 == (dom.r0 < dom.d0 / 2.0));

        // |(−β/n)^{1/(2s)}| < r0/2 whenever |β| < δ
        for (double frac : {0.999, 0.5, 1e-3}) {
            CHECK(std::abs(unperturbed_zeta(1, 100, -frac * dom.delta, 2)) < dom.r0 / 2.0);
        }
    }
}

TEST_CASE("majorant recursion", "[twist]") {
    const TwistParams tp{1.0, 1, 1.0, 0.5};
    const auto rep = majorant_sequence(tp, 100, 100);
    REQUIRE(rep.f.size() == 101);
    CHECK(rep.f[0] == 0.0);
    const double d0 = rep.d0;
    const double f1 = (tp.m0 / std::pow(tp.R, 3)) * std::pow(2 * d0, 3) / (1.0 - 2 * d0 / tp.R);
    CHECK(rep.f[1] == Catch::Approx(f1).epsilon(1e-14));
    CHECK(rep.f[1] <= 1.0 / 400.0);
    CHECK(rep.violations == 0);
    for (std::size_t k = 0; k < rep.f.size(); ++k) {
        CHECK(rep.f[k] <= static_cast<double>(k) / 400.0);
    }
    CHECK_THROWS_AS(majorant_sequence(tp, 10, 11), invalid_input);
}

TEST_CASE("h and the branch solver", "[twist]") {
    std::mt19937_64 rng(47);
    const TwistParams tp = standard_params();
    const double c2 = calibrate_c2(tp);
    const ResonanceData res = first_resonance(tp.alpha, std::pow(c2 / 4.0, 2));
    const CurveDomain dom = compute_constants(tp, res.n, c2);

    SECTION("zero family") {
        const TwistMap map(CoefficientFamily(1, true), tp);
        CHECK(std::abs(h_eval(map, res.n, {1e-3, 2e-4}, {0.9, 0.3}).h) < 1e-14);
        for (int j : {1, 2}) {
            const auto b = solve_branch(map, res, dom, j, std::polar(1.0, 0.7));
            CHECK(std::abs(b.zeta - unperturbed_zeta(1, res.n, res.beta, j)) < 1e-16);
        }
        const ResonanceData toy{100, 0, -1e-4, false};
        const CurveDomain wide = compute_constants(tp, 100, c2);
        const auto b = solve_branch(map, toy, wide, 2, 1.0);
        CHECK(b.zeta.real() == Catch::Approx(1e-3).epsilon(1e-13));
        const auto curve = periodic_curve(map, res, dom, 2, 16, 4);
        for (const auto &smp : curve.samples) {
            CHECK(std::abs(smp.zeta - unperturbed_zeta(1, res.n, res.beta, 2)) < 1e-16);
        }
        CHECK(std::abs(curve.laurent_coefficient(0) - unperturbed_zeta(1, res.n, res.beta, 2)) < 1e-16);
        for (int k = 1; k <= 4; ++k) {
            CHECK(std::abs(curve.laurent_coefficient(k)) < 1e-17);
            CHECK(std::abs(curve.laurent_coefficient(-k)) < 1e-17);
        }
    }

    SECTION("|h| stays below 1/4 inside the disk") {
        const auto fam = random_hermitian_family(rng, 1, 10, 0.1, 6);
        const TwistMap map(fam, tp);
        for (int k = 0; k < 50; ++k) {
            const cplx zeta = 0.99 * dom.r0 * random_unit_disk(rng);
            const cplx w = std::polar(0.55 + 1.4 * (k % 5) / 4.0, 0.37 * k);
            CHECK(std::abs(h_eval(map, res.n, zeta, w).h) <= 0.25);
        }
    }

    SECTION("h linearization") {
        CoefficientFamily base(1, false);
        base.set(4, 0, {0.5, -0.2});
        base.set(1, 3, {0.1, 0.4});
        const cplx zeta{0.6 * dom.r0, 0.1 * dom.r0};
        const cplx w = std::polar(1.2, 0.4);
        const cplx u = std::exp(I * tp.omega(zeta * zeta));
        cplx sum{};
        for (std::int64_t k = 0; k < res.n; ++k) {
            const cplx uk = std::pow(u, static_cast<double>(k));
            const cplx x = zeta * w * uk, y = zeta / w / uk;
            sum += I * (base.evaluate(x * u, y / u) + base.evaluate(y, x));
        }
        const cplx predicted = sum / (I * static_cast<double>(res.n) * std::pow(zeta, 2));
        double prev = 0.0;
        for (double t : {1e-3, 5e-4}) {
            const TwistMap map(base.scaled(t), tp);
            const double err = std::abs(h_eval(map, res.n, zeta, w).h / t - predicted);
            if (prev > 0.0) {
                CHECK(prev / err == Catch::Approx(2.0).epsilon(0.1));
            }
            prev = err;
        }
        CHECK(prev < 1e-2 * std::abs(predicted));
    }

    SECTION("hypothesis checks") {
        const TwistMap map(CoefficientFamily(1, true), tp);
        const ResonanceData positive{res.n, res.g, 1e-4, false};
        CHECK_THROWS_AS(solve_branch(map, positive, dom, 2, 1.0), hypothesis_violation);
        const ResonanceData deep{res.n, res.g, -2.0 * dom.delta, false};
        CHECK_THROWS_AS(solve_branch(map, deep, dom, 2, 1.0), hypothesis_violation);
        CHECK_THROWS_AS(solve_branch(map, res, dom, 2, 2.5), invalid_input);
        CHECK_THROWS_AS(solve_branch(map, res, dom, 3, 1.0), invalid_input);
        CHECK_THROWS_AS(periodic_curve(map, res, dom, 2, 8, 4), invalid_input);
    }

    SECTION("perturbed curves") {
        const auto fam = random_hermitian_family(rng, 1, 10, 0.1, 6);
        const TwistMap map(fam, tp);
        const auto c128 = periodic_curve(map, res, dom, 2, 128, 32);
        const auto c256 = periodic_curve(map, res, dom, 2, 256, 32);
        CHECK(c128.max_residual < 1e-10);
        CHECK(c256.max_residual < 1e-10);
        double max_im = 0.0;
        for (const auto &smp : c256.samples) {
            max_im = std::max(max_im, std::abs(smp.zeta.imag()));
            CHECK(std::abs(smp.zeta) < dom.r0);
            const point2 p{smp.zeta * smp.w, smp.zeta / smp.w};
            CHECK(dist(iterate(map, res.n, p), p) < 1e-10);
        }
        CHECK(max_im < 1e-9);
        for (int k = -32; k <= 32; ++k) {
            CHECK(std::abs(c128.laurent_coefficient(k) - c256.laurent_coefficient(k)) < 1e-10);
        }
    }

    SECTION("branch symmetry") {
        const auto fam = random_hermitian_family(rng, 1, 10, 0.1, 6);
        const TwistMap map(fam, tp);
        for (int k = 0; k < 8; ++k) {
            const cplx w = std::polar(0.6 + 0.15 * k, 0.9 * k);
            const cplx z1 = solve_branch(map, res, dom, 1, w).zeta;
            const cplx z2 = solve_branch(map, res, dom, 2, -w).zeta;
            CHECK(std::abs(z1 + z2) < 1e-15);
        }
    }

    SECTION("twist order two") {
        TwistParams tp2 = standard_params(2);
        const double c2b = calibrate_c2(tp2);
        // Plant a resonance at n = 12 with β = −δ/2.
        const double delta2 = std::pow(c2b / 4.0, 4);
        tp2.alpha = (10.0 * pi - delta2 / 2.0) / 12.0;
        const ResonanceData r2 = beta_reduce(12, tp2.alpha);
        REQUIRE(r2.beta == Catch::Approx(-delta2 / 2.0).epsilon(1e-6));
        const CurveDomain d2 = compute_constants(tp2, r2.n, c2b);
        const auto fam = random_hermitian_family(rng, 2, 10, 0.1, 6);
        const TwistMap map(fam, tp2);
        const cplx w = std::polar(1.1, 0.3);
        std::array<cplx, 4> z{};
        for (int j = 1; j <= 4; ++j) {
            const auto b = solve_branch(map, r2, d2, j, j <= 2 ? w : -w);
            CHECK(b.return_residual < 1e-10);
            z[static_cast<std::size_t>(j - 1)] = b.zeta;
        }
        CHECK(std::abs(z[0] + z[2]) < 1e-15);
        CHECK(std::abs(z[1] + z[3]) < 1e-15);
        const auto curve = periodic_curve(map, r2, d2, 4, 32, 8);
        for (const auto &smp : curve.samples) {
            CHECK(std::abs(smp.zeta.imag()) < 1e-9);
        }
    }
}
