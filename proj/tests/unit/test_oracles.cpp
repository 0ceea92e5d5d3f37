#include <doctest.h>

#include "shelab/errors.hpp"
#include "shelab/heat_kernel.hpp"
#include "shelab/oracles.hpp"
#include "shelab/quadrature.hpp"
#include "shelab/volterra.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>

using namespace shelab;

namespace {

constexpr double kPi = std::numbers::pi;

// int_R (1 - cos bz)/z^2 exp(-c z^2) dz
double damped_fejer(double b, double c)
{
    b = std::abs(b);
    if (c == 0.0)
        return kPi * b;
    const double q = b * b / (4.0 * c);
    return kPi * b * std::erf(b / (2.0 * std::sqrt(c))) + 2.0 * std::sqrt(kPi * c) * std::expm1(-q);
}

double twotime_closed(double t1, double t2, double N)
{
    const double m = std::min(t1, t2), a1 = 1.0 / t1, a2 = 1.0 / t2;
    auto f = [&](double tau) {
        const double c = std::max(0.0, std::pow(N, tau) / m - 0.5 / t1 - 0.5 / t2) / (N * N);
        return damped_fejer(a1, c) + damped_fejer(a2, c) - damped_fejer(a1 - a2, c);
    };
    return t1 * t2 / (2.0 * kPi) * integrate_gk(f, 0.0, 2.0, 1e-12).value;
}

double lemma_y_closed_inner(double b)
{
    // int_R p_1(y) min(1, sqrt(b |y|)) dy
    if (b == 0.0)
        return 0.0;
    const double K = 1.0 / b;
    const double head = std::sqrt(b) * std::pow(2.0, -0.25) * boost::math::tgamma_lower(0.75, 0.5 * K * K) /
                        std::sqrt(2.0 * kPi);
    return 2.0 * head + std::erfc(K / std::sqrt(2.0));
}

} // namespace

TEST_CASE("limiting constant is 2 for every t")
{
    for (double t : {0.1, 1.0, 10.0})
        CHECK(std::abs(limiting_constant(t).value - 2.0) < 1e-6);
    CHECK_THROWS_AS(limiting_constant(0.0), DomainError);
}

TEST_CASE("reduced covariance integral: closed form, Riemann sum, second route and ladder")
{
    const auto at0 = reduced_cov_integral(1.0, 0.0);
    CHECK(at0.value == doctest::Approx(std::sqrt(kPi) / 2.0).epsilon(1e-10));

    // 1e6-node midpoint sum in theta, where s = sin^2(theta) makes the integrand smooth
    const std::size_t n = 1000000;
    double riemann = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double th = (static_cast<double>(i) + 0.5) * (kPi / 2.0) / static_cast<double>(n);
        const double s = std::sin(th) * std::sin(th);
        riemann += heat_kernel(2.0 * s * (1.0 - s), 0.0) * 2.0 * std::sin(th) * std::cos(th);
    }
    riemann *= (kPi / 2.0) / static_cast<double>(n);
    CHECK(std::abs(riemann - at0.value) < 1e-6);

    double prev_gap = 1e300;
    for (double x : {10.0, 100.0, 1000.0, 10000.0}) {
        const auto a = reduced_cov_integral(1.0, x);
        const auto b = reduced_cov_integral_angular(1.0, x);
        CHECK(std::abs(a.value - b.value) <= 1e-8 * a.value + 1e-15);
        const double gap = std::abs(2.0 * x * a.value - 2.0);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 1e-2);
}

TEST_CASE("two-time lemma matches the closed-form inner integral")
{
    for (auto [t1, t2] : {std::pair{1.0, 2.0}, std::pair{3.0, 0.5}}) {
        const auto q = lemma_twotime(t1, t2, 100.0);
        CHECK(q.value == doctest::Approx(twotime_closed(t1, t2, 100.0)).epsilon(1e-6));
    }
    CHECK_THROWS_AS(lemma_twotime(1.0, 1.0, 5.0), DomainError);
}

TEST_CASE("lemma_s0 matches its closed-form inner integral and decays like 1/log N")
{
    const double t1 = 1.0, t2 = 1.0, m = 1.0;
    std::vector<double> scaled;
    double prev = 1e300;
    for (double N : {100.0, 1000.0, 10000.0}) {
        const auto q = lemma_s0(t1, t2, N);
        auto outer = [&](double v) {
            // s = m v^4 turns s^{-3/4} ds into 4 m^{1/4} dv
            const double s = m * std::pow(v, 4);
            if (s == 0.0)
                return 0.0;
            const double kappa = (1.0 / s - 0.5 / t1 - 0.5 / t2) / (m * m * N * N);
            return 4.0 * std::pow(m, 0.25) * damped_fejer(1.0, kappa);
        };
        const double ref = t1 * t2 / (kPi * m * std::log(N)) * integrate_gk(outer, 0.0, 1.0, 1e-12).value;
        CHECK(q.value == doctest::Approx(ref).epsilon(1e-6));
        CHECK(q.value < prev);
        prev = q.value;
        scaled.push_back(q.value * std::log(N));
    }
    CHECK(std::abs(scaled.back() / scaled.front() - 1.0) < 0.25);
    CHECK(one_minus_cos_over_sq(0.0) == 0.5);
    CHECK(one_minus_cos_over_sq(1e-5) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("lemma_2: equal-time closed form, decay, dominating integral and inner bound")
{
    double prev = 1e300;
    for (double N : {100.0, 1000.0, 10000.0}) {
        const auto q = lemma_2(1.0, 1.0, N);
        // |1^_{[0,1]}(z)|^2 = 2(1 - cos z)/z^2, and r = 1/(1+u)
        auto outer = [&](double u) { return 2.0 * damped_fejer(1.0, 1.0 + u - 1.0 / (N * N)) / (1.0 + u); };
        const double ref = integrate_exp_sinh(outer, 0.0, 1e-12).value / std::log(N);
        CHECK(q.value == doctest::Approx(ref).epsilon(1e-7));
        CHECK(q.value < prev);
        prev = q.value;
    }

    const auto dom = lemma_2_dominating(1.0);
    CHECK(std::isfinite(dom.value));
    CHECK(dom.value > 0.0);
    auto tail = [](double z) { return std::log(std::numbers::e + std::numbers::e / (z * z)) / (z * z); };
    auto head = [](double z) { return z > 0.0 ? 1.0 + std::log1p(z * z) - 2.0 * std::log(z) : 0.0; };
    const double alt = 2.0 * (integrate_gk(head, 0.0, 1.0, 1e-12).value + integrate_gk(tail, 1.0, INFINITY, 1e-12).value);
    CHECK(std::abs(dom.value - alt) < 1e-6);

    for (double a : {0.01, 1.0, 100.0}) {
        const auto in = lemma_2_inner(a);
        CHECK(in.value == doctest::Approx(std::exp(a) * boost::math::expint(1, a)).epsilon(1e-9));
        CHECK(in.value <= lemma_2_inner_bound(a));
    }
}

TEST_CASE("lemma_y: closed-form inner integral, zero at y = 0, decay")
{
    const double t1 = 1.0, t2 = 2.0, m = 1.0;
    double prev = 1e300;
    for (double N : {100.0, 1000.0, 10000.0, 1e8}) {
        const auto q = lemma_y(t1, t2, N);
        auto outer = [&](double tau) {
            const double b = std::pow(N, -tau) * std::sqrt(std::max(0.0, std::pow(N, tau) / m - 1.0 / t2));
            return lemma_y_closed_inner(b);
        };
        const double ref = integrate_gk(outer, 0.0, 2.0, 1e-12).value / t2;
        CHECK(q.value == doctest::Approx(ref).epsilon(1e-7));
        CHECK(q.value < prev);
        prev = q.value;
    }
    CHECK(prev < 0.1);
    CHECK(lemma_y_integrand(t1, t2, 100.0, 0.7, 0.0) == 0.0);
}

TEST_CASE("Gauss-Hermite rule integrates polynomials exactly")
{
    const auto r = gauss_hermite(12);
    double m0 = 0.0, m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < 12; ++i) {
        m0 += r.weights[i];
        m2 += r.weights[i] * r.nodes[i] * r.nodes[i];
        m4 += r.weights[i] * std::pow(r.nodes[i], 4);
    }
    CHECK(m0 == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(std::sqrt(kPi) / 2.0).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(3.0 * std::sqrt(kPi) / 4.0).epsilon(1e-13));
}

TEST_CASE("Volterra second moment: closed form, symmetry, small-t limit, refusals")
{
    auto closed = [](double t) {
        return 1.0 + std::sqrt(kPi * t) * std::exp(t / 4.0) * 0.5 * std::erfc(-std::sqrt(t / 2.0) / std::sqrt(2.0));
    };
    const SecondMomentVolterra v(0.5);
    CHECK(v.normalized(0.0, 0.0) == doctest::Approx(closed(0.5)).epsilon(1e-4));
    CHECK(v.normalized(0.0, 0.0) > 1.0);
    CHECK(v.self_convergence() < 0.01);
    CHECK(v(0.3, -0.4) == v(-0.4, 0.3));
    // the diagonal ratio does not depend on position
    CHECK(v.phi(0.5, 1.0) == doctest::Approx(v.phi(0.5, 0.0)).epsilon(1e-10));

    double prev = 1e300;
    for (double t : {0.1, 0.01, 0.001}) {
        const double r = SecondMomentVolterra(t).normalized(0.0, 0.0) - 1.0;
        CHECK(r > 0.0);
        CHECK(r < prev);
        prev = r;
    }
    CHECK(prev < 0.03);

    CHECK_THROWS_AS(SecondMomentVolterra(1.5), DomainError);
    VolterraOptions strict;
    strict.time_nodes = 16;
    strict.tolerance = 1e-9;
    CHECK_THROWS_AS(SecondMomentVolterra(1.0, strict), EstimationError);
}
