#include <doctest.h>

#include "shelab/errors.hpp"
#include "shelab/heat_kernel.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace shelab;

namespace {

bool rel_close(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max(1.0, std::abs(a));
}

} // namespace

TEST_CASE("heat kernel point values")
{
    CHECK(heat_kernel(1.0, 0.0) == doctest::Approx(0.39894228040143267).epsilon(1e-15));
    CHECK(heat_kernel(2.0, 0.0) == doctest::Approx(0.2820947917738781).epsilon(1e-15));
    // mpmath at 30 digits: 0.004431848411938007175602...
    CHECK(heat_kernel(1.0, 3.0) == doctest::Approx(0.0044318484119380075).epsilon(1e-14));
    CHECK(heat_kernel(1.0, -3.0) == heat_kernel(1.0, 3.0));
    CHECK(heat_kernel(1.0, 30.0) > 0.0);
    CHECK(heat_kernel(1.0, 60.0) == 0.0);
    CHECK(std::isfinite(log_heat_kernel(1.0, 1e3)));
}

TEST_CASE("heat kernel rejects non-positive time")
{
    CHECK_THROWS_AS(heat_kernel(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(heat_kernel(-1.0, 1.0), DomainError);
    CHECK_THROWS_AS(kernel_product_identity(0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("heat kernel normalization by trapezoid")
{
    for (double t : {0.1, 1.0, 10.0}) {
        const double h = std::sqrt(t) / 200.0;
        const double a = 12.0 * std::sqrt(t);
        const int n = static_cast<int>(std::lround(2 * a / h));
        double sum = 0.5 * (heat_kernel(t, -a) + heat_kernel(t, a));
        for (int i = 1; i < n; ++i)
            sum += heat_kernel(t, -a + i * h);
        CHECK(std::abs(sum * h - 1.0) < 1e-8);
    }
}

TEST_CASE("semigroup property on random inputs")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(0.1, 3.0), ux(-3.0, 3.0), uf(0.05, 0.95);
    for (int rep = 0; rep < 20; ++rep) {
        const double t = ut(rng), s = uf(rng) * t, x = ux(rng);
        const double h = 1e-3;
        double sum = 0.0;
        for (double y = -40.0; y <= 40.0; y += h)
            sum += heat_kernel(s, x - y) * heat_kernel(t - s, y);
        CHECK(std::abs(sum * h - heat_kernel(t, x)) < 1e-8);
    }
}

TEST_CASE("shift identity examples")
{
    auto p = kernel_shift_identity(1.0, 0.25, 0.3, -0.2);
    CHECK(rel_close(p.lhs, p.rhs, 1e-12));
    p = kernel_shift_identity(1.0, 0.5, 0.0, 0.0);
    CHECK(rel_close(p.lhs, std::pow(heat_kernel(0.5, 0.0), 2) / heat_kernel(1.0, 0.0), 1e-14));
    CHECK(rel_close(p.lhs, p.rhs, 1e-12));
    p = kernel_shift_identity(3.0, 2.0, 1.7, -4.2);
    CHECK(rel_close(p.lhs, p.rhs, 1e-12));
    CHECK_THROWS_AS(kernel_shift_identity(1.0, 1.0, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(kernel_shift_identity(1.0, 0.0, 0.0, 0.0), DomainError);
}

TEST_CASE("product identity examples")
{
    auto p = kernel_product_identity(1.0, 1.0, -1.0);
    CHECK(rel_close(p.lhs, p.rhs, 1e-12));
    p = kernel_product_identity(0.5, 0.0, 0.0);
    CHECK(p.lhs == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
    CHECK(rel_close(p.lhs, p.rhs, 1e-12));
    p = kernel_product_identity(2.0, 3.3, 0.7);
    CHECK(rel_close(p.lhs, p.rhs, 1e-12));
}

TEST_CASE("identities over randomized inputs")
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ut(0.01, 10.0), ux(-5.0, 5.0), uf(0.001, 0.999);
    for (int i = 0; i < 10000; ++i) {
        const double t = ut(rng), s = uf(rng) * t, a = ux(rng), b = ux(rng);
        const auto sh = kernel_shift_identity(t, s, a, b);
        REQUIRE(rel_close(sh.lhs, sh.rhs, 1e-12));
        const auto pr = kernel_product_identity(t, a, b);
        REQUIRE(rel_close(pr.lhs, pr.rhs, 1e-12));
    }
}

TEST_CASE("fourier indicator")
{
    CHECK(fourier_indicator(0.0, 1.0) == std::complex<double>(1.0, 0.0));
    // quadrature of the integral of exp(i pi y) over [0,1] gives 2i/pi
    const auto v = fourier_indicator(std::numbers::pi, 1.0);
    CHECK(std::abs(v) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-14));
    CHECK(v.imag() == doctest::Approx(0.63661977236758134).epsilon(1e-14));
    CHECK(std::abs(v.real()) < 1e-15);
    CHECK(std::abs(fourier_indicator(1e6, 1.0)) <= 2e-6);
    for (double z : {1e-9, 1e-7, 5e-7, 2e-6, 1e-3, 0.3, 7.0, -4.0}) {
        const auto w = fourier_indicator(z, 2.0);
        CHECK(std::abs(w) <= 2.0 + 1e-15);
        if (std::abs(z) > 1e-3) {
            const auto direct = (std::exp(std::complex<double>(0.0, 2.0 * z)) - 1.0) / std::complex<double>(0.0, z);
            CHECK(std::abs(w - direct) < 1e-13);
        }
    }
    // continuity across the series switch
    const auto lo = fourier_indicator(0.999999e-6, 1.0), hi = fourier_indicator(1.000001e-6, 1.0);
    CHECK(std::abs(lo - hi) < 1e-11);
    CHECK_THROWS_AS(fourier_indicator(1.0, 0.0), DomainError);
}
