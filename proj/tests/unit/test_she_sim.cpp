#include <doctest.h>

#include "shelab/errors.hpp"
#include "shelab/heat_kernel.hpp"
#include "shelab/she_sim.hpp"

#include <cmath>

using namespace shelab;

namespace {

GridSpec grid(double dx, double L, double dt, Boundary b = Boundary::dirichlet_zero)
{
    return GridSpec{dx, L, dt, b};
}

double max_rel_err_vs_heat(const Field& f, double xmax, double factor)
{
    double worst = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double x = f.grid().position(j);
        if (std::abs(x) > xmax + 1e-12)
            continue;
        const double exact = heat_kernel(f.time(), x) * factor;
        worst = std::max(worst, std::abs(f.value(j) / exact - 1.0));
    }
    return worst;
}

} // namespace

TEST_CASE("grid geometry and validation")
{
    const auto g = grid(0.1, 1.0, 0.01);
    CHECK(g.cell_count() == 21);
    CHECK(g.origin() == 10);
    CHECK(g.position(10) == 0.0);
    CHECK(g.nearest_cell(0.26) == 13);
    CHECK_THROWS_AS(g.nearest_cell(5.0), DomainError);
    CHECK_THROWS_AS(grid(0.1, 1.0, 0.02).validate(), ConfigError);
    CHECK_THROWS_AS(grid(1.0, 0.5, 0.5).validate(), ConfigError);
    CHECK_THROWS_AS(grid(0.1, 10.0, 0.01).validate_for(5.0, 1.0), ConfigError);
    CHECK_NOTHROW(grid(0.1, 13.0, 0.01).validate_for(5.0, 1.0));
    CHECK(g.steps_to(1.0) == 100);
    CHECK_THROWS_AS(g.steps_to(0.015), ConfigError);
}

TEST_CASE("init_dirac")
{
    const auto f = init_dirac(grid(0.1, 1.0, 0.01));
    CHECK(f.size() == 21);
    CHECK(f.time() == 0.0);
    const auto v = f.values();
    int nonzero = 0;
    for (std::size_t j = 0; j < v.size(); ++j)
        if (v[j] != 0.0)
            ++nonzero;
    CHECK(nonzero == 1);
    CHECK(v[10] == 10.0);
    CHECK(f.mass() == 1.0);
    CHECK(init_dirac(grid(0.05, 20.0, 0.0025)).mass() == 1.0);
    CHECK(init_dirac(grid(0.03, 3.0, 0.0009)).mass() == 1.0);
}

TEST_CASE("heat_step basics")
{
    const auto g = grid(0.1, 2.0, 0.01, Boundary::periodic);
    const auto zero = Field::from_values(g, 0, std::vector<double>(g.cell_count(), 0.0));
    CHECK(heat_step(zero).values() == zero.values());
    const auto flat = Field::from_values(g, 0, std::vector<double>(g.cell_count(), 3.0));
    const auto out = heat_step(flat);
    CHECK(out.time() == doctest::Approx(0.01));
    for (double v : out.values())
        CHECK(v == doctest::Approx(3.0).epsilon(1e-14));

    // raw Dirichlet mass is non-increasing
    auto gd = g;
    gd.boundary = Boundary::dirichlet_zero;
    std::vector<double> bump(gd.cell_count(), 0.0);
    bump[1] = 10.0;
    auto f = Field::from_values(gd, 0, bump);
    double m = f.mass();
    for (int k = 0; k < 20; ++k) {
        f = heat_step(f);
        CHECK(f.mass() <= m + 1e-15);
        m = f.mass();
    }
}

TEST_CASE("heat flow of Dirac data matches the heat kernel")
{
    const auto g = grid(0.05, 12.0, 0.0025);
    auto f = init_dirac(g);
    for (int k = 0; k < 400; ++k)
        f = heat_step(f);
    CHECK(f.time() == doctest::Approx(1.0));
    CHECK(max_rel_err_vs_heat(f, 4.0, 1.0) < 1e-3);
    // raw representation as well
    auto r = Field::from_values(g, 0, init_dirac(g).values());
    for (int k = 0; k < 400; ++k)
        r = heat_step(r);
    CHECK(max_rel_err_vs_heat(r, 4.0, 1.0) < 1e-3);
}

TEST_CASE("noise_step")
{
    const auto g = grid(0.1, 1.0, 0.01);
    auto f = Field::from_values(g, 0, std::vector<double>(g.cell_count(), 2.0));
    const auto out = noise_step(f, NoiseSlice{0, std::vector<double>(g.cell_count(), 0.0)});
    for (double v : out.values())
        CHECK(v == doctest::Approx(2.0 * std::exp(-0.05)).epsilon(1e-15));
    CHECK(out.time() == f.time());
    CHECK_THROWS_AS(noise_step(f, NoiseSlice{0, std::vector<double>(3, 0.0)}), ContractViolation);
    const auto zero = Field::from_values(g, 0, std::vector<double>(g.cell_count(), 0.0));
    CHECK(noise_step(zero, draw_slice(NoiseStream{1, 0}, 0, g.cell_count())).values() == zero.values());

    // the factor has mean one: SE = sqrt(e^{dt/dx} - 1) / sqrt(n)
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        sum += std::exp(std::sqrt(0.1) * noise_value(NoiseStream{3, 0}, static_cast<std::uint64_t>(i), 0) - 0.05);
    const double se = std::sqrt(std::expm1(0.1)) / std::sqrt(double(n));
    CHECK(std::abs(sum / n - 1.0) < 3.0 * se);
}

TEST_CASE("zero-noise evolution equals heat flow times the splitting factor")
{
    const auto g = grid(0.05, 12.0, 0.00125);
    const std::vector<double> cps{0.5, 1.0};
    const auto fields = evolve(g, ZeroNoise{}, cps);
    REQUIRE(fields.size() == 2);
    auto h = init_dirac(g);
    std::uint64_t n = 0;
    for (std::size_t c = 0; c < 2; ++c) {
        while (h.step() < fields[c].step()) {
            h = heat_step(h);
            ++n;
        }
        const double factor = std::exp(-static_cast<double>(n) * g.dt / (2 * g.dx));
        for (std::size_t j = 0; j < h.size(); ++j)
            CHECK(fields[c].data()[j] == doctest::Approx(h.data()[j] * factor).epsilon(1e-12));
    }
    // residual is flat at n * (-dt/2dx)
    const auto r = height_residual(fields[1]);
    for (std::size_t j = 0; j < r.values.size(); ++j)
        if (std::abs(g.position(j)) <= 4.0)
            CHECK(r.values[j] == doctest::Approx(-800 * g.dt / (2 * g.dx)).epsilon(1e-3));
}

TEST_CASE("evolve is deterministic and positive")
{
    const auto g = grid(0.1, 6.0, 0.01);
    const std::vector<double> cps{0.3, 1.0};
    const auto a = evolve(g, NoiseStream{9, 4}, cps);
    const auto b = evolve(g, NoiseStream{9, 4}, cps);
    CHECK(a == b);
    CHECK(a[0].time() == doctest::Approx(0.3));
    for (const auto& f : a)
        for (double v : f.data())
            CHECK(v >= 0.0);
    CHECK(evolve(g, NoiseStream{9, 5}, cps)[1] != a[1]);
    const std::vector<double> bad{0.015};
    CHECK_THROWS_AS(evolve(g, ZeroNoise{}, bad), ConfigError);
}

TEST_CASE("height residual masking")
{
    const auto g = grid(0.1, 2.0, 0.01);
    std::vector<double> z(g.cell_count());
    for (std::size_t j = 0; j < z.size(); ++j)
        z[j] = heat_kernel(1.0, g.position(j));
    auto f = Field::from_values(g, 100, z);
    auto r = height_residual(f);
    CHECK(r.invalid_count == 0);
    for (double v : r.values)
        CHECK(std::abs(v) < 1e-14);
    z[0] = 0.0;
    r = height_residual(Field::from_values(g, 100, z));
    CHECK(r.invalid_count == 1);
    CHECK(r.valid[0] == 0);
    CHECK(r.valid[1] == 1);
    CHECK_THROWS_AS(height_residual(init_dirac(g)), DomainError);
}
