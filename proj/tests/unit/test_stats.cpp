#include <doctest.h>

#include "shelab/errors.hpp"
#include "shelab/fit.hpp"
#include "shelab/noise.hpp"
#include "shelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace shelab;

namespace {

HeightResidual residual(const GridSpec& g, double t, std::vector<double> v)
{
    HeightResidual r;
    r.grid = g;
    r.time = t;
    r.valid.assign(v.size(), 1);
    r.values = std::move(v);
    return r;
}

// Replicate `rep`: i.i.d. normals, or a stationary AR(1) with covariance exp(-|x|) when ou = true.
std::vector<double> synthetic(const GridSpec& g, std::uint64_t rep, bool ou)
{
    const std::size_t n = g.cell_count();
    std::vector<double> v(n);
    const NoiseStream s{77, rep};
    const double rho = std::exp(-g.dx);
    for (std::size_t j = 0; j < n; ++j) {
        const double xi = noise_value(s, 0, j);
        v[j] = (!ou || j == 0) ? xi : rho * v[j - 1] + std::sqrt(1.0 - rho * rho) * xi;
    }
    return v;
}

std::vector<HeightResidual> ensemble(const GridSpec& g, std::size_t M, bool ou)
{
    std::vector<HeightResidual> out;
    for (std::size_t m = 0; m < M; ++m)
        out.push_back(residual(g, 1.0, synthetic(g, m, ou)));
    return out;
}

std::vector<double> normals(std::uint64_t seed, std::size_t n)
{
    std::vector<double> v(n);
    fill_slice(NoiseStream{seed, 0}, 0, v);
    return v;
}

} // namespace

TEST_CASE("covariance recovers i.i.d. synthetic data")
{
    const GridSpec g{0.1, 12.0, 0.001};
    const auto ens = ensemble(g, 300, false);
    const std::vector<double> lags = {0.0, 0.5, 1.0, 2.0};
    const auto est = estimate_height_covariance(ens, 1.0, lags, 10.0);
    REQUIRE(est.cov.size() == 4);
    CHECK(std::abs(est.cov[0] - 1.0) <= 3.0 * est.se[0]);
    for (std::size_t i = 1; i < 4; ++i)
        CHECK(std::abs(est.cov[i]) <= 3.0 * est.se[i]);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(est.se[i] > 0.0);
        CHECK(est.n_effective[i] == 300.0);
    }
}

TEST_CASE("covariance recovers an exp(-|x|) field")
{
    const GridSpec g{0.1, 25.0, 0.001};
    const auto ens = ensemble(g, 400, true);
    const std::vector<double> lags = {0.0, 0.5, 1.0, 2.0};
    const auto est = estimate_height_covariance(ens, 1.0, lags, 20.0);
    for (std::size_t i = 0; i < lags.size(); ++i)
        CHECK(std::abs(est.cov[i] - std::exp(-lags[i])) <= 3.0 * est.se[i]);
}

TEST_CASE("covariance accumulator merges to bit-identical output")
{
    const GridSpec g{0.1, 6.0, 0.001};
    const auto ens = ensemble(g, 60, true);
    const std::vector<double> lags = {0.0, 0.3, 1.0, 2.5};

    CovarianceAccumulator whole(g, 1.0, lags, 5.0);
    for (std::size_t m = 0; m < ens.size(); ++m)
        whole.add(m, ens[m]);
    const auto ref = whole.finalize();

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<std::size_t> order(ens.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const std::size_t parts = 2 + trial;
        std::vector<CovarianceAccumulator> acc(parts, CovarianceAccumulator(g, 1.0, lags, 5.0));
        for (std::size_t i = 0; i < order.size(); ++i)
            acc[rng() % parts].add(order[i], ens[order[i]]);
        CovarianceAccumulator merged(g, 1.0, lags, 5.0);
        for (auto& a : acc)
            merged.merge(a);
        const auto got = merged.finalize();
        CHECK(got.cov == ref.cov);
        CHECK(got.se == ref.se);
        CHECK(got.n_effective == ref.n_effective);
    }
}

TEST_CASE("covariance is centering invariant and scale equivariant")
{
    const GridSpec g{0.1, 6.0, 0.001};
    auto ens = ensemble(g, 40, true);
    const std::vector<double> lags = {0.0, 0.5, 1.5};
    const auto ref = estimate_height_covariance(ens, 1.0, lags, 5.0);

    auto shifted = ens;
    for (auto& r : shifted)
        for (std::size_t j = 0; j < r.values.size(); ++j)
            r.values[j] += 3.0 * std::sin(g.position(j)) - 0.2 * g.position(j) * g.position(j);
    const auto sh = estimate_height_covariance(shifted, 1.0, lags, 5.0);

    auto scaled = ens;
    for (auto& r : scaled)
        for (double& v : r.values)
            v *= 3.0;
    const auto sc = estimate_height_covariance(scaled, 1.0, lags, 5.0);

    for (std::size_t i = 0; i < lags.size(); ++i) {
        CHECK(sh.cov[i] == doctest::Approx(ref.cov[i]).epsilon(1e-11));
        CHECK(sc.cov[i] == doctest::Approx(9.0 * ref.cov[i]).epsilon(1e-13));
        CHECK(sc.se[i] == doctest::Approx(9.0 * ref.se[i]).epsilon(1e-12));
    }
}

TEST_CASE("covariance rejects bad windows and skips masked replicates")
{
    const GridSpec g{0.1, 6.0, 0.001};
    CHECK_THROWS_AS(CovarianceAccumulator(g, 1.0, {0.0, 1.0}, 0.0), EstimationError);
    CHECK_THROWS_AS(CovarianceAccumulator(g, 1.0, {0.0, 11.0}, 5.0), EstimationError);

    auto ens = ensemble(g, 5, false);
    ens[2].valid[g.origin()] = 0;
    ens[2].invalid_count = 1;
    CovarianceAccumulator acc(g, 1.0, {0.0, 1.0}, 5.0);
    for (std::size_t m = 0; m < ens.size(); ++m)
        acc.add(m, ens[m]);
    CHECK(acc.replicate_count() == 4);
    CHECK(acc.skipped() == 1);

    CovarianceAccumulator empty(g, 1.0, {0.0, 1.0}, 5.0);
    CHECK_THROWS_AS(empty.finalize(), EstimationError);
}

TEST_CASE("spatial average of exact and shifted profiles")
{
    const GridSpec g{0.05, 120.0, 0.001};
    const std::size_t n = g.cell_count();
    std::vector<double> profile(n);
    for (std::size_t j = 0; j < n; ++j)
        profile[j] = std::cos(g.position(j));
    const double N = 100.0;

    const auto zero = spatial_average(residual(g, 1.0, profile), profile, N);
    CHECK(zero.value == 0.0);
    CHECK(zero.N == N);

    auto plus = profile;
    for (double& v : plus)
        v += 0.7;
    const auto c = spatial_average(residual(g, 1.0, plus), profile, N);
    CHECK(c.value == doctest::Approx(0.7 * N / std::sqrt(N * std::log(N))).epsilon(1e-12));

    const auto scalar = spatial_average(residual(g, 1.0, std::vector<double>(n, 2.5)), 2.0, N, -50.0);
    CHECK(scalar.value == doctest::Approx(0.5 * N / std::sqrt(N * std::log(N))).epsilon(1e-12));

    CHECK_THROWS_AS(spatial_average(residual(g, 1.0, profile), profile, 200.0), DomainError);
    CHECK_THROWS_AS(spatial_average(residual(g, 1.0, profile), profile, 2.0), DomainError);
}

TEST_CASE("KS normality: null calibration, power and degenerate input")
{
    const auto z = normals(2024, 10000);
    const auto null = ks_normality(z);
    CHECK(null.p_value > 0.001);
    CHECK_FALSE(null.reject);
    CHECK(null.sample_size == 10000);

    std::vector<double> u(10000);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double& v : u)
        v = unif(rng);
    const auto power = ks_normality(u);
    CHECK(power.p_value < 1e-6);
    CHECK(power.reject);

    const auto deg = ks_normality(std::vector<double>(100, 3.0));
    CHECK(deg.statistic == 0.5);
    CHECK(deg.reject);

    CHECK_THROWS_AS(ks_normality(std::vector<double>(49, 0.0)), EstimationError);
}

TEST_CASE("KS normality on 1e5 noise draws across replicates")
{
    std::vector<double> xs;
    for (std::uint64_t rep = 0; rep < 100; ++rep)
        for (std::uint64_t cell = 0; cell < 1000; ++cell)
            xs.push_back(noise_value(NoiseStream{9, rep}, rep * 7, cell));
    const auto r = ks_one_sample(xs, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
    CHECK(r.p_value > 0.001);
}

TEST_CASE("two-sample KS and the Kolmogorov distribution")
{
    CHECK(kolmogorov_survival(0.0) == 1.0);
    CHECK(kolmogorov_survival(1.3580986) == doctest::Approx(0.05).epsilon(1e-5));
    const auto a = normals(1, 2000), b = normals(2, 3000);
    CHECK(ks_two_sample(a, b).p_value > 0.001);
    auto c = b;
    for (double& v : c)
        v += 0.3;
    CHECK(ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("fdd covariance: variance identity, independence and contract")
{
    const auto a = normals(3, 5000);
    auto b = a;
    for (std::size_t i = 0; i < b.size(); ++i)
        b[i] = 0.6 * a[i] + 0.8 * normals(4, 5000)[i];

    const auto self = fdd_covariance(a, a);
    CHECK(self.value == sample_variance(a));

    const auto paired = fdd_covariance(a, b);
    CHECK(std::abs(paired.value - 0.6) <= 3.0 * paired.se);

    auto shuffled = b;
    std::mt19937_64 rng(11);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto ind = fdd_covariance(a, shuffled);
    CHECK(std::abs(ind.value) <= 3.0 * ind.se);

    CHECK_THROWS_AS(fdd_covariance(a, std::vector<double>(10, 0.0)), ContractViolation);
}

TEST_CASE("decay fit on exact models")
{
    CovarianceEstimate c;
    c.t = 1.0;
    for (double x = 3.0; x <= 10.0; x += 1.0) {
        c.lags.push_back(x);
        c.cov.push_back(1.0 / x);
        c.se.push_back(0.01 / x);
        c.n_effective.push_back(100.0);
    }
    const auto f1 = fit_decay(c, 3.0, 10.0);
    CHECK(f1.b == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(f1.c == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(f1.a == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(f1.lags_used.size() == 8);

    for (std::size_t i = 0; i < c.lags.size(); ++i)
        c.cov[i] = 1.0 / (c.lags[i] * c.lags[i]);
    const auto f2 = fit_decay(c, 3.0, 10.0);
    CHECK(f2.b == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(f2.b_ci.lo <= 2.0);
    CHECK(f2.b_ci.hi >= 2.0);

    c.cov[2] = -0.1;
    const auto f3 = fit_decay(c, 3.0, 10.0);
    CHECK(f3.lags_used.size() == 7);
    CHECK(f3.warnings.size() == 1);
    CHECK(f3.b == doctest::Approx(2.0).epsilon(1e-10));

    CHECK_THROWS_AS(fit_decay(c, 3.0, 4.0), EstimationError);
}
