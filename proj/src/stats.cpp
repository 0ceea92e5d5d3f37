#include "shelab/stats.hpp"

#include "shelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace shelab {

CovarianceAccumulator::CovarianceAccumulator(GridSpec grid, double t, std::vector<double> lags,
                                             double bulk_half_width)
    : grid_(grid), t_(t)
{
    if (!(bulk_half_width > 0.0))
        throw EstimationError("covariance: empty bulk window");
    const auto o = static_cast<long>(grid_.origin());
    const long w = std::lround(bulk_half_width / grid_.dx);
    if (o - w < 0 || o + w >= static_cast<long>(grid_.cell_count()))
        throw EstimationError("covariance: bulk window exceeds the grid");
    lo_ = static_cast<std::size_t>(o - w);
    hi_ = static_cast<std::size_t>(o + w);
    for (double lag : lags) {
        const long c = std::lround(lag / grid_.dx);
        if (c < 0 || c > 2 * w)
            throw EstimationError("covariance: lag outside [0, 2W]");
        lag_cells_.push_back(c);
    }
    if (!std::is_sorted(lag_cells_.begin(), lag_cells_.end()))
        throw EstimationError("covariance: lags must be ascending");
}

void CovarianceAccumulator::add(std::uint64_t replicate_id, const HeightResidual& r)
{
    if (r.values.size() != grid_.cell_count())
        throw ContractViolation("covariance: residual grid mismatch");
    for (std::size_t j = lo_; j <= hi_; ++j) {
        if (!r.valid[j]) {
            ++skipped_;
            return;
        }
    }
    if (!rows_.emplace(replicate_id, std::vector<double>(r.values.begin() + lo_, r.values.begin() + hi_ + 1)).second)
        throw ContractViolation("covariance: replicate added twice");
}

void CovarianceAccumulator::merge(const CovarianceAccumulator& other)
{
    if (!(other.grid_ == grid_) || other.lag_cells_ != lag_cells_ || other.lo_ != lo_ || other.hi_ != hi_)
        throw ContractViolation("covariance: merging incompatible accumulators");
    for (const auto& [id, row] : other.rows_)
        if (!rows_.emplace(id, row).second)
            throw ContractViolation("covariance: overlapping replicate sets");
    skipped_ += other.skipped_;
}

CovarianceEstimate CovarianceAccumulator::finalize() const
{
    const std::size_t M = rows_.size();
    if (M == 0)
        throw EstimationError("covariance: no valid replicates");
    const std::size_t width = hi_ - lo_ + 1;

    std::vector<double> mean(width, 0.0);
    for (const auto& [id, row] : rows_)
        for (std::size_t i = 0; i < width; ++i)
            mean[i] += row[i];
    for (double& m : mean)
        m /= static_cast<double>(M);

    CovarianceEstimate est;
    est.t = t_;
    std::vector<double> centred(width);
    std::vector<std::vector<double>> per(lag_cells_.size());
    for (const auto& [id, row] : rows_) {
        for (std::size_t i = 0; i < width; ++i)
            centred[i] = row[i] - mean[i];
        for (std::size_t l = 0; l < lag_cells_.size(); ++l) {
            const auto lag = static_cast<std::size_t>(lag_cells_[l]);
            double acc = 0.0;
            for (std::size_t i = 0; i + lag < width; ++i)
                acc += centred[i + lag] * centred[i];
            per[l].push_back(acc / static_cast<double>(width - lag));
        }
    }
    // per-x mean centering removes one degree of freedom per cell
    const double bessel = M > 1 ? static_cast<double>(M) / static_cast<double>(M - 1) : 1.0;
    for (std::size_t l = 0; l < lag_cells_.size(); ++l) {
        const Estimate e = mean_estimate(per[l]);
        est.lags.push_back(static_cast<double>(lag_cells_[l]) * grid_.dx);
        est.cov.push_back(e.value * bessel);
        est.se.push_back(M > 1 ? e.se * bessel : 0.0);
        est.n_effective.push_back(static_cast<double>(M));
    }
    return est;
}

CovarianceEstimate estimate_height_covariance(std::span<const HeightResidual> ensemble, double t,
                                              std::span<const double> lags, double bulk_half_width)
{
    if (ensemble.empty())
        throw EstimationError("covariance: empty ensemble");
    CovarianceAccumulator acc(ensemble.front().grid, t, std::vector<double>(lags.begin(), lags.end()),
                              bulk_half_width);
    for (std::size_t i = 0; i < ensemble.size(); ++i)
        acc.add(i, ensemble[i]);
    return acc.finalize();
}

SpatialAverageSample spatial_average(const HeightResidual& r, std::span<const double> mean_profile, double N,
                                     double start)
{
    if (!(N >= 3.0))
        throw DomainError("spatial_average: N must be at least 3");
    if (mean_profile.size() != r.values.size())
        throw ContractViolation("spatial_average: mean profile length mismatch");
    const GridSpec& g = r.grid;
    const long a = std::lround(start / g.dx) + static_cast<long>(g.origin());
    const long cells = std::lround(N / g.dx);
    if (a < 0 || a + cells >= static_cast<long>(r.values.size()))
        throw DomainError("spatial_average: window [start, start + N] leaves the grid");
    double acc = 0.0;
    for (long j = a; j <= a + cells; ++j) {
        if (!r.valid[j])
            throw DomainError("spatial_average: invalid cell inside the window");
        const double w = (j == a || j == a + cells) ? 0.5 : 1.0;
        acc += w * (r.values[j] - mean_profile[j]);
    }
    return {r.time, N, acc * g.dx / std::sqrt(N * std::log(N))};
}

SpatialAverageSample spatial_average(const HeightResidual& r, double mean, double N, double start)
{
    const std::vector<double> profile(r.values.size(), mean);
    return spatial_average(r, profile, N, start);
}

double kolmogorov_survival(double lambda)
{
    if (lambda <= 0.0)
        return 1.0;
    if (lambda < 1.0) {
        // theta-function form converges fast for small lambda
        const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double s = 0.0;
        for (int k = 1; k <= 9; k += 2)
            s += std::exp(c * k * k);
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-300)
            break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

namespace {

double ks_p_value(double d, double n_eff)
{
    const double rn = std::sqrt(n_eff);
    return kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d);
}

TestReport make_report(std::string name, double d, double n_eff, std::size_t n, double significance)
{
    TestReport rep{std::move(name), d, ks_p_value(d, n_eff), n, significance, false};
    rep.reject = rep.p_value < significance;
    return rep;
}

} // namespace

TestReport ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf,
                         double significance)
{
    if (samples.empty())
        throw EstimationError("ks: empty sample");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return make_report("ks_one_sample", d, n, x.size(), significance);
}

TestReport ks_normality(std::span<const double> samples, double significance)
{
    if (samples.size() < 50)
        throw EstimationError("ks_normality: fewer than 50 samples");
    const Estimate m = mean_estimate(samples);
    const double sd = std::sqrt(sample_variance(samples));
    if (!(sd > 0.0))
        return TestReport{"ks_normality", 0.5, 0.0, samples.size(), significance, true};
    std::vector<double> z(samples.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = (samples[i] - m.value) / sd;
    auto phi = [](double v) { return 0.5 * std::erfc(-v / std::numbers::sqrt2); };
    TestReport rep = ks_one_sample(z, phi, significance);
    rep.name = "ks_normality";
    return rep;
}

TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double significance)
{
    if (a.empty() || b.empty())
        throw EstimationError("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v)
            ++i;
        while (j < y.size() && y[j] == v)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return make_report("ks_two_sample", d, na * nb / (na + nb), x.size() + y.size(), significance);
}

double sample_covariance(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw ContractViolation("sample_covariance: length mismatch");
    if (a.size() < 2)
        throw EstimationError("sample_covariance: need at least two samples");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - ma) * (b[i] - mb);
    return s / (n - 1.0);
}

double sample_variance(std::span<const double> a)
{
    return sample_covariance(a, a);
}

Estimate fdd_covariance(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw ContractViolation("fdd_covariance: length mismatch");
    const std::size_t n = a.size();
    Estimate e;
    e.n = n;
    e.value = sample_covariance(a, b);
    if (n < 3) {
        e.se = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    const double nn = static_cast<double>(n);
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= nn;
    mb /= nn;
    const double S = e.value * (nn - 1.0);
    // leave-one-out cross-product sums: S_{-i} = S - n/(n-1) (a_i - ma)(b_i - mb)
    std::vector<double> loo(n);
    double mean_loo = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        loo[i] = (S - nn / (nn - 1.0) * (a[i] - ma) * (b[i] - mb)) / (nn - 2.0);
        mean_loo += loo[i];
    }
    mean_loo /= nn;
    double ss = 0.0;
    for (double v : loo)
        ss += (v - mean_loo) * (v - mean_loo);
    e.se = std::sqrt((nn - 1.0) / nn * ss);
    e.reliable = std::isfinite(e.se);
    return e;
}

} // namespace shelab
