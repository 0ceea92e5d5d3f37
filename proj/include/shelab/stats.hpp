#pragma once

#include "shelab/estimate.hpp"
#include "shelab/she_sim.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace shelab {

struct CovarianceEstimate {
    double t = 0.0;
    std::vector<double> lags;
    std::vector<double> cov;
    std::vector<double> se;
    std::vector<double> n_effective;
};

/// Spatial covariance of residuals over translates in a bulk window [-W, W].
///
/// Each replicate's residuals on the window are kept by replicate id; finalize()
/// centers every cell by its ensemble mean, averages lagged products over
/// translates within each replicate, and takes the mean and SE of those
/// per-replicate averages. Merging is a union of replicate sets, and finalize()
/// walks ids in ascending order, so any split merges to bit-identical output.
class CovarianceAccumulator {
public:
    CovarianceAccumulator(GridSpec grid, double t, std::vector<double> lags, double bulk_half_width);

    /// Replicates with an invalid cell in the window are counted and skipped.
    void add(std::uint64_t replicate_id, const HeightResidual& r);
    void merge(const CovarianceAccumulator& other);
    CovarianceEstimate finalize() const;

    std::size_t replicate_count() const { return rows_.size(); }
    std::size_t skipped() const { return skipped_; }

private:
    GridSpec grid_;
    double t_;
    std::vector<long> lag_cells_;
    std::size_t lo_ = 0, hi_ = 0; // window cells [lo_, hi_]
    std::map<std::uint64_t, std::vector<double>> rows_;
    std::size_t skipped_ = 0;
};

CovarianceEstimate estimate_height_covariance(std::span<const HeightResidual> ensemble, double t,
                                              std::span<const double> lags, double bulk_half_width);

struct SpatialAverageSample {
    double t = 0.0;
    double N = 0.0;
    double value = 0.0;
};

/// X_N = (N log N)^{-1/2} * trapezoid integral of (r - m) over [start, start + N].
SpatialAverageSample spatial_average(const HeightResidual& r, std::span<const double> mean_profile, double N,
                                     double start = 0.0);
SpatialAverageSample spatial_average(const HeightResidual& r, double mean, double N, double start = 0.0);

struct TestReport {
    std::string name;
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t sample_size = 0;
    double significance = 0.001;
    bool reject = false;
};

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

/// One-sample KS against a continuous CDF (p-value with Stephens' small-n correction).
TestReport ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf,
                         double significance = 0.001);
/// Standardized by sample mean and SD, then tested against N(0,1). Needs >= 50 samples.
TestReport ks_normality(std::span<const double> samples, double significance = 0.001);
TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double significance = 0.001);

double sample_covariance(std::span<const double> a, std::span<const double> b);
double sample_variance(std::span<const double> a);

/// Sample covariance with jackknife SE.
Estimate fdd_covariance(std::span<const double> a, std::span<const double> b);

} // namespace shelab
