#pragma once

#include "shelab/stats.hpp"

#include <string>
#include <vector>

namespace shelab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// cov ~ c / x (b fixed at 1) and cov ~ a x^{-b}, both weighted by 1/se^2.
struct DecayFit {
    double c = 0.0;
    Interval c_ci;
    double a = 0.0;
    double b = 0.0;
    Interval b_ci;
    std::vector<double> lags_used;
    std::vector<std::string> warnings;
};

/// Fits lags in [lag_lo, lag_hi]. Nonpositive covariances are dropped with a warning.
/// Unit weights are used when any SE in the window is zero. 95% normal intervals.
DecayFit fit_decay(const CovarianceEstimate& cov, double lag_lo, double lag_hi);

} // namespace shelab
