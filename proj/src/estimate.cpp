#include "shelab/estimate.hpp"

#include <cmath>
#include <limits>

namespace shelab {

Estimate mean_estimate(std::span<const double> xs)
{
    Estimate e;
    e.n = xs.size();
    if (xs.empty()) {
        e.value = std::numeric_limits<double>::quiet_NaN();
        e.se = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    double sum = 0.0;
    for (double x : xs)
        sum += x;
    e.value = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) {
        e.se = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    double ss = 0.0;
    for (double x : xs)
        ss += (x - e.value) * (x - e.value);
    e.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    e.reliable = std::isfinite(e.se) && e.se <= std::abs(e.value);
    return e;
}

} // namespace shelab
