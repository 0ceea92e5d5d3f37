#pragma once

#include <cstddef>
#include <span>

namespace shelab {

/// Monte Carlo estimate. `reliable` is false when the SE is undefined (n < 2)
/// or larger than the estimate itself.
struct Estimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t n = 0;
    bool reliable = false;
};

/// Sample mean with SE = sd / sqrt(n).
Estimate mean_estimate(std::span<const double> xs);

} // namespace shelab
