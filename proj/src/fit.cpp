#include "shelab/fit.hpp"

#include "shelab/errors.hpp"

#include <cmath>
#include <sstream>

namespace shelab {

DecayFit fit_decay(const CovarianceEstimate& cov, double lag_lo, double lag_hi)
{
    DecayFit fit;
    std::vector<double> x, y, se;
    for (std::size_t i = 0; i < cov.lags.size(); ++i) {
        const double lag = cov.lags[i];
        if (lag < lag_lo - 1e-12 || lag > lag_hi + 1e-12 || !(lag > 0.0) || !(cov.n_effective[i] > 1.0))
            continue;
        if (!(cov.cov[i] > 0.0)) {
            std::ostringstream w;
            w << "lag " << lag << " excluded: nonpositive covariance " << cov.cov[i];
            fit.warnings.push_back(w.str());
            continue;
        }
        x.push_back(lag);
        y.push_back(cov.cov[i]);
        se.push_back(cov.se[i]);
    }
    if (x.size() < 3)
        throw EstimationError("fit_decay: fewer than 3 usable lags in the window");
    fit.lags_used = x;

    bool unit = false;
    for (double s : se)
        unit = unit || !(s > 0.0);
    if (unit)
        fit.warnings.push_back("zero standard error in window; unweighted fit");

    // constrained model c / x
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = unit ? 1.0 : 1.0 / (se[i] * se[i]);
        num += w * y[i] / x[i];
        den += w / (x[i] * x[i]);
    }
    fit.c = num / den;
    const double c_se = unit ? 0.0 : 1.0 / std::sqrt(den);
    fit.c_ci = {fit.c - 1.96 * c_se, fit.c + 1.96 * c_se};

    // log cov = log a - b log x, var(log cov) ~ (se/cov)^2
    double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = unit ? 1.0 : (y[i] / se[i]) * (y[i] / se[i]);
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sw += w;
        sx += w * lx;
        sy += w * ly;
        sxx += w * lx * lx;
        sxy += w * lx * ly;
    }
    const double d = sw * sxx - sx * sx;
    const double slope = (sw * sxy - sx * sy) / d;
    fit.b = -slope;
    fit.a = std::exp((sy - slope * sx) / sw);
    const double b_se = unit ? 0.0 : std::sqrt(sw / d);
    fit.b_ci = {fit.b - 1.96 * b_se, fit.b + 1.96 * b_se};
    return fit;
}

} // namespace shelab
