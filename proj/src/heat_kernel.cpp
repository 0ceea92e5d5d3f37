#include "shelab/heat_kernel.hpp"

#include "shelab/errors.hpp"

#include <cmath>
#include <numbers>

namespace shelab {

namespace {

void require_positive_time(double t, const char* what)
{
    if (!(t > 0.0) || !std::isfinite(t))
        throw DomainError(std::string(what) + ": time must be positive and finite");
}

} // namespace

double log_heat_kernel(double t, double x)
{
    require_positive_time(t, "heat_kernel");
    return -0.5 * std::log(2.0 * std::numbers::pi * t) - x * x / (2.0 * t);
}

double heat_kernel(double t, double x)
{
    return std::exp(log_heat_kernel(t, x));
}

IdentityPair kernel_shift_identity(double t, double s, double a, double b)
{
    require_positive_time(t, "kernel_shift_identity");
    if (!(s > 0.0 && s < t))
        throw DomainError("kernel_shift_identity: need 0 < s < t");

    const double lhs = std::exp(log_heat_kernel(t - s, a) + log_heat_kernel(s, b)
                                - log_heat_kernel(t, a + b));
    const double rhs = heat_kernel(s * (t - s) / t, b - (s / t) * (a + b));
    return {lhs, rhs};
}

IdentityPair kernel_product_identity(double t, double x, double y)
{
    require_positive_time(t, "kernel_product_identity");
    const double lhs = heat_kernel(t, x) * heat_kernel(t, y);
    const double rhs = 2.0 * heat_kernel(2.0 * t, x + y) * heat_kernel(2.0 * t, x - y);
    return {lhs, rhs};
}

std::complex<double> fourier_indicator(double z, double a)
{
    if (!(a > 0.0))
        throw DomainError("fourier_indicator: interval length must be positive");

    // (e^{iw} - 1)/(iz) = a * sinc(w/2) * e^{iw/2} with w = a z; the sinc is
    // expanded as a series where the direct quotient would cancel.
    const double half = 0.5 * a * z;
    double sinc;
    if (std::abs(a * z) < 1e-6) {
        const double h2 = half * half;
        sinc = 1.0 - h2 / 6.0 + h2 * h2 / 120.0;
    } else {
        sinc = std::sin(half) / half;
    }
    return a * sinc * std::polar(1.0, half);
}

} // namespace shelab
