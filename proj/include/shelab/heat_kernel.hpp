#pragma once

#include <complex>
#include <utility>

namespace shelab {

/// Gaussian heat kernel p_t(x) = (2 pi t)^{-1/2} exp(-x^2 / 2t).
///
/// Evaluated in log space and exponentiated, so it returns exactly 0 only once
/// the density drops below the smallest subnormal double.
double heat_kernel(double t, double x);

/// log p_t(x); finite for every t > 0 and real x.
double log_heat_kernel(double t, double x);

struct IdentityPair {
    double lhs;
    double rhs;
};

/// lhs = p_{t-s}(a) p_s(b) / p_t(a+b),  rhs = p_{s(t-s)/t}(b - (s/t)(a+b)).
IdentityPair kernel_shift_identity(double t, double s, double a, double b);

/// lhs = p_t(x) p_t(y),  rhs = 2 p_{2t}(x+y) p_{2t}(x-y).
IdentityPair kernel_product_identity(double t, double x, double y);

/// Fourier transform of the indicator of [0, a] with the e^{ixy} convention:
/// (e^{iaz} - 1) / (iz), continuously extended by a at z = 0.
std::complex<double> fourier_indicator(double z, double a);

} // namespace shelab
