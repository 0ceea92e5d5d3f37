#pragma once

#include <cstddef>
#include <functional>

namespace shelab {

struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    std::size_t evaluations = 0;

    QuadratureResult& operator+=(const QuadratureResult& o)
    {
        value += o.value;
        abs_error_estimate += o.abs_error_estimate;
        evaluations += o.evaluations;
        return *this;
    }
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (61 points). Either bound may be infinite.
QuadratureResult integrate_gk(const Integrand& f, double a, double b, double rel_tol = 1e-10,
                              unsigned max_depth = 15);

/// Double-exponential rule for finite intervals with endpoint singularities.
QuadratureResult integrate_tanh_sinh(const Integrand& f, double a, double b, double rel_tol = 1e-10);

/// As above; f(x, d) also receives the signed distance to the nearer endpoint
/// (a - x near a, b - x near b), which stays accurate where b - x would cancel.
QuadratureResult integrate_tanh_sinh(const std::function<double(double, double)>& f, double a, double b,
                                     double rel_tol = 1e-10);

/// Double-exponential rule for [a, inf).
QuadratureResult integrate_exp_sinh(const Integrand& f, double a, double rel_tol = 1e-10);

/// Integral over [0, inf) of f(z) = (A + oscillating terms)/z^2-type integrands damped by
/// exp(-c z^2) (the damping is part of f). Integrates period-length panels up to the point
/// where exp(-c z^2) < 1e-20 or the oscillating tail bound 2/(freq_min Z^2) drops below
/// tail_tol, then adds A * int_Z^inf exp(-c z^2)/z^2 dz analytically.
QuadratureResult integrate_damped_oscillatory(const Integrand& f, double period, double c, double nonosc_coeff,
                                              double freq_min, double tail_tol = 1e-9);

} // namespace shelab
