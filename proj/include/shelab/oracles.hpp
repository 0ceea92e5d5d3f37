#pragma once

#include "shelab/quadrature.hpp"

namespace shelab {

/// int_0^inf (pi s t^2)^{-1/2} exp(-s / 4t^2) ds via s = u^2. Equals 2 for every t > 0.
QuadratureResult limiting_constant(double t);

/// int_0^t p_{2s(t-s)/t}((s/t) x) ds, via s = u^2 (double-exponential rule).
QuadratureResult reduced_cov_integral(double t, double x);
/// Same integral through s = t sin^2(theta): sqrt(t/pi) int_0^{pi/2} exp(-x^2 tan^2(theta) / 4t) dtheta.
QuadratureResult reduced_cov_integral_angular(double t, double x);

/// (t1 t2 / 2pi) int_0^2 dtau int_R Re[1^_{[0,1/t1]}(z) conj(1^_{[0,1/t2]}(z))]
///   * exp(-(N^tau/m - 1/2t1 - 1/2t2) z^2 / N^2) dz,   m = min(t1, t2).
/// Tends to 2m as N grows.
QuadratureResult lemma_twotime(double t1, double t2, double N);

/// (t1 t2 / (pi m log N)) int_0^m s^{-3/4} int_R (1 - cos z)/z^2
///   * exp(-(1/s - 1/2t1 - 1/2t2) z^2 / (m N)^2) dz ds.
QuadratureResult lemma_s0(double t1, double t2, double N);

/// (t1 t2 / log N) int_0^1 dr/r int_R |1^_{[0,1/t1]} 1^_{[0,1/t2]}| exp(-(1/r - 1/N^2) z^2 / m) dz,
/// with r = 1/(1+u).
QuadratureResult lemma_2(double t1, double t2, double N);
/// int_R (1 ^ z^2)/z^2 log(e + e m / z^2) dz, the dominating integral.
QuadratureResult lemma_2_dominating(double m);
/// int_0^1 exp(-((1-r)/r) a) dr / r, and its bound e log(e + e/a).
QuadratureResult lemma_2_inner(double a);
double lemma_2_inner_bound(double a);

/// t2^{-1} int_0^2 dtau int_R p_1(y) (1 ^ |N^{-tau} y sqrt(N^tau/m - 1/t2)|^{1/2}) dy.
QuadratureResult lemma_y(double t1, double t2, double N);
/// The inner integrand of lemma_y at (tau, y).
double lemma_y_integrand(double t1, double t2, double N, double tau, double y);

/// (1 - cos z)/z^2 with a series near 0.
double one_minus_cos_over_sq(double z);

} // namespace shelab
