#include "shelab/oracles.hpp"

#include "shelab/errors.hpp"
#include "shelab/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace shelab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError(std::string(what) + " must be positive");
}

void require_lemma_args(double t1, double t2, double N, const char* name)
{
    require_positive(t1, "t1");
    require_positive(t2, "t2");
    if (!(N >= 10.0))
        throw DomainError(std::string(name) + ": N must be at least 10");
}

} // namespace

double one_minus_cos_over_sq(double z)
{
    if (std::abs(z) < 1e-4) {
        const double z2 = z * z;
        return 0.5 - z2 / 24.0;
    }
    const double s = std::sin(0.5 * z);
    return 2.0 * s * s / (z * z);
}

QuadratureResult limiting_constant(double t)
{
    require_positive(t, "limiting_constant: t");
    // s = u^2: 2u (pi u^2 t^2)^{-1/2} = 2/(sqrt(pi) t)
    const double pref = 2.0 / (std::sqrt(kPi) * t);
    return integrate_gk([=](double u) { return pref * std::exp(-u * u / (4.0 * t * t)); }, 0.0,
                        std::numeric_limits<double>::infinity(), 1e-12);
}

QuadratureResult reduced_cov_integral(double t, double x)
{
    require_positive(t, "reduced_cov_integral: t");
    if (!(x >= 0.0))
        throw DomainError("reduced_cov_integral: x must be nonnegative");
    // p_{2s(t-s)/t}(s x/t) = exp(-s x^2 / (4t(t-s))) / sqrt(4 pi s (t-s)/t); both ends are
    // integrable singularities, so s and t - s near an end come from the rule's endpoint distance.
    auto g = [=](double s, double rest) {
        if (!(s > 0.0) || !(rest > 0.0))
            return 0.0;
        return std::exp(-s * x * x / (4.0 * t * rest)) / std::sqrt(4.0 * kPi * s * rest / t);
    };
    // for large x the mass sits within s ~ 4t/x^2 of 0
    const double knee = x > 0.0 ? std::min(0.5 * t, 400.0 * t / (x * x)) : 0.5 * t;
    QuadratureResult r = integrate_tanh_sinh(
        [=](double s, double d) {
            const double lo = s < 0.5 * knee ? -d : s;
            return g(lo, t - lo);
        },
        0.0, knee, 1e-12);
    r += integrate_tanh_sinh(
        [=](double s, double d) {
            const double hi = s > 0.5 * (knee + t) ? d : t - s;
            return g(t - hi, hi);
        },
        knee, t, 1e-12);
    return r;
}

QuadratureResult reduced_cov_integral_angular(double t, double x)
{
    require_positive(t, "reduced_cov_integral: t");
    const double pref = std::sqrt(t / kPi);
    auto f = [=](double th) {
        const double tn = std::tan(th);
        return pref * std::exp(-x * x * tn * tn / (4.0 * t));
    };
    const double knee = x > 0.0 ? std::min(0.25 * kPi, std::atan(40.0 * std::sqrt(t) / x)) : 0.25 * kPi;
    QuadratureResult r = integrate_gk(f, 0.0, knee, 1e-12);
    r += integrate_gk(f, knee, 0.5 * kPi, 1e-12);
    return r;
}

QuadratureResult lemma_twotime(double t1, double t2, double N)
{
    require_lemma_args(t1, t2, N, "lemma_twotime");
    const double m = std::min(t1, t2);
    const double a1 = 1.0 / t1, a2 = 1.0 / t2, da = std::abs(a1 - a2);
    const double shift = 0.5 / t1 + 0.5 / t2;
    const double freq_min = da > 0.0 ? std::min({a1, a2, da}) : std::min(a1, a2);
    const double period = 2.0 * kPi / std::max(a1, a2);
    const double nonosc = da > 0.0 ? 1.0 : 2.0;
    const double logN = std::log(N);

    std::size_t evals = 0;
    double inner_err = 0.0;
    auto outer = [&](double tau) {
        const double c = std::max(0.0, std::exp(tau * logN) / m - shift) / (N * N);
        auto g = [=](double z) {
            const auto p = fourier_indicator(z, a1) * std::conj(fourier_indicator(z, a2));
            return p.real() * std::exp(-c * z * z);
        };
        const QuadratureResult in = integrate_damped_oscillatory(g, period, c, nonosc, freq_min);
        evals += in.evaluations;
        inner_err = std::max(inner_err, in.abs_error_estimate);
        return 2.0 * in.value; // even integrand
    };
    QuadratureResult r = integrate_gk(outer, 0.0, 2.0, 1e-9, 12);
    const double pref = t1 * t2 / (2.0 * kPi);
    r.value *= pref;
    r.abs_error_estimate = pref * (r.abs_error_estimate + 4.0 * inner_err);
    r.evaluations += evals;
    return r;
}

QuadratureResult lemma_s0(double t1, double t2, double N)
{
    require_lemma_args(t1, t2, N, "lemma_s0");
    const double m = std::min(t1, t2);
    const double shift = 0.5 / t1 + 0.5 / t2;
    const double scale = 1.0 / (m * m * N * N);
    std::size_t evals = 0;
    double inner_err = 0.0;
    // s = m v^4 removes s^{-3/4}: ds s^{-3/4} = 4 m^{1/4} dv
    auto outer = [&](double v) {
        if (v <= 0.0)
            return 0.0;
        const double s = m * v * v * v * v;
        const double c = (1.0 / s - shift) * scale;
        auto g = [=](double z) { return one_minus_cos_over_sq(z) * std::exp(-c * z * z); };
        const QuadratureResult in = integrate_damped_oscillatory(g, 2.0 * kPi, c, 1.0, 1.0);
        evals += in.evaluations;
        inner_err = std::max(inner_err, in.abs_error_estimate);
        return 4.0 * std::pow(m, 0.25) * 2.0 * in.value;
    };
    QuadratureResult r = integrate_gk(outer, 0.0, 1.0, 1e-9, 12);
    const double pref = t1 * t2 / (kPi * m * std::log(N));
    r.value *= pref;
    r.abs_error_estimate = pref * (r.abs_error_estimate + 8.0 * std::pow(m, 0.25) * inner_err);
    r.evaluations += evals;
    return r;
}

QuadratureResult lemma_2(double t1, double t2, double N)
{
    require_lemma_args(t1, t2, N, "lemma_2");
    const double m = std::min(t1, t2);
    const double a1 = 1.0 / t1, a2 = 1.0 / t2;
    const double invN2 = 1.0 / (N * N);
    std::size_t evals = 0;
    double inner_err = 0.0;
    // r = 1/(1+u): dr/r = du/(1+u), 1/r = 1 + u
    auto outer = [&](double u) {
        const double c = (1.0 + u - invN2) / m;
        auto g = [=](double z) {
            return std::abs(fourier_indicator(z, a1)) * std::abs(fourier_indicator(z, a2)) * std::exp(-c * z * z);
        };
        const double reach = std::sqrt(46.0 / c);
        const double period = 2.0 * kPi / std::max(a1, a2);
        QuadratureResult in;
        for (double lo = 0.0; lo < reach; lo += period)
            in += integrate_gk(g, lo, std::min(reach, lo + period), 1e-12, 8);
        evals += in.evaluations;
        inner_err = std::max(inner_err, in.abs_error_estimate);
        return 2.0 * in.value / (1.0 + u);
    };
    QuadratureResult r = integrate_exp_sinh(outer, 0.0, 1e-9);
    const double pref = t1 * t2 / std::log(N);
    r.value *= pref;
r.abs_error_estimate = pref * r.abs_error_estimate + inner_err;
    r.evaluations += evals;
    return r;
}

QuadratureResult lemma_2_dominating(double m)
{
    require_positive(m, "lemma_2_dominating: m");
    const double e = std::numbers::e;
    // log(e + e m/z^2) = 1 + log(z^2 + m) - 2 log z, finite for any z > 0
    auto near = [=](double z) { return z > 0.0 ? 1.0 + std::log(z * z + m) - 2.0 * std::log(z) : 0.0; };
    auto far = [=](double z) { return std::log(e + e * m / (z * z)) / (z * z); };
    QuadratureResult r = integrate_tanh_sinh(near, 0.0, 1.0, 1e-12);
    r += integrate_exp_sinh(far, 1.0, 1e-12);
    r.value *= 2.0;
    r.abs_error_estimate *= 2.0;
    return r;
}

QuadratureResult lemma_2_inner(double a)
{
    require_positive(a, "lemma_2_inner: a");
    // r = 1/(1+u) turns it into int_0^inf exp(-u a)/(1+u) du
    return integrate_exp_sinh([=](double u) { return std::exp(-u * a) / (1.0 + u); }, 0.0, 1e-12);
}

double lemma_2_inner_bound(double a)
{
    require_positive(a, "lemma_2_inner_bound: a");
    const double e = std::numbers::e;
    return e * std::log(e + e / a);
}

double lemma_y_integrand(double t1, double t2, double N, double tau, double y)
{
    const double m = std::min(t1, t2);
    const double b = std::exp(-tau * std::log(N)) * std::sqrt(std::max(0.0, std::exp(tau * std::log(N)) / m - 1.0 / t2));
    return heat_kernel(1.0, y) * std::min(1.0, std::sqrt(std::abs(b * y)));
}

QuadratureResult lemma_y(double t1, double t2, double N)
{
    require_lemma_args(t1, t2, N, "lemma_y");
    const double m = std::min(t1, t2);
    const double logN = std::log(N);
    std::size_t evals = 0;
    double inner_err = 0.0;
    auto outer = [&](double tau) {
        const double b = std::exp(-tau * logN) * std::sqrt(std::max(0.0, std::exp(tau * logN) / m - 1.0 / t2));
        if (b == 0.0)
            return 0.0;
        auto g = [=](double y) { return heat_kernel(1.0, y) * std::min(1.0, std::sqrt(b * y)); };
        const double knee = 1.0 / b; // min() switches branch here
        QuadratureResult in;
        if (knee < 40.0) {
            in = integrate_tanh_sinh(g, 0.0, knee, 1e-12);
            in += integrate_exp_sinh(g, knee, 1e-12);
        } else {
            in = integrate_tanh_sinh(g, 0.0, 40.0, 1e-12);
        }
        evals += in.evaluations;
        inner_err = std::max(inner_err, in.abs_error_estimate);
        return 2.0 * in.value;
    };
    QuadratureResult r = integrate_gk(outer, 0.0, 2.0, 1e-9, 12);
    r.value /= t2;
    r.abs_error_estimate = (r.abs_error_estimate + 4.0 * inner_err) / t2;
    r.evaluations += evals;
    return r;
}

} // namespace shelab
