#include "shelab/quadrature.hpp"

#include "shelab/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace shelab {

namespace {

struct Counted {
    const Integrand* f;
    std::size_t* count;
    double operator()(double x) const
    {
        ++*count;
        return (*f)(x);
    }
};

} // namespace

QuadratureResult integrate_gk(const Integrand& f, double a, double b, double rel_tol, unsigned max_depth)
{
    QuadratureResult r;
    double err = 0.0;
    r.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(Counted{&f, &r.evaluations}, a, b,
                                                                             max_depth, rel_tol, &err);
    r.abs_error_estimate = std::abs(err);
    return r;
}

QuadratureResult integrate_tanh_sinh(const Integrand& f, double a, double b, double rel_tol)
{
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    QuadratureResult r;
    double err = 0.0, l1 = 0.0;
    r.value = rule.integrate(Counted{&f, &r.evaluations}, a, b, rel_tol, &err, &l1);
    r.abs_error_estimate = std::abs(err);
    return r;
}

QuadratureResult integrate_tanh_sinh(const std::function<double(double, double)>& f, double a, double b,
                                     double rel_tol)
{
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    QuadratureResult r;
    double err = 0.0, l1 = 0.0;
    std::size_t* count = &r.evaluations;
    auto g = [&f, count](double x, double xc) {
        ++*count;
        return f(x, xc);
    };
    r.value = rule.integrate(g, a, b, rel_tol, &err, &l1);
    r.abs_error_estimate = std::abs(err);
    return r;
}

QuadratureResult integrate_exp_sinh(const Integrand& f, double a, double rel_tol)
{
    thread_local boost::math::quadrature::exp_sinh<double> rule;
    QuadratureResult r;
    double err = 0.0, l1 = 0.0;
    r.value = rule.integrate(Counted{&f, &r.evaluations}, a, std::numeric_limits<double>::infinity(), rel_tol, &err,
                             &l1);
    r.abs_error_estimate = std::abs(err);
    return r;
}

QuadratureResult integrate_damped_oscillatory(const Integrand& f, double period, double c, double nonosc_coeff,
                                              double freq_min, double tail_tol)
{
    if (!(period > 0.0) || !(c >= 0.0))
        throw DomainError("integrate_damped_oscillatory: bad period or damping");
    const double z_gauss = c > 0.0 ? std::sqrt(46.0 / c) : std::numeric_limits<double>::infinity();
    const double z_osc = freq_min > 0.0 ? std::sqrt(2.0 / (freq_min * tail_tol)) : z_gauss;
    const double Z = std::min(z_gauss, std::max(z_osc, period));
    if (!std::isfinite(Z))
        throw DomainError("integrate_damped_oscillatory: integrand does not decay");

    QuadratureResult total;
    const auto panels = static_cast<std::size_t>(std::ceil(Z / period));
    for (std::size_t i = 0; i < panels; ++i) {
        const double a = static_cast<double>(i) * period;
        const double b = std::min(Z, a + period);
        QuadratureResult p;
        double err = 0.0;
        p.value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(Counted{&f, &p.evaluations}, a, b, 6,
                                                                                1e-11, &err);
        p.abs_error_estimate = std::abs(err);
        total += p;
    }
    // int_Z^inf exp(-c z^2)/z^2 dz = exp(-c Z^2)/Z - sqrt(pi c) erfc(sqrt(c) Z)
    const double tail = std::exp(-c * Z * Z) / Z - std::sqrt(std::numbers::pi * c) * std::erfc(std::sqrt(c) * Z);
    total.value += nonosc_coeff * tail;
    if (Z < z_gauss)
        total.abs_error_estimate += 2.0 / (freq_min * Z * Z);
    return total;
}

} // namespace shelab
