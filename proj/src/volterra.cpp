#include "shelab/volterra.hpp"

#include "shelab/errors.hpp"
#include "shelab/heat_kernel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace shelab {

namespace {

constexpr double kPi = std::numbers::pi;

// 10-point Gauss-Legendre, used per panel on the smooth part of the integrand
constexpr std::array<double, 5> kGLx = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                        0.8650633666889845, 0.9739065285171717};
constexpr std::array<double, 5> kGLw = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                        0.1494513491505806, 0.0666713443086881};

} // namespace

HermiteRule gauss_hermite(std::size_t n)
{
    if (n == 0)
        throw ConfigError("gauss_hermite: need at least one node");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 1; k < n; ++k) {
        const double b = std::sqrt(0.5 * static_cast<double>(k));
        J(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = b;
        J(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    HermiteRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        r.nodes[i] = es.eigenvalues()(ii);
        const double v0 = es.eigenvectors()(0, ii);
        r.weights[i] = std::sqrt(kPi) * v0 * v0;
    }
    return r;
}

SecondMomentVolterra::SecondMomentVolterra(double t, VolterraOptions opt) : t_(t), opt_(opt)
{
    if (!(t > 0.0) || t > 1.0)
        throw DomainError("second moment oracle: t must lie in (0, 1]");
    if (opt_.time_nodes < 16 || opt_.space_nodes < 3 || opt_.hermite_nodes < 4)
        throw ConfigError("second moment oracle: need time_nodes >= 16, space_nodes >= 3, hermite_nodes >= 4");
    if (!(opt_.tolerance > 0.0))
        throw ConfigError("second moment oracle: tolerance must be positive");
    gh_ = gauss_hermite(opt_.hermite_nodes);
    fine_ = solve(opt_.time_nodes);
    const Solution coarse = solve(opt_.time_nodes / 2);

    const double phi_f = interp(fine_, t_, t_, 0.0), phi_c = interp(coarse, t_, t_, 0.0);
    const double p00 = heat_kernel(t_, 0.0) * heat_kernel(t_, 0.0);
    const double f_f = 1.0 + correction(fine_, 0.0, 0.0) / p00;
    const double f_c = 1.0 + correction(coarse, 0.0, 0.0) / p00;
    gap_ = std::max(std::abs(phi_f - phi_c) / phi_f, std::abs(f_f - f_c) / f_f);
    if (!(gap_ <= opt_.tolerance)) {
        std::ostringstream os;
        os << "second moment oracle: resolution too coarse at t=" << t_ << ": phi(t,0) = " << phi_f << " (n="
           << fine_.n << ") vs " << phi_c << " (n=" << coarse.n << "), relative gap " << gap_ << " > tolerance "
           << opt_.tolerance;
        throw EstimationError(os.str());
    }
}

SecondMomentVolterra::Solution SecondMomentVolterra::solve(std::size_t n) const
{
    Solution sol;
    sol.n = n;
    const std::size_t nz = opt_.space_nodes;
    const double zmax = 6.0 * std::sqrt(t_);
    sol.z.resize(nz);
    for (std::size_t j = 0; j < nz; ++j)
        sol.z[j] = -zmax + 2.0 * zmax * static_cast<double>(j) / static_cast<double>(nz - 1);
    sol.phi.assign(n + 1, std::vector<double>(nz, 1.0));

    auto node = [&](std::size_t i) {
        const double u = static_cast<double>(i) / static_cast<double>(n);
        return t_ * u * u;
    };

    std::vector<double> w;
    for (std::size_t k = 1; k <= n; ++k) {
        const double tk = node(k);
        // product trapezoid weights for 1/sqrt(s(tk-s)) on the nodes 0..k
        w.assign(k + 1, 0.0);
        auto F0 = [&](double s) { return 2.0 * std::asin(std::sqrt(std::min(1.0, s / tk))); };
        auto F1 = [&](double s) { return -std::sqrt(std::max(0.0, s * (tk - s))) + 0.5 * tk * F0(s); };
        for (std::size_t i = 0; i < k; ++i) {
            const double a = node(i), b = node(i + 1);
            const double M0 = F0(b) - F0(a), M1 = F1(b) - F1(a);
            w[i] += (b * M0 - M1) / (b - a);
            w[i + 1] += (M1 - a * M0) / (b - a);
        }
        const double ck = std::sqrt(tk) / (2.0 * std::sqrt(kPi));
        for (std::size_t j = 0; j < nz; ++j) {
            const double z = sol.z[j];
            double acc = w[0]; // phi(0, .) = 1
            for (std::size_t i = 1; i < k; ++i) {
                const double s = node(i);
                acc += w[i] * expect_phi(sol, s, s * z / tk, s * (tk - s) / (2.0 * tk));
            }
            sol.phi[k][j] = (1.0 + ck * acc) / (1.0 - ck * w[k]);
        }
    }
    return sol;
}

double SecondMomentVolterra::interp(const Solution& sol, double t, double s, double z)
{
    const std::size_t nz = sol.z.size();
    const double z0 = sol.z.front(), dz = sol.z[1] - sol.z[0];
    const double fz = std::clamp((z - z0) / dz, 0.0, static_cast<double>(nz - 1));
    const std::size_t jz = std::min(static_cast<std::size_t>(fz), nz - 2);
    const double az = fz - static_cast<double>(jz);

    const double fu = std::clamp(std::sqrt(std::max(0.0, s / t)) * static_cast<double>(sol.n), 0.0,
                                 static_cast<double>(sol.n));
    const std::size_t iu = std::min(static_cast<std::size_t>(fu), sol.n - 1);
    const double au = fu - static_cast<double>(iu);

    auto at = [&](std::size_t i) { return (1.0 - az) * sol.phi[i][jz] + az * sol.phi[i][jz + 1]; };
    return (1.0 - au) * at(iu) + au * at(iu + 1);
}

double SecondMomentVolterra::expect_phi(const Solution& sol, double s, double mean, double var) const
{
    const double sd = std::sqrt(2.0 * std::max(0.0, var));
    double acc = 0.0;
    for (std::size_t g = 0; g < gh_.nodes.size(); ++g)
        acc += gh_.weights[g] * interp(sol, t_, s, mean + sd * gh_.nodes[g]);
    return acc / std::sqrt(kPi);
}

double SecondMomentVolterra::correction(const Solution& sol, double x, double y) const
{
    // s = t sin^2(theta) absorbs 1/sqrt(s(t-s)) into 2 dtheta; panels follow the mesh nodes.
    const double m = 0.5 * (x + y), d = x - y;
    double acc = 0.0;
    for (std::size_t i = 0; i < sol.n; ++i) {
        const double th0 = std::asin(static_cast<double>(i) / static_cast<double>(sol.n));
        const double th1 = std::asin(static_cast<double>(i + 1) / static_cast<double>(sol.n));
        const double mid = 0.5 * (th0 + th1), half = 0.5 * (th1 - th0);
        for (int side : {-1, 1}) {
            for (std::size_t q = 0; q < kGLx.size(); ++q) {
                const double th = mid + side * half * kGLx[q];
                const double sn = std::sin(th), cs = std::cos(th);
                const double s = t_ * sn * sn, rest = t_ * cs * cs;
                const double damp = rest > 0.0 ? std::exp(-d * d / (4.0 * rest)) : (d == 0.0 ? 1.0 : 0.0);
                if (damp == 0.0)
                    continue;
                const double e = expect_phi(sol, s, s * m / t_, s * rest / (2.0 * t_));
                acc += half * kGLw[q] * 2.0 * damp * e / (4.0 * kPi);
            }
        }
    }
    return heat_kernel(0.5 * t_, m) * acc;
}

double SecondMomentVolterra::operator()(double x, double y) const
{
    return heat_kernel(t_, x) * heat_kernel(t_, y) + correction(fine_, x, y);
}

double SecondMomentVolterra::normalized(double x, double y) const
{
    const double pp = heat_kernel(t_, x) * heat_kernel(t_, y);
    if (!(pp > 0.0))
        throw DomainError("second moment oracle: p_t(x) p_t(y) underflows");
    return (*this)(x, y) / pp;
}

double SecondMomentVolterra::phi(double s, double z) const
{
    if (!(s >= 0.0) || s > t_)
        throw DomainError("second moment oracle: s outside [0, t]");
    return interp(fine_, t_, s, z);
}

} // namespace shelab
