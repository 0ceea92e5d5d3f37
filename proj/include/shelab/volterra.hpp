#pragma once

#include <cstddef>
#include <vector>

namespace shelab {

struct VolterraOptions {
    std::size_t time_nodes = 160;  // mesh t_k = t (k/n)^2
    std::size_t space_nodes = 41;  // z-grid on [-6 sqrt(t), 6 sqrt(t)]
    std::size_t hermite_nodes = 24;
    double tolerance = 0.01;       // allowed relative gap between the n and n/2 solutions
};

/// Gauss-Hermite rule for weight exp(-x^2) (Golub-Welsch).
struct HermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
HermiteRule gauss_hermite(std::size_t n);

/// Second moment E[Z(t,x) Z(t,y)] from the mild form via Ito isometry.
///
/// Writing g(s,z) = p_s(z)^2 phi(s,z), the diagonal equation becomes
///   phi(t,z) = 1 + sqrt(t)/(2 sqrt(pi)) int_0^t ds / sqrt(s(t-s)) E[phi(s, W)],
///   W ~ N(s z/t, s(t-s)/(2t)),
/// which is marched forward on a graded time mesh and a z-grid with product trapezoid
/// weights for the 1/sqrt(s(t-s)) kernel. The off-diagonal moment is then
///   f(t,x,y) = p_t(x) p_t(y) + p_{t/2}(m) int_0^t ds p_{2(t-s)}(x-y) / (2 sqrt(pi s)) E[phi(s, W_m)],
/// m = (x+y)/2. The solve is repeated with half the time nodes; a relative gap above the
/// tolerance throws EstimationError.
class SecondMomentVolterra {
public:
    explicit SecondMomentVolterra(double t, VolterraOptions opt = {});

    double time() const { return t_; }
    double operator()(double x, double y) const;
    /// f(t,x,y) / (p_t(x) p_t(y)).
    double normalized(double x, double y) const;
    /// phi(s, z) for 0 <= s <= t, interpolated in sqrt(s) and z.
    double phi(double s, double z) const;
    /// Relative gap between the fine and coarse solutions of phi(t, 0).
    double self_convergence() const { return gap_; }

private:
    struct Solution {
        std::size_t n = 0;
        std::vector<double> z;
        std::vector<std::vector<double>> phi; // phi[k][j] at t_k, z_j
    };
    Solution solve(std::size_t n) const;
    static double interp(const Solution& sol, double t, double s, double z);
    double expect_phi(const Solution& sol, double s, double mean, double var) const;
    double correction(const Solution& sol, double x, double y) const;

    double t_;
    VolterraOptions opt_;
    HermiteRule gh_;
    Solution fine_;
    double gap_ = 0.0;
};

} // namespace shelab
