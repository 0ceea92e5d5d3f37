#include "shelab/grid.hpp"

#include "shelab/errors.hpp"

#include <cmath>
#include <sstream>

namespace shelab {

std::string to_string(Boundary b)
{
    return b == Boundary::periodic ? "periodic" : "dirichlet_zero";
}

Boundary boundary_from_string(const std::string& s)
{
    if (s == "dirichlet_zero" || s == "dirichlet")
        return Boundary::dirichlet_zero;
    if (s == "periodic")
        return Boundary::periodic;
    throw ConfigError("unknown boundary '" + s + "'");
}

std::size_t GridSpec::cell_count() const
{
    return static_cast<std::size_t>(std::lround(2.0 * half_width / dx)) + 1;
}

std::size_t GridSpec::origin() const
{
    return static_cast<std::size_t>(std::lround(half_width / dx));
}

std::size_t GridSpec::nearest_cell(double x) const
{
    const double idx = std::round(x / dx) + static_cast<double>(origin());
    if (!(idx >= 0.0 && idx < static_cast<double>(cell_count())))
        throw DomainError("position outside the grid");
    return static_cast<std::size_t>(idx);
}

void GridSpec::validate() const
{
    std::ostringstream bad;
    if (!(dx > 0.0) || !std::isfinite(dx))
        bad << "dx must be positive; ";
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        bad << "half_width must be positive; ";
    if (!(dt > 0.0) || !std::isfinite(dt))
        bad << "dt must be positive; ";
    if (bad.str().empty()) {
        if (2.0 * half_width / dx + 1.0 < 2.5)
            bad << "cell_count must be at least 3; ";
        if (dt > dx * dx * (1.0 + 1e-12))
            bad << "dt must not exceed dx^2; ";
    }
    if (!bad.str().empty())
        throw ConfigError("invalid grid: " + bad.str());
}

void GridSpec::validate_for(double x_max, double t_max) const
{
    validate();
    const double need = x_max + 8.0 * std::sqrt(t_max);
    if (half_width < need * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "invalid grid: half_width " << half_width << " < x_max + 8 sqrt(t_max) = " << need;
        throw ConfigError(msg.str());
    }
}

std::uint64_t GridSpec::steps_to(double t) const
{
    if (!(t >= 0.0) || !std::isfinite(t))
        throw ConfigError("time must be nonnegative");
    const double k = std::round(t / dt);
    if (std::abs(k * dt - t) > 1e-9 * std::max(1.0, t)) {
        std::ostringstream msg;
        msg << "time " << t << " is not a multiple of dt = " << dt;
        throw ConfigError(msg.str());
    }
    return static_cast<std::uint64_t>(k);
}

} // namespace shelab
