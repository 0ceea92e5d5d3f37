#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace shelab {

enum class Boundary { dirichlet_zero, periodic };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Uniform grid on [-L, L] with cells at (j - origin) * dx.
struct GridSpec {
    double dx = 0.05;
    double half_width = 20.0;
    double dt = 0.0025;
    Boundary boundary = Boundary::dirichlet_zero;

    std::size_t cell_count() const;
    /// Index of the cell at x = 0.
    std::size_t origin() const;
    double position(std::size_t j) const { return (static_cast<double>(j) - static_cast<double>(origin())) * dx; }
    /// Nearest cell to x; throws DomainError outside the grid.
    std::size_t nearest_cell(double x) const;

    /// Throws ConfigError on cell_count < 3, dt > dx^2 or non-positive parameters.
    void validate() const;
    /// Additionally checks L >= x_max + 8 sqrt(t_max).
    void validate_for(double x_max, double t_max) const;

    /// Exact number of steps to reach t; ConfigError if t is not on the dt lattice.
    std::uint64_t steps_to(double t) const;

    bool operator==(const GridSpec&) const = default;
};

} // namespace shelab
