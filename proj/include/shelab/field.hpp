#pragma once

#include "shelab/grid.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace shelab {

/// Space-time point a Dirac initial condition was placed at (a grid cell and a step).
struct PointSource {
    std::size_t cell = 0;
    std::uint64_t step = 0;
    bool operator==(const PointSource&) const = default;
};

/// One time slice of Z on a grid.
///
/// Fields started from a point source keep data in the tilted frame
/// U_j = Z_j / p_tau(x_j - y), tau = time since the source. At tau = 0 the data
/// holds the point mass at the source cell. Fields without a source hold Z itself.
class Field {
public:
    /// Z values given directly (no reference source).
    static Field from_values(GridSpec grid, std::uint64_t step, std::vector<double> z);
    /// Point mass of total mass `mass` at `source`; the field's time is the source time.
    static Field point_mass(GridSpec grid, PointSource source, double mass = 1.0);
    /// Tilted-frame data relative to `source` at `step` > source.step.
    static Field from_tilted(GridSpec grid, std::uint64_t step, PointSource source, std::vector<double> u);

    const GridSpec& grid() const { return grid_; }
    std::uint64_t step() const { return step_; }
    double time() const { return static_cast<double>(step_) * grid_.dt; }
    const std::optional<PointSource>& source() const { return source_; }
    std::size_t size() const { return data_.size(); }

    /// Time since the source (0 for raw fields is meaningless; see has_source()).
    double elapsed() const;
    bool at_source_time() const { return source_ && step_ == source_->step; }

    /// Z at cell j. May underflow to 0 far in the tails.
    double value(std::size_t j) const;
    /// log Z at cell j; -inf where Z = 0 exactly.
    double log_value(std::size_t j) const;
    /// Z_j / p_tau(x_j - y). Requires a source and tau > 0.
    double normalized(std::size_t j) const;

    std::vector<double> values() const;
    /// sum_j Z_j dx
    double mass() const;

    /// Storage as described above (U or Z).
    std::span<const double> data() const { return data_; }
    std::span<double> data_mut() { return data_; }

    void advance_step() { ++step_; }

    bool operator==(const Field&) const = default;

private:
    Field(GridSpec grid, std::uint64_t step, std::optional<PointSource> source, std::vector<double> data);

    GridSpec grid_;
    std::uint64_t step_ = 0;
    std::optional<PointSource> source_;
    std::vector<double> data_;
};

} // namespace shelab
