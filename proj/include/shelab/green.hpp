#pragma once

#include "shelab/estimate.hpp"
#include "shelab/field.hpp"
#include "shelab/she_sim.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace shelab {

struct SourcePoint {
    double s = 0.0; ///< source time
    double y = 0.0; ///< source position
};

/// Green's function G(., .; s, y) at the field's current time.
struct GreenField {
    double source_time = 0.0;
    double source_position = 0.0;
    Field field;

    /// Gbar(t, x; s, y) = G / p_{t-s}(x - y) at cell j.
    double gbar(std::size_t j) const { return field.normalized(j); }
    double gbar_at(double x) const { return gbar(field.grid().nearest_cell(x)); }
};

/// All sources evolved through the same noise realization. Returns one row per
/// checkpoint; a source whose time equals the checkpoint is still a point mass.
/// Every source time must be on the dt lattice and not exceed the first checkpoint.
std::vector<std::vector<GreenField>> evolve_shared(const GridSpec& grid, const NoiseSource& noise,
                                                   std::span<const SourcePoint> sources,
                                                   std::span<const double> t_checkpoints);

/// Single final time; each source time must be strictly before t_final.
std::vector<GreenField> evolve_shared(const GridSpec& grid, const NoiseSource& noise,
                                      std::span<const SourcePoint> sources, double t_final);

/// E[Gbar^k] from per-replicate Gbar samples. Unreliable when n < 2 or relative SE > 1.
Estimate estimate_gbar_moment(std::span<const double> gbar_samples, int k);

/// Ensemble driver: Gbar(t, x; s, y) over replicates [0, M), then its k-th moment.
Estimate estimate_gbar_moment(const GridSpec& grid, std::uint64_t seed, std::size_t M, double t, double x, double s,
                              double y, int k, unsigned workers = 1);

struct ShiftCheck {
    Estimate lhs;
    Estimate rhs;
    std::size_t excluded = 0;
    std::size_t z_terms = 0;
};

/// Both sides of the Green-function shift identity, estimated with shared noise.
ShiftCheck verify_shift_identity(const GridSpec& grid, std::uint64_t seed, std::size_t M, double t, double s,
                                 double x, double y, unsigned workers = 1);

/// g_t(x, y) = E[Gbar(t,x;0,y) / Gbar(t,x;0,0)], per-replicate ratios.
struct RatioEstimate {
    Estimate estimate;
    std::size_t excluded = 0;
};

RatioEstimate estimate_g(const GridSpec& grid, std::uint64_t seed, std::size_t M, double t, double x, double y,
                         unsigned workers = 1);

} // namespace shelab
