#pragma once

#include "shelab/field.hpp"
#include "shelab/grid.hpp"
#include "shelab/noise.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace shelab {

/// Test hook: every noise value is 0, so each step multiplies by exp(-dt / 2dx).
struct ZeroNoise {};

using NoiseSource = std::variant<NoiseStream, ZeroNoise>;

/// Fills xi with the slice for `step` (zeros for ZeroNoise).
void fill_noise(const NoiseSource& noise, std::uint64_t step, std::span<double> xi);

/// Point mass 1 at the origin cell at time 0.
Field init_dirac(const GridSpec& grid);

/// One dt of the heat semigroup; time advances by dt.
Field heat_step(const Field& field);

/// Multiplies cell j by exp(sqrt(dt/dx) xi_j - dt/(2dx)). Time unchanged.
Field noise_step(const Field& field, const NoiseSlice& slice);

/// In-place stepping with reusable scratch; heat_step/noise_step wrap this.
class Stepper {
public:
    void heat(Field& field);
    void noise(Field& field, std::span<const double> xi) const;

private:
    std::vector<double> scratch_;
    std::vector<double> taps_;
};

/// Dirac data evolved by alternating heat and noise steps; step k consumes noise slice k.
/// Returns the field at each checkpoint (ascending, positive, on the dt lattice).
std::vector<Field> evolve(const GridSpec& grid, const NoiseSource& noise, std::span<const double> t_checkpoints);

/// r(x) = log Z(t,x) - log p_t(x), masked where Z underflows.
struct HeightResidual {
    GridSpec grid;
    double time = 0.0;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;
    std::size_t invalid_count = 0;
};

HeightResidual height_residual(const Field& field);

} // namespace shelab

namespace shelab {

/// Graded mesh for Dirac data: the first `levels` stages run on grids with
/// dx / 2^m (m = levels..1) and dt / 4^m, restricted to the cone
/// |y| <= x_max * s / t_first + 8 sqrt(s). Each stage ends once dx_m <= ratio * sqrt(s)
/// would still hold on the next coarser grid, and values are injected into it.
/// Cells entering the cone for the first time start at U = 1.
struct Refinement {
    int levels = 0;
    double ratio = 0.05;
    double x_max = 0.0;
};

struct MeshLevel {
    GridSpec grid;
    double end_time = 0.0; ///< switch time to the next level (final level: +inf)
    std::uint64_t noise_step_offset = 0;
};

/// Levels from finest to the final grid. Throws ConfigError on a periodic grid with levels > 0
/// or when the first checkpoint falls before the final level starts.
std::vector<MeshLevel> plan_mesh(const GridSpec& grid, const Refinement& ref, double t_first);

/// evolve() on the graded mesh; fields are returned on the final grid.
/// With ref.levels == 0 this is evolve() exactly.
std::vector<Field> evolve_refined(const GridSpec& grid, const Refinement& ref, const NoiseSource& noise,
                                  std::span<const double> t_checkpoints);

} // namespace shelab
