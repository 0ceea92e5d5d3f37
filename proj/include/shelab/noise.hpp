#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace shelab {

/// Inverse of the standard normal CDF (Wichura's AS241, about 1e-16 relative).
/// Requires 0 < p < 1.
double normal_quantile(double p);

/// Coordinates of one replicate's noise. Value-like; copy freely across threads.
struct NoiseStream {
    std::uint64_t master_seed = 0;
    std::uint64_t replicate_id = 0;
};

struct NoiseSlice {
    std::uint64_t step_index = 0;
    std::vector<double> values;
};

/// Standard normal at (seed, replicate, step, cell). Pure function.
double noise_value(const NoiseStream& stream, std::uint64_t step_index, std::uint64_t cell_index);

/// Fills out[i] with the normal at cell i; identical to calling noise_value per cell.
void fill_slice(const NoiseStream& stream, std::uint64_t step_index, std::span<double> out);

NoiseSlice draw_slice(const NoiseStream& stream, std::uint64_t step_index, std::size_t cell_count);

} // namespace shelab
