#pragma once

#include <array>
#include <cstdint>

namespace shelab {

/// Philox4x32 with 10 rounds (Salmon et al. counter-based generator).
/// A pure function of (counter, key); no state.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

} // namespace shelab
