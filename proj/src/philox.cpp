#include "shelab/philox.hpp"

namespace shelab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline void round(PhiloxCounter& c, const PhiloxKey& k) noexcept
{
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

} // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept
{
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        round(ctr, key);
    }
    return ctr;
}

} // namespace shelab
