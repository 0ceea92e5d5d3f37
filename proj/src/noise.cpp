#include "shelab/noise.hpp"

#include "shelab/errors.hpp"
#include "shelab/philox.hpp"

#include <cmath>

namespace shelab {

namespace {

template <std::size_t N>
double poly(const double (&c)[N], double x)
{
    double acc = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;)
        acc = acc * x + c[i];
    return acc;
}

constexpr double kA[] = {3.3871328727963666080e0, 1.3314166789178437745e+2, 1.9715909503065514427e+3,
                         1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                         3.3430575583588128105e+4, 2.5090809287301226727e+3};
constexpr double kB[] = {1.0, 4.2313330701600911252e+1, 6.8718700749205790830e+2, 5.3941960214247511077e+3,
                         2.1213794301586595867e+4, 3.9307895800092710610e+4, 2.8729085735721942674e+4,
                         5.2264952788528545610e+3};
constexpr double kC[] = {1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
                         3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
                         2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr double kD[] = {1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
                         1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
                         1.05075007164441684324e-9};
constexpr double kE[] = {6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
                         2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                         2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr double kF[] = {1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
                         7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
                         2.04426310338993978564e-15};

// 53 random bits mapped to the open interval (0, 1).
inline double to_unit(std::uint64_t w) noexcept
{
    return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
}

inline PhiloxCounter block(const NoiseStream& s, std::uint64_t step, std::uint64_t pair)
{
    const PhiloxCounter ctr{static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(step),
                            static_cast<std::uint32_t>(s.replicate_id),
                            static_cast<std::uint32_t>(s.replicate_id >> 32)};
    const PhiloxKey key{static_cast<std::uint32_t>(s.master_seed), static_cast<std::uint32_t>(s.master_seed >> 32)};
    return philox4x32_10(ctr, key);
}

inline double lane(const PhiloxCounter& r, int which)
{
    const std::uint64_t w = (static_cast<std::uint64_t>(r[2 * which]) << 32) | r[2 * which + 1];
    return normal_quantile(to_unit(w));
}

void check_coordinates(std::uint64_t step, std::uint64_t cells)
{
    if (step > 0xFFFFFFFFull || (cells + 1) / 2 > 0x100000000ull)
        throw ContractViolation("noise: step or cell index exceeds the 32-bit counter range");
}

} // namespace

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("normal_quantile: p must lie in (0, 1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * poly(kA, r) / poly(kB, r);
    }
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    double v;
    if (r <= 5.0) {
        r -= 1.6;
        v = poly(kC, r) / poly(kD, r);
    } else {
        r -= 5.0;
        v = poly(kE, r) / poly(kF, r);
    }
    return q < 0.0 ? -v : v;
}

double noise_value(const NoiseStream& stream, std::uint64_t step_index, std::uint64_t cell_index)
{
    check_coordinates(step_index, cell_index + 1);
    return lane(block(stream, step_index, cell_index / 2), static_cast<int>(cell_index % 2));
}

void fill_slice(const NoiseStream& stream, std::uint64_t step_index, std::span<double> out)
{
    check_coordinates(step_index, out.size());
    const std::size_t n = out.size();
    for (std::size_t pair = 0; 2 * pair < n; ++pair) {
        const PhiloxCounter r = block(stream, step_index, pair);
        out[2 * pair] = lane(r, 0);
        if (2 * pair + 1 < n)
            out[2 * pair + 1] = lane(r, 1);
    }
}

NoiseSlice draw_slice(const NoiseStream& stream, std::uint64_t step_index, std::size_t cell_count)
{
    NoiseSlice slice{step_index, std::vector<double>(cell_count)};
    fill_slice(stream, step_index, slice.values);
    return slice;
}

} // namespace shelab
