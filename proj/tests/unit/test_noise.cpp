#include <doctest.h>

#include "shelab/errors.hpp"
#include "shelab/noise.hpp"
#include "shelab/philox.hpp"

#include <cmath>
#include <numeric>

using namespace shelab;

TEST_CASE("philox known-answer vectors")
{
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff})
          == PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0})
          == PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal quantile inverts the normal cdf")
{
    auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    for (double p : {1e-300, 1e-20, 1e-10, 1e-5, 0.01, 0.07, 0.3, 0.5, 0.6, 0.9, 0.975, 0.999, 1 - 1e-12}) {
        const double x = normal_quantile(p);
        const double back = p < 0.5 ? cdf(x) : 1.0 - cdf(-x);
        const double target = p < 0.5 ? p : 1.0 - p;
        const double got = p < 0.5 ? back : 1.0 - back;
        CHECK(std::abs(got - target) <= 1e-13 * target);
    }
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-15));
    CHECK(normal_quantile(0.25) == doctest::Approx(-normal_quantile(0.75)).epsilon(1e-15));
    CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
    CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
}

TEST_CASE("draw_slice is deterministic and matches per-cell evaluation")
{
    const NoiseStream s{1, 0};
    const auto a = draw_slice(s, 17, 101);
    const auto b = draw_slice(s, 17, 101);
    CHECK(a.values == b.values);
    CHECK(a.step_index == 17);
    for (std::size_t j = 0; j < a.values.size(); ++j)
        CHECK(a.values[j] == noise_value(s, 17, j));
    const auto other = draw_slice(NoiseStream{1, 1}, 17, 101);
    CHECK(other.values != a.values);
    CHECK(draw_slice(s, 18, 101).values != a.values);
    CHECK(draw_slice(NoiseStream{2, 0}, 17, 101).values != a.values);
    // a prefix of a longer slice is the shorter slice
    const auto longer = draw_slice(s, 17, 300);
    CHECK(std::equal(a.values.begin(), a.values.end(), longer.values.begin()));
}

TEST_CASE("pooled moments of a million draws")
{
    // For n = 1e6 normals the SE of the mean is 1e-3 and of the variance about 1.4e-3,
    // so +-0.01 is a 7-sigma band.
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (std::uint64_t rep = 0; rep < 10; ++rep) {
        for (std::uint64_t step = 0; step < 100; ++step) {
            const auto sl = draw_slice(NoiseStream{42, rep}, step, 1000);
            for (double v : sl.values) {
                sum += v;
                sum2 += v * v;
                ++n;
            }
        }
    }
    const double mean = sum / n;
    const double var = (sum2 - n * mean * mean) / (n - 1);
    CHECK(std::abs(mean) < 0.01);
    CHECK(var > 0.99);
    CHECK(var < 1.01);
}
