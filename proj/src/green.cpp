#include "shelab/green.hpp"

#include "shelab/errors.hpp"
#include "shelab/heat_kernel.hpp"
#include "shelab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace shelab {

namespace {

struct Prepared {
    std::vector<PointSource> points;
    std::vector<std::uint64_t> targets;
};

Prepared prepare(const GridSpec& grid, std::span<const SourcePoint> sources, std::span<const double> cps)
{
    grid.validate();
    Prepared p;
    for (double t : cps) {
        const std::uint64_t k = grid.steps_to(t);
        if (!p.targets.empty() && k <= p.targets.back())
            throw ConfigError("checkpoints must be strictly ascending");
        p.targets.push_back(k);
    }
    if (p.targets.empty())
        throw ConfigError("evolve_shared: no checkpoints");
    for (const auto& src : sources) {
        const std::uint64_t k = grid.steps_to(src.s);
        if (k > p.targets.front())
            throw ConfigError("evolve_shared: source time after the first checkpoint");
        p.points.push_back(PointSource{grid.nearest_cell(src.y), k});
    }
    return p;
}

} // namespace

std::vector<std::vector<GreenField>> evolve_shared(const GridSpec& grid, const NoiseSource& noise,
                                                   std::span<const SourcePoint> sources,
                                                   std::span<const double> t_checkpoints)
{
    const Prepared prep = prepare(grid, sources, t_checkpoints);
    std::vector<std::optional<Field>> fields(sources.size());
    std::vector<std::vector<GreenField>> out;
    Stepper stepper;
    std::vector<double> xi(grid.cell_count());

    std::uint64_t step = 0;
    auto activate = [&] {
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (!fields[i] && prep.points[i].step == step)
                fields[i] = Field::point_mass(grid, prep.points[i]);
    };
    activate();
    for (std::uint64_t target : prep.targets) {
        while (step < target) {
            bool any = false;
            for (auto& f : fields)
                any = any || f.has_value();
            if (any) {
                fill_noise(noise, step, xi);
                for (auto& f : fields) {
                    if (!f)
                        continue;
                    stepper.heat(*f);
                    stepper.noise(*f, xi);
                }
            }
            ++step;
            activate();
        }
        std::vector<GreenField> row;
        row.reserve(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i)
            row.push_back(GreenField{sources[i].s, grid.position(prep.points[i].cell), *fields[i]});
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<GreenField> evolve_shared(const GridSpec& grid, const NoiseSource& noise,
                                      std::span<const SourcePoint> sources, double t_final)
{
    for (const auto& src : sources)
        if (!(src.s < t_final))
            throw ConfigError("evolve_shared: every source must start before t_final");
    const double cp[] = {t_final};
    return std::move(evolve_shared(grid, noise, sources, cp).front());
}

Estimate estimate_gbar_moment(std::span<const double> gbar_samples, int k)
{
    if (k < 1)
        throw DomainError("estimate_gbar_moment: k must be a positive integer");
    std::vector<double> powered(gbar_samples.size());
    std::transform(gbar_samples.begin(), gbar_samples.end(), powered.begin(),
                   [k](double g) { return std::pow(g, k); });
    return mean_estimate(powered);
}

Estimate estimate_gbar_moment(const GridSpec& grid, std::uint64_t seed, std::size_t M, double t, double x, double s,
                              double y, int k, unsigned workers)
{
    const SourcePoint src[] = {{s, y}};
    const auto samples = run_replicates(0, M, workers, [&](std::uint64_t id) {
        const auto g = evolve_shared(grid, NoiseStream{seed, id}, src, t);
        return g.front().gbar_at(x);
    });
    return estimate_gbar_moment(samples, k);
}

ShiftCheck verify_shift_identity(const GridSpec& grid, std::uint64_t seed, std::size_t M, double t, double s,
                                 double x, double y, unsigned workers)
{
    if (!(s > 0.0 && s < t))
        throw DomainError("verify_shift_identity: need 0 < s < t");
    grid.validate();
    grid.steps_to(s);
    grid.steps_to(t);

    // z-grid for the convolution: cells where the Gaussian weight exceeds 1e-12 of its peak.
    const double var = s * (t - s) / t;
    const double centre = (s / t) * x - y;
    const double reach = std::sqrt(2.0 * var * std::log(1e12));
    const double dx = grid.dx;
    std::vector<double> zs;
    for (long i = static_cast<long>(std::ceil((centre - reach) / dx)); i <= static_cast<long>(std::floor((centre + reach) / dx)); ++i)
        zs.push_back(static_cast<double>(i) * dx);

    // sources: (0,0), (s,y), then (s,z) for every z
    std::vector<SourcePoint> sources{{0.0, 0.0}, {s, y}};
    for (double z : zs)
        sources.push_back({s, z});
    const std::size_t cell_x = grid.nearest_cell(x);
    const std::size_t cell_0 = grid.nearest_cell(0.0);
    std::size_t z0_index = zs.size();
    for (std::size_t i = 0; i < zs.size(); ++i)
        if (grid.nearest_cell(zs[i]) == cell_0)
            z0_index = i;

    struct Pair {
        double lhs = std::numeric_limits<double>::quiet_NaN();
        double rhs = std::numeric_limits<double>::quiet_NaN();
    };
    const double cps[] = {s, t};
    const auto per = run_replicates(0, M, workers, [&](std::uint64_t id) {
        const auto rows = evolve_shared(grid, NoiseStream{seed, id}, sources, cps);
        const auto& at_s = rows[0];
        const auto& at_t = rows[1];
        Pair p;
        const double g00 = at_t[0].gbar(cell_x);
        const double gsy = at_t[1].gbar(cell_x);
        const double g_t0_s0 = z0_index < zs.size() ? at_t[2 + z0_index].gbar(cell_0) : std::numeric_limits<double>::quiet_NaN();
        double conv = 0.0;
        for (std::size_t i = 0; i < zs.size(); ++i) {
            const double w = heat_kernel(var, zs[i] + y - (s / t) * x);
            const double a = at_t[2 + i].gbar(cell_0);
            const double b = at_s[0].gbar_at(zs[i] + y);
            conv += w * a * b;
        }
        conv *= dx;
        if (g00 > 0.0 && std::isfinite(gsy))
            p.lhs = gsy / g00;
        if (conv > 0.0 && std::isfinite(g_t0_s0))
            p.rhs = g_t0_s0 / conv;
        return p;
    });

    ShiftCheck out;
    out.z_terms = zs.size();
    std::vector<double> lhs, rhs;
    for (const auto& p : per) {
        if (!std::isfinite(p.lhs) || !std::isfinite(p.rhs)) {
            ++out.excluded;
            continue;
        }
        lhs.push_back(p.lhs);
        rhs.push_back(p.rhs);
    }
    out.lhs = mean_estimate(lhs);
    out.rhs = mean_estimate(rhs);
    return out;
}

RatioEstimate estimate_g(const GridSpec& grid, std::uint64_t seed, std::size_t M, double t, double x, double y,
                         unsigned workers)
{
    const std::size_t cell_x = grid.nearest_cell(x);
    const bool same = grid.nearest_cell(y) == grid.nearest_cell(0.0);
    std::vector<SourcePoint> sources{{0.0, 0.0}};
    if (!same)
        sources.push_back({0.0, y});
    const auto ratios = run_replicates(0, M, workers, [&](std::uint64_t id) {
        const auto g = evolve_shared(grid, NoiseStream{seed, id}, sources, t);
        const double den = g[0].gbar(cell_x);
        const double num = g.back().gbar(cell_x);
        return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
    });
    RatioEstimate r;
    std::vector<double> kept;
    for (double v : ratios) {
        if (std::isfinite(v))
            kept.push_back(v);
        else
            ++r.excluded;
    }
    r.estimate = mean_estimate(kept);
    return r;
}

} // namespace shelab
