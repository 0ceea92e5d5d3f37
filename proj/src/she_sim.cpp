#include "shelab/she_sim.hpp"

#include "shelab/errors.hpp"
#include "shelab/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shelab {

namespace {

int stencil_radius(double s2)
{
    return static_cast<int>(std::ceil(std::sqrt(80.0 * s2))) + 1;
}

struct Image {
    std::ptrdiff_t cell;
    double sign; // 0 marks a term that vanishes
};

// Where the value at lattice index i (possibly outside [0, n)) comes from.
Image resolve(std::ptrdiff_t i, std::ptrdiff_t n, Boundary b)
{
    if (i >= 0 && i < n)
        return {i, 1.0};
    if (b == Boundary::periodic)
        return {((i % n) + n) % n, 1.0};
    // Odd reflection about virtual zero nodes at -1 and n.
    const std::ptrdiff_t m = i < 0 ? -2 - i : 2 * n - i;
    if (i == -1 || i == n || m < 0 || m >= n)
        return {0, 0.0};
    return {m, -1.0};
}

void heat_raw(const GridSpec& g, std::span<const double> in, std::span<double> out, std::vector<double>& taps)
{
    const double s2 = g.dt / (g.dx * g.dx);
    const int R = stencil_radius(s2);
    taps.assign(static_cast<std::size_t>(R) + 1, 0.0);
    double sum = 0.0;
    for (int k = 0; k <= R; ++k) {
        taps[k] = std::exp(-0.5 * k * k / s2);
        sum += k == 0 ? taps[k] : 2.0 * taps[k];
    }
    for (double& w : taps)
        w /= sum;

    const auto n = static_cast<std::ptrdiff_t>(in.size());
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        double acc = taps[0] * in[j];
        if (j - R >= 0 && j + R < n) {
            for (int k = 1; k <= R; ++k)
                acc += taps[k] * (in[j + k] + in[j - k]);
        } else {
            for (int k = 1; k <= R; ++k) {
                for (std::ptrdiff_t i : {j + k, j - k}) {
                    const Image im = resolve(i, n, g.boundary);
                    if (im.sign != 0.0)
                        acc += im.sign * taps[k] * in[im.cell];
                }
            }
        }
        out[j] = std::max(acc, 0.0);
    }
}

// Heat step in the frame U = Z / p_tau(x - y). By the Gaussian shift identity the
// update is U'(x) = sum_w p_{sigma^2}(w - mu(x)) U(w) with sigma^2 = dt tau/(tau+dt)
// and mu(x) - y = (x - y) tau/(tau+dt); weights are renormalized per cell.
void heat_tilted(const GridSpec& g, std::uint64_t elapsed_steps, std::size_t src, std::span<const double> in,
                 std::span<double> out, std::vector<double>& taps)
{
    const auto n = static_cast<std::ptrdiff_t>(in.size());
    const auto c = static_cast<std::ptrdiff_t>(src);
    if (elapsed_steps == 0) {
        std::fill(out.begin(), out.end(), in[c]);
        return;
    }
    const double k = static_cast<double>(elapsed_steps);
    const double ratio = k / (k + 1.0);
    const double s2 = g.dt / (g.dx * g.dx) * ratio;
    const int R = stencil_radius(s2);
    taps.resize(static_cast<std::size_t>(R) + 1);
    for (int kk = 0; kk <= R; ++kk)
        taps[kk] = std::exp(-0.5 * kk * kk / s2);
    const double inv_s2 = 1.0 / s2;
    const double two_tau = 2.0 * k * g.dt;

    for (std::ptrdiff_t j = 0; j < n; ++j) {
        const double q = static_cast<double>(j - c) * ratio;
        const double i0 = std::round(q);
        const double delta = q - i0;
        const std::ptrdiff_t b = c + static_cast<std::ptrdiff_t>(i0);
        const double tilt = delta * inv_s2;
        const bool interior = b - R >= 0 && b + R < n;

        if (interior && std::abs(tilt) * R < 300.0) {
            const double e = std::exp(tilt);
            const double einv = 1.0 / e;
            double ep = 1.0, em = 1.0;
            double num = taps[0] * in[b];
            double sum = taps[0];
            for (int kk = 1; kk <= R; ++kk) {
                ep *= e;
                em *= einv;
                const double wp = taps[kk] * ep;
                const double wm = taps[kk] * em;
                num += wp * in[b + kk] + wm * in[b - kk];
                sum += wp + wm;
            }
            out[j] = num / sum;
            continue;
        }

        // General path: log-space weights, boundary images carry the frame change.
        double lmax = -std::numeric_limits<double>::infinity();
        for (int kk = -R; kk <= R; ++kk)
            lmax = std::max(lmax, -0.5 * kk * kk * inv_s2 + kk * tilt);
        double sum = 0.0;
        for (int kk = -R; kk <= R; ++kk)
            sum += std::exp(-0.5 * kk * kk * inv_s2 + kk * tilt - lmax);
        const double log_sum = std::log(sum) + lmax;

        double acc = 0.0;
        for (int kk = -R; kk <= R; ++kk) {
            const double lw = -0.5 * kk * kk * inv_s2 + kk * tilt - log_sum;
            const std::ptrdiff_t i = b + kk;
            if (i >= 0 && i < n) {
                acc += std::exp(lw) * in[i];
                continue;
            }
            const Image im = resolve(i, n, g.boundary);
            if (im.sign == 0.0 || in[im.cell] == 0.0)
                continue;
            const double zs = static_cast<double>(i - c) * g.dx;
            const double zm = static_cast<double>(im.cell - c) * g.dx;
            acc += im.sign * std::exp(lw + (zs * zs - zm * zm) / two_tau) * in[im.cell];
        }
        out[j] = std::max(acc, 0.0);
    }
}

} // namespace

void fill_noise(const NoiseSource& noise, std::uint64_t step, std::span<double> xi)
{
    if (const auto* s = std::get_if<NoiseStream>(&noise))
        fill_slice(*s, step, xi);
    else
        std::fill(xi.begin(), xi.end(), 0.0);
}

Field init_dirac(const GridSpec& grid)
{
    grid.validate();
    return Field::point_mass(grid, PointSource{grid.origin(), 0});
}

void Stepper::heat(Field& field)
{
    const GridSpec& g = field.grid();
    scratch_.resize(field.size());
    if (const auto& src = field.source())
        heat_tilted(g, field.step() - src->step, src->cell, field.data(), scratch_, taps_);
    else
        heat_raw(g, field.data(), scratch_, taps_);
    auto d = field.data_mut();
    std::copy(scratch_.begin(), scratch_.end(), d.begin());
    field.advance_step();
}

void Stepper::noise(Field& field, std::span<const double> xi) const
{
    if (xi.size() != field.size())
        throw ContractViolation("noise slice length does not match the grid");
    const GridSpec& g = field.grid();
    const double amp = std::sqrt(g.dt / g.dx);
    const double drift = g.dt / (2.0 * g.dx);
    auto d = field.data_mut();
    for (std::size_t j = 0; j < d.size(); ++j)
        d[j] *= std::exp(amp * xi[j] - drift);
}

Field heat_step(const Field& field)
{
    Field out = field;
    Stepper().heat(out);
    return out;
}

Field noise_step(const Field& field, const NoiseSlice& slice)
{
    Field out = field;
    Stepper().noise(out, slice.values);
    return out;
}

std::vector<Field> evolve(const GridSpec& grid, const NoiseSource& noise, std::span<const double> t_checkpoints)
{
    grid.validate();
    std::vector<std::uint64_t> targets;
    for (double t : t_checkpoints) {
        if (!(t > 0.0))
            throw ConfigError("checkpoints must be positive");
        const std::uint64_t k = grid.steps_to(t);
        if (!targets.empty() && k <= targets.back())
            throw ConfigError("checkpoints must be strictly ascending");
        targets.push_back(k);
    }

    std::vector<Field> out;
    out.reserve(targets.size());
    Field f = init_dirac(grid);
    Stepper stepper;
    std::vector<double> xi(grid.cell_count());
    for (std::uint64_t target : targets) {
        while (f.step() < target) {
            const std::uint64_t k = f.step();
            stepper.heat(f);
            fill_noise(noise, k, xi);
            stepper.noise(f, xi);
        }
        out.push_back(f);
    }
    return out;
}

HeightResidual height_residual(const Field& field)
{
    if (!(field.time() > 0.0))
        throw DomainError("height_residual: field at time 0");
    const GridSpec& g = field.grid();
    HeightResidual r{g, field.time(), std::vector<double>(field.size()), std::vector<std::uint8_t>(field.size()), 0};
    const auto& src = field.source();
    const bool aligned = src && src->cell == g.origin() && src->step == 0;
    for (std::size_t j = 0; j < field.size(); ++j) {
        double v;
        if (aligned) {
            const double u = field.data()[j];
            v = u > 0.0 ? std::log(u) : -std::numeric_limits<double>::infinity();
        } else {
            v = field.log_value(j) - log_heat_kernel(field.time(), g.position(j));
        }
        if (std::isfinite(v)) {
            r.values[j] = v;
            r.valid[j] = 1;
        } else {
            r.values[j] = 0.0;
            ++r.invalid_count;
        }
    }
    return r;
}

} // namespace shelab

namespace shelab {

std::vector<MeshLevel> plan_mesh(const GridSpec& grid, const Refinement& ref, double t_first)
{
    grid.validate();
    if (ref.levels < 0 || ref.levels > 20)
        throw ConfigError("refinement levels must lie in [0, 20]");
    if (ref.levels > 0 && grid.boundary == Boundary::periodic)
        throw ConfigError("refinement requires dirichlet_zero boundaries");
    if (ref.levels > 0 && !(ref.ratio > 0.0))
        throw ConfigError("refinement ratio must be positive");
    std::vector<MeshLevel> out;
    std::uint64_t offset = 0;
    double start = 0.0;
    for (int m = ref.levels; m >= 1; --m) {
        const double scale = std::ldexp(1.0, -m);
        GridSpec g = grid;
        g.dx = grid.dx * scale;
        g.dt = grid.dt * scale * scale;
        const double coarse_dt = g.dt * 4.0;
        // switch once the next grid would resolve sqrt(s) at the requested ratio
        const double want = std::pow(g.dx / ref.ratio, 2.0);
        const double end = std::max(std::ceil(want / coarse_dt), std::ceil(start / coarse_dt) + 1.0) * coarse_dt;
        const double cone = ref.x_max * end / t_first + 8.0 * std::sqrt(end) + 4.0 * g.dx;
        const double cells = std::ceil(std::min(cone, grid.half_width) / g.dx);
        g.half_width = cells * g.dx;
        out.push_back(MeshLevel{g, end, offset});
        offset += static_cast<std::uint64_t>(std::llround((end - start) / g.dt));
        start = end;
    }
    if (!out.empty() && t_first < start * (1.0 - 1e-12))
        throw ConfigError("first checkpoint precedes the final mesh level");
    out.push_back(MeshLevel{grid, std::numeric_limits<double>::infinity(), offset});
    return out;
}

std::vector<Field> evolve_refined(const GridSpec& grid, const Refinement& ref, const NoiseSource& noise,
                                  std::span<const double> t_checkpoints)
{
    if (ref.levels == 0)
        return evolve(grid, noise, t_checkpoints);
    if (t_checkpoints.empty())
        return {};
    const auto levels = plan_mesh(grid, ref, t_checkpoints.front());

    Field f = init_dirac(levels.front().grid);
    Stepper stepper;
    std::vector<double> xi;
    for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
        const auto& lv = levels[l];
        const std::uint64_t end = lv.grid.steps_to(lv.end_time);
        const std::uint64_t first = f.step();
        xi.resize(lv.grid.cell_count());
        while (f.step() < end) {
            const std::uint64_t k = f.step();
            stepper.heat(f);
            fill_noise(noise, lv.noise_step_offset + (k - first), xi);
            stepper.noise(f, xi);
        }
        // inject into the next grid (coarser by two, same origin)
        const GridSpec& next = levels[l + 1].grid;
        std::vector<double> u(next.cell_count(), 1.0);
        const auto fine_origin = static_cast<long>(lv.grid.origin());
        const auto fine_n = static_cast<long>(lv.grid.cell_count());
        for (std::size_t j = 0; j < u.size(); ++j) {
            const long fj = 2 * (static_cast<long>(j) - static_cast<long>(next.origin())) + fine_origin;
            if (fj >= 0 && fj < fine_n)
                u[j] = f.data()[static_cast<std::size_t>(fj)];
        }
        f = Field::from_tilted(next, next.steps_to(lv.end_time), PointSource{next.origin(), 0}, std::move(u));
    }

    const auto& last = levels.back();
    std::vector<Field> out;
    xi.resize(grid.cell_count());
    const std::uint64_t first = f.step();
    std::uint64_t prev = 0;
    for (double t : t_checkpoints) {
        const std::uint64_t target = grid.steps_to(t);
        if (target <= prev && !out.empty())
            throw ConfigError("checkpoints must be strictly ascending");
        prev = target;
        while (f.step() < target) {
            const std::uint64_t k = f.step();
            stepper.heat(f);
            fill_noise(noise, last.noise_step_offset + (k - first), xi);
            stepper.noise(f, xi);
        }
        out.push_back(f);
    }
    return out;
}

} // namespace shelab
