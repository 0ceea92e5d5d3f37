#include "shelab/field.hpp"

#include "shelab/errors.hpp"
#include "shelab/heat_kernel.hpp"

#include <cmath>
#include <limits>

namespace shelab {

Field::Field(GridSpec grid, std::uint64_t step, std::optional<PointSource> source, std::vector<double> data)
    : grid_(grid), step_(step), source_(source), data_(std::move(data))
{
    if (data_.size() != grid_.cell_count())
        throw ContractViolation("field data length does not match the grid");
    if (source_ && (source_->cell >= data_.size() || source_->step > step_))
        throw ContractViolation("field source outside the grid or in the future");
}

Field Field::from_values(GridSpec grid, std::uint64_t step, std::vector<double> z)
{
    return Field(grid, step, std::nullopt, std::move(z));
}

Field Field::point_mass(GridSpec grid, PointSource source, double mass)
{
    std::vector<double> d(grid.cell_count(), 0.0);
    if (source.cell >= d.size())
        throw ContractViolation("point source outside the grid");
    d[source.cell] = mass;
    return Field(grid, source.step, source, std::move(d));
}

Field Field::from_tilted(GridSpec grid, std::uint64_t step, PointSource source, std::vector<double> u)
{
    if (step <= source.step)
        throw ContractViolation("tilted data needs a positive elapsed time");
    return Field(grid, step, source, std::move(u));
}

double Field::elapsed() const
{
    const std::uint64_t from = source_ ? source_->step : 0;
    return static_cast<double>(step_ - from) * grid_.dt;
}

double Field::value(std::size_t j) const
{
    if (!source_)
        return data_.at(j);
    if (at_source_time())
        return j == source_->cell ? data_[j] / grid_.dx : 0.0;
    const double zeta = (static_cast<double>(j) - static_cast<double>(source_->cell)) * grid_.dx;
    const double u = data_.at(j);
    if (u == 0.0)
        return 0.0;
    return std::exp(std::log(u) + log_heat_kernel(elapsed(), zeta));
}

double Field::log_value(std::size_t j) const
{
    if (!source_ || at_source_time()) {
        const double z = value(j);
        return z > 0.0 ? std::log(z) : -std::numeric_limits<double>::infinity();
    }
    const double u = data_.at(j);
    if (!(u > 0.0))
        return -std::numeric_limits<double>::infinity();
    const double zeta = (static_cast<double>(j) - static_cast<double>(source_->cell)) * grid_.dx;
    return std::log(u) + log_heat_kernel(elapsed(), zeta);
}

double Field::normalized(std::size_t j) const
{
    if (!source_)
        throw ContractViolation("normalized(): field has no point source");
    if (at_source_time())
        throw DomainError("normalized(): undefined at the source time");
    return data_.at(j);
}

std::vector<double> Field::values() const
{
    std::vector<double> z(data_.size());
    for (std::size_t j = 0; j < z.size(); ++j)
        z[j] = value(j);
    return z;
}

double Field::mass() const
{
    double m = 0.0;
    if (at_source_time()) {
        for (double d : data_)
            m += d;
        return m;
    }
    for (std::size_t j = 0; j < data_.size(); ++j)
        m += value(j);
    return m * grid_.dx;
}

} // namespace shelab
