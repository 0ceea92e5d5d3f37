#include "shelab/field_io.hpp"

#include "shelab/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace shelab {

namespace {

static_assert(std::endian::native == std::endian::little, "field format assumes a little-endian host");

constexpr char kMagic[8] = {'S', 'H', 'E', 'F', 'L', 'D', '0', '1'};

template <class T>
void put(std::ostream& os, T v)
{
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is)
{
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
        throw IoError("field file truncated");
    return v;
}

} // namespace

void write_field(std::ostream& os, const Field& f, std::uint64_t replicate_id)
{
    const GridSpec& g = f.grid();
    os.write(kMagic, sizeof kMagic);
    put<double>(os, g.dx);
    put<double>(os, g.half_width);
    put<double>(os, g.dt);
    put<std::uint64_t>(os, g.boundary == Boundary::periodic ? 1 : 0);
    put<std::uint64_t>(os, f.step());
    put<double>(os, f.time());
    put<std::uint64_t>(os, replicate_id);
    put<std::uint64_t>(os, f.source() ? 1 : 0);
    put<std::uint64_t>(os, f.source() ? f.source()->cell : 0);
    put<std::uint64_t>(os, f.source() ? f.source()->step : 0);
    put<std::uint64_t>(os, f.size());
    os.write(reinterpret_cast<const char*>(f.data().data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
    if (!os)
        throw IoError("failed to write field");
}

FieldRecord read_field_record(std::istream& is)
{
    char magic[8];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw IoError("not a field file (bad magic)");
    GridSpec g;
    g.dx = get<double>(is);
    g.half_width = get<double>(is);
    g.dt = get<double>(is);
    const auto b = get<std::uint64_t>(is);
    if (b > 1)
        throw IoError("field file: unknown boundary code");
    g.boundary = b ? Boundary::periodic : Boundary::dirichlet_zero;
    const auto step = get<std::uint64_t>(is);
    const auto time = get<double>(is);
    const auto replicate_id = get<std::uint64_t>(is);
    const auto has_source = get<std::uint64_t>(is);
    const PointSource src{static_cast<std::size_t>(get<std::uint64_t>(is)), get<std::uint64_t>(is)};
    const auto n = get<std::uint64_t>(is);
    try {
        g.validate();
    } catch (const ConfigError& e) {
        throw IoError(std::string("field file: invalid grid: ") + e.what());
    }
    if (time != static_cast<double>(step) * g.dt)
        throw IoError("field file: time does not equal step * dt");
    if (has_source > 1)
        throw IoError("field file: bad source flag");
    if (n != g.cell_count())
        throw IoError("field file: cell count does not match the grid");
    std::vector<double> data(n);
    if (!is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * sizeof(double))))
        throw IoError("field file truncated");
    if (!has_source)
        return {Field::from_values(g, step, std::move(data)), replicate_id};
    if (src.cell >= n || src.step > step)
        throw IoError("field file: source outside the grid or in the future");
    if (step == src.step)
        return {Field::point_mass(g, src, data[src.cell]), replicate_id};
    return {Field::from_tilted(g, step, src, std::move(data)), replicate_id};
}

Field read_field(std::istream& is)
{
    return read_field_record(is).field;
}

void save_field(const std::string& path, const Field& f, std::uint64_t replicate_id)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot open " + path + " for writing");
    write_field(os, f, replicate_id);
}

FieldRecord load_field_record(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open " + path);
    return read_field_record(is);
}

Field load_field(const std::string& path)
{
    return load_field_record(path).field;
}

} // namespace shelab
