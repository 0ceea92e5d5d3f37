#include "shelab/report.hpp"

#include "shelab/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace shelab {

using nlohmann::json;

namespace {

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json grid_json(const GridSpec& g)
{
    return {{"dx", g.dx}, {"half_width", g.half_width}, {"dt", g.dt}, {"boundary", to_string(g.boundary)}};
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object())
        throw ConfigError(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out)
{
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

json config_json(const ExperimentConfig& c)
{
    json probes = json::array();
    for (const auto& [x, y] : c.probes)
        probes.push_back({x, y});
    return {{"kind", to_string(c.kind)},
            {"master_seed", c.master_seed},
            {"grid", grid_json(c.grid)},
            {"refinement", {{"levels", c.refinement.levels}, {"ratio", c.refinement.ratio}, {"x_max", c.refinement.x_max}}},
            {"times", c.times},
            {"lags", c.lags},
            {"N_values", c.N_values},
            {"replicates", c.replicates},
            {"calibration_replicates", c.calibration_replicates},
            {"bulk_half_width", c.bulk_half_width},
            {"significance", c.significance},
            {"workers", c.workers},
            {"output_dir", c.output_dir},
            {"fit", {{"lo", c.fit_lo}, {"hi", c.fit_hi}}},
            {"band_lags", c.band_lags},
            {"stationarity_points", c.stationarity_points},
            {"source_time", c.source_time},
            {"probes", probes},
            {"diagnostics", c.diagnostics},
            {"holder_times", c.holder_times},
            {"holder_resolution", c.holder_resolution},
            {"write_fields", c.write_fields}};
}

} // namespace

std::string csv_text(const Table& t)
{
    std::string s = "# shelab-csv v" + std::to_string(kCsvSchemaVersion) + " series=" + t.series + "\n";
    s += "t,lag_or_N,estimate,se,n_effective\n";
    for (const Row& r : t.rows)
        s += fmt17(r.t) + "," + fmt17(r.key) + "," + fmt17(r.estimate) + "," + fmt17(r.se) + "," +
             fmt17(r.n_effective) + "\n";
    return s;
}

std::string csv_body(const std::string& csv)
{
    const auto nl = csv.find('\n');
    return nl == std::string::npos ? std::string() : csv.substr(nl + 1);
}

Table parse_csv(const std::string& csv)
{
    std::istringstream is(csv);
    std::string line;
    Table t;
    if (!std::getline(is, line) || line.rfind("# shelab-csv v1 series=", 0) != 0)
        throw IoError("csv: missing or unsupported schema line");
    t.series = line.substr(std::string("# shelab-csv v1 series=").size());
    if (!std::getline(is, line) || line != "t,lag_or_N,estimate,se,n_effective")
        throw IoError("csv: unexpected column header");
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        Row r;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &r.t, &r.key, &r.estimate, &r.se, &r.n_effective) != 5)
            throw IoError("csv: malformed row '" + line + "'");
        t.rows.push_back(r);
    }
    return t;
}

std::string config_to_json(const ExperimentConfig& c)
{
    return config_json(c).dump(2);
}

ExperimentConfig config_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j,
               {"kind", "master_seed", "grid", "refinement", "times", "lags", "N_values", "replicates",
                "calibration_replicates", "bulk_half_width", "significance", "workers", "output_dir", "fit",
                "band_lags", "stationarity_points", "source_time", "probes", "diagnostics", "holder_times",
                "holder_resolution", "write_fields"},
               "config");
    ExperimentConfig c;
    std::string kind = to_string(c.kind);
    read(j, "kind", kind);
    c.kind = experiment_kind_from_string(kind);
    read(j, "master_seed", c.master_seed);
    if (j.contains("grid")) {
        const json& g = j["grid"];
        check_keys(g, {"dx", "half_width", "dt", "boundary"}, "grid");
        read(g, "dx", c.grid.dx);
        read(g, "half_width", c.grid.half_width);
        read(g, "dt", c.grid.dt);
        std::string b = to_string(c.grid.boundary);
        read(g, "boundary", b);
        c.grid.boundary = boundary_from_string(b);
    }
    if (j.contains("refinement")) {
        const json& r = j["refinement"];
        check_keys(r, {"levels", "ratio", "x_max"}, "refinement");
        read(r, "levels", c.refinement.levels);
        read(r, "ratio", c.refinement.ratio);
        read(r, "x_max", c.refinement.x_max);
    }
    read(j, "times", c.times);
    read(j, "lags", c.lags);
    read(j, "N_values", c.N_values);
    read(j, "replicates", c.replicates);
    read(j, "calibration_replicates", c.calibration_replicates);
    read(j, "bulk_half_width", c.bulk_half_width);
    read(j, "significance", c.significance);
    read(j, "workers", c.workers);
    read(j, "output_dir", c.output_dir);
    if (j.contains("fit")) {
        const json& f = j["fit"];
        check_keys(f, {"lo", "hi"}, "fit");
        read(f, "lo", c.fit_lo);
        read(f, "hi", c.fit_hi);
    }
    read(j, "band_lags", c.band_lags);
    read(j, "stationarity_points", c.stationarity_points);
    read(j, "source_time", c.source_time);
    if (j.contains("probes")) {
        std::vector<std::vector<double>> p;
        read(j, "probes", p);
        c.probes.clear();
        for (const auto& xy : p) {
            if (xy.size() != 2)
                throw ConfigError("each probe must be an [x, y] pair");
            c.probes.emplace_back(xy[0], xy[1]);
        }
    }
    read(j, "diagnostics", c.diagnostics);
    read(j, "holder_times", c.holder_times);
    read(j, "holder_resolution", c.holder_resolution);
    read(j, "write_fields", c.write_fields);
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return config_from_json(ss.str());
}

std::string report_to_json(const RunReport& r)
{
    json tables = json::array();
    for (const Table& t : r.tables) {
        json rows = json::array();
        for (const Row& row : t.rows)
            rows.push_back({row.t, row.key, row.estimate, row.se, row.n_effective});
        tables.push_back({{"series", t.series}, {"columns", {"t", "lag_or_N", "estimate", "se", "n_effective"}},
                          {"rows", rows}});
    }
    json tests = json::array();
    for (const TestReport& t : r.tests)
        tests.push_back({{"name", t.name},
                         {"statistic", t.statistic},
                         {"p_value", t.p_value},
                         {"sample_size", t.sample_size},
                         {"significance", t.significance},
                         {"reject", t.reject}});
    json verdicts = json::array();
    for (const Verdict& v : r.verdicts)
        verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
    const double rate = r.wall_seconds > 0.0 ? static_cast<double>(r.replicates_run) / r.wall_seconds : 0.0;
    json doc = {{"schema_version", r.schema_version},
                {"software_version", r.software_version},
                {"config", config_json(r.config)},
                {"tables", tables},
                {"tests", tests},
                {"verdicts", verdicts},
                {"all_pass", r.all_pass()},
                {"wall_seconds", r.wall_seconds},
                {"replicates_run", r.replicates_run},
                {"replicates_per_second", rate}};
    return doc.dump(2);
}

std::string summarize_report_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("report is not valid JSON: ") + e.what());
    }
    std::ostringstream os;
    os << "experiment: " << j.at("config").at("kind").get<std::string>()
       << "  seed: " << j.at("config").at("master_seed").get<std::uint64_t>()
       << "  replicates run: " << j.at("replicates_run").get<std::size_t>()
       << "  wall: " << j.at("wall_seconds").get<double>() << " s\n";
    for (const auto& t : j.at("tables"))
        os << "table " << t.at("series").get<std::string>() << ": " << t.at("rows").size() << " rows\n";
    for (const auto& t : j.at("tests"))
        os << "test " << t.at("name").get<std::string>() << ": statistic " << t.at("statistic").get<double>()
           << ", p = " << t.at("p_value").get<double>() << (t.at("reject").get<bool>() ? " (reject)" : "") << "\n";
    for (const auto& v : j.at("verdicts"))
        os << (v.at("pass").get<bool>() ? "PASS " : "FAIL ") << v.at("name").get<std::string>() << ": "
           << v.at("detail").get<std::string>() << "\n";
    return os.str();
}

} // namespace shelab
