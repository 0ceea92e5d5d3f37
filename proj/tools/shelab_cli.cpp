#include "shelab/errors.hpp"
#include "shelab/experiments.hpp"
#include "shelab/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace shelab;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::string out;
    bool strict = false;
};

void add_common(CLI::App* app, Common& c, bool with_config = true)
{
    if (with_config)
        app->add_option("--config", c.config, "experiment configuration (JSON)")->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "master seed (overrides the config)");
    app->add_option("--workers", c.workers, "worker threads, 0 = all cores (overrides the config)");
    app->add_option("--out", c.out, "output directory for CSV tables and report.json");
    app->add_flag("--strict", c.strict, "exit with status 3 if any acceptance verdict fails");
}

int run_kind(ExperimentKind kind, const Common& o)
{
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    cfg.kind = kind;
    if (o.seed)
        cfg.master_seed = *o.seed;
    if (o.workers)
        cfg.workers = *o.workers;
    if (!o.out.empty())
        cfg.output_dir = o.out;
    const RunReport rep = run(cfg, [](const std::string& msg) { std::cerr << msg << "\n"; });
    std::cout << summarize_report_json(report_to_json(rep));
    if (!cfg.output_dir.empty())
        std::cout << "outputs written to " << cfg.output_dir << "\n";
    return (o.strict && !rep.all_pass()) ? 3 : 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monte Carlo lab for the stochastic heat equation with Dirac initial data"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        ExperimentKind kind;
        const char* help;
    };
    const Sub subs[] = {
        {"simulate", ExperimentKind::simulate, "evolve replicates; first-moment table, optional field snapshots"},
        {"covariance", ExperimentKind::covariance, "height covariance, decay fit and stationarity tests"},
        {"clt", ExperimentKind::clt, "spatial-average variance and normality (and two-time covariance)"},
        {"fdd", ExperimentKind::fdd, "two-time covariance of spatial averages"},
        {"shift-check", ExperimentKind::shift_check, "Monte Carlo check of the Green-function shift identity"},
        {"oracle", ExperimentKind::oracle_suite, "deterministic quadrature oracles"},
        {"diagnostics", ExperimentKind::diagnostics, "noise-free regression, moments, Holder exponent"},
    };
    std::vector<Common> opts(std::size(subs));
    std::vector<CLI::App*> apps;
    for (std::size_t i = 0; i < std::size(subs); ++i) {
        apps.push_back(app.add_subcommand(subs[i].name, subs[i].help));
        add_common(apps.back(), opts[i]);
    }
    auto* report = app.add_subcommand("report", "print the summary of a finished run");
    std::string report_path;
    report->add_option("--out", report_path, "run directory or report.json path")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        for (std::size_t i = 0; i < apps.size(); ++i)
            if (apps[i]->parsed())
                return run_kind(subs[i].kind, opts[i]);
        if (report->parsed()) {
            std::filesystem::path p(report_path);
            if (std::filesystem::is_directory(p))
                p /= "report.json";
            std::ifstream is(p);
            if (!is)
                throw IoError("cannot open " + p.string());
            std::stringstream ss;
            ss << is.rdbuf();
            std::cout << summarize_report_json(ss.str());
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
