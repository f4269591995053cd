#include "cbsim/config.hpp"
#include "cbsim/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

// Flags win over the config file.
cbsim::RunConfig effective_config(const std::string& path, const CLI::App& app, std::uint64_t seed, int threads,
                                  const std::string& out, bool smooth, const std::string& fill)
{
    auto config = cbsim::load_config(path);
    if (app.count("--seed")) config.seed = seed;
    if (app.count("--threads")) config.threads = threads;
    if (app.count("--out")) config.out_dir = out;
    if (smooth) config.smooth_search = true;
    if (app.count("--fill")) {
        config.fill_cases = cbsim::parse_fill_policy(fill);
        config.fill_search = config.fill_cases;
    }
    cbsim::validate(config);
    return config;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"cbsim: network-based collective behaviour model driven by an epidemic signal"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_dir;
    bool smooth = false;
    std::string fill;
    app.add_option("--config", config_path, "run configuration file");
    app.add_option("--seed", seed, "top-level random seed (overrides config)");
    app.add_option("--threads", threads, "worker threads; never changes results")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_flag("--smooth-search", smooth, "7-day centered smoothing of the search series");
    app.add_option("--fill", fill, "missing-day fill policy for input series")
        ->check(CLI::IsMember({"zero", "previous"}));

    auto* simulate = app.add_subcommand("simulate", "run the model with explicit parameters");
    std::string params_file;
    std::size_t replicates = 1;
    bool dump_draws = false;
    simulate->add_option("--params", params_file, "parameter file (name = value)")->required();
    simulate->add_option("--replicates", replicates, "noise replicates; >= 2 also writes bands");
    simulate->add_flag("--dump-draws", dump_draws, "write per-replicate trajectories");

    auto* calibrate = app.add_subcommand("calibrate", "fit parameters to the search series with ABC");
    calibrate->add_flag("--dump-draws", dump_draws, "write per-draw predictive trajectories");

    auto* validate = app.add_subcommand("validate", "coverage, survey capture and R_t correlation");
    std::string bands_dir;
    validate->add_option("--bands", bands_dir, "directory holding band CSVs (default <out>/bands)");

    auto* report = app.add_subcommand("report", "summarize artifacts in the output directory");

    auto* synth = app.add_subcommand("synth-cases", "write the deterministic two-wave demo case series");
    std::string synth_start = "2020-01-31";
    std::size_t synth_days = 150;
    std::string synth_path;
    synth->add_option("--start", synth_start, "first date");
    synth->add_option("--days", synth_days, "number of days");
    synth->add_option("--file", synth_path, "output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            const auto series = cbsim::two_wave_cases(cbsim::iso_date(synth_start), synth_days);
            std::ofstream out(synth_path);
            if (!out) throw std::runtime_error("cannot open " + synth_path);
            out << "date,cases\n";
            for (std::size_t k = 0; k < series.size(); ++k)
                out << cbsim::format_iso_date(series.date_at(k)) << ',' << series[k] << '\n';
            return 0;
        }
        if (*report) {
            std::filesystem::path dir = out_dir;
            if (dir.empty()) dir = config_path.empty() ? "out" : effective_config(config_path, app, seed, threads, out_dir, smooth, fill).out_dir;
            cbsim::cmd_report(dir, std::cout);
            return 0;
        }
        if (config_path.empty()) throw std::invalid_argument("--config is required");
        const auto config = effective_config(config_path, app, seed, threads, out_dir, smooth, fill);
        if (*simulate) {
            cbsim::cmd_simulate(config, params_file, {replicates, dump_draws});
        } else if (*calibrate) {
            const auto post = cbsim::cmd_calibrate(config, {dump_draws});
            std::cerr << "posterior: " << post.particles.size() << " draws, final epsilon " << post.final_epsilon()
                      << '\n';
        } else if (*validate) {
            const auto dir = bands_dir.empty() ? std::filesystem::path(config.out_dir) / "bands"
                                               : std::filesystem::path(bands_dir);
            const auto r = cbsim::cmd_validate(config, dir);
            std::cerr << "coverage " << r.coverage << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
