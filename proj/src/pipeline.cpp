#include "cbsim/pipeline.hpp"

#include "cbsim/csv.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace cbsim {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

std::ofstream open_out(const std::filesystem::path& path)
{
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

void write_json(const std::filesystem::path& path, const ordered_json& j)
{
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

ordered_json params_json(const ModelParams& p)
{
    ordered_json j;
    const auto v = p.to_array();
    for (std::size_t i = 0; i < v.size(); ++i) j[std::string(ModelParams::kNames[i])] = v[i];
    return j;
}

ordered_json input_hashes(const RunConfig& c)
{
    ordered_json j = ordered_json::object();
    const std::pair<const char*, const std::string*> files[] = {
        {"cases", &c.cases.path},          {"search", &c.search.path},      {"rt", &c.rt.path},
        {"survey", &c.survey.path},        {"network_edges", &c.network_edges},
        {"synthetic_truth", &c.synthetic_truth}};
    for (const auto& [name, path] : files)
        if (!path->empty()) j[name] = file_hash(c.resolve(*path));
    return j;
}

ordered_json base_metadata(const std::string& command, const RunConfig& c, std::uint64_t seed)
{
    const auto text = result_text(c);
    ordered_json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["seed"] = seed;
    j["config_hash"] = fnv1a_hex(text);
    j["config"] = text;
    j["input_hashes"] = input_hashes(c);
    j["window"] = {{"first", format_iso_date(c.window.first)}, {"last", format_iso_date(c.window.last)}};
    j["network"] = describe(c.network);
    j["agents"] = c.agents;
    j["signal_normalization"] = "min-max over the study window";
    j["search_normalization"] = "min-max over the signal dates";
    j["search_smoothing"] = c.smooth_search ? "7-day centered moving average" : "none";
    j["fill"] = {{"cases", to_string(c.fill_cases)}, {"search", to_string(c.fill_search)}};
    j["quantile_rule"] = "type 7 (linear interpolation between order statistics)";
    return j;
}

void write_channel_bands(const std::filesystem::path& dir, const EnsembleResult& r)
{
    std::filesystem::create_directories(dir);
    for (auto c : kChannels) {
        auto out = open_out(dir / (std::string(to_string(c)) + ".csv"));
        write_bands_csv(out, r.bands(c));
    }
    auto out = open_out(dir / "mean_behaviour.csv");
    write_series_csv(out, r.median_mean_behaviour);
}

DailySeries observed_for_dates(const RunConfig& c, Date first, Date last)
{
    auto raw = load_daily_csv(c.resolve(c.search.path), c.search.date_column, c.search.value_column, c.window,
                              c.fill_search, "search");
    if (c.smooth_search) raw = smooth_centered(raw, 7);
    if (raw.start() > first || raw.last() < last)
        throw std::invalid_argument("search series covers " + format_iso_date(raw.start()) + ".." +
                                    format_iso_date(raw.last()) + " but " + format_iso_date(first) + ".." +
                                    format_iso_date(last) + " is required");
    return min_max_normalize(raw.slice(first, last)).series();
}

std::optional<Correlation> try_pearson(const DailySeries& x, const DailySeries& y, Date first, Date last)
{
    if (days_between(first, last) + 1 < 3) return std::nullopt;
    try {
        return pearson(x.slice(first, last).values(), y.slice(first, last).values());
    } catch (const std::invalid_argument&) {
        return std::nullopt;  // constant window
    }
}

ordered_json correlation_json(const std::optional<Correlation>& c)
{
    if (!c) return nullptr;
    return {{"r", c->r}, {"p", c->p_value}, {"n", c->n}};
}

}  // namespace

ExternalSignal load_signal(const RunConfig& c)
{
    if (c.cases.path.empty()) throw std::invalid_argument("config: cases.path is required");
    const auto cases = load_daily_csv(c.resolve(c.cases.path), c.cases.date_column, c.cases.value_column, c.window,
                                      c.fill_cases, "cases");
    return min_max_normalize(cases);
}

DailySeries load_observed_search(const RunConfig& c, const ExternalSignal& signal)
{
    if (c.search.path.empty()) throw std::invalid_argument("config: search.path is required");
    return observed_for_dates(c, signal.series().start(), signal.series().last());
}

SocialNetwork build_network(const RunConfig& c)
{
    if (!c.network_edges.empty()) return read_edge_list(c.resolve(c.network_edges), c.agents);
    return generate_network(c.network, c.agents, derive_seed(require_seed(c), SeedRole::network));
}

DailySeries two_wave_cases(Date start, std::size_t days)
{
    std::vector<double> v(days);
    for (std::size_t k = 0; k < days; ++k) {
        const double d = static_cast<double>(k);
        const double x = 6.0 * std::exp(-std::pow((d - 15.0) / 8.0, 2)) +
                         60.0 * std::exp(-std::pow((d - 58.0) / 7.0, 2)) +
                         4.0 * std::exp(-std::pow((d - 125.0) / 10.0, 2));
        v[k] = std::round(x);
    }
    return DailySeries(start, std::move(v), "cases");
}

void cmd_simulate(const RunConfig& config, const std::filesystem::path& params_file, const SimulateOptions& options)
{
    validate(config);
    const auto seed = require_seed(config);
    const auto params = load_params(params_file);
    const auto signal = load_signal(config);
    const auto net = build_network(config);
    const auto sim_seed = derive_seed(seed, SeedRole::simulate);
    const std::filesystem::path out_dir = config.out_dir;

    const auto traj = run_simulation(params, net, signal, sim_seed, config.threads);
    {
        auto out = open_out(out_dir / "trajectory.csv");
        write_trajectory_csv(out, traj);
    }
    for (auto c : kChannels) {
        auto out = open_out(out_dir / (std::string(to_string(c)) + ".csv"));
        write_series_csv(out, observable_transform(traj, c));
    }
    {
        auto out = open_out(out_dir / "signal.csv");
        write_series_csv(out, signal.series());
    }

    auto meta = base_metadata("simulate", config, seed);
    meta["params"] = params_json(params);
    meta["params_hash"] = file_hash(params_file);
    meta["simulation_seed"] = sim_seed;
    meta["replicates"] = options.replicates;
    if (options.replicates >= 2) {
        const std::vector<ModelParams> draws(options.replicates, params);
        const auto result = run_ensemble(draws, net, signal, sim_seed, {config.threads, options.dump_draws});
        write_channel_bands(out_dir / "bands", result);
        if (options.dump_draws) {
            auto out = open_out(out_dir / "draws.csv");
            write_members_csv(out, result.members);
        }
        meta["cri_source"] = "simulation noise only (fixed parameters)";
    }
    write_json(out_dir / "simulate.json", meta);
}

PosteriorEnsemble cmd_calibrate(const RunConfig& config, const CalibrateOptions& options)
{
    validate(config);
    const auto seed = require_seed(config);
    const auto signal = load_signal(config);
    const auto net = build_network(config);
    const std::filesystem::path out_dir = config.out_dir;

    std::optional<ModelParams> truth;
    DailySeries observed;
    if (!config.synthetic_truth.empty()) {
        truth = load_params(config.resolve(config.synthetic_truth));
        const auto traj = run_simulation(*truth, net, signal, derive_seed(seed, SeedRole::truth), config.threads);
        observed = observable_transform(traj, Channel::behaviour);
    } else {
        observed = load_observed_search(config, signal);
    }

    const FitTarget target{net, signal, observed};
    const auto abc_seed = derive_seed(seed, SeedRole::abc);
    PosteriorEnsemble post;
    if (config.abc.method == AbcMethod::smc) {
        SmcSchedule schedule = config.abc.schedule.empty()
                                   ? SmcSchedule{AdaptiveSchedule{config.abc.keep_fraction, config.abc.stages}}
                                   : SmcSchedule{FixedSchedule{config.abc.schedule}};
        post = abc_smc(config.prior, target, schedule,
                       {config.abc.pop_size, config.abc.max_sims_per_particle, config.threads}, abc_seed);
    } else {
        Acceptance rule = config.abc.epsilon ? Acceptance{Epsilon{*config.abc.epsilon}}
                                             : Acceptance{KeepQuantile{config.abc.quantile}};
        post = abc_rejection(config.prior, target, config.abc.draws, rule, abc_seed, config.threads);
    }

    const auto predictive_seed = derive_seed(seed, SeedRole::predictive);
    const auto bands = posterior_predictive(post, net, signal, predictive_seed, config.predictive_draws,
                                            {config.threads, options.dump_draws});

    {
        auto out = open_out(out_dir / "posterior.csv");
        write_posterior_csv(out, post);
    }
    write_channel_bands(out_dir / "bands", bands);
    if (options.dump_draws) {
        auto out = open_out(out_dir / "draws.csv");
        write_members_csv(out, bands.members);
    }
    {
        auto out = open_out(out_dir / "observed_search.csv");
        write_series_csv(out, observed);
    }
    {
        auto out = open_out(out_dir / "signal.csv");
        write_series_csv(out, signal.series());
    }

    auto meta = base_metadata("calibrate", config, seed);
    meta["fitted_channel"] = "behaviour";
    meta["distance"] = "rmse";
    meta["method"] = post.method;
    meta["abc_seed"] = abc_seed;
    meta["predictive_seed"] = predictive_seed;
    meta["predictive_draws"] = config.predictive_draws;
    meta["cri_source"] = "posterior draws x simulation noise";
    ordered_json prior = ordered_json::object();
    for (std::size_t i = 0; i < ModelParams::kCount; ++i)
        prior[std::string(ModelParams::kNames[i])] = {config.prior.ranges[i].first, config.prior.ranges[i].second};
    meta["prior"] = prior;
    ordered_json stages = ordered_json::array();
    for (const auto& s : post.stages)
        stages.push_back({{"epsilon", std::isfinite(s.epsilon) ? ordered_json(s.epsilon) : ordered_json("inf")},
                          {"simulations", s.simulations},
                          {"accepted", s.accepted},
                          {"acceptance_rate", s.acceptance_rate()},
                          {"mean_distance", s.mean_distance}});
    meta["stages"] = stages;
    meta["posterior_size"] = post.particles.size();
    meta["posterior_median"] = params_json(posterior_median(post));
    write_json(out_dir / "calibration.json", meta);

    if (truth) {
        const auto median = posterior_median(post);
        ordered_json rel = ordered_json::object();
        const auto t = truth->to_array();
        const auto m = median.to_array();
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (config.prior.pinned(i)) continue;
            const auto [lo, hi] = config.prior.ranges[i];
            rel[std::string(ModelParams::kNames[i])] = std::abs(m[i] - t[i]) / (hi - lo);
        }
        // theta* re-simulated with the generating seed reproduces the data exactly.
        const double truth_distance = simulated_distance(*truth, target, derive_seed(seed, SeedRole::truth));
        const double fresh_distance = simulated_distance(*truth, target, derive_seed(seed, SeedRole::truth) + 1);
        ordered_json rec;
        rec["truth"] = params_json(*truth);
        rec["posterior_median"] = params_json(median);
        rec["prior_relative_error"] = rel;
        rec["coverage"] = coverage_fraction(observed, bands.behaviour);
        rec["final_epsilon"] = post.final_epsilon();
        rec["truth_distance_generating_seed"] = truth_distance;
        rec["truth_distance_fresh_seed"] = fresh_distance;
        rec["truth_accepted"] = truth_distance <= post.final_epsilon();
        write_json(out_dir / "recovery.json", rec);
    }
    return post;
}

ValidationReport cmd_validate(const RunConfig& config, const std::filesystem::path& bands_dir)
{
    validate(config);
    const auto behaviour = read_bands_csv(bands_dir / "behaviour.csv");
    const auto perception = read_bands_csv(bands_dir / "perception.csv");
    if (perception.start != behaviour.start || perception.size() != behaviour.size())
        throw std::invalid_argument("behaviour and perception bands cover different dates");
    const Date first = behaviour.start;
    const Date last = behaviour.date_at(behaviour.size() - 1);

    DailySeries observed;
    if (!config.search.path.empty()) {
        observed = observed_for_dates(config, first, last);
    } else {
        const auto path = std::filesystem::path(config.out_dir) / "observed_search.csv";
        if (!std::filesystem::exists(path))
            throw std::invalid_argument("no search.path in config and no " + path.string());
        observed = read_series_csv(path);
    }

    ValidationReport report;
    report.first = first;
    report.last = last;
    report.coverage = coverage_fraction(observed, behaviour);
    report.config_hash = fnv1a_hex(result_text(config));

    if (!config.survey.path.empty()) {
        auto survey = transform_survey(load_survey_csv(config.resolve(config.survey.path), config.survey.date_column,
                                                       config.survey.value_column));
        report.survey = survey_capture(survey, perception);
    }

    if (!config.rt.path.empty()) {
        const auto rt = load_rt_csv(config.resolve(config.rt.path), config.rt.date_column, config.rt.value_column,
                                    config.window);
        const auto raw = read_series_csv(bands_dir / "mean_behaviour.csv");
        const DailySeries normalized(behaviour.start, behaviour.median, "behaviour_median");
        const Date a = std::max(rt.start(), raw.start());
        const Date b = std::min(rt.last(), raw.last());
        if (a > b) throw std::invalid_argument("R_t series does not overlap the simulated window");
        const Date split = config.rt_split;
        const std::vector<std::tuple<std::string, Date, Date>> windows = {
            {"full", a, b}, {"before_split", a, std::min(b, add_days(split, -1))}, {"from_split", std::max(a, split), b}};
        for (const auto& [name, lo, hi] : windows) {
            PearsonWindow w{name, lo, hi, std::nullopt, std::nullopt};
            if (lo <= hi) {
                w.raw = try_pearson(rt, raw, lo, hi);
                w.normalized = try_pearson(rt, normalized, lo, hi);
            }
            report.pearson.push_back(w);
        }
    }

    ordered_json j;
    j["coverage"] = report.coverage;
    j["survey_k"] = report.survey ? ordered_json(report.survey->inside) : ordered_json(nullptr);
    j["survey_n"] = report.survey ? ordered_json(report.survey->total) : ordered_json(nullptr);
    const auto* full = report.pearson.empty() ? nullptr : &report.pearson.front();
    j["pearson_r"] = full && full->raw ? ordered_json(full->raw->r) : ordered_json(nullptr);
    j["pearson_p"] = full && full->raw ? ordered_json(full->raw->p_value) : ordered_json(nullptr);
    j["window"] = {{"first", format_iso_date(first)}, {"last", format_iso_date(last)}};
    j["config_hash"] = report.config_hash;
    ordered_json windows = ordered_json::array();
    for (const auto& w : report.pearson)
        windows.push_back({{"name", w.name},
                           {"first", format_iso_date(w.first)},
                           {"last", format_iso_date(w.last)},
                           {"raw_mean_behaviour", correlation_json(w.raw)},
                           {"normalized_behaviour", correlation_json(w.normalized)}});
    j["pearson_windows"] = windows;
    j["band_membership"] = "inclusive";
    j["pearson_p_method"] = "two-sided Student t, n-2 df";
    write_json(std::filesystem::path(config.out_dir) / "validation.json", j);
    return report;
}

void cmd_report(const std::filesystem::path& out_dir, std::ostream& out)
{
    auto read = [&](const char* name) -> std::optional<nlohmann::json> {
        const auto path = out_dir / name;
        if (!std::filesystem::exists(path)) return std::nullopt;
        std::ifstream in(path);
        return nlohmann::json::parse(in);
    };
    bool any = false;
    out << std::fixed << std::setprecision(4);
    if (auto cal = read("calibration.json")) {
        any = true;
        out << "calibration (" << (*cal)["method"].get<std::string>() << ", seed " << (*cal)["seed"] << ")\n";
        for (const auto& s : (*cal)["stages"])
            out << "  stage eps=" << s["epsilon"] << " sims=" << s["simulations"] << " accepted=" << s["accepted"]
                << " mean_distance=" << s["mean_distance"].get<double>() << '\n';
        out << "  posterior median:\n";
        for (const auto& [k, v] : (*cal)["posterior_median"].items())
            out << "    " << std::left << std::setw(8) << k << ' ' << v.get<double>() << '\n';
    }
    if (auto rec = read("recovery.json")) {
        any = true;
        out << "synthetic recovery: coverage " << (*rec)["coverage"].get<double>() << ", truth accepted "
            << ((*rec)["truth_accepted"].get<bool>() ? "yes" : "no") << '\n';
    }
    if (auto val = read("validation.json")) {
        any = true;
        out << "validation " << (*val)["window"]["first"].get<std::string>() << ".."
            << (*val)["window"]["last"].get<std::string>() << '\n';
        out << "  search coverage of 95% band: " << (*val)["coverage"].get<double>() << '\n';
        if (!(*val)["survey_k"].is_null())
            out << "  survey rounds inside perception band: " << (*val)["survey_k"] << "/" << (*val)["survey_n"]
                << '\n';
        for (const auto& w : (*val)["pearson_windows"]) {
            out << "  pearson(R_t, mean behaviour) " << w["name"].get<std::string>() << ": ";
            if (w["raw_mean_behaviour"].is_null()) out << "n/a\n";
            else
                out << "r=" << w["raw_mean_behaviour"]["r"].get<double>()
                    << " p=" << std::scientific << w["raw_mean_behaviour"]["p"].get<double>() << std::fixed
                    << " n=" << w["raw_mean_behaviour"]["n"] << '\n';
        }
    }
    if (auto sim = read("simulate.json")) {
        any = true;
        out << "simulate: seed " << (*sim)["seed"] << ", replicates " << (*sim)["replicates"] << '\n';
    }
    if (!any) throw std::runtime_error("no run artifacts found in " + out_dir.string());
}

}  // namespace cbsim
