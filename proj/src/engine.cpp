#include "cbsim/engine.hpp"

#include "cbsim/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace cbsim {

namespace {

void append_means(Trajectory& traj, std::span<const AgentState> pop)
{
    long double sp = 0.0L, se = 0.0L, sb = 0.0L;
    for (const auto& a : pop) {
        sp += a.perception;
        se += a.emotion;
        sb += a.behaviour;
    }
    const auto n = static_cast<long double>(pop.size());
    traj.mean_p.push_back(std::clamp(static_cast<double>(sp / n), 0.0, 1.0));
    traj.mean_e.push_back(std::clamp(static_cast<double>(se / n), 0.0, 1.0));
    traj.mean_b.push_back(std::clamp(static_cast<double>(sb / n), 0.0, 1.0));
}

const std::vector<double>& channel_means(const Trajectory& t, Channel c)
{
    switch (c) {
    case Channel::behaviour: return t.mean_b;
    case Channel::emotion: return t.mean_e;
    case Channel::perception: return t.mean_p;
    }
    return t.mean_b;
}

SummaryBands band_of(const std::vector<std::vector<double>>& rows, Date start)
{
    SummaryBands b;
    b.start = start;
    const std::size_t days = rows.front().size();
    std::vector<double> column(rows.size());
    for (std::size_t d = 0; d < days; ++d) {
        for (std::size_t r = 0; r < rows.size(); ++r) column[r] = rows[r][d];
        std::sort(column.begin(), column.end());
        b.lo.push_back(quantile_type7(column, 0.025));
        b.median.push_back(quantile_type7(column, 0.5));
        b.hi.push_back(quantile_type7(column, 0.975));
    }
    return b;
}

void check_draws(std::span<const ModelParams> draws)
{
    if (draws.size() < 2) throw std::invalid_argument("an ensemble needs at least 2 draws");
}

}  // namespace

std::string_view to_string(Channel c)
{
    switch (c) {
    case Channel::behaviour: return "behaviour";
    case Channel::emotion: return "emotion";
    case Channel::perception: return "perception";
    }
    return "behaviour";
}

Channel parse_channel(std::string_view text)
{
    for (auto c : kChannels)
        if (to_string(c) == text) return c;
    throw std::invalid_argument("unknown channel '" + std::string(text) + "'");
}

const SummaryBands& EnsembleResult::bands(Channel c) const noexcept
{
    switch (c) {
    case Channel::behaviour: return behaviour;
    case Channel::emotion: return emotion;
    case Channel::perception: return perception;
    }
    return behaviour;
}

double quantile_type7(std::span<const double> sorted, double p)
{
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

Trajectory run_simulation(const ModelParams& params, const SocialNetwork& net, const ExternalSignal& signal,
                          std::uint64_t seed, int threads)
{
    if (signal.size() == 0) throw std::invalid_argument("external signal is empty");
    validate(params);
    std::vector<AgentState> pop(net.size(), initial_state(params));
    auto noise = NoiseStream::for_population(seed, net.size());
    Trajectory traj;
    traj.start = signal.series().start();
    traj.mean_p.reserve(signal.size());
    traj.mean_e.reserve(signal.size());
    traj.mean_b.reserve(signal.size());
    for (std::size_t day = 0; day < signal.size(); ++day) {
        pop = threads > 1 ? step_population(pop, net, signal[day], params, noise, threads)
                          : step_population_serial(pop, net, signal[day], params, noise);
        append_means(traj, pop);
    }
    return traj;
}

DailySeries observable_transform(const Trajectory& traj, Channel channel)
{
    auto values = min_max(channel_means(traj, channel));
    if (channel == Channel::emotion)
        for (auto& v : values) v = std::sqrt(v);
    return DailySeries(traj.start, std::move(values), std::string(to_string(channel)));
}

EnsembleResult summarize(std::vector<Trajectory> members, bool keep_members)
{
    if (members.empty()) throw std::invalid_argument("nothing to summarize");
    const Date start = members.front().start;
    EnsembleResult out;
    for (auto c : kChannels) {
        std::vector<std::vector<double>> rows;
        rows.reserve(members.size());
        for (const auto& m : members) rows.push_back(observable_transform(m, c).values());
        auto bands = band_of(rows, start);
        switch (c) {
        case Channel::behaviour: out.behaviour = std::move(bands); break;
        case Channel::emotion: out.emotion = std::move(bands); break;
        case Channel::perception: out.perception = std::move(bands); break;
        }
    }
    std::vector<std::vector<double>> raw;
    raw.reserve(members.size());
    for (const auto& m : members) raw.push_back(m.mean_b);
    out.median_mean_behaviour = DailySeries(start, band_of(raw, start).median, "mean_behaviour");
    if (keep_members) out.members = std::move(members);
    return out;
}

EnsembleResult run_ensemble_serial(std::span<const ModelParams> draws, const SocialNetwork& net,
                                   const ExternalSignal& signal, std::uint64_t base_seed, bool keep_members)
{
    check_draws(draws);
    std::vector<Trajectory> members;
    members.reserve(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i)
        members.push_back(run_simulation(draws[i], net, signal, base_seed + i));
    return summarize(std::move(members), keep_members);
}

EnsembleResult run_ensemble(std::span<const ModelParams> draws, const SocialNetwork& net,
                            const ExternalSignal& signal, std::uint64_t base_seed, const EnsembleOptions& options)
{
    check_draws(draws);
    for (const auto& d : draws) validate(d);
    std::vector<Trajectory> members(draws.size());
    const auto n = static_cast<std::ptrdiff_t>(draws.size());
#pragma omp parallel for schedule(dynamic) num_threads(options.threads) if (options.threads > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        members[idx] = run_simulation(draws[idx], net, signal, base_seed + idx);
    }
    return summarize(std::move(members), options.keep_members);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    out << "date,mean_p,mean_e,mean_b\n";
    for (std::size_t k = 0; k < traj.size(); ++k)
        out << format_iso_date(add_days(traj.start, static_cast<long>(k))) << ',' << format_double(traj.mean_p[k])
            << ',' << format_double(traj.mean_e[k]) << ',' << format_double(traj.mean_b[k]) << '\n';
}

void write_bands_csv(std::ostream& out, const SummaryBands& bands)
{
    out << "date,lo2.5,median,hi97.5\n";
    for (std::size_t k = 0; k < bands.size(); ++k)
        out << format_iso_date(bands.date_at(k)) << ',' << format_double(bands.lo[k]) << ','
            << format_double(bands.median[k]) << ',' << format_double(bands.hi[k]) << '\n';
}

void write_bands_csv(const std::filesystem::path& path, const SummaryBands& bands)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_bands_csv(out, bands);
}

SummaryBands read_bands_csv(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path)) throw std::runtime_error("bands file not found: " + path.string());
    const auto rows = read_csv_rows(path);
    if (rows.empty() || rows.front().fields.size() != 4 || rows.front().fields[0] != "date")
        throw std::runtime_error(path.string() + ": expected header date,lo2.5,median,hi97.5");
    SummaryBands b;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != 4) throw DataError(path, row.line, "expected 4 columns");
        const auto date = parse_iso_date(row.fields[0]);
        if (!date) throw DataError(path, row.line, "unparseable date '" + row.fields[0] + "'");
        if (r == 1) b.start = *date;
        else if (*date != b.date_at(r - 1)) throw DataError(path, row.line, "dates are not consecutive");
        b.lo.push_back(parse_double(row.fields[1], path, row.line));
        b.median.push_back(parse_double(row.fields[2], path, row.line));
        b.hi.push_back(parse_double(row.fields[3], path, row.line));
    }
    if (b.size() == 0) throw std::runtime_error(path.string() + ": no band rows");
    return b;
}

void write_members_csv(std::ostream& out, std::span<const Trajectory> members)
{
    out << "draw,date,mean_p,mean_e,mean_b\n";
    for (std::size_t i = 0; i < members.size(); ++i) {
        const auto& t = members[i];
        for (std::size_t k = 0; k < t.size(); ++k)
            out << i << ',' << format_iso_date(add_days(t.start, static_cast<long>(k))) << ','
                << format_double(t.mean_p[k]) << ',' << format_double(t.mean_e[k]) << ','
                << format_double(t.mean_b[k]) << '\n';
    }
}

}  // namespace cbsim
