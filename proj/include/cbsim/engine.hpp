#pragma once

#include "cbsim/behavior.hpp"
#include "cbsim/network.hpp"
#include "cbsim/series.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace cbsim {

/// Population means recorded after each simulated day.
struct Trajectory {
    Date start{};
    std::vector<double> mean_p;
    std::vector<double> mean_e;
    std::vector<double> mean_b;

    std::size_t size() const noexcept { return mean_b.size(); }
    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

enum class Channel { behaviour, emotion, perception };
inline constexpr std::array<Channel, 3> kChannels = {Channel::behaviour, Channel::emotion, Channel::perception};

std::string_view to_string(Channel c);
Channel parse_channel(std::string_view text);

/// Pointwise 2.5% / 50% / 97.5% quantiles of one observable channel.
struct SummaryBands {
    Date start{};
    std::vector<double> lo;
    std::vector<double> median;
    std::vector<double> hi;

    std::size_t size() const noexcept { return median.size(); }
    Date date_at(std::size_t k) const noexcept { return add_days(start, static_cast<long>(k)); }
    friend bool operator==(const SummaryBands&, const SummaryBands&) = default;
};

struct EnsembleResult {
    SummaryBands behaviour;
    SummaryBands emotion;
    SummaryBands perception;
    /// Pointwise median of the untransformed population-mean behaviour.
    DailySeries median_mean_behaviour;
    /// Per-draw trajectories, filled only when requested.
    std::vector<Trajectory> members;

    const SummaryBands& bands(Channel c) const noexcept;
};

struct EnsembleOptions {
    int threads = 1;
    bool keep_members = false;
};

/// Linear interpolation between order statistics (R's type 7) on sorted data.
double quantile_type7(std::span<const double> sorted, double p);

/// Agents start from the params' initial values; one population step per
/// signal day; means recorded after each step.
Trajectory run_simulation(const ModelParams& params, const SocialNetwork& net, const ExternalSignal& signal,
                          std::uint64_t seed, int threads = 1);

/// behaviour / perception: min-max of the channel mean. emotion: sqrt of the
/// min-max normalized mean.
DailySeries observable_transform(const Trajectory& traj, Channel channel);

/// Serial reference: draw i is simulated with seed base_seed + i.
EnsembleResult run_ensemble_serial(std::span<const ModelParams> draws, const SocialNetwork& net,
                                   const ExternalSignal& signal, std::uint64_t base_seed, bool keep_members = false);

/// OpenMP fan-out over draws; bit-identical to the serial reference.
EnsembleResult run_ensemble(std::span<const ModelParams> draws, const SocialNetwork& net,
                            const ExternalSignal& signal, std::uint64_t base_seed, const EnsembleOptions& options = {});

/// Reduces already-simulated members to bands. Exposed for tests.
EnsembleResult summarize(std::vector<Trajectory> members, bool keep_members);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
/// "date,lo2.5,median,hi97.5" with a header row.
void write_bands_csv(std::ostream& out, const SummaryBands& bands);
void write_bands_csv(const std::filesystem::path& path, const SummaryBands& bands);
SummaryBands read_bands_csv(const std::filesystem::path& path);
/// "draw,date,mean_p,mean_e,mean_b".
void write_members_csv(std::ostream& out, std::span<const Trajectory> members);

}  // namespace cbsim
