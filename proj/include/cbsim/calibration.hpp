#pragma once

#include "cbsim/behavior.hpp"
#include "cbsim/engine.hpp"
#include "cbsim/network.hpp"
#include "cbsim/series.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cbsim {

/// Independent uniform ranges over every ModelParams field. A zero-width
/// range pins the field.
struct PriorSpec {
    std::array<std::pair<double, double>, ModelParams::kCount> ranges{};

    /// alpha/beta/delta/kappa ~ U(0, 0.5), sigma ~ U(0, 0.05), inits pinned at 0.01.
    static PriorSpec defaults();

    void set(std::string_view name, double lo, double hi);
    bool pinned(std::size_t i) const noexcept { return ranges[i].first == ranges[i].second; }
    bool contains(const ModelParams& p) const noexcept;
    ModelParams sample(std::mt19937_64& rng) const;

    friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

/// Throws std::invalid_argument for lo > hi or a range leaving the parameter's domain.
void validate(const PriorSpec& prior);

class NoAcceptancesError : public std::runtime_error {
public:
    explicit NoAcceptancesError(double min_distance);
    double min_distance() const noexcept { return min_distance_; }

private:
    double min_distance_;
};

class PopulationExtinctError : public std::runtime_error {
public:
    PopulationExtinctError(std::size_t stage, double acceptance_rate, std::size_t simulations);
    std::size_t stage() const noexcept { return stage_; }
    double acceptance_rate() const noexcept { return rate_; }

private:
    std::size_t stage_;
    double rate_;
};

/// Root-mean-square difference over aligned days.
double distance(const DailySeries& sim, const DailySeries& obs);

struct Particle {
    ModelParams params;
    double distance = 0.0;
    double weight = 0.0;
};

struct StageInfo {
    double epsilon = 0.0;
    std::size_t simulations = 0;
    std::size_t accepted = 0;
    double mean_distance = 0.0;

    double acceptance_rate() const noexcept
    {
        return simulations == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(simulations);
    }
};

struct PosteriorEnsemble {
    std::string method;
    std::vector<Particle> particles;  // weights sum to 1
    std::vector<StageInfo> stages;

    double final_epsilon() const noexcept { return stages.empty() ? 0.0 : stages.back().epsilon; }
    std::vector<ModelParams> params() const;
};

/// Accept every draw with distance <= epsilon.
struct Epsilon {
    double value = 0.0;
};
/// Keep the best ceil(fraction * n) draws.
struct KeepQuantile {
    double fraction = 1.0;
};
using Acceptance = std::variant<Epsilon, KeepQuantile>;

/// Everything the distance is computed against.
struct FitTarget {
    const SocialNetwork& net;
    const ExternalSignal& signal;
    const DailySeries& observed;  // normalized behaviour series aligned with the signal
};

/// Distance between the simulated behaviour channel and the observed series.
double simulated_distance(const ModelParams& params, const FitTarget& target, std::uint64_t seed);

PosteriorEnsemble abc_rejection(const PriorSpec& prior, const FitTarget& target, std::size_t n_draws,
                                const Acceptance& rule, std::uint64_t base_seed, int threads = 1);

/// Explicit strictly decreasing tolerances.
struct FixedSchedule {
    std::vector<double> epsilons;
};
/// Stage 0 keeps the best `keep_fraction` of ceil(pop / keep_fraction) prior
/// draws; each later stage's tolerance is the `keep_fraction` quantile of the
/// previous population's distances.
struct AdaptiveSchedule {
    double keep_fraction = 0.3;
    std::size_t stages = 4;
};
using SmcSchedule = std::variant<FixedSchedule, AdaptiveSchedule>;

struct SmcOptions {
    std::size_t pop_size = 500;
    /// A stage that needs more than this many simulations per particle is extinct.
    std::size_t max_simulations_per_particle = 200;
    int threads = 1;
};

/// Sequential importance-resampling ABC with a Gaussian perturbation kernel
/// (variance twice the weighted per-parameter variance). Proposals outside
/// the prior support are redrawn before simulation.
PosteriorEnsemble abc_smc(const PriorSpec& prior, const FitTarget& target, const SmcSchedule& schedule,
                          const SmcOptions& options, std::uint64_t base_seed);

/// Resamples `draws` parameter sets by weight and runs them as an ensemble.
EnsembleResult posterior_predictive(const PosteriorEnsemble& post, const SocialNetwork& net,
                                    const ExternalSignal& signal, std::uint64_t base_seed, std::size_t draws,
                                    const EnsembleOptions& options = {});

/// One column per parameter, then distance and weight.
void write_posterior_csv(std::ostream& out, const PosteriorEnsemble& post);
PosteriorEnsemble read_posterior_csv(const std::filesystem::path& path);

/// Weighted per-parameter median of the posterior.
ModelParams posterior_median(const PosteriorEnsemble& post);

}  // namespace cbsim
