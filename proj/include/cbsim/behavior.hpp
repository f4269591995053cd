#pragma once

#include "cbsim/network.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cbsim {

/// One individual's psychological state. All fields live in [0, 1].
struct AgentState {
    double perception = 0.0;  // perceived infection risk
    double emotion = 0.0;     // emotional intensity (anxiety, stress)
    double behaviour = 0.0;   // protective / information-seeking behaviour

    friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Free parameters of the dynamics.
///
/// Strengthening gains (alpha_*) drive the cascade signal -> perception ->
/// emotion -> behaviour. Weakening rates (beta_*, delta_b) let behaviour damp
/// perception and emotion and relax itself. kappa_* pull emotion and behaviour
/// toward the neighbourhood mean. sigma scales the daily emotion noise.
struct ModelParams {
    double alpha_p = 0.0;
    double alpha_e = 0.0;
    double alpha_b = 0.0;
    double beta_p = 0.0;
    double beta_e = 0.0;
    double delta_b = 0.0;
    double kappa_e = 0.0;
    double kappa_b = 0.0;
    double sigma = 0.0;
    double init_p = 0.0;
    double init_e = 0.0;
    double init_b = 0.0;

    static constexpr std::size_t kCount = 12;
    static constexpr std::array<std::string_view, kCount> kNames = {
        "alpha_p", "alpha_e", "alpha_b", "beta_p", "beta_e", "delta_b",
        "kappa_e", "kappa_b", "sigma",   "init_p", "init_e", "init_b"};

    std::array<double, kCount> to_array() const;
    static ModelParams from_array(const std::array<double, kCount>& v);

    /// Index of a parameter name in kNames; throws std::invalid_argument if unknown.
    static std::size_t index_of(std::string_view name);

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Domain bounds for parameter `index`: [0, +inf) for rates, [0, 1] for
/// couplings and initial values.
std::pair<double, double> param_domain(std::size_t index);

/// Throws std::invalid_argument naming the first offending field.
void validate(const ModelParams& params);
void validate(const AgentState& state);

AgentState initial_state(const ModelParams& params);

AgentState strengthening_step(const AgentState& state, double signal, const ModelParams& params);
AgentState weakening_step(const AgentState& state, const ModelParams& params);

/// Emotion contagion and behaviour mirroring against explicit neighbour states.
AgentState social_coupling(const AgentState& state, std::span<const AgentState> neighbours,
                           const ModelParams& params);

/// Per-agent noise keys for one simulation. Day counter advances once per
/// population step.
struct NoiseStream {
    std::vector<std::uint64_t> keys;
    std::uint64_t day = 0;

    /// Keys for agents [first_agent, first_agent + n) of a run seeded with `seed`.
    static NoiseStream for_population(std::uint64_t seed, std::size_t n, std::size_t first_agent = 0);
};

/// One synchronous day: strengthen, weaken, couple against neighbours'
/// start-of-day states, then add N(0, sigma^2) to emotion and clamp.
/// Serial reference implementation.
std::vector<AgentState> step_population_serial(std::span<const AgentState> population, const SocialNetwork& net,
                                               double signal, const ModelParams& params, NoiseStream& noise);

/// OpenMP version of the same kernel, parallel over agents. Bit-identical to
/// the serial reference for every thread count.
std::vector<AgentState> step_population(std::span<const AgentState> population, const SocialNetwork& net,
                                        double signal, const ModelParams& params, NoiseStream& noise,
                                        int threads = 1);

}  // namespace cbsim
