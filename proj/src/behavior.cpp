#include "cbsim/behavior.hpp"

#include "cbsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cbsim {

namespace {

constexpr double clamp01(double x) noexcept { return std::clamp(x, 0.0, 1.0); }

bool in_unit(double x) noexcept { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

void check_signal(double signal)
{
    if (!std::isfinite(signal)) throw std::invalid_argument("external signal is not finite");
    if (signal < 0.0 || signal > 1.0)
        throw std::invalid_argument("external signal " + std::to_string(signal) + " outside [0,1]");
}

// Unchecked forms shared by the public functions and the population kernels.
AgentState strengthen(AgentState s, double signal, const ModelParams& q) noexcept
{
    s.perception = clamp01(s.perception + q.alpha_p * signal * (1.0 - s.perception));
    s.emotion = clamp01(s.emotion + q.alpha_e * s.perception * (1.0 - s.emotion));
    s.behaviour = clamp01(s.behaviour + q.alpha_b * s.emotion * (1.0 - s.behaviour));
    return s;
}

AgentState weaken(AgentState s, const ModelParams& q) noexcept
{
    const double b = s.behaviour;
    s.perception = clamp01(s.perception - q.beta_p * b * s.perception);
    s.emotion = clamp01(s.emotion - q.beta_e * b * s.emotion);
    s.behaviour = clamp01(b - q.delta_b * b);
    return s;
}

AgentState couple(AgentState s, double mean_e, double mean_b, const ModelParams& q) noexcept
{
    s.emotion = clamp01(s.emotion + q.kappa_e * (mean_e - s.emotion));
    s.behaviour = clamp01(s.behaviour + q.kappa_b * (mean_b - s.behaviour));
    return s;
}

AgentState update_agent(std::span<const AgentState> population, const SocialNetwork& net, std::size_t i,
                        double signal, const ModelParams& q, std::uint64_t key, std::uint64_t day) noexcept
{
    AgentState s = weaken(strengthen(population[i], signal, q), q);
    const auto nbrs = net.neighbours(i);
    if (!nbrs.empty()) {
        double sum_e = 0.0;
        double sum_b = 0.0;
        for (auto j : nbrs) {
            sum_e += population[j].emotion;
            sum_b += population[j].behaviour;
        }
        const auto k = static_cast<double>(nbrs.size());
        s = couple(s, sum_e / k, sum_b / k, q);
    }
    if (q.sigma > 0.0) s.emotion = clamp01(s.emotion + q.sigma * standard_normal(key, day));
    return s;
}

void check_population(std::span<const AgentState> population, const SocialNetwork& net, const NoiseStream& noise)
{
    if (population.size() != net.size())
        throw std::invalid_argument("population size " + std::to_string(population.size()) +
                                    " does not match network size " + std::to_string(net.size()));
    if (noise.keys.size() != population.size())
        throw std::invalid_argument("noise stream has " + std::to_string(noise.keys.size()) + " keys for " +
                                    std::to_string(population.size()) + " agents");
    for (const auto& s : population) validate(s);
}

}  // namespace

std::array<double, ModelParams::kCount> ModelParams::to_array() const
{
    return {alpha_p, alpha_e, alpha_b, beta_p, beta_e, delta_b, kappa_e, kappa_b, sigma, init_p, init_e, init_b};
}

ModelParams ModelParams::from_array(const std::array<double, kCount>& v)
{
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11]};
}

std::size_t ModelParams::index_of(std::string_view name)
{
    for (std::size_t i = 0; i < kCount; ++i)
        if (kNames[i] == name) return i;
    throw std::invalid_argument("unknown model parameter '" + std::string(name) + "'");
}

std::pair<double, double> param_domain(std::size_t index)
{
    const auto name = ModelParams::kNames.at(index);
    if (name.starts_with("kappa") || name.starts_with("init")) return {0.0, 1.0};
    return {0.0, std::numeric_limits<double>::infinity()};
}

void validate(const ModelParams& params)
{
    const auto values = params.to_array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto [lo, hi] = param_domain(i);
        if (!std::isfinite(values[i]) || values[i] < lo || values[i] > hi)
            throw std::invalid_argument("parameter " + std::string(ModelParams::kNames[i]) + " = " +
                                        std::to_string(values[i]) + " outside its domain");
    }
}

void validate(const AgentState& state)
{
    if (!in_unit(state.perception) || !in_unit(state.emotion) || !in_unit(state.behaviour))
        throw std::invalid_argument("agent state (" + std::to_string(state.perception) + ", " +
                                    std::to_string(state.emotion) + ", " + std::to_string(state.behaviour) +
                                    ") is not finite or not in [0,1]");
}

AgentState initial_state(const ModelParams& params) { return {params.init_p, params.init_e, params.init_b}; }

AgentState strengthening_step(const AgentState& state, double signal, const ModelParams& params)
{
    check_signal(signal);
    validate(state);
    return strengthen(state, signal, params);
}

AgentState weakening_step(const AgentState& state, const ModelParams& params)
{
    validate(state);
    return weaken(state, params);
}

AgentState social_coupling(const AgentState& state, std::span<const AgentState> neighbours,
                           const ModelParams& params)
{
    validate(state);
    if (neighbours.empty()) return state;
    double sum_e = 0.0;
    double sum_b = 0.0;
    for (const auto& n : neighbours) {
        validate(n);
        sum_e += n.emotion;
        sum_b += n.behaviour;
    }
    const auto k = static_cast<double>(neighbours.size());
    return couple(state, sum_e / k, sum_b / k, params);
}

NoiseStream NoiseStream::for_population(std::uint64_t seed, std::size_t n, std::size_t first_agent)
{
    NoiseStream s;
    s.keys.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.keys[i] = agent_key(seed, first_agent + i);
    return s;
}

std::vector<AgentState> step_population_serial(std::span<const AgentState> population, const SocialNetwork& net,
                                               double signal, const ModelParams& params, NoiseStream& noise)
{
    check_signal(signal);
    check_population(population, net, noise);
    std::vector<AgentState> next(population.size());
    for (std::size_t i = 0; i < population.size(); ++i)
        next[i] = update_agent(population, net, i, signal, params, noise.keys[i], noise.day);
    ++noise.day;
    return next;
}

std::vector<AgentState> step_population(std::span<const AgentState> population, const SocialNetwork& net,
                                        double signal, const ModelParams& params, NoiseStream& noise, int threads)
{
    check_signal(signal);
    check_population(population, net, noise);
    std::vector<AgentState> next(population.size());
    const auto n = static_cast<std::ptrdiff_t>(population.size());
    const auto day = noise.day;
    const auto* keys = noise.keys.data();
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        next[idx] = update_agent(population, net, idx, signal, params, keys[idx], day);
    }
    ++noise.day;
    return next;
}

}  // namespace cbsim
