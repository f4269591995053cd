#include "cbsim/calibration.hpp"

#include "cbsim/csv.hpp"
#include "cbsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace cbsim {

namespace {

void check_target(const FitTarget& target)
{
    if (target.signal.size() == 0) throw std::invalid_argument("calibration: empty external signal");
    if (target.observed.start() != target.signal.series().start() || target.observed.size() != target.signal.size())
        throw std::invalid_argument("calibration: observed series (" + format_iso_date(target.observed.start()) +
                                    ", " + std::to_string(target.observed.size()) +
                                    " days) is not aligned with the signal (" +
                                    format_iso_date(target.signal.series().start()) + ", " +
                                    std::to_string(target.signal.size()) + " days)");
}

std::uint64_t simulation_seed(std::uint64_t base_seed, std::size_t stage, std::size_t index)
{
    return mix64(base_seed ^ mix64(0xA5A5A5A5ULL + stage)) + index;
}

std::vector<double> simulate_batch(std::span<const ModelParams> batch, const FitTarget& target,
                                   std::uint64_t base_seed, std::size_t stage, std::size_t first_index, int threads)
{
    for (const auto& p : batch) validate(p);
    std::vector<double> out(batch.size());
    const auto n = static_cast<std::ptrdiff_t>(batch.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        out[idx] = simulated_distance(batch[idx], target, simulation_seed(base_seed, stage, first_index + idx));
    }
    return out;
}

double mean_distance(const std::vector<Particle>& ps)
{
    double s = 0.0;
    for (const auto& p : ps) s += p.distance;
    return ps.empty() ? 0.0 : s / static_cast<double>(ps.size());
}

void normalize_weights(std::vector<Particle>& ps)
{
    double total = 0.0;
    for (const auto& p : ps) total += p.weight;
    for (auto& p : ps) p.weight /= total;
}

// Weighted variance of each parameter across the population.
std::array<double, ModelParams::kCount> weighted_variance(const std::vector<Particle>& ps)
{
    std::array<double, ModelParams::kCount> mean{}, var{};
    for (const auto& p : ps) {
        const auto v = p.params.to_array();
        for (std::size_t j = 0; j < v.size(); ++j) mean[j] += p.weight * v[j];
    }
    for (const auto& p : ps) {
        const auto v = p.params.to_array();
        for (std::size_t j = 0; j < v.size(); ++j) var[j] += p.weight * (v[j] - mean[j]) * (v[j] - mean[j]);
    }
    return var;
}

}  // namespace

PriorSpec PriorSpec::defaults()
{
    PriorSpec p;
    for (std::size_t i = 0; i < ModelParams::kCount; ++i) {
        const auto name = ModelParams::kNames[i];
        if (name == "sigma") p.ranges[i] = {0.0, 0.05};
        else if (name.starts_with("init")) p.ranges[i] = {0.01, 0.01};
        else p.ranges[i] = {0.0, 0.5};
    }
    return p;
}

void PriorSpec::set(std::string_view name, double lo, double hi) { ranges[ModelParams::index_of(name)] = {lo, hi}; }

bool PriorSpec::contains(const ModelParams& p) const noexcept
{
    const auto v = p.to_array();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] < ranges[i].first || v[i] > ranges[i].second) return false;
    return true;
}

ModelParams PriorSpec::sample(std::mt19937_64& rng) const
{
    std::array<double, ModelParams::kCount> v{};
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto [lo, hi] = ranges[i];
        v[i] = lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    return ModelParams::from_array(v);
}

void validate(const PriorSpec& prior)
{
    for (std::size_t i = 0; i < ModelParams::kCount; ++i) {
        const auto [lo, hi] = prior.ranges[i];
        const auto name = std::string(ModelParams::kNames[i]);
        if (!std::isfinite(lo) || !std::isfinite(hi))
            throw std::invalid_argument("prior for " + name + " must have finite bounds");
        if (lo > hi)
            throw std::invalid_argument("prior for " + name + " has lo > hi (" + std::to_string(lo) + " > " +
                                        std::to_string(hi) + ")");
        const auto [dlo, dhi] = param_domain(i);
        if (lo < dlo || hi > dhi)
            throw std::invalid_argument("prior for " + name + " leaves the parameter domain");
    }
}

NoAcceptancesError::NoAcceptancesError(double min_distance)
    : std::runtime_error("ABC: no acceptances (smallest distance " + std::to_string(min_distance) + ")"),
      min_distance_(min_distance)
{
}

PopulationExtinctError::PopulationExtinctError(std::size_t stage, double acceptance_rate, std::size_t simulations)
    : std::runtime_error("ABC-SMC: population extinct at stage " + std::to_string(stage) + " (acceptance rate " +
                         std::to_string(acceptance_rate) + " after " + std::to_string(simulations) +
                         " simulations)"),
      stage_(stage), rate_(acceptance_rate)
{
}

double distance(const DailySeries& sim, const DailySeries& obs)
{
    if (sim.start() != obs.start() || sim.size() != obs.size())
        throw std::invalid_argument("distance: series are not aligned (" + format_iso_date(sim.start()) + "+" +
                                    std::to_string(sim.size()) + " vs " + format_iso_date(obs.start()) + "+" +
                                    std::to_string(obs.size()) + ")");
    if (sim.empty()) throw std::invalid_argument("distance: empty series");
    double ss = 0.0;
    for (std::size_t k = 0; k < sim.size(); ++k) {
        const double d = sim[k] - obs[k];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(sim.size()));
}

std::vector<ModelParams> PosteriorEnsemble::params() const
{
    std::vector<ModelParams> out;
    out.reserve(particles.size());
    for (const auto& p : particles) out.push_back(p.params);
    return out;
}

double simulated_distance(const ModelParams& params, const FitTarget& target, std::uint64_t seed)
{
    const auto traj = run_simulation(params, target.net, target.signal, seed);
    return distance(observable_transform(traj, Channel::behaviour), target.observed);
}

PosteriorEnsemble abc_rejection(const PriorSpec& prior, const FitTarget& target, std::size_t n_draws,
                                const Acceptance& rule, std::uint64_t base_seed, int threads)
{
    validate(prior);
    check_target(target);
    if (n_draws < 1) throw std::invalid_argument("abc_rejection: need at least one draw");
    if (const auto* e = std::get_if<Epsilon>(&rule); e && !(e->value > 0.0))
        throw std::invalid_argument("abc_rejection: epsilon must be > 0");
    if (const auto* q = std::get_if<KeepQuantile>(&rule); q && !(q->fraction > 0.0 && q->fraction <= 1.0))
        throw std::invalid_argument("abc_rejection: acceptance quantile must lie in (0, 1]");

    std::mt19937_64 rng(base_seed);
    std::vector<ModelParams> draws;
    draws.reserve(n_draws);
    for (std::size_t i = 0; i < n_draws; ++i) draws.push_back(prior.sample(rng));
    const auto dist = simulate_batch(draws, target, base_seed, 0, 0, threads);

    std::vector<std::size_t> keep;
    double epsilon = 0.0;
    if (const auto* e = std::get_if<Epsilon>(&rule)) {
        epsilon = e->value;
        for (std::size_t i = 0; i < n_draws; ++i)
            if (dist[i] <= epsilon) keep.push_back(i);
    } else {
        const auto fraction = std::get<KeepQuantile>(rule).fraction;
        const auto k = std::min(n_draws, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n_draws) - 1e-9)));
        std::vector<std::size_t> order(n_draws);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] < dist[b]; });
        keep.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(k, 1)));
        std::sort(keep.begin(), keep.end());
        epsilon = fraction >= 1.0 ? std::numeric_limits<double>::infinity() : dist[order[keep.size() - 1]];
    }
    if (keep.empty()) throw NoAcceptancesError(*std::min_element(dist.begin(), dist.end()));

    PosteriorEnsemble post;
    post.method = "rejection";
    for (auto i : keep) post.particles.push_back({draws[i], dist[i], 1.0 / static_cast<double>(keep.size())});
    post.stages.push_back({epsilon, n_draws, keep.size(), mean_distance(post.particles)});
    return post;
}

PosteriorEnsemble abc_smc(const PriorSpec& prior, const FitTarget& target, const SmcSchedule& schedule,
                          const SmcOptions& options, std::uint64_t base_seed)
{
    validate(prior);
    check_target(target);
    const std::size_t pop = options.pop_size;
    if (pop < 2) throw std::invalid_argument("abc_smc: pop_size must be >= 2");

    std::size_t n_stages = 0;
    double keep_fraction = 0.0;
    const FixedSchedule* fixed = std::get_if<FixedSchedule>(&schedule);
    if (fixed) {
        if (fixed->epsilons.empty()) throw std::invalid_argument("abc_smc: empty epsilon schedule");
        for (std::size_t i = 0; i < fixed->epsilons.size(); ++i) {
            if (!(fixed->epsilons[i] > 0.0)) throw std::invalid_argument("abc_smc: epsilons must be > 0");
            if (i > 0 && !(fixed->epsilons[i] < fixed->epsilons[i - 1]))
                throw std::invalid_argument("abc_smc: epsilon schedule must be strictly decreasing");
        }
        n_stages = fixed->epsilons.size();
    } else {
        const auto& a = std::get<AdaptiveSchedule>(schedule);
        if (!(a.keep_fraction > 0.0 && a.keep_fraction <= 1.0) || a.stages < 1)
            throw std::invalid_argument("abc_smc: adaptive schedule needs keep_fraction in (0,1] and stages >= 1");
        n_stages = a.stages;
        keep_fraction = a.keep_fraction;
    }

    std::mt19937_64 rng(base_seed);
    PosteriorEnsemble post;
    post.method = "smc";
    const std::size_t max_sims = options.max_simulations_per_particle * pop;

    // Stage 0 from the prior.
    std::vector<Particle> current;
    if (!fixed) {
        const auto m = static_cast<std::size_t>(std::ceil(static_cast<double>(pop) / keep_fraction - 1e-9));
        std::vector<ModelParams> draws;
        for (std::size_t i = 0; i < m; ++i) draws.push_back(prior.sample(rng));
        const auto dist = simulate_batch(draws, target, base_seed, 0, 0, options.threads);
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] < dist[b]; });
        for (std::size_t i = 0; i < pop; ++i) current.push_back({draws[order[i]], dist[order[i]], 1.0});
        normalize_weights(current);
        post.stages.push_back({current.back().distance, m, pop, mean_distance(current)});
    } else {
        const double eps = fixed->epsilons.front();
        std::size_t sims = 0;
        while (current.size() < pop) {
            if (sims >= max_sims)
                throw PopulationExtinctError(0, static_cast<double>(current.size()) / static_cast<double>(sims), sims);
            std::vector<ModelParams> batch;
            for (std::size_t i = 0; i < pop; ++i) batch.push_back(prior.sample(rng));
            const auto dist = simulate_batch(batch, target, base_seed, 0, sims, options.threads);
            sims += batch.size();
            for (std::size_t i = 0; i < batch.size() && current.size() < pop; ++i)
                if (dist[i] <= eps) current.push_back({batch[i], dist[i], 1.0});
        }
        normalize_weights(current);
        post.stages.push_back({eps, sims, pop, mean_distance(current)});
    }

    for (std::size_t stage = 1; stage < n_stages; ++stage) {
        double eps;
        if (fixed) {
            eps = fixed->epsilons[stage];
        } else {
            std::vector<double> d;
            for (const auto& p : current) d.push_back(p.distance);
            std::sort(d.begin(), d.end());
            eps = quantile_type7(d, keep_fraction);
        }

        const auto var = weighted_variance(current);
        std::array<double, ModelParams::kCount> sd{};
        for (std::size_t j = 0; j < sd.size(); ++j) sd[j] = prior.pinned(j) ? 0.0 : std::sqrt(2.0 * var[j]);

        std::vector<double> weights;
        for (const auto& p : current) weights.push_back(p.weight);
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        std::normal_distribution<double> gauss(0.0, 1.0);

        std::vector<Particle> next;
        std::size_t sims = 0;
        while (next.size() < pop) {
            if (sims >= max_sims)
                throw PopulationExtinctError(stage, static_cast<double>(next.size()) / static_cast<double>(sims), sims);
            std::vector<ModelParams> batch;
            for (std::size_t i = 0; i < pop; ++i) {
                ModelParams candidate;
                do {
                    auto v = current[pick(rng)].params.to_array();
                    for (std::size_t j = 0; j < v.size(); ++j)
                        if (sd[j] > 0.0) v[j] += sd[j] * gauss(rng);
                    candidate = ModelParams::from_array(v);
                } while (!prior.contains(candidate));
                batch.push_back(candidate);
            }
            const auto dist = simulate_batch(batch, target, base_seed, stage, sims, options.threads);
            sims += batch.size();
            for (std::size_t i = 0; i < batch.size() && next.size() < pop; ++i)
                if (dist[i] <= eps) next.push_back({batch[i], dist[i], 0.0});
        }

        // Importance weights under a uniform prior: 1 / sum_j w_j K(theta | theta_j),
        // evaluated in log space. Kernel normalizing constants are common to
        // every particle and cancel.
        std::vector<double> log_w(next.size());
        std::vector<double> terms(current.size());
        for (std::size_t i = 0; i < next.size(); ++i) {
            const auto v = next[i].params.to_array();
            for (std::size_t c = 0; c < current.size(); ++c) {
                const auto u = current[c].params.to_array();
                double log_k = 0.0;
                for (std::size_t j = 0; j < v.size(); ++j) {
                    if (sd[j] <= 0.0) continue;
                    const double z = (v[j] - u[j]) / sd[j];
                    log_k -= 0.5 * z * z;
                }
                terms[c] = std::log(current[c].weight) + log_k;
            }
            const double top = *std::max_element(terms.begin(), terms.end());
            double sum = 0.0;
            for (double t : terms) sum += std::exp(t - top);
            log_w[i] = -(top + std::log(sum));
        }
        const double top = *std::max_element(log_w.begin(), log_w.end());
        for (std::size_t i = 0; i < next.size(); ++i) next[i].weight = std::exp(log_w[i] - top);
        normalize_weights(next);
        current = std::move(next);
        post.stages.push_back({eps, sims, pop, mean_distance(current)});
    }
    post.particles = std::move(current);
    return post;
}

EnsembleResult posterior_predictive(const PosteriorEnsemble& post, const SocialNetwork& net,
                                    const ExternalSignal& signal, std::uint64_t base_seed, std::size_t draws,
                                    const EnsembleOptions& options)
{
    if (post.particles.empty()) throw std::invalid_argument("posterior_predictive: empty posterior");
    if (draws < 2) throw std::invalid_argument("posterior_predictive: need at least 2 predictive draws");
    std::vector<double> w;
    for (const auto& p : post.particles) w.push_back(p.weight);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    std::mt19937_64 rng(base_seed);
    std::vector<ModelParams> params;
    params.reserve(draws);
    for (std::size_t i = 0; i < draws; ++i) params.push_back(post.particles[pick(rng)].params);
    return run_ensemble(params, net, signal, base_seed, options);
}

void write_posterior_csv(std::ostream& out, const PosteriorEnsemble& post)
{
    for (auto name : ModelParams::kNames) out << name << ',';
    out << "distance,weight\n";
    for (const auto& p : post.particles) {
        for (double v : p.params.to_array()) out << format_double(v) << ',';
        out << format_double(p.distance) << ',' << format_double(p.weight) << '\n';
    }
}

PosteriorEnsemble read_posterior_csv(const std::filesystem::path& path)
{
    const auto rows = read_csv_rows(path);
    if (rows.empty()) throw std::runtime_error(path.string() + ": empty posterior file");
    const auto& header = rows.front().fields;
    if (header.size() != ModelParams::kCount + 2)
        throw DataError(path, rows.front().line, "unexpected posterior header");
    std::array<std::size_t, ModelParams::kCount> column{};
    for (std::size_t c = 0; c < ModelParams::kCount; ++c) column[ModelParams::index_of(header[c])] = c;
    PosteriorEnsemble post;
    post.method = "file";
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        if (f.size() != header.size()) throw DataError(path, rows[r].line, "wrong column count");
        std::array<double, ModelParams::kCount> v{};
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = parse_double(f[column[i]], path, rows[r].line);
        post.particles.push_back({ModelParams::from_array(v), parse_double(f[ModelParams::kCount], path, rows[r].line),
                                  parse_double(f[ModelParams::kCount + 1], path, rows[r].line)});
    }
    return post;
}

ModelParams posterior_median(const PosteriorEnsemble& post)
{
    if (post.particles.empty()) throw std::invalid_argument("posterior_median: empty posterior");
    std::array<double, ModelParams::kCount> out{};
    for (std::size_t j = 0; j < out.size(); ++j) {
        std::vector<std::pair<double, double>> vw;
        for (const auto& p : post.particles) vw.emplace_back(p.params.to_array()[j], p.weight);
        std::sort(vw.begin(), vw.end());
        double total = 0.0;
        for (const auto& x : vw) total += x.second;
        double acc = 0.0;
        out[j] = vw.back().first;
        for (const auto& [v, w] : vw) {
            acc += w;
            if (acc >= 0.5 * total) {
                out[j] = v;
                break;
            }
        }
    }
    return ModelParams::from_array(out);
}

}  // namespace cbsim
