#include "doctest.h"

#include "cbsim/behavior.hpp"
#include "cbsim/network.hpp"
#include "cbsim/rng.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace cbsim;

namespace {

ModelParams gains(double a)
{
    ModelParams p;
    p.alpha_p = p.alpha_e = p.alpha_b = a;
    return p;
}

ModelParams random_params(std::mt19937_64& rng, double max_rate)
{
    std::uniform_real_distribution<double> rate(0.0, max_rate), unit(0.0, 1.0), small(0.0, 0.3);
    ModelParams p;
    p.alpha_p = rate(rng);
    p.alpha_e = rate(rng);
    p.alpha_b = rate(rng);
    p.beta_p = rate(rng);
    p.beta_e = rate(rng);
    p.delta_b = rate(rng);
    p.kappa_e = unit(rng);
    p.kappa_b = unit(rng);
    p.sigma = small(rng);
    p.init_p = unit(rng);
    p.init_e = unit(rng);
    p.init_b = unit(rng);
    return p;
}

SocialNetwork path3() { return SocialNetwork(3, {{0, 1}, {1, 2}}); }

}  // namespace

TEST_CASE("strengthening: zero signal and zero gains are the identity")
{
    const AgentState s{0.2, 0.2, 0.2};
    ModelParams p = gains(0.0);
    p.alpha_p = 0.7;  // irrelevant at s_t = 0
    CHECK(strengthening_step(s, 0.0, p) == s);
}

TEST_CASE("strengthening: saturated state is a fixed point")
{
    const AgentState s{1, 1, 1};
    CHECK(strengthening_step(s, 1.0, gains(0.9)) == s);
    CHECK(strengthening_step(s, 1.0, gains(5.0)) == s);
}

TEST_CASE("strengthening: cascade matches hand arithmetic")
{
    const auto out = strengthening_step({0.5, 0.5, 0.5}, 1.0, gains(0.2));
    // Oracle: p = .5 + .2*1*.5; e = .5 + .2*p*.5; b = .5 + .2*e*.5
    const double p = 0.5 + 0.2 * 1.0 * (1.0 - 0.5);
    const double e = 0.5 + 0.2 * p * (1.0 - 0.5);
    const double b = 0.5 + 0.2 * e * (1.0 - 0.5);
    CHECK(testutil::rel_close(out.perception, p, 1e-12));
    CHECK(testutil::rel_close(out.emotion, e, 1e-12));
    CHECK(testutil::rel_close(out.behaviour, b, 1e-12));
    CHECK(out.perception == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(out.emotion == doctest::Approx(0.56).epsilon(1e-12));
    CHECK(out.behaviour == doctest::Approx(0.556).epsilon(1e-12));
}

TEST_CASE("strengthening: rejects bad inputs")
{
    CHECK_THROWS_AS(strengthening_step({0.5, 0.5, 0.5}, std::nan(""), gains(0.1)), std::invalid_argument);
    CHECK_THROWS_AS(strengthening_step({0.5, 0.5, 0.5}, 1.5, gains(0.1)), std::invalid_argument);
    CHECK_THROWS_AS(strengthening_step({0.5, 0.5, 0.5}, -0.1, gains(0.1)), std::invalid_argument);
    CHECK_THROWS_AS(strengthening_step({std::numeric_limits<double>::infinity(), 0.5, 0.5}, 0.5, gains(0.1)),
                    std::invalid_argument);
}

TEST_CASE("weakening: identities and hand arithmetic")
{
    ModelParams p;
    CHECK(weakening_step({0.5, 0.5, 0.5}, p) == AgentState{0.5, 0.5, 0.5});

    p.beta_p = 0.9;
    p.beta_e = 0.9;
    CHECK(weakening_step({0.3, 0.7, 0.0}, p) == AgentState{0.3, 0.7, 0.0});

    p.beta_p = 0.2;
    p.beta_e = 0.4;
    p.delta_b = 0.1;
    const auto out = weakening_step({0.8, 0.6, 0.5}, p);
    CHECK(testutil::rel_close(out.perception, 0.8 - 0.2 * 0.5 * 0.8, 1e-12));
    CHECK(testutil::rel_close(out.emotion, 0.6 - 0.4 * 0.5 * 0.6, 1e-12));
    CHECK(testutil::rel_close(out.behaviour, 0.5 - 0.1 * 0.5, 1e-12));
    CHECK(out.perception == doctest::Approx(0.72));
    CHECK(out.emotion == doctest::Approx(0.48));
    CHECK(out.behaviour == doctest::Approx(0.45));

    CHECK_THROWS_AS(weakening_step({0.5, std::nan(""), 0.5}, p), std::invalid_argument);
}

TEST_CASE("social coupling")
{
    ModelParams p;
    p.kappa_e = 0.5;
    p.kappa_b = 0.5;
    const AgentState me{0.3, 0.2, 0.4};

    SUBCASE("isolated agent unchanged") { CHECK(social_coupling(me, {}, p) == me); }
    SUBCASE("identical neighbours unchanged")
    {
        const std::vector<AgentState> n(4, me);
        CHECK(social_coupling(me, n, p) == me);
    }
    SUBCASE("pull toward neighbour mean, perception untouched")
    {
        const std::vector<AgentState> n{{0.9, 0.5, 0.4}, {0.1, 0.7, 0.4}};
        const auto out = social_coupling(me, n, p);
        CHECK(out.perception == me.perception);
        CHECK(testutil::rel_close(out.emotion, 0.2 + 0.5 * (0.6 - 0.2), 1e-12));
        CHECK(out.emotion == doctest::Approx(0.4));
        CHECK(out.behaviour == doctest::Approx(0.4));
    }
}

TEST_CASE("step_population: three-agent path graph matches straight-line oracle")
{
    ModelParams q = gains(0.2);
    q.beta_p = 0.2;
    q.beta_e = 0.4;
    q.delta_b = 0.1;
    q.kappa_e = 0.5;
    q.kappa_b = 0.3;
    const std::vector<AgentState> pop{{0.5, 0.5, 0.5}, {0.8, 0.6, 0.5}, {0.2, 0.2, 0.2}};
    auto noise = NoiseStream::for_population(7, 3);
    const auto out = step_population_serial(pop, path3(), 0.7, q, noise);

    // Frozen from an independent scalar script over the same rules.
    const AgentState expected[3] = {{0.5066501999999999, 0.51659502, 0.500091},
                                    {0.7341670656000001, 0.43261848524799995, 0.46197312},
                                    {0.29702479872, 0.4129644797952, 0.301191936}};
    for (int i = 0; i < 3; ++i) {
        CHECK(testutil::rel_close(out[i].perception, expected[i].perception, 1e-12));
        CHECK(testutil::rel_close(out[i].emotion, expected[i].emotion, 1e-12));
        CHECK(testutil::rel_close(out[i].behaviour, expected[i].behaviour, 1e-12));
    }
    CHECK(noise.day == 1);
}

TEST_CASE("step_population: decoupling limit equals independent strengthen then weaken")
{
    ModelParams q = gains(0.3);
    q.beta_p = 0.1;
    q.beta_e = 0.2;
    q.delta_b = 0.05;
    const std::vector<AgentState> pop{{0.1, 0.2, 0.3}, {0.9, 0.1, 0.5}, {0.4, 0.4, 0.0}, {0.0, 0.0, 0.0}};
    const SocialNetwork edgeless(4, {});
    auto noise = NoiseStream::for_population(3, 4);
    const auto out = step_population_serial(pop, edgeless, 0.6, q, noise);
    for (std::size_t i = 0; i < pop.size(); ++i)
        CHECK(out[i] == weakening_step(strengthening_step(pop[i], 0.6, q), q));
}

TEST_CASE("step_population: all-zero rates leave the population unchanged")
{
    const auto net = generate_network(WattsStrogatz{4, 0.2}, 30, 1);
    std::vector<AgentState> pop;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 30; ++i) pop.push_back({u(rng), u(rng), u(rng)});
    auto noise = NoiseStream::for_population(11, 30);
    CHECK(step_population_serial(pop, net, 0.9, ModelParams{}, noise) == pop);
}

TEST_CASE("step_population: size mismatch is an error")
{
    std::vector<AgentState> pop(2);
    auto noise = NoiseStream::for_population(1, 2);
    CHECK_THROWS_AS(step_population_serial(pop, path3(), 0.5, ModelParams{}, noise), std::invalid_argument);
    auto noise3 = NoiseStream::for_population(1, 3);
    std::vector<AgentState> pop3(3);
    CHECK_THROWS_AS(step_population_serial(pop3, path3(), 1.2, ModelParams{}, noise3), std::invalid_argument);
}

TEST_CASE("step_population: OpenMP kernel is bit-identical to the serial reference")
{
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        const auto params = random_params(rng, 0.8);
        const auto net = generate_network(BarabasiAlbert{3}, 500, 100 + trial);
        std::vector<AgentState> a(net.size(), initial_state(params));
        auto b = a;
        auto na = NoiseStream::for_population(trial, net.size());
        auto nb = na;
        for (int day = 0; day < 10; ++day) {
            const double s = 0.1 * day;
            a = step_population_serial(a, net, s, params, na);
            b = step_population(b, net, s, params, nb, 1 + trial % 4 * 2);
        }
        CHECK(a == b);
    }
}

TEST_CASE("property: boundedness under extreme rates")
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto params = random_params(rng, 10.0);
        const auto net = generate_network(ErdosRenyi{0.2}, 20, trial);
        std::vector<AgentState> pop(net.size(), initial_state(params));
        auto noise = NoiseStream::for_population(trial, net.size());
        for (int day = 0; day < 15; ++day) {
            pop = step_population_serial(pop, net, u(rng), params, noise);
            for (const auto& s : pop) REQUIRE_NOTHROW(validate(s));
        }
    }
}

TEST_CASE("property: strengthening is monotone")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        ModelParams q;
        q.alpha_p = 2 * u(rng);
        q.alpha_e = 2 * u(rng);
        q.alpha_b = 2 * u(rng);
        const AgentState s{u(rng), u(rng), u(rng)};
        const double s1 = u(rng), s2 = u(rng);
        const auto lo = strengthening_step(s, std::min(s1, s2), q);
        const auto hi = strengthening_step(s, std::max(s1, s2), q);
        CHECK(lo.perception <= hi.perception);
        CHECK(lo.emotion <= hi.emotion);
        CHECK(lo.behaviour <= hi.behaviour);

        // e', b' non-decreasing in the starting perception
        const double p1 = u(rng), p2 = u(rng);
        const auto a = strengthening_step({std::min(p1, p2), s.emotion, s.behaviour}, s1, q);
        const auto b = strengthening_step({std::max(p1, p2), s.emotion, s.behaviour}, s1, q);
        CHECK(a.emotion <= b.emotion);
        CHECK(a.behaviour <= b.behaviour);
    }
}

TEST_CASE("property: pure weakening decays day over day")
{
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        ModelParams q;
        q.beta_p = u(rng);
        q.beta_e = u(rng);
        q.delta_b = u(rng);
        const auto net = generate_network(WattsStrogatz{4, 0.3}, 25, trial);
        std::vector<AgentState> pop;
        for (int i = 0; i < 25; ++i) pop.push_back({u(rng), u(rng), 0.01 + 0.99 * u(rng)});
        auto noise = NoiseStream::for_population(trial, 25);
        for (int day = 0; day < 20; ++day) {
            const auto next = step_population_serial(pop, net, 0.0, q, noise);
            for (std::size_t i = 0; i < pop.size(); ++i) {
                CHECK(next[i].perception <= pop[i].perception);
                CHECK(next[i].emotion <= pop[i].emotion);
                CHECK(next[i].behaviour <= pop[i].behaviour);
            }
            pop = next;
        }
    }
}

TEST_CASE("property: vertex-transitive network keeps identical agents identical")
{
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const NetworkKind kind : {NetworkKind{WattsStrogatz{6, 0.0}}, NetworkKind{Complete{}}}) {
        auto q = random_params(rng, 0.9);
        q.sigma = 0.0;
        const auto net = generate_network(kind, 16, 1);
        std::vector<AgentState> pop(16, initial_state(q));
        auto noise = NoiseStream::for_population(1, 16);
        for (int day = 0; day < 40; ++day) {
            pop = step_population(pop, net, u(rng), q, noise, 2);
            for (const auto& s : pop) REQUIRE(s == pop.front());
        }
    }
}

TEST_CASE("noise: same seed gives identical draws, different seeds differ")
{
    ModelParams q;
    q.sigma = 0.1;
    q.init_e = 0.5;
    const auto net = generate_network(Complete{}, 10, 0);
    std::vector<AgentState> pop(10, initial_state(q));
    auto n1 = NoiseStream::for_population(5, 10);
    auto n2 = NoiseStream::for_population(5, 10);
    auto n3 = NoiseStream::for_population(6, 10);
    const auto a = step_population_serial(pop, net, 0.0, q, n1);
    const auto b = step_population_serial(pop, net, 0.0, q, n2);
    const auto c = step_population_serial(pop, net, 0.0, q, n3);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("noise: draws are standard normal")
{
    // 200k draws over many (key, day) pairs: moments plus a Kolmogorov-Smirnov distance.
    std::vector<double> z;
    for (std::uint64_t agent = 0; agent < 2000; ++agent)
        for (std::uint64_t day = 0; day < 100; ++day) z.push_back(standard_normal(agent_key(7, agent), day));
    double mean = 0.0, var = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(z.size());
    for (double v : z) var += (v - mean) * (v - mean);
    var /= static_cast<double>(z.size() - 1);
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.015);

    std::sort(z.begin(), z.end());
    double ks = 0.0;
    const auto n = static_cast<double>(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double cdf = 0.5 * std::erfc(-z[i] / std::sqrt(2.0));
        ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / n), std::abs(cdf - static_cast<double>(i + 1) / n)});
    }
    CHECK(ks < 1.63 / std::sqrt(n));  // 1% critical value
    CHECK(standard_normal(123, 45) == standard_normal(123, 45));
}

TEST_CASE("params: validation and names")
{
    ModelParams p;
    CHECK_NOTHROW(validate(p));
    p.kappa_e = 1.5;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p.kappa_e = 0.5;
    p.alpha_b = -0.1;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    CHECK(ModelParams::index_of("sigma") == 8);
    CHECK_THROWS_AS(ModelParams::index_of("gamma"), std::invalid_argument);
    std::mt19937_64 rng(1);
    const auto r = random_params(rng, 1.0);
    CHECK(ModelParams::from_array(r.to_array()) == r);
}
