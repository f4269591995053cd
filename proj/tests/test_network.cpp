#include "doctest.h"

#include "cbsim/network.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <set>

using namespace cbsim;

namespace {

void check_canonical(const SocialNetwork& g)
{
    std::set<Edge> seen;
    for (const auto& [a, b] : g.edges()) {
        REQUIRE(a < b);
        REQUIRE(b < g.size());
        REQUIRE(seen.insert({a, b}).second);
    }
    REQUIRE(std::is_sorted(g.edges().begin(), g.edges().end()));
    std::size_t degree_sum = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto nb = g.neighbours(i);
        REQUIRE(std::is_sorted(nb.begin(), nb.end()));
        REQUIRE(g.degree(i) < g.size());
        for (auto j : nb) {
            REQUIRE(j != i);
            REQUIRE(seen.count({std::min<NodeId>(i, j), std::max<NodeId>(i, j)}) == 1);
        }
        degree_sum += nb.size();
    }
    REQUIRE(degree_sum == 2 * g.edge_count());
}

}  // namespace

TEST_CASE("complete graph")
{
    const auto g = generate_network(Complete{}, 4, 0);
    CHECK(g.edge_count() == 6);
    for (std::size_t i = 0; i < 4; ++i) CHECK(g.degree(i) == 3);
    check_canonical(g);
    CHECK(generate_network(Complete{}, 1, 0).edge_count() == 0);
    CHECK(generate_network(Complete{}, 37, 0).edge_count() == 37 * 36 / 2);
}

TEST_CASE("erdos-renyi")
{
    CHECK(generate_network(ErdosRenyi{0.0}, 100, 3).edge_count() == 0);
    CHECK(generate_network(ErdosRenyi{1.0}, 20, 3).edge_count() == 190);
    const auto g = generate_network(ErdosRenyi{0.1}, 300, 3);
    check_canonical(g);
    const double expected = 0.1 * 300 * 299 / 2;
    CHECK(std::abs(static_cast<double>(g.edge_count()) - expected) < 5 * std::sqrt(expected));
}

TEST_CASE("watts-strogatz with beta = 0 is the ring lattice")
{
    const auto g = generate_network(WattsStrogatz{4, 0.0}, 10, 99);
    // Oracle: enumerate the lattice directly.
    std::vector<Edge> ring;
    for (NodeId i = 0; i < 10; ++i)
        for (NodeId j = 1; j <= 2; ++j) {
            const NodeId t = (i + j) % 10;
            ring.emplace_back(std::min(i, t), std::max(i, t));
        }
    std::sort(ring.begin(), ring.end());
    CHECK(g.edges() == ring);
    for (std::size_t i = 0; i < 10; ++i) CHECK(g.degree(i) == 4);
}

TEST_CASE("watts-strogatz rewiring keeps the edge count")
{
    for (double beta : {0.1, 0.5, 1.0}) {
        const auto g = generate_network(WattsStrogatz{10, beta}, 2000, 7);
        check_canonical(g);
        CHECK(g.edge_count() == 2000 * 10 / 2);
    }
    // dense corner case: every node nearly saturated
    const auto dense = generate_network(WattsStrogatz{6, 1.0}, 7, 1);
    check_canonical(dense);
    CHECK(dense.edge_count() == 21);
}

TEST_CASE("barabasi-albert edge count follows the clique seeding rule")
{
    for (int m : {1, 2, 3, 5}) {
        const std::size_t n = 500;
        const auto g = generate_network(BarabasiAlbert{m}, n, 11);
        check_canonical(g);
        const auto mm = static_cast<std::size_t>(m);
        CHECK(g.edge_count() == mm * (n - mm) + mm * (mm - 1) / 2);
        for (std::size_t v = mm; v < n; ++v) CHECK(g.degree(v) >= mm);
    }
}

TEST_CASE("generation is reproducible and seed-dependent")
{
    for (const NetworkKind kind : {NetworkKind{ErdosRenyi{0.05}}, NetworkKind{WattsStrogatz{6, 0.3}},
                                   NetworkKind{BarabasiAlbert{2}}}) {
        CHECK(generate_network(kind, 200, 5) == generate_network(kind, 200, 5));
        CHECK_FALSE(generate_network(kind, 200, 5) == generate_network(kind, 200, 6));
    }
}

TEST_CASE("invalid kind parameters are rejected with a message")
{
    CHECK_THROWS_AS(generate_network(Complete{}, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_network(ErdosRenyi{1.5}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_network(WattsStrogatz{3, 0.1}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_network(WattsStrogatz{10, 0.1}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_network(WattsStrogatz{4, -0.1}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_network(BarabasiAlbert{0}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_network(BarabasiAlbert{10}, 10, 1), std::invalid_argument);
    try {
        generate_network(WattsStrogatz{3, 0.1}, 10, 1);
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("even") != std::string::npos);
    }
}

TEST_CASE("explicit edge lists: canonicalized, and bad input rejected")
{
    const SocialNetwork g(4, {{3, 1}, {0, 2}, {1, 0}});
    CHECK(g.edges() == std::vector<Edge>{{0, 1}, {0, 2}, {1, 3}});
    CHECK(std::vector<NodeId>(g.neighbours(1).begin(), g.neighbours(1).end()) == std::vector<NodeId>{0, 3});
    CHECK_THROWS_AS(SocialNetwork(3, {{1, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(SocialNetwork(3, {{0, 1}, {1, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(SocialNetwork(3, {{0, 3}}), std::invalid_argument);
}

TEST_CASE("edge-list CSV export and import")
{
    testutil::TempDir dir("net");
    const auto g = generate_network(WattsStrogatz{4, 0.2}, 50, 3);
    write_edge_list(dir / "edges.csv", g);
    CHECK(read_edge_list(dir / "edges.csv", 50) == g);

    const auto bad = dir.write("bad.csv", "i,j\n2,1\n");
    CHECK_THROWS(read_edge_list(bad, 5));
}
