#include "cbsim/network.hpp"

#include "cbsim/csv.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace cbsim {

namespace {

std::uint64_t edge_code(NodeId a, NodeId b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Tracks a growing simple graph during generation.
class EdgeSet {
public:
    bool contains(NodeId a, NodeId b) const { return codes_.count(edge_code(a, b)) != 0; }
    bool insert(NodeId a, NodeId b)
    {
        if (a == b || !codes_.insert(edge_code(a, b)).second) return false;
        return true;
    }
    void erase(NodeId a, NodeId b) { codes_.erase(edge_code(a, b)); }

    std::vector<Edge> to_edges() const
    {
        std::vector<Edge> out;
        out.reserve(codes_.size());
        for (auto c : codes_)
            out.emplace_back(static_cast<NodeId>(c >> 32), static_cast<NodeId>(c & 0xFFFFFFFFu));
        return out;
    }

private:
    std::unordered_set<std::uint64_t> codes_;
};

SocialNetwork make_erdos_renyi(std::size_t n, double p, std::mt19937_64& rng)
{
    std::vector<Edge> edges;
    if (p <= 0.0) return SocialNetwork(n, std::move(edges));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (unit(rng) < p) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    return SocialNetwork(n, std::move(edges));
}

SocialNetwork make_watts_strogatz(std::size_t n, int k, double beta, std::mt19937_64& rng)
{
    const std::size_t half = static_cast<std::size_t>(k / 2);
    std::vector<Edge> ring;
    ring.reserve(n * half);
    EdgeSet present;
    for (std::size_t j = 1; j <= half; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto a = static_cast<NodeId>(i);
            const auto b = static_cast<NodeId>((i + j) % n);
            ring.emplace_back(a, b);
            present.insert(a, b);
        }
    }
    if (beta <= 0.0) return SocialNetwork(n, present.to_edges());

    // Classic rewiring: each lattice edge (i, i+j) keeps i and moves its far
    // end to a uniform node, skipping choices that would create a loop or a
    // duplicate. A node already linked to everyone keeps its edge.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> degree(n, 2 * half);
    for (const auto& [a, b] : ring) {
        if (unit(rng) >= beta) continue;
        if (degree[a] >= n - 1) continue;
        NodeId target;
        do {
            target = static_cast<NodeId>(pick(rng));
        } while (target == a || present.contains(a, target));
        present.erase(a, b);
        present.insert(a, target);
        --degree[b];
        ++degree[target];
    }
    return SocialNetwork(n, present.to_edges());
}

SocialNetwork make_barabasi_albert(std::size_t n, int m_int, std::mt19937_64& rng)
{
    const auto m = static_cast<std::size_t>(m_int);
    std::vector<Edge> edges;
    // Each edge contributes both endpoints, so a uniform pick from this list
    // is a degree-proportional pick.
    std::vector<NodeId> endpoints;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
            endpoints.push_back(static_cast<NodeId>(i));
            endpoints.push_back(static_cast<NodeId>(j));
        }
    }
    std::vector<NodeId> chosen;
    for (std::size_t v = m; v < n; ++v) {
        chosen.clear();
        while (chosen.size() < m) {
            NodeId t;
            if (endpoints.empty()) {
                t = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, v - 1)(rng));
            } else {
                t = endpoints[std::uniform_int_distribution<std::size_t>(0, endpoints.size() - 1)(rng)];
            }
            if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) chosen.push_back(t);
        }
        for (auto t : chosen) {
            edges.emplace_back(t, static_cast<NodeId>(v));
            endpoints.push_back(t);
            endpoints.push_back(static_cast<NodeId>(v));
        }
    }
    return SocialNetwork(n, std::move(edges));
}

}  // namespace

SocialNetwork::SocialNetwork(std::size_t n, std::vector<Edge> edges) : n_(n)
{
    if (n == 0) throw std::invalid_argument("network must have at least one node");
    for (auto& e : edges) {
        if (e.first == e.second)
            throw std::invalid_argument("self-loop on node " + std::to_string(e.first));
        if (e.first >= n || e.second >= n)
            throw std::invalid_argument("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                                        ") out of range for n=" + std::to_string(n));
        if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end())
        throw std::invalid_argument("duplicate edge (" + std::to_string(dup->first) + "," +
                                    std::to_string(dup->second) + ")");
    edges_ = std::move(edges);

    offsets_.assign(n + 1, 0);
    for (const auto& [a, b] : edges_) {
        ++offsets_[a + 1];
        ++offsets_[b + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
    adjacency_.resize(offsets_[n]);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [a, b] : edges_) {
        adjacency_[fill[a]++] = b;
        adjacency_[fill[b]++] = a;
    }
    for (std::size_t i = 0; i < n; ++i)
        std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
                  adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
}

std::string describe(const NetworkKind& kind)
{
    std::ostringstream os;
    std::visit(
        [&os](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Complete>) os << "complete";
            else if constexpr (std::is_same_v<K, ErdosRenyi>) os << "erdos_renyi(p=" << k.p << ")";
            else if constexpr (std::is_same_v<K, WattsStrogatz>)
                os << "watts_strogatz(k=" << k.k << ",beta=" << k.beta << ")";
            else os << "barabasi_albert(m=" << k.m << ")";
        },
        kind);
    return os.str();
}

void validate_network_kind(const NetworkKind& kind, std::size_t n)
{
    if (n == 0) throw std::invalid_argument("network size n must be >= 1");
    std::visit(
        [n](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ErdosRenyi>) {
                if (!(k.p >= 0.0 && k.p <= 1.0))
                    throw std::invalid_argument("erdos_renyi: p must lie in [0,1], got " + std::to_string(k.p));
            } else if constexpr (std::is_same_v<K, WattsStrogatz>) {
                if (k.k < 0 || k.k % 2 != 0 || static_cast<std::size_t>(k.k) >= n)
                    throw std::invalid_argument("watts_strogatz: k must be even, >= 0 and < n (k=" +
                                                std::to_string(k.k) + ", n=" + std::to_string(n) + ")");
                if (!(k.beta >= 0.0 && k.beta <= 1.0))
                    throw std::invalid_argument("watts_strogatz: beta must lie in [0,1], got " +
                                                std::to_string(k.beta));
            } else if constexpr (std::is_same_v<K, BarabasiAlbert>) {
                if (k.m < 1 || static_cast<std::size_t>(k.m) >= n)
                    throw std::invalid_argument("barabasi_albert: need 1 <= m < n (m=" + std::to_string(k.m) +
                                                ", n=" + std::to_string(n) + ")");
            }
        },
        kind);
}

SocialNetwork generate_network(const NetworkKind& kind, std::size_t n, std::uint64_t seed)
{
    validate_network_kind(kind, n);
    std::mt19937_64 rng(seed);
    return std::visit(
        [&](const auto& k) -> SocialNetwork {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Complete>) return make_erdos_renyi(n, 1.0, rng);
            else if constexpr (std::is_same_v<K, ErdosRenyi>) return make_erdos_renyi(n, k.p, rng);
            else if constexpr (std::is_same_v<K, WattsStrogatz>) return make_watts_strogatz(n, k.k, k.beta, rng);
            else return make_barabasi_albert(n, k.m, rng);
        },
        kind);
}

void write_edge_list(std::ostream& out, const SocialNetwork& net)
{
    out << "i,j\n";
    for (const auto& [a, b] : net.edges()) out << a << ',' << b << '\n';
}

void write_edge_list(const std::filesystem::path& path, const SocialNetwork& net)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_edge_list(out, net);
}

SocialNetwork read_edge_list(const std::filesystem::path& path, std::size_t n)
{
    const auto rows = read_csv_rows(path);
    std::vector<Edge> edges;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (r == 0 && !row.fields.empty() && row.fields[0] == "i") continue;
        if (row.fields.size() != 2)
            throw std::runtime_error(path.string() + ":" + std::to_string(row.line) + ": expected two columns");
        const auto a = parse_uint(row.fields[0], path, row.line);
        const auto b = parse_uint(row.fields[1], path, row.line);
        if (a >= b)
            throw std::runtime_error(path.string() + ":" + std::to_string(row.line) + ": expected i < j");
        edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
    }
    return SocialNetwork(n, std::move(edges));
}

}  // namespace cbsim
