#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cbsim {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Simple undirected graph in canonical form: edges sorted with i < j,
/// neighbour lists sorted ascending (stored as CSR).
class SocialNetwork {
public:
    SocialNetwork() = default;

    /// Builds from an arbitrary edge list. Rejects self-loops, duplicates
    /// (in either orientation) and out-of-range endpoints.
    SocialNetwork(std::size_t n, std::vector<Edge> edges);

    std::size_t size() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    std::span<const NodeId> neighbours(std::size_t i) const noexcept
    {
        return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
    }
    std::size_t degree(std::size_t i) const noexcept { return offsets_[i + 1] - offsets_[i]; }

    friend bool operator==(const SocialNetwork& a, const SocialNetwork& b)
    {
        return a.n_ == b.n_ && a.edges_ == b.edges_;
    }

private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_{0};
    std::vector<NodeId> adjacency_;
};

struct Complete {
    friend bool operator==(const Complete&, const Complete&) = default;
};
struct ErdosRenyi {
    double p = 0.0;
    friend bool operator==(const ErdosRenyi&, const ErdosRenyi&) = default;
};
struct WattsStrogatz {
    int k = 10;
    double beta = 0.1;
    friend bool operator==(const WattsStrogatz&, const WattsStrogatz&) = default;
};
/// Seeded from an m-clique; each new node attaches to m distinct existing
/// nodes with probability proportional to degree (uniform while all degrees
/// are zero, i.e. m == 1 and only node 0 exists).
struct BarabasiAlbert {
    int m = 2;
    friend bool operator==(const BarabasiAlbert&, const BarabasiAlbert&) = default;
};

using NetworkKind = std::variant<Complete, ErdosRenyi, WattsStrogatz, BarabasiAlbert>;

std::string describe(const NetworkKind& kind);

/// Throws std::invalid_argument with a descriptive message for bad n or kind parameters.
void validate_network_kind(const NetworkKind& kind, std::size_t n);

SocialNetwork generate_network(const NetworkKind& kind, std::size_t n, std::uint64_t seed);

/// Edge lists as CSV: header "i,j", then one zero-based pair per line, i < j.
void write_edge_list(std::ostream& out, const SocialNetwork& net);
void write_edge_list(const std::filesystem::path& path, const SocialNetwork& net);
SocialNetwork read_edge_list(const std::filesystem::path& path, std::size_t n);

}  // namespace cbsim
