#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace rdsnet {

/// Simple undirected graph with sorted adjacency lists and no self loops.
class Graph {
public:
    Graph() = default;
    explicit Graph(std::size_t n) : adj_(n) {}

    static Graph from_edges(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges);

    std::size_t size() const noexcept { return adj_.size(); }
    std::size_t degree(std::size_t i) const noexcept { return adj_[i].size(); }
    const std::vector<std::size_t>& neighbors(std::size_t i) const noexcept { return adj_[i]; }
    std::size_t edge_count() const noexcept;
    bool has_edge(std::size_t i, std::size_t j) const noexcept;

    /// Adds {i, j} unless it exists or i == j. Returns whether an edge was added.
    bool add_edge(std::size_t i, std::size_t j);

    /// Subgraph on `keep` (node k of the result is keep[k]); edges touching
    /// removed nodes are dropped.
    Graph induced(std::span<const std::size_t> keep) const;

private:
    std::vector<std::vector<std::size_t>> adj_;
};

}  // namespace rdsnet
