#include "rdsnet/graph.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace rdsnet {

Graph Graph::from_edges(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges) {
    Graph g(n);
    for (const auto& [a, b] : edges) g.add_edge(a, b);
    return g;
}

std::size_t Graph::edge_count() const noexcept {
    std::size_t twice = 0;
    for (const auto& nb : adj_) twice += nb.size();
    return twice / 2;
}

bool Graph::has_edge(std::size_t i, std::size_t j) const noexcept {
    if (i >= adj_.size()) return false;
    return std::binary_search(adj_[i].begin(), adj_[i].end(), j);
}

bool Graph::add_edge(std::size_t i, std::size_t j) {
    if (i >= adj_.size() || j >= adj_.size()) throw std::out_of_range("Graph::add_edge: node out of range");
    if (i == j) return false;
    auto& a = adj_[i];
    auto pos = std::lower_bound(a.begin(), a.end(), j);
    if (pos != a.end() && *pos == j) return false;
    a.insert(pos, j);
    auto& b = adj_[j];
    b.insert(std::lower_bound(b.begin(), b.end(), i), i);
    return true;
}

Graph Graph::induced(std::span<const std::size_t> keep) const {
    constexpr auto kAbsent = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> remap(adj_.size(), kAbsent);
    for (std::size_t k = 0; k < keep.size(); ++k) {
        if (keep[k] >= adj_.size()) throw std::out_of_range("Graph::induced: node out of range");
        remap[keep[k]] = k;
    }
    Graph out(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        auto& nb = out.adj_[k];
        for (std::size_t j : adj_[keep[k]])
            if (remap[j] != kAbsent) nb.push_back(remap[j]);
        std::sort(nb.begin(), nb.end());
    }
    return out;
}

}  // namespace rdsnet
