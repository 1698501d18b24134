#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "ssql/schema_graph.hpp"

namespace oracle {

/// Exhaustive reference for minimal Steiner trees: a tree on k+1 nodes has
/// k edges, so the minimum edge count equals min |V'| - 1 over connected
/// node sets V' that contain all terminals. Enumerates every node subset;
/// usable up to ~20 nodes.
class SubgraphEnumerator {
public:
    explicit SubgraphEnumerator(const ssql::SchemaGraph& g) : graph_(g) {
        int n = g.node_count();
        connected_.assign(std::size_t(1) << n, false);
        for (std::uint32_t mask = 1; mask < (std::uint32_t(1) << n); ++mask)
            connected_[mask] = is_connected(mask);
    }

    /// Minimum edge count of a connected subgraph covering `terminals`,
    /// or nullopt if none exists.
    std::optional<int> min_edges(const std::vector<int>& terminals) const {
        std::uint32_t tmask = 0;
        for (int v : terminals) tmask |= std::uint32_t(1) << v;
        int best = -1;
        for (std::uint32_t mask = tmask; mask < connected_.size(); ++mask) {
            if ((mask & tmask) != tmask || !connected_[mask]) continue;
            int size = std::popcount(mask);
            if (best < 0 || size - 1 < best) best = size - 1;
        }
        if (best < 0) return std::nullopt;
        return best;
    }

private:
    bool is_connected(std::uint32_t mask) const {
        int start = std::countr_zero(mask);
        std::uint32_t seen = std::uint32_t(1) << start;
        std::vector<int> stack{start};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (const auto& [u, eid] : graph_.adjacency[std::size_t(v)]) {
                std::uint32_t bit = std::uint32_t(1) << u;
                if ((mask & bit) && !(seen & bit)) {
                    seen |= bit;
                    stack.push_back(u);
                }
            }
        }
        return seen == mask;
    }

    const ssql::SchemaGraph& graph_;
    std::vector<bool> connected_;
};

} // namespace oracle
