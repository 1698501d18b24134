#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "ssql/error.hpp"
#include "ssql/schema.hpp"

namespace ssql {

/// Undirected graph over one schema: table nodes first (in schema order),
/// then column nodes (in flat column order). Membership edges connect each
/// column to its owning table; foreign-key edges connect FK column pairs.
struct SchemaGraph {
    enum class EdgeKind { Membership, ForeignKey };

    struct Edge {
        int u = -1;
        int v = -1;
        EdgeKind kind = EdgeKind::Membership;
    };

    std::string db_id;
    int table_count = 0;
    int column_count = 0;
    std::vector<Edge> edges;
    std::vector<std::vector<std::pair<int, int>>> adjacency; // node -> (neighbor, edge id)
    std::vector<std::string> node_names;                     // tables then columns
    std::vector<int> column_owner;                           // column flat id -> table index

    int node_count() const { return table_count + column_count; }
    int table_node(int table) const { return table; }
    int column_node(int column) const { return table_count + column; }
    bool is_table_node(int node) const { return node < table_count; }
    /// For table nodes: the table index. For column nodes: the flat column id.
    int node_index(int node) const { return is_table_node(node) ? node : node - table_count; }
    int owner_table(int column_node) const { return column_owner[static_cast<std::size_t>(column_node - table_count)]; }
};

inline SchemaGraph build_graph(const Schema& schema) {
    SchemaGraph g;
    g.db_id = schema.db_id;
    g.table_count = static_cast<int>(schema.tables.size());
    g.column_count = static_cast<int>(schema.columns.size());
    g.adjacency.resize(static_cast<std::size_t>(g.node_count()));
    g.node_names.reserve(static_cast<std::size_t>(g.node_count()));
    for (const auto& t : schema.tables)
        g.node_names.push_back(t.name);
    for (const auto& c : schema.columns) {
        g.node_names.push_back(schema.table_name(c.table) + "." + c.name);
        g.column_owner.push_back(c.table);
    }

    auto add_edge = [&](int u, int v, SchemaGraph::EdgeKind kind) {
        int id = static_cast<int>(g.edges.size());
        g.edges.push_back({u, v, kind});
        g.adjacency[static_cast<std::size_t>(u)].emplace_back(v, id);
        g.adjacency[static_cast<std::size_t>(v)].emplace_back(u, id);
    };

    for (int c = 0; c < g.column_count; ++c)
        add_edge(g.table_node(schema.columns[static_cast<std::size_t>(c)].table), g.column_node(c),
                 SchemaGraph::EdgeKind::Membership);
    for (const auto& [a, b] : schema.foreign_keys)
        add_edge(g.column_node(a), g.column_node(b), SchemaGraph::EdgeKind::ForeignKey);
    return g;
}

namespace detail {

constexpr int kInfCost = std::numeric_limits<int>::max() / 4;

/// Among equal-cost partial trees the solver prefers the one whose table-node
/// set reads smallest when written as a sorted index sequence (a proper
/// prefix sorts first). Column bits break remaining ties numerically.
struct TreeKey {
    int cost = kInfCost;
    std::uint64_t nodes = 0; // bitmask over graph nodes, tables in the low bits

    static bool table_seq_less(std::uint64_t a, std::uint64_t b, int table_count) {
        const std::uint64_t table_mask =
            table_count >= 64 ? ~0ULL : ((1ULL << table_count) - 1);
        std::uint64_t ta = a & table_mask, tb = b & table_mask;
        if (ta == tb) return false;
        std::uint64_t diff = ta ^ tb;
        int low = std::countr_zero(diff);
        // The side owning the lowest differing index is smaller, unless the
        // other side has already run out of indices (prefix wins).
        bool in_a = (ta >> low) & 1;
        std::uint64_t rest = (in_a ? tb : ta) >> low;
        if (rest == 0) return !in_a; // the exhausted side is the prefix
        return in_a;
    }

    bool better_than(const TreeKey& o, int table_count) const {
        if (cost != o.cost) return cost < o.cost;
        if (table_seq_less(nodes, o.nodes, table_count)) return true;
        if (table_seq_less(o.nodes, nodes, table_count)) return false;
        return nodes < o.nodes;
    }
};

struct SteinerState {
    // dp[mask][v]: best tree spanning terminal subset `mask` plus node v.
    std::vector<std::vector<TreeKey>> dp;
    // Reconstruction: merge (split submask) or grow (predecessor node+edge).
    struct Choice {
        enum class Kind { Leaf, Merge, Grow } kind = Kind::Leaf;
        std::uint32_t split = 0; // merge: submask
        int pred_node = -1;      // grow
        int pred_edge = -1;
    };
    std::vector<std::vector<Choice>> choice;
};

/// Exact minimal Steiner tree via subset dynamic programming. Unit edge
/// weights; intended envelope is |terminals| <= 6 on graphs of <= 40 nodes.
inline std::vector<int> steiner_exact(const SchemaGraph& g, const std::vector<int>& terminals) {
    const int n = g.node_count();
    const int t = static_cast<int>(terminals.size());
    const std::uint32_t full = (1u << t) - 1;
    SteinerState st;
    st.dp.assign(full + 1, std::vector<TreeKey>(static_cast<std::size_t>(n)));
    st.choice.assign(full + 1, std::vector<SteinerState::Choice>(static_cast<std::size_t>(n)));

    for (int i = 0; i < t; ++i) {
        int v = terminals[static_cast<std::size_t>(i)];
        st.dp[1u << i][static_cast<std::size_t>(v)] = {0, 1ULL << v};
    }

    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        auto& dpm = st.dp[mask];
        auto& chm = st.choice[mask];
        // Merge two complementary terminal subsets at a shared node.
        for (std::uint32_t sub = (mask - 1) & mask; sub > 0; sub = (sub - 1) & mask) {
            if (sub < (mask ^ sub)) continue; // each split once
            const auto& a = st.dp[sub];
            const auto& b = st.dp[mask ^ sub];
            for (int v = 0; v < n; ++v) {
                if (a[static_cast<std::size_t>(v)].cost >= kInfCost || b[static_cast<std::size_t>(v)].cost >= kInfCost) continue;
                TreeKey cand{a[static_cast<std::size_t>(v)].cost + b[static_cast<std::size_t>(v)].cost,
                             a[static_cast<std::size_t>(v)].nodes | b[static_cast<std::size_t>(v)].nodes};
                if (cand.better_than(dpm[static_cast<std::size_t>(v)], g.table_count)) {
                    dpm[static_cast<std::size_t>(v)] = cand;
                    chm[static_cast<std::size_t>(v)] = {SteinerState::Choice::Kind::Merge, sub, -1, -1};
                }
            }
        }
        // Grow along edges until no cell improves. Unit weights keep the
        // number of sweeps bounded by the graph diameter.
        bool changed = true;
        while (changed) {
            changed = false;
            for (int v = 0; v < n; ++v) {
                if (dpm[static_cast<std::size_t>(v)].cost >= kInfCost) continue;
                for (const auto& [u, eid] : g.adjacency[static_cast<std::size_t>(v)]) {
                    TreeKey cand{dpm[static_cast<std::size_t>(v)].cost + 1,
                                 dpm[static_cast<std::size_t>(v)].nodes | (1ULL << u)};
                    if (cand.better_than(dpm[static_cast<std::size_t>(u)], g.table_count)) {
                        dpm[static_cast<std::size_t>(u)] = cand;
                        chm[static_cast<std::size_t>(u)] = {SteinerState::Choice::Kind::Grow, 0, v, eid};
                        changed = true;
                    }
                }
            }
        }
    }

    // Pick the root deterministically among optimal cells.
    TreeKey best;
    int best_v = -1;
    for (int v = 0; v < n; ++v)
        if (st.dp[full][static_cast<std::size_t>(v)].better_than(best, g.table_count)) {
            best = st.dp[full][static_cast<std::size_t>(v)];
            best_v = v;
        }
    if (best_v < 0)
        throw Error(ErrorCode::DisconnectedTerminals, "no connected subgraph covers all terminals");

    std::vector<int> edge_ids;
    std::vector<std::pair<std::uint32_t, int>> stack{{full, best_v}};
    while (!stack.empty()) {
        auto [mask, v] = stack.back();
        stack.pop_back();
        const auto& ch = st.choice[mask][static_cast<std::size_t>(v)];
        switch (ch.kind) {
            case SteinerState::Choice::Kind::Leaf:
                break;
            case SteinerState::Choice::Kind::Merge:
                stack.emplace_back(ch.split, v);
                stack.emplace_back(mask ^ ch.split, v);
                break;
            case SteinerState::Choice::Kind::Grow:
                edge_ids.push_back(ch.pred_edge);
                stack.emplace_back(mask, ch.pred_node);
                break;
        }
    }
    std::sort(edge_ids.begin(), edge_ids.end());
    edge_ids.erase(std::unique(edge_ids.begin(), edge_ids.end()), edge_ids.end());
    return edge_ids;
}

/// Heuristic fallback: grow from the closest terminal pair, repeatedly
/// attaching the nearest remaining terminal by a shortest path. Connected
/// and spanning, not necessarily minimum.
inline std::vector<int> steiner_merge_heuristic(const SchemaGraph& g, const std::vector<int>& terminals) {
    const int n = g.node_count();
    std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
    std::vector<int> edge_ids;

    auto bfs = [&](const std::vector<int>& sources, std::vector<int>& dist, std::vector<int>& pred_node,
                   std::vector<int>& pred_edge) {
        dist.assign(static_cast<std::size_t>(n), kInfCost);
        pred_node.assign(static_cast<std::size_t>(n), -1);
        pred_edge.assign(static_cast<std::size_t>(n), -1);
        std::queue<int> q;
        for (int s : sources) {
            dist[static_cast<std::size_t>(s)] = 0;
            q.push(s);
        }
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (const auto& [u, eid] : g.adjacency[static_cast<std::size_t>(v)])
                if (dist[static_cast<std::size_t>(u)] >= kInfCost) {
                    dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
                    pred_node[static_cast<std::size_t>(u)] = v;
                    pred_edge[static_cast<std::size_t>(u)] = eid;
                    q.push(u);
                }
        }
    };

    // Seed with the closest pair of terminals.
    std::vector<int> dist, pred_node, pred_edge;
    int best_d = kInfCost, seed_a = terminals[0], seed_b = terminals[0];
    for (int a : terminals) {
        bfs({a}, dist, pred_node, pred_edge);
        for (int b : terminals) {
            if (b == a) continue;
            if (dist[static_cast<std::size_t>(b)] < best_d) {
                best_d = dist[static_cast<std::size_t>(b)];
                seed_a = a;
                seed_b = b;
            }
        }
    }
    if (terminals.size() > 1 && best_d >= kInfCost)
        throw Error(ErrorCode::DisconnectedTerminals, "no connected subgraph covers all terminals");

    bfs({seed_a}, dist, pred_node, pred_edge);
    in_tree[static_cast<std::size_t>(seed_a)] = 1;
    for (int v = seed_b; v != seed_a; v = pred_node[static_cast<std::size_t>(v)]) {
        in_tree[static_cast<std::size_t>(v)] = 1;
        edge_ids.push_back(pred_edge[static_cast<std::size_t>(v)]);
    }

    while (true) {
        std::vector<int> tree_nodes;
        for (int v = 0; v < n; ++v)
            if (in_tree[static_cast<std::size_t>(v)]) tree_nodes.push_back(v);
        bfs(tree_nodes, dist, pred_node, pred_edge);
        int next = -1, next_d = kInfCost;
        for (int v : terminals)
            if (!in_tree[static_cast<std::size_t>(v)] && dist[static_cast<std::size_t>(v)] < next_d) {
                next_d = dist[static_cast<std::size_t>(v)];
                next = v;
            }
        if (next < 0) break;
        if (next_d >= kInfCost)
            throw Error(ErrorCode::DisconnectedTerminals, "no connected subgraph covers all terminals");
        for (int v = next; !in_tree[static_cast<std::size_t>(v)]; v = pred_node[static_cast<std::size_t>(v)]) {
            in_tree[static_cast<std::size_t>(v)] = 1;
            edge_ids.push_back(pred_edge[static_cast<std::size_t>(v)]);
        }
    }
    std::sort(edge_ids.begin(), edge_ids.end());
    edge_ids.erase(std::unique(edge_ids.begin(), edge_ids.end()), edge_ids.end());
    return edge_ids;
}

} // namespace detail

/// Smallest connected edge set spanning `terminals` (node ids). Exact for
/// up to 6 terminals on graphs of up to 40 nodes, heuristic beyond.
/// A single terminal yields an empty edge set.
inline std::vector<int> steiner_tree(const SchemaGraph& graph, std::vector<int> terminals) {
    if (terminals.empty())
        throw Error(ErrorCode::DisconnectedTerminals, "terminal set is empty");
    std::sort(terminals.begin(), terminals.end());
    terminals.erase(std::unique(terminals.begin(), terminals.end()), terminals.end());
    for (int v : terminals)
        if (v < 0 || v >= graph.node_count())
            throw Error(ErrorCode::DisconnectedTerminals,
                        "terminal node " + std::to_string(v) + " is not in the graph");
    if (terminals.size() == 1) return {};
    if (terminals.size() <= 6 && graph.node_count() <= 40)
        return detail::steiner_exact(graph, terminals);
    return detail::steiner_merge_heuristic(graph, terminals);
}

/// Ordered join recovery from a Steiner tree: the table list in traversal
/// order and one (left column, right column) step per foreign-key edge.
struct JoinPlan {
    std::vector<int> tables;                  // schema table indices
    std::vector<std::pair<int, int>> steps;   // flat column ids, left side already joined
};

/// Materializes the tree as a join plan. Tables covered by the tree include
/// the owners of every foreign-key endpoint, so relay columns always have
/// their table joined. `preferred_root`, when >= 0 and part of the plan,
/// selects the traversal start; otherwise the smallest table index starts.
inline JoinPlan join_plan_from_tree(const std::vector<int>& tree, const SchemaGraph& graph,
                                    int preferred_root = -1) {
    std::vector<int> tables;
    std::vector<std::pair<int, int>> fk_edges; // flat column ids
    for (int eid : tree) {
        const auto& e = graph.edges[static_cast<std::size_t>(eid)];
        if (e.kind == SchemaGraph::EdgeKind::ForeignKey) {
            int ca = graph.node_index(e.u), cb = graph.node_index(e.v);
            fk_edges.emplace_back(ca, cb);
            tables.push_back(graph.owner_table(e.u));
            tables.push_back(graph.owner_table(e.v));
        } else {
            tables.push_back(graph.is_table_node(e.u) ? e.u : e.v);
        }
    }
    std::sort(tables.begin(), tables.end());
    tables.erase(std::unique(tables.begin(), tables.end()), tables.end());

    JoinPlan plan;
    if (tables.empty()) {
        // Single-node tree: only membership-free terminals, no steps.
        if (preferred_root >= 0) plan.tables.push_back(preferred_root);
        return plan;
    }

    // Table-level adjacency induced by foreign-key steps.
    std::vector<std::vector<std::pair<int, std::size_t>>> tadj(tables.size());
    auto table_slot = [&](int table) {
        return static_cast<std::size_t>(std::lower_bound(tables.begin(), tables.end(), table) - tables.begin());
    };
    std::vector<std::pair<int, int>> same_table_steps;
    for (std::size_t i = 0; i < fk_edges.size(); ++i) {
        const auto& [ca, cb] = fk_edges[i];
        int ta = graph.column_owner[static_cast<std::size_t>(ca)];
        int tb = graph.column_owner[static_cast<std::size_t>(cb)];
        if (ta == tb) {
            same_table_steps.emplace_back(ca, cb);
            continue;
        }
        tadj[table_slot(ta)].emplace_back(tb, i);
        tadj[table_slot(tb)].emplace_back(ta, i);
    }
    for (auto& a : tadj)
        std::sort(a.begin(), a.end());

    int root = tables.front();
    if (preferred_root >= 0 &&
        std::binary_search(tables.begin(), tables.end(), preferred_root))
        root = preferred_root;

    // Depth-first spanning traversal of the table-level tree, smaller table
    // index first. Each table is introduced by exactly one step.
    std::vector<char> visited(tables.size(), 0);
    std::vector<char> used_edge(fk_edges.size(), 0);
    std::vector<int> stack{root};
    visited[table_slot(root)] = 1;
    std::vector<int> order;
    std::vector<std::pair<int, int>> steps;
    while (!stack.empty()) {
        int t = stack.back();
        stack.pop_back();
        order.push_back(t);
        std::vector<std::pair<int, std::size_t>> children;
        for (const auto& [nb, eidx] : tadj[table_slot(t)]) {
            if (visited[table_slot(nb)]) continue;
            visited[table_slot(nb)] = 1;
            used_edge[eidx] = 1;
            children.emplace_back(nb, eidx);
        }
        // Stack is LIFO: push largest first so the smallest pops next.
        for (auto it = children.rbegin(); it != children.rend(); ++it)
            stack.push_back(it->first);
        for (const auto& [nb, eidx] : children) {
            auto [ca, cb] = fk_edges[eidx];
            // left = column on the side already joined
            if (graph.column_owner[static_cast<std::size_t>(ca)] != t) std::swap(ca, cb);
            steps.emplace_back(ca, cb);
        }
    }
    // Steps were recorded per parent; reorder so steps[i] introduces
    // order[i + 1].
    std::vector<std::pair<int, int>> ordered_steps;
    std::vector<char> taken(steps.size(), 0);
    for (std::size_t i = 1; i < order.size(); ++i)
        for (std::size_t k = 0; k < steps.size(); ++k)
            if (!taken[k] && graph.column_owner[static_cast<std::size_t>(steps[k].second)] == order[i]) {
                ordered_steps.push_back(steps[k]);
                taken[k] = 1;
                break;
            }
    plan.tables = std::move(order);
    plan.steps = std::move(ordered_steps);
    // Edges between tables already joined, then same-table pairs: extra
    // conditions rather than table introductions.
    for (std::size_t i = 0; i < fk_edges.size(); ++i) {
        int ta = graph.column_owner[static_cast<std::size_t>(fk_edges[i].first)];
        int tb = graph.column_owner[static_cast<std::size_t>(fk_edges[i].second)];
        if (ta != tb && !used_edge[i]) plan.steps.push_back(fk_edges[i]);
    }
    for (const auto& s : same_table_steps)
        plan.steps.push_back(s);
    return plan;
}

} // namespace ssql
