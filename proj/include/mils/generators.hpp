#pragma once

// Seeded random graph generators used as synthetic stand-ins for real
// networks. Every generator is a pure function of its arguments.

#include <algorithm>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "mils/graph.hpp"
#include "mils/random.hpp"

namespace mils {

namespace detail {

inline Graph from_pairs(std::size_t n, bool directed, std::vector<std::pair<NodeId, NodeId>> pairs)
{
    std::sort(pairs.begin(), pairs.end());
    Graph g(n, directed);
    for (auto [u, v] : pairs) {
        g.add_edge(u, v);
    }
    return g;
}

inline std::size_t max_edges(std::size_t n, bool directed) { return directed ? n * (n - 1) : n * (n - 1) / 2; }

}  // namespace detail

/// G(n, M): M distinct edges drawn uniformly; edge ids follow (u, v) order.
inline Graph erdos_renyi_gnm(std::size_t n, std::size_t m, std::uint64_t seed)
{
    if (n < 2 && m > 0) {
        throw Error("G(n,M) needs at least 2 nodes for any edge");
    }
    if (m > detail::max_edges(n, false)) {
        throw Error("G(n,M): " + std::to_string(m) + " edges exceed the maximum for " + std::to_string(n) + " nodes");
    }
    Rng rng(seed);
    std::set<std::pair<NodeId, NodeId>> chosen;
    while (chosen.size() < m) {
        auto u = static_cast<NodeId>(rng.below(n));
        auto v = static_cast<NodeId>(rng.below(n));
        if (u == v) {
            continue;
        }
        chosen.emplace(std::min(u, v), std::max(u, v));
    }
    return detail::from_pairs(n, false, {chosen.begin(), chosen.end()});
}

/// G(n, p): each unordered pair independently with probability p.
inline Graph erdos_renyi_gnp(std::size_t n, double p, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            if (rng.unit() < p) {
                pairs.emplace_back(u, v);
            }
        }
    }
    return detail::from_pairs(n, false, std::move(pairs));
}

/// Ring lattice with k nearest neighbours (k even), each lattice edge
/// rewired to a uniform new endpoint with probability p.
inline Graph watts_strogatz(std::size_t n, std::size_t k, double p, std::uint64_t seed)
{
    if (k % 2 != 0 || k >= n) {
        throw Error("Watts-Strogatz needs an even k smaller than n");
    }
    Rng rng(seed);
    std::set<std::pair<NodeId, NodeId>> edges;
    auto norm = [](NodeId a, NodeId b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    for (NodeId u = 0; u < n; ++u) {
        for (std::size_t j = 1; j <= k / 2; ++j) {
            edges.insert(norm(u, static_cast<NodeId>((u + j) % n)));
        }
    }
    for (std::size_t j = 1; j <= k / 2; ++j) {
        for (NodeId u = 0; u < n; ++u) {
            const auto v = static_cast<NodeId>((u + j) % n);
            if (rng.unit() >= p || !edges.count(norm(u, v))) {
                continue;
            }
            std::size_t degree_u = 0;
            for (const auto& e : edges) {
                degree_u += (e.first == u || e.second == u) ? 1 : 0;
            }
            if (degree_u >= n - 1) {
                continue;  // u is already adjacent to everything
            }
            NodeId w = 0;
            do {
                w = static_cast<NodeId>(rng.below(n));
            } while (w == u || edges.count(norm(u, w)));
            edges.erase(norm(u, v));
            edges.insert(norm(u, w));
        }
    }
    return detail::from_pairs(n, false, {edges.begin(), edges.end()});
}

/// Preferential attachment: each new node links to m distinct existing nodes
/// drawn proportionally to degree (the first new node links to nodes 0..m-1).
inline Graph barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed)
{
    if (m < 1 || m >= n) {
        throw Error("Barabasi-Albert needs 1 <= m < n");
    }
    Rng rng(seed);
    std::vector<std::pair<NodeId, NodeId>> pairs;
    std::vector<NodeId> repeated;
    std::vector<NodeId> targets;
    for (NodeId v = 0; v < m; ++v) {
        targets.push_back(v);
    }
    for (auto source = static_cast<NodeId>(m); source < n; ++source) {
        for (NodeId t : targets) {
            pairs.emplace_back(std::min(source, t), std::max(source, t));
            repeated.push_back(t);
            repeated.push_back(source);
        }
        std::set<NodeId> next;
        while (next.size() < m) {
            next.insert(repeated[rng.below(repeated.size())]);
        }
        targets.assign(next.begin(), next.end());
    }
    return detail::from_pairs(n, false, std::move(pairs));
}

/// Random DAG: nodes get a random topological order; each forward pair is an
/// edge with probability p.
inline Graph random_dag(std::size_t n, double p, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<NodeId> order(n);
    for (NodeId i = 0; i < n; ++i) {
        order[i] = i;
    }
    rng.shuffle(order);
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rng.unit() < p) {
                pairs.emplace_back(order[i], order[j]);
            }
        }
    }
    return detail::from_pairs(n, true, std::move(pairs));
}

/// Complete graph K_n with edges in (u, v) order.
inline Graph complete_graph(std::size_t n)
{
    Graph g(n);
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            g.add_edge(u, v);
        }
    }
    return g;
}

}  // namespace mils
