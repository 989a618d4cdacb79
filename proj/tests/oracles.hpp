#pragma once

// Slow, obviously-correct reference implementations used by the unit and
// acceptance tests.

#include <cmath>
#include <functional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "mils/bdm.hpp"
#include "mils/graph.hpp"

namespace oracle {

using mils::Graph;
using mils::NodeId;
using mils::BitMatrix;
using mils::BlockKey;
using mils::CtmTable;
using mils::quantize_bits;

/// BFS distances from s (SIZE_MAX when unreachable).
inline std::vector<std::size_t> distances(const Graph& g, NodeId s)
{
    const auto adj = g.adjacency_lists();
    std::vector<std::size_t> d(g.node_count(), SIZE_MAX);
    std::queue<NodeId> q;
    d[s] = 0;
    q.push(s);
    while (!q.empty()) {
        const NodeId v = q.front();
        q.pop();
        for (NodeId w : adj[v]) {
            if (d[w] == SIZE_MAX) {
                d[w] = d[v] + 1;
                q.push(w);
            }
        }
    }
    return d;
}

struct Betweenness {
    std::vector<double> node;
    std::vector<double> edge;
};

/// Enumerates every shortest s-t path explicitly and counts, per pair, the
/// fraction of those paths through each node and edge. Unordered pairs for
/// undirected graphs, ordered pairs for digraphs.
inline Betweenness brute_force_betweenness(const Graph& g)
{
    const std::size_t n = g.node_count();
    const auto adj = g.adjacency_lists();
    auto edge_id = [&](NodeId a, NodeId b) {
        for (std::size_t i = 0; i < g.edge_count(); ++i) {
            const auto& e = g.edges()[i];
            if ((e.u == a && e.v == b) || (!g.directed() && e.u == b && e.v == a)) {
                return i;
            }
        }
        return SIZE_MAX;
    };
    Betweenness out{std::vector<double>(n, 0.0), std::vector<double>(g.edge_count(), 0.0)};
    for (NodeId s = 0; s < n; ++s) {
        const auto ds = distances(g, s);
        for (NodeId t = 0; t < n; ++t) {
            if (t == s || ds[t] == SIZE_MAX || (!g.directed() && t < s)) {
                continue;
            }
            std::vector<std::vector<NodeId>> paths;
            std::vector<NodeId> path{s};
            std::function<void(NodeId)> walk = [&](NodeId v) {
                if (v == t) {
                    paths.push_back(path);
                    return;
                }
                for (NodeId w : adj[v]) {
                    if (ds[w] == ds[v] + 1 && ds[w] <= ds[t]) {
                        path.push_back(w);
                        walk(w);
                        path.pop_back();
                    }
                }
            };
            walk(s);
            std::vector<double> node_hits(n, 0.0);
            std::vector<double> edge_hits(g.edge_count(), 0.0);
            for (const auto& p : paths) {
                for (std::size_t i = 1; i + 1 < p.size(); ++i) {
                    node_hits[p[i]] += 1.0;
                }
                for (std::size_t i = 0; i + 1 < p.size(); ++i) {
                    edge_hits[edge_id(p[i], p[i + 1])] += 1.0;
                }
            }
            const auto k = static_cast<double>(paths.size());
            for (std::size_t v = 0; v < n; ++v) {
                out.node[v] += node_hits[v] / k;
            }
            for (std::size_t e = 0; e < g.edge_count(); ++e) {
                out.edge[e] += edge_hits[e] / k;
            }
        }
    }
    return out;
}

/// reach[u][v] = v reachable from u by a non-empty path.
inline std::vector<std::vector<bool>> reachability(const Graph& g)
{
    const std::size_t n = g.node_count();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (const auto& e : g.edges()) {
        r[e.u][e.v] = true;
        if (!g.directed()) {
            r[e.v][e.u] = true;
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (r[i][k] && r[k][j]) {
                    r[i][j] = true;
                }
            }
        }
    }
    return r;
}

inline std::size_t triangles(const Graph& g)
{
    std::size_t t = 0;
    const std::size_t n = g.node_count();
    for (NodeId a = 0; a < n; ++a) {
        for (NodeId b = a + 1; b < n; ++b) {
            for (NodeId c = b + 1; c < n; ++c) {
                t += g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) ? 1 : 0;
            }
        }
    }
    return t;
}

// Naive BDM oracle: cut the matrix into full d x d blocks (discarding the
// remainder), count blocks by their text in a hash map, then sum
// log2(n) + C(block) over distinct blocks.
inline double naive_bdm(const BitMatrix& m, std::size_t d, const CtmTable& table, bool as_string)
{
    std::unordered_map<std::string, std::uint64_t> counts;
    if (as_string) {
        const std::string s = m.to_string();
        for (std::size_t i = 0; i + d <= s.size(); i += d) {
            ++counts[s.substr(i, d)];
        }
    } else {
        for (std::size_t r = 0; r + d <= m.rows(); r += d) {
            for (std::size_t c = 0; c + d <= m.cols(); c += d) {
                std::string b;
                for (std::size_t i = 0; i < d; ++i) {
                    for (std::size_t j = 0; j < d; ++j) {
                        b.push_back(m.at(r + i, c + j) ? '1' : '0');
                    }
                }
                ++counts[b];
            }
        }
    }
    // Terms are rounded to the library's 2^-32-bit grid, with log2(n) split
    // into the exponent of n's largest power-of-two factor plus log2 of the
    // odd part. Grid values add exactly, so the hash-map order is harmless.
    double sum = 0.0;
    for (const auto& [bits, n] : counts) {
        const BlockKey key = as_string ? BlockKey::string_key(bits) : BlockKey::array_key(d, d, bits);
        std::uint64_t odd = n;
        double whole = 0.0;
        while (odd % 2 == 0) {
            odd /= 2;
            whole += 1.0;
        }
        sum += whole + quantize_bits(std::log2(static_cast<double>(odd))) + table.lookup(key);
    }
    return sum;
}

}  // namespace oracle
