#pragma once

// Comparison sparsifiers: random deletion, BFS spanning tree, transitive
// reduction, and effective-resistance spectral sparsification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "mils/graph.hpp"
#include "mils/random.hpp"

namespace mils {

/// Keeps N edges chosen uniformly without replacement; edge order preserved.
inline Graph random_deletion(const Graph& g, std::size_t target, std::uint64_t seed)
{
    if (target > g.edge_count()) {
        throw Error("target size " + std::to_string(target) + " exceeds edge count " +
                    std::to_string(g.edge_count()));
    }
    std::vector<std::size_t> ids(g.edge_count());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(ids);
    std::vector<bool> keep(g.edge_count(), false);
    for (std::size_t i = 0; i < target; ++i) {
        keep[ids[i]] = true;
    }
    return g.edge_subgraph(keep);
}

struct SpanningTreeResult {
    Graph tree;
    bool forest = false;  ///< input was disconnected; one tree per component
};

/// Breadth-first spanning tree from node 0, visiting neighbours in
/// ascending order; further components are rooted at their smallest node.
inline SpanningTreeResult spanning_tree(const Graph& g)
{
    require_undirected(g, "spanning tree");
    const std::size_t n = g.node_count();
    const auto adj = g.adjacency_lists();  // sorted ascending
    std::vector<bool> seen(n, false);
    std::vector<bool> keep(g.edge_count(), false);
    std::vector<NodeId> roots;
    for (NodeId root = 0; root < n; ++root) {
        if (seen[root]) {
            continue;
        }
        roots.push_back(root);
        std::deque<NodeId> queue{root};
        seen[root] = true;
        while (!queue.empty()) {
            const NodeId v = queue.front();
            queue.pop_front();
            for (NodeId w : adj[v]) {
                if (!seen[w]) {
                    seen[w] = true;
                    queue.push_back(w);
                    keep[g.edge_id(v, w)] = true;
                }
            }
        }
    }
    return {g.edge_subgraph(keep), roots.size() > 1};
}

class CycleDetected : public Error {
public:
    CycleDetected() : Error("transitive reduction requires a directed acyclic graph; input has a cycle") {}
};

/// Topological order of a digraph (Kahn, smallest ready node first).
inline std::vector<NodeId> topological_order(const Graph& g)
{
    const std::size_t n = g.node_count();
    std::vector<std::size_t> indeg(n, 0);
    for (const auto& e : g.edges()) {
        ++indeg[e.v];
    }
    const auto adj = g.adjacency_lists();
    std::vector<NodeId> ready;
    for (NodeId v = 0; v < n; ++v) {
        if (indeg[v] == 0) {
            ready.push_back(v);
        }
    }
    std::vector<NodeId> order;
    while (!ready.empty()) {
        std::pop_heap(ready.begin(), ready.end(), std::greater<>{});
        const NodeId v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (NodeId w : adj[v]) {
            if (--indeg[w] == 0) {
                ready.push_back(w);
                std::push_heap(ready.begin(), ready.end(), std::greater<>{});
            }
        }
    }
    if (order.size() != n) {
        throw CycleDetected();
    }
    return order;
}

/// The unique minimal subgraph with the same reachability relation. An edge
/// u->v is dropped when v is reachable from another successor of u.
inline Graph transitive_reduction(const Graph& g)
{
    if (!g.directed()) {
        throw Error("transitive reduction needs a directed graph");
    }
    const std::size_t n = g.node_count();
    const auto order = topological_order(g);
    const auto adj = g.adjacency_lists();
    // reach[v][w]: w reachable from v by a non-empty path; filled in reverse topological order.
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const NodeId v = *it;
        for (NodeId w : adj[v]) {
            reach[v][w] = true;
            for (std::size_t x = 0; x < n; ++x) {
                if (reach[w][x]) {
                    reach[v][x] = true;
                }
            }
        }
    }
    std::vector<bool> keep(g.edge_count(), true);
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        const Edge& e = g.edges()[i];
        for (NodeId w : adj[e.u]) {
            if (w != e.v && reach[w][e.v]) {
                keep[i] = false;
                break;
            }
        }
    }
    return g.edge_subgraph(keep);
}

/// Laplacian pseudoinverse of a connected graph: (L + J/n)^-1 - J/n.
inline Eigen::MatrixXd laplacian_pseudoinverse(const Graph& g)
{
    require_undirected(g, "Laplacian pseudoinverse");
    if (!is_connected(g)) {
        throw Error("effective resistances need a connected graph");
    }
    const auto n = static_cast<Eigen::Index>(g.node_count());
    const Eigen::MatrixXd j = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    return Eigen::MatrixXd(laplacian(g) + j).ldlt().solve(Eigen::MatrixXd::Identity(n, n)) - j;
}

/// Per edge id: resistance between its endpoints with unit-resistor edges.
inline std::vector<double> effective_resistances(const Graph& g)
{
    const Eigen::MatrixXd p = laplacian_pseudoinverse(g);
    std::vector<double> r;
    r.reserve(g.edge_count());
    for (const auto& e : g.edges()) {
        r.push_back(p(e.u, e.u) + p(e.v, e.v) - 2.0 * p(e.u, e.v));
    }
    return r;
}

struct SpectralSparsifier {
    Graph original;
    std::vector<double> weight;     ///< per original edge id; 0 when never sampled
    std::size_t samples = 0;        ///< q
    double epsilon = 0.0;

    /// Unweighted support (edges with positive weight): the presence
    /// coercion used when metrics need a simple graph.
    [[nodiscard]] Graph support() const
    {
        std::vector<bool> keep(weight.size());
        for (std::size_t i = 0; i < weight.size(); ++i) {
            keep[i] = weight[i] > 0.0;
        }
        return original.edge_subgraph(keep);
    }
};

/// Samples q = ceil(8 n ln n / eps^2) edges with replacement, edge e with
/// probability R_e / (n - 1); each draw adds 1 / (q p_e) to its weight.
inline SpectralSparsifier spectral_sparsify(const Graph& g, double epsilon, std::uint64_t seed)
{
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw Error("spectral sparsification needs 0 < epsilon < 1");
    }
    const auto r = effective_resistances(g);
    const double n = static_cast<double>(g.node_count());
    SpectralSparsifier out{g, std::vector<double>(g.edge_count(), 0.0), 0, epsilon};
    if (g.edge_count() == 0) {
        return out;
    }
    out.samples = static_cast<std::size_t>(std::ceil(8.0 * n * std::log(n) / (epsilon * epsilon)));
    std::vector<double> cumulative(r.size());
    std::partial_sum(r.begin(), r.end(), cumulative.begin());
    const double total = cumulative.back();
    Rng rng(seed);
    std::vector<std::size_t> hits(r.size(), 0);
    for (std::size_t s = 0; s < out.samples; ++s) {
        const double u = rng.unit() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) {
            --it;
        }
        ++hits[static_cast<std::size_t>(it - cumulative.begin())];
    }
    const auto q = static_cast<double>(out.samples);
    for (std::size_t e = 0; e < r.size(); ++e) {
        if (hits[e] > 0) {
            out.weight[e] = static_cast<double>(hits[e]) / (q * (r[e] / total));
        }
    }
    return out;
}

/// x^T L x = sum over edges of w_e (x_u - x_v)^2; unit weights when empty.
inline double laplacian_quadratic_form(const Graph& g, const std::vector<double>& x,
                                       const std::vector<double>& weights = {})
{
    double s = 0.0;
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        const Edge& e = g.edges()[i];
        const double d = x[e.u] - x[e.v];
        s += (weights.empty() ? 1.0 : weights[i]) * d * d;
    }
    return s;
}

}  // namespace mils
