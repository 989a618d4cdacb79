#pragma once

// Simple graphs (optionally directed) and the graph-theoretic measures used
// to judge how well a sparsifier preserves structure.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mils/matrix.hpp"

namespace mils {

using NodeId = std::uint32_t;

struct Edge {
    NodeId u = 0;
    NodeId v = 0;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple graph with stable node indices 0..n-1 and stable edge ids
/// (position in `edges()`). Undirected edges are stored with u < v.
class Graph {
public:
    Graph() = default;
    explicit Graph(std::size_t nodes, bool directed = false) : n_(nodes), directed_(directed)
    {
        labels_.resize(nodes);
        std::iota(labels_.begin(), labels_.end(), std::uint64_t{0});
    }

    [[nodiscard]] std::size_t node_count() const noexcept { return n_; }
    [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }
    [[nodiscard]] bool directed() const noexcept { return directed_; }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::vector<std::uint64_t>& labels() const noexcept { return labels_; }

    void set_labels(std::vector<std::uint64_t> labels)
    {
        if (labels.size() != n_) {
            throw Error("label count does not match node count");
        }
        labels_ = std::move(labels);
    }

    /// Adds an edge; rejects loops, out-of-range endpoints and duplicates.
    void add_edge(NodeId u, NodeId v)
    {
        if (u >= n_ || v >= n_) {
            throw Error("edge endpoint out of range: " + std::to_string(u) + " " + std::to_string(v));
        }
        if (u == v) {
            throw Error("self-loop on node " + std::to_string(u) + " (simple graphs only)");
        }
        Edge e = directed_ ? Edge{u, v} : Edge{std::min(u, v), std::max(u, v)};
        if (!index_.emplace(key(e), edges_.size()).second) {
            throw Error("duplicate edge " + std::to_string(u) + " " + std::to_string(v));
        }
        edges_.push_back(e);
    }

    [[nodiscard]] bool has_edge(NodeId u, NodeId v) const
    {
        Edge e = directed_ ? Edge{u, v} : Edge{std::min(u, v), std::max(u, v)};
        return index_.count(key(e)) != 0;
    }

    /// Id of edge u-v (u->v when directed); throws when absent.
    [[nodiscard]] std::size_t edge_id(NodeId u, NodeId v) const
    {
        Edge e = directed_ ? Edge{u, v} : Edge{std::min(u, v), std::max(u, v)};
        auto it = index_.find(key(e));
        if (it == index_.end()) {
            throw Error("no edge " + std::to_string(u) + " " + std::to_string(v));
        }
        return it->second;
    }

    /// Out-neighbours (all neighbours when undirected), ascending.
    [[nodiscard]] std::vector<std::vector<NodeId>> adjacency_lists() const
    {
        std::vector<std::vector<NodeId>> adj(n_);
        for (const auto& e : edges_) {
            adj[e.u].push_back(e.v);
            if (!directed_) {
                adj[e.v].push_back(e.u);
            }
        }
        for (auto& a : adj) {
            std::sort(a.begin(), a.end());
        }
        return adj;
    }

    /// Subgraph on the same node set keeping the edges with keep[id] true.
    [[nodiscard]] Graph edge_subgraph(const std::vector<bool>& keep) const
    {
        Graph g(n_, directed_);
        g.labels_ = labels_;
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            if (keep[i]) {
                g.add_edge(edges_[i].u, edges_[i].v);
            }
        }
        return g;
    }

    friend bool operator==(const Graph& a, const Graph& b)
    {
        return a.n_ == b.n_ && a.directed_ == b.directed_ && a.edges_ == b.edges_;
    }

private:
    [[nodiscard]] std::uint64_t key(const Edge& e) const noexcept { return (std::uint64_t{e.u} << 32) | e.v; }

    std::size_t n_ = 0;
    bool directed_ = false;
    std::vector<Edge> edges_;
    std::vector<std::uint64_t> labels_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Edge-list text format
// ---------------------------------------------------------------------------

/// One edge per line as two non-negative integer labels. `#` lines are
/// comments; `directed` as the first non-comment line marks a digraph. A
/// line with a single label declares a (possibly isolated) node. Nodes are
/// indexed in ascending label order.
inline Graph parse_edge_list(std::istream& in, const std::string& origin = "<edges>")
{
    std::string line;
    std::size_t lineno = 0;
    bool directed = false;
    bool seen_content = false;
    std::vector<std::uint64_t> labels;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pending;
    std::vector<std::size_t> pending_line;

    auto fail = [&](const std::string& what) { throw Error(origin + ":" + std::to_string(lineno) + ": " + what); };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) {
            tok.push_back(t);
        }
        if (!seen_content && tok.size() == 1 && tok[0] == "directed") {
            directed = true;
            seen_content = true;
            continue;
        }
        seen_content = true;
        if (tok.size() > 2) {
            fail("expected two labels, got " + std::to_string(tok.size()) + " fields");
        }
        std::vector<std::uint64_t> ids;
        for (const auto& t : tok) {
            std::uint64_t v = 0;
            if (!detail::parse_int(std::string_view(t), v)) {
                fail("bad node label '" + t + "'");
            }
            ids.push_back(v);
            labels.push_back(v);
        }
        if (ids.size() == 2) {
            if (ids[0] == ids[1]) {
                fail("self-loop on node " + tok[0] + " (simple graphs only)");
            }
            pending.emplace_back(ids[0], ids[1]);
            pending_line.push_back(lineno);
        }
    }

    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    auto index = [&](std::uint64_t label) {
        return static_cast<NodeId>(std::lower_bound(labels.begin(), labels.end(), label) - labels.begin());
    };
    Graph g(labels.size(), directed);
    g.set_labels(labels);
    for (std::size_t i = 0; i < pending.size(); ++i) {
        try {
            g.add_edge(index(pending[i].first), index(pending[i].second));
        } catch (const Error& e) {
            throw Error(origin + ":" + std::to_string(pending_line[i]) + ": " + e.what());
        }
    }
    return g;
}

inline Graph from_edge_list(const std::string& text)
{
    std::istringstream in(text);
    return parse_edge_list(in);
}

/// Writes edges with original labels; isolated nodes as single-label lines.
inline std::string to_edge_list(const Graph& g)
{
    std::ostringstream out;
    out << "# nodes " << g.node_count() << " edges " << g.edge_count() << '\n';
    if (g.directed()) {
        out << "directed\n";
    }
    std::vector<bool> touched(g.node_count(), false);
    for (const auto& e : g.edges()) {
        touched[e.u] = touched[e.v] = true;
    }
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        if (!touched[v]) {
            out << g.labels()[v] << '\n';
        }
    }
    for (const auto& e : g.edges()) {
        out << g.labels()[e.u] << ' ' << g.labels()[e.v] << '\n';
    }
    return out.str();
}

inline BitMatrix adjacency(const Graph& g)
{
    BitMatrix a(g.node_count(), g.node_count());
    for (const auto& e : g.edges()) {
        a.set(e.u, e.v, true);
        if (!g.directed()) {
            a.set(e.v, e.u, true);
        }
    }
    return a;
}

/// Inverse of adjacency(); edges in row-major order (upper triangle when
/// undirected). Rejects non-square, non-zero diagonal, or asymmetric input
/// for undirected graphs.
inline Graph from_adjacency(const BitMatrix& a, bool directed = false)
{
    if (a.rows() != a.cols()) {
        throw Error("adjacency matrix must be square");
    }
    Graph g(a.rows(), directed);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        if (a.at(i, i)) {
            throw Error("adjacency matrix has a non-zero diagonal at " + std::to_string(i));
        }
        for (std::size_t j = directed ? 0 : i + 1; j < a.cols(); ++j) {
            if (!directed && a.at(i, j) != a.at(j, i)) {
                throw Error("undirected adjacency matrix must be symmetric");
            }
            if (a.at(i, j)) {
                g.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(j));
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Degrees, Laplacian, spectrum
// ---------------------------------------------------------------------------

/// Row sum of the adjacency matrix (out-degree for digraphs).
inline std::vector<std::size_t> degrees(const Graph& g)
{
    std::vector<std::size_t> d(g.node_count(), 0);
    for (const auto& e : g.edges()) {
        ++d[e.u];
        if (!g.directed()) {
            ++d[e.v];
        }
    }
    return d;
}

inline std::size_t degree(const Graph& g, NodeId v)
{
    if (v >= g.node_count()) {
        throw Error("node " + std::to_string(v) + " out of range");
    }
    return degrees(g)[v];
}

/// histogram[k] = number of nodes of degree k.
inline std::vector<std::size_t> degree_distribution(const Graph& g)
{
    const auto d = degrees(g);
    std::vector<std::size_t> hist(d.empty() ? 1 : *std::max_element(d.begin(), d.end()) + 1, 0);
    for (auto k : d) {
        ++hist[k];
    }
    return hist;
}

inline void require_undirected(const Graph& g, const char* what)
{
    if (g.directed()) {
        throw Error(std::string(what) + " is defined for undirected graphs only");
    }
}

inline Eigen::MatrixXd adjacency_dense(const Graph& g)
{
    const auto n = static_cast<Eigen::Index>(g.node_count());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : g.edges()) {
        a(e.u, e.v) = 1.0;
        if (!g.directed()) {
            a(e.v, e.u) = 1.0;
        }
    }
    return a;
}

/// L = D - A.
inline Eigen::MatrixXd laplacian(const Graph& g)
{
    require_undirected(g, "laplacian");
    Eigen::MatrixXd a = adjacency_dense(g);
    Eigen::MatrixXd l = -a;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        l(i, i) = a.row(i).sum();
    }
    return l;
}

/// Adjacency eigenvalues sorted from largest to smallest.
inline std::vector<double> spectrum(const Graph& g)
{
    require_undirected(g, "spectrum");
    if (g.node_count() == 0) {
        return {};
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(adjacency_dense(g), Eigen::EigenvaluesOnly);
    std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

/// Component id per node (ids in order of smallest member), undirected sense.
inline std::vector<std::size_t> connected_components(const Graph& g)
{
    std::vector<std::vector<NodeId>> adj(g.node_count());
    for (const auto& e : g.edges()) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    constexpr auto unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> comp(g.node_count(), unset);
    std::size_t next = 0;
    for (std::size_t s = 0; s < g.node_count(); ++s) {
        if (comp[s] != unset) {
            continue;
        }
        std::vector<NodeId> stack{static_cast<NodeId>(s)};
        comp[s] = next;
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            for (NodeId w : adj[v]) {
                if (comp[w] == unset) {
                    comp[w] = next;
                    stack.push_back(w);
                }
            }
        }
        ++next;
    }
    return comp;
}

inline bool is_connected(const Graph& g)
{
    const auto c = connected_components(g);
    return std::all_of(c.begin(), c.end(), [](std::size_t x) { return x == 0; });
}

// ---------------------------------------------------------------------------
// Clustering
// ---------------------------------------------------------------------------

namespace detail {

// links[v] = number of edges among the neighbours of v.
inline std::vector<std::size_t> neighbour_links(const Graph& g)
{
    const auto adj = g.adjacency_lists();
    std::vector<std::size_t> links(g.node_count(), 0);
    for (std::size_t v = 0; v < adj.size(); ++v) {
        const auto& nv = adj[v];
        for (std::size_t i = 0; i < nv.size(); ++i) {
            for (std::size_t j = i + 1; j < nv.size(); ++j) {
                if (g.has_edge(nv[i], nv[j])) {
                    ++links[v];
                }
            }
        }
    }
    return links;
}

}  // namespace detail

/// Closed 2-paths over all 2-paths; 0 when there are no 2-paths.
inline double global_clustering(const Graph& g)
{
    require_undirected(g, "global clustering");
    const auto d = degrees(g);
    const auto links = detail::neighbour_links(g);
    double closed = 0.0;
    double paths = 0.0;
    for (std::size_t v = 0; v < d.size(); ++v) {
        closed += static_cast<double>(links[v]);
        paths += static_cast<double>(d[v]) * static_cast<double>(d[v] > 0 ? d[v] - 1 : 0) / 2.0;
    }
    return paths == 0.0 ? 0.0 : closed / paths;
}

/// Local clustering per node; nodes of degree < 2 get 0.
inline std::vector<double> local_clustering(const Graph& g)
{
    require_undirected(g, "local clustering");
    const auto d = degrees(g);
    const auto links = detail::neighbour_links(g);
    std::vector<double> c(g.node_count(), 0.0);
    for (std::size_t v = 0; v < d.size(); ++v) {
        if (d[v] >= 2) {
            c[v] = 2.0 * static_cast<double>(links[v]) / (static_cast<double>(d[v]) * static_cast<double>(d[v] - 1));
        }
    }
    return c;
}

inline double mean_clustering(const Graph& g)
{
    const auto c = local_clustering(g);
    if (c.empty()) {
        return 0.0;
    }
    return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
}

// ---------------------------------------------------------------------------
// Betweenness (single-source accumulation over BFS DAGs)
// ---------------------------------------------------------------------------

namespace detail {

struct BetweennessSums {
    std::vector<double> node;
    std::vector<double> edge;
};

inline BetweennessSums brandes(const Graph& g)
{
    const std::size_t n = g.node_count();
    const auto adj = g.adjacency_lists();
    std::unordered_map<std::uint64_t, std::size_t> edge_id;
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        const auto& e = g.edges()[i];
        edge_id[(std::uint64_t{e.u} << 32) | e.v] = i;
        if (!g.directed()) {
            edge_id[(std::uint64_t{e.v} << 32) | e.u] = i;
        }
    }

    BetweennessSums out{std::vector<double>(n, 0.0), std::vector<double>(g.edge_count(), 0.0)};
    std::vector<std::vector<NodeId>> preds(n);
    std::vector<double> sigma(n);
    std::vector<double> delta(n);
    std::vector<long> dist(n);
    std::vector<NodeId> order;
    order.reserve(n);

    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t v = 0; v < n; ++v) {
            preds[v].clear();
            sigma[v] = 0.0;
            delta[v] = 0.0;
            dist[v] = -1;
        }
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        std::queue<NodeId> q;
        q.push(static_cast<NodeId>(s));
        while (!q.empty()) {
            NodeId v = q.front();
            q.pop();
            order.push_back(v);
            for (NodeId w : adj[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    q.push(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    preds[w].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const NodeId w = *it;
            for (NodeId v : preds[w]) {
                const double c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                out.edge[edge_id.at((std::uint64_t{v} << 32) | w)] += c;
                delta[v] += c;
            }
            if (w != s) {
                out.node[w] += delta[w];
            }
        }
    }
    if (!g.directed()) {
        // Each unordered pair was counted from both endpoints.
        for (auto& x : out.node) {
            x /= 2.0;
        }
        for (auto& x : out.edge) {
            x /= 2.0;
        }
    }
    return out;
}

}  // namespace detail

/// Sum over pairs s != i != t of (shortest s-t paths through i) / (shortest
/// s-t paths); unordered pairs for undirected graphs, ordered for digraphs.
inline std::vector<double> betweenness_centrality(const Graph& g) { return detail::brandes(g).node; }

/// Per edge id: sum over pairs of the fraction of shortest paths using it.
inline std::vector<double> edge_betweenness(const Graph& g) { return detail::brandes(g).edge; }

// ---------------------------------------------------------------------------
// Centralities
// ---------------------------------------------------------------------------

inline std::vector<double> degree_centrality(const Graph& g)
{
    const auto d = degrees(g);
    return {d.begin(), d.end()};
}

class ConvergenceError : public Error {
public:
    ConvergenceError(std::size_t iterations, double residual)
        : Error("eigenvector centrality did not converge after " + std::to_string(iterations) +
                " iterations (residual " + std::to_string(residual) + ")"),
          residual_(residual)
    {
    }
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double residual_;
};

struct EigenvectorOptions {
    std::size_t max_iterations = 100000;
    double tolerance = 1e-10;
};

struct EigenvectorResult {
    std::vector<double> centrality;        ///< unit sum over the whole graph
    std::vector<double> component_lambda;  ///< dominant eigenvalue per component
    std::vector<std::size_t> component;    ///< component id per node
};

/// Dominant adjacency eigenvector by power iteration on A + I (the shift
/// keeps bipartite components from oscillating), started from all ones.
/// Each connected component is solved separately and given total mass
/// proportional to its size, so the result always sums to 1.
inline EigenvectorResult eigenvector_centrality_detailed(const Graph& g, EigenvectorOptions opt = {})
{
    require_undirected(g, "eigenvector centrality");
    const std::size_t n = g.node_count();
    EigenvectorResult res;
    res.centrality.assign(n, 0.0);
    res.component = connected_components(g);
    if (n == 0) {
        return res;
    }
    const std::size_t ncomp = *std::max_element(res.component.begin(), res.component.end()) + 1;
    res.component_lambda.assign(ncomp, 0.0);
    const auto adj = g.adjacency_lists();

    for (std::size_t c = 0; c < ncomp; ++c) {
        std::vector<NodeId> members;
        for (std::size_t v = 0; v < n; ++v) {
            if (res.component[v] == c) {
                members.push_back(static_cast<NodeId>(v));
            }
        }
        std::vector<double> x(n, 0.0);
        std::vector<double> y(n, 0.0);
        for (NodeId v : members) {
            x[v] = 1.0 / std::sqrt(static_cast<double>(members.size()));
        }
        bool converged = members.size() == 1;
        double change = 0.0;
        for (std::size_t it = 0; it < opt.max_iterations && !converged; ++it) {
            double norm = 0.0;
            for (NodeId v : members) {
                double s = x[v];
                for (NodeId w : adj[v]) {
                    s += x[w];
                }
                y[v] = s;
                norm += s * s;
            }
            norm = std::sqrt(norm);
            change = 0.0;
            for (NodeId v : members) {
                y[v] /= norm;
                change = std::max(change, std::abs(y[v] - x[v]));
                x[v] = y[v];
            }
            converged = change < opt.tolerance;
        }
        if (!converged) {
            throw ConvergenceError(opt.max_iterations, change);
        }
        // Rayleigh quotient for lambda_1 of this component.
        double num = 0.0;
        double den = 0.0;
        for (NodeId v : members) {
            double ax = 0.0;
            for (NodeId w : adj[v]) {
                ax += x[w];
            }
            num += x[v] * ax;
            den += x[v] * x[v];
        }
        res.component_lambda[c] = num / den;
        double sum = 0.0;
        for (NodeId v : members) {
            sum += x[v];
        }
        const double mass = static_cast<double>(members.size()) / static_cast<double>(n);
        for (NodeId v : members) {
            res.centrality[v] = std::max(0.0, x[v] / sum * mass);
        }
    }
    return res;
}

inline std::vector<double> eigenvector_centrality(const Graph& g, EigenvectorOptions opt = {})
{
    return eigenvector_centrality_detailed(g, opt).centrality;
}

/// Largest relative eigen-residual ||A x_c - lambda_c x_c|| / ||x_c|| over the
/// components of a centrality result.
inline double eigenvector_residual(const Graph& g, const EigenvectorResult& res)
{
    const auto adj = g.adjacency_lists();
    const std::size_t ncomp = res.component_lambda.size();
    std::vector<double> err(ncomp, 0.0);
    std::vector<double> norm(ncomp, 0.0);
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        double ax = 0.0;
        for (NodeId w : adj[v]) {
            ax += res.centrality[w];
        }
        const std::size_t c = res.component[v];
        const double r = ax - res.component_lambda[c] * res.centrality[v];
        err[c] += r * r;
        norm[c] += res.centrality[v] * res.centrality[v];
    }
    double worst = 0.0;
    for (std::size_t c = 0; c < ncomp; ++c) {
        if (norm[c] > 0.0) {
            worst = std::max(worst, std::sqrt(err[c] / norm[c]));
        }
    }
    return worst;
}

}  // namespace mils
