#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "mils/generators.hpp"
#include "mils/graph.hpp"
#include "oracles.hpp"

using namespace mils;

namespace {

Graph path_graph(std::size_t n)
{
    Graph g(n);
    for (NodeId v = 0; v + 1 < n; ++v) {
        g.add_edge(v, v + 1);
    }
    return g;
}

Graph cycle_graph(std::size_t n)
{
    Graph g = path_graph(n);
    g.add_edge(0, static_cast<NodeId>(n - 1));
    return g;
}

Graph star_graph(std::size_t leaves)
{
    Graph g(leaves + 1);
    for (NodeId v = 1; v <= leaves; ++v) {
        g.add_edge(0, v);
    }
    return g;
}

}  // namespace

TEST(Graph, EdgeListParsing)
{
    const Graph g = from_edge_list("0 1\n1 2");
    EXPECT_EQ(g.node_count(), 3U);
    EXPECT_EQ(g.edge_count(), 2U);
    EXPECT_TRUE(g.has_edge(1, 0));
    EXPECT_FALSE(g.has_edge(0, 2));
    EXPECT_THROW(from_edge_list("0 0"), Error);
    EXPECT_THROW(from_edge_list("0 1\n1 0"), Error);  // duplicate undirected edge
    EXPECT_THROW(from_edge_list("0 1 2"), Error);
    EXPECT_THROW(from_edge_list("a b"), Error);

    const Graph d = from_edge_list("# comment\ndirected\n0 1\n1 0\n");
    EXPECT_TRUE(d.directed());
    EXPECT_EQ(d.edge_count(), 2U);

    // Nodes are indexed in ascending label order; single labels declare isolated nodes.
    const Graph l = from_edge_list("10 20\n7\n");
    EXPECT_EQ(l.node_count(), 3U);
    EXPECT_EQ(l.labels(), (std::vector<std::uint64_t>{7, 10, 20}));
    EXPECT_TRUE(l.has_edge(1, 2));
}

TEST(Graph, ParseErrorNamesLine)
{
    try {
        (void)from_edge_list("0 1\n\n2 2\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
    }
}

TEST(Graph, RoundTrips)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Graph g = erdos_renyi_gnp(12, 0.3, seed);
        const Graph back = from_adjacency(adjacency(g));
        EXPECT_EQ(back.edges(), g.edges());
        const Graph text = from_edge_list(to_edge_list(g));
        EXPECT_EQ(text.node_count(), g.node_count());
        EXPECT_EQ(adjacency(text), adjacency(g));
    }
    const Graph dag = random_dag(8, 0.4, 3);
    EXPECT_EQ(adjacency(from_adjacency(adjacency(dag), true)), adjacency(dag));
}

TEST(Graph, AdjacencyIsSymmetricForUndirected)
{
    const Graph g = from_edge_list("0 1\n1 2");
    const BitMatrix a = adjacency(g);
    EXPECT_EQ(a.rows(), 3U);
    EXPECT_TRUE(a.at(0, 1) && a.at(1, 0) && a.at(1, 2) && a.at(2, 1));
    EXPECT_EQ(a.popcount(), 4U);
}

TEST(Graph, Degrees)
{
    const Graph k4 = complete_graph(4);
    for (NodeId v = 0; v < 4; ++v) {
        EXPECT_EQ(degree(k4, v), 3U);
    }
    Graph iso(3);
    iso.add_edge(0, 1);
    EXPECT_EQ(degree(iso, 2), 0U);
    const Graph s5 = star_graph(5);
    EXPECT_EQ(degree(s5, 0), 5U);
    for (NodeId v = 1; v <= 5; ++v) {
        EXPECT_EQ(degree(s5, v), 1U);
    }
    EXPECT_EQ(degree_distribution(s5), (std::vector<std::size_t>{0, 5, 0, 0, 0, 1}));
    EXPECT_EQ(degree_centrality(path_graph(3)), (std::vector<double>{1, 2, 1}));
}

TEST(Graph, LaplacianAndSpectrum)
{
    const Eigen::MatrixXd l = laplacian(complete_graph(3));
    for (Eigen::Index r = 0; r < 3; ++r) {
        EXPECT_EQ(l.row(r).sum(), 0.0);
    }
    EXPECT_TRUE(laplacian(Graph(4)).isZero());
    const auto spec = spectrum(complete_graph(4));
    ASSERT_EQ(spec.size(), 4U);
    EXPECT_NEAR(spec[0], 3.0, 1e-12);
    for (int i = 1; i < 4; ++i) {
        EXPECT_NEAR(spec[static_cast<std::size_t>(i)], -1.0, 1e-12);
    }
    EXPECT_THROW(spectrum(random_dag(4, 0.5, 1)), Error);
}

TEST(Graph, Clustering)
{
    const Graph k4 = complete_graph(4);
    EXPECT_EQ(global_clustering(k4), 1.0);
    EXPECT_EQ(mean_clustering(k4), 1.0);
    const Graph tree = from_edge_list("0 1\n0 2\n2 3\n2 4\n4 5");
    EXPECT_EQ(global_clustering(tree), 0.0);
    EXPECT_EQ(mean_clustering(tree), 0.0);
    const Graph c5 = cycle_graph(5);
    EXPECT_EQ(oracle::triangles(c5), 0U);
    EXPECT_EQ(global_clustering(c5), 0.0);
    EXPECT_EQ(mean_clustering(c5), 0.0);
    // Triangle with a pendant: 1 triangle, connected triples = 3*1 closed + open ones.
    const Graph tp = from_edge_list("0 1\n1 2\n0 2\n2 3");
    EXPECT_DOUBLE_EQ(global_clustering(tp), 3.0 / 5.0);
    EXPECT_DOUBLE_EQ(mean_clustering(tp), (1.0 + 1.0 + 1.0 / 3.0 + 0.0) / 4.0);
}

TEST(Graph, ClusteringMatchesTriangleCount)
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Graph g = erdos_renyi_gnp(10, 0.4, seed);
        std::size_t triples = 0;
        for (auto d : degrees(g)) {
            triples += d * (d - 1) / 2;
        }
        const double expected = triples == 0 ? 0.0 : 3.0 * static_cast<double>(oracle::triangles(g)) / triples;
        EXPECT_NEAR(global_clustering(g), expected, 1e-12);
    }
}

TEST(Graph, BetweennessExamples)
{
    EXPECT_EQ(betweenness_centrality(path_graph(3)), (std::vector<double>{0, 1, 0}));
    for (double b : betweenness_centrality(complete_graph(6))) {
        EXPECT_EQ(b, 0.0);
    }
    const auto s3 = betweenness_centrality(star_graph(3));  // 4 nodes
    EXPECT_EQ(s3[0], 3.0);
    EXPECT_EQ(edge_betweenness(path_graph(3)), (std::vector<double>{2, 2}));
}

TEST(Graph, BetweennessMatchesBruteForce)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t n = 2 + seed % 9;
        const Graph g = erdos_renyi_gnp(n, 0.2 + 0.05 * static_cast<double>(seed % 10), seed);
        const auto want = oracle::brute_force_betweenness(g);
        const auto node = betweenness_centrality(g);
        const auto edge = edge_betweenness(g);
        for (std::size_t v = 0; v < n; ++v) {
            EXPECT_NEAR(node[v], want.node[v], 1e-9);
        }
        for (std::size_t e = 0; e < g.edge_count(); ++e) {
            EXPECT_NEAR(edge[e], want.edge[e], 1e-9);
        }
    }
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Graph g = random_dag(7, 0.4, seed);
        const auto want = oracle::brute_force_betweenness(g);
        const auto node = betweenness_centrality(g);
        for (std::size_t v = 0; v < g.node_count(); ++v) {
            EXPECT_NEAR(node[v], want.node[v], 1e-9);
        }
    }
}

TEST(Graph, EigenvectorCentrality)
{
    for (double c : eigenvector_centrality(complete_graph(5))) {
        EXPECT_NEAR(c, 0.2, 1e-12);
    }
    const auto star = eigenvector_centrality(star_graph(4));
    for (std::size_t v = 1; v < 5; ++v) {
        EXPECT_GT(star[0], star[v]);
    }
    // Dense eigensolver oracle on a connected graph.
    const Graph g = erdos_renyi_gnm(20, 60, 5);
    ASSERT_TRUE(is_connected(g));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(adjacency_dense(g));
    Eigen::VectorXd v = es.eigenvectors().col(es.eigenvalues().size() - 1).cwiseAbs();
    v /= v.sum();
    const auto res = eigenvector_centrality_detailed(g);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        EXPECT_NEAR(res.centrality[static_cast<std::size_t>(i)], v[i], 1e-8);
    }
    EXPECT_NEAR(res.component_lambda[0], es.eigenvalues().maxCoeff(), 1e-8);
    EXPECT_LE(eigenvector_residual(g, res), 1e-6);
}

TEST(Graph, EigenvectorCentralityDisconnectedAndBipartite)
{
    Graph g(6);
    g.add_edge(0, 1);
    g.add_edge(1, 2);  // path component of 3 nodes (bipartite)
    g.add_edge(3, 4);  // edge component; node 5 isolated
    const auto res = eigenvector_centrality_detailed(g);
    const double total = std::accumulate(res.centrality.begin(), res.centrality.end(), 0.0);
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_NEAR(res.centrality[0] + res.centrality[1] + res.centrality[2], 0.5, 1e-12);
    EXPECT_NEAR(res.centrality[3], res.centrality[4], 1e-12);
    EXPECT_GT(res.centrality[1], res.centrality[0]);
    EXPECT_LE(eigenvector_residual(g, res), 1e-6);
}

TEST(Graph, EigenvectorNonConvergenceIsReported)
{
    EigenvectorOptions opt;
    opt.max_iterations = 2;
    opt.tolerance = 1e-300;
    try {
        (void)eigenvector_centrality(erdos_renyi_gnm(20, 40, 1), opt);
        FAIL();
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.residual(), 0.0);
    }
}

TEST(Graph, Components)
{
    Graph g(5);
    g.add_edge(0, 1);
    g.add_edge(3, 4);
    EXPECT_FALSE(is_connected(g));
    const auto c = connected_components(g);
    EXPECT_EQ(c[0], c[1]);
    EXPECT_NE(c[0], c[2]);
    EXPECT_EQ(c[3], c[4]);
    EXPECT_TRUE(is_connected(complete_graph(3)));
}

TEST(Graph, GeneratorsAreDeterministic)
{
    EXPECT_EQ(erdos_renyi_gnm(100, 200, 9).edges(), erdos_renyi_gnm(100, 200, 9).edges());
    EXPECT_EQ(erdos_renyi_gnm(100, 200, 9).edge_count(), 200U);
    EXPECT_NE(erdos_renyi_gnm(100, 200, 9).edges(), erdos_renyi_gnm(100, 200, 10).edges());
    const Graph ws = watts_strogatz(60, 6, 0.1, 4);
    EXPECT_EQ(ws.edge_count(), 180U);
    EXPECT_GE(global_clustering(ws), 0.3);
    const Graph ba = barabasi_albert(50, 2, 1);
    EXPECT_EQ(ba.edge_count(), 2U * 48U);
    EXPECT_TRUE(is_connected(ba));
}
