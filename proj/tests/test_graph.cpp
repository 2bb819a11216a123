#include <doctest.h>

#include <cmath>
#include <set>

#include "coldspray/graph.hpp"
#include "oracles.hpp"

using namespace coldspray;

namespace {

Tensor line_points(const std::vector<double>& xs) {
    Tensor x(xs.size(), 3);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        x.at(i, 0) = xs[i];
    }
    return x;
}

std::set<std::pair<std::size_t, std::size_t>> edge_set(const FeatureGraph& g) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (const auto& e : g.edges) {
        out.emplace(e.i, e.j);
    }
    return out;
}

FeatureGraph weighted_random_graph(std::size_t n, std::size_t k, std::uint64_t seed) {
    auto x = testoracle::random_tensor(n, 3, seed);
    auto g = knn_edges(x, k);
    return gaussian_weights(std::move(g), median_sigma(g));
}

} // namespace

TEST_CASE("knn_edges on three collinear points with k=1") {
    auto graph = knn_edges(line_points({0.0, 1.0, 3.0}), 1);
    auto edges = edge_set(graph);
    CHECK(edges == std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}});
    CHECK(graph.degree(0) == 1);
    CHECK(graph.degree(1) == 2); // union symmetrization added the reverse pick
    CHECK(graph.degree(2) == 1);
    CHECK(graph.edges[0].dist == doctest::Approx(1.0));
    CHECK(graph.edges[1].dist == doctest::Approx(2.0));
}

TEST_CASE("knn_edges with k = N-1 is the complete graph") {
    auto x = testoracle::random_tensor(7, 3, 99);
    auto graph = knn_edges(x, 6);
    CHECK(graph.edge_count() == 7 * 6 / 2);
}

TEST_CASE("knn_edges matches the brute-force oracle") {
    std::uint64_t seed = 1000;
    for (std::size_t n : {20, 57, 120, 200}) {
        for (std::size_t k : {4, 8, 16}) {
            auto x = testoracle::random_tensor(n, 3, ++seed);
            auto graph = knn_edges(x, k);
            auto expected = testoracle::brute_force_knn(x, k);
            REQUIRE(graph.neighbors.size() == n);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(graph.neighbors[i] == expected[i]);
                CHECK(graph.degree(i) >= k);
            }
        }
    }
}

TEST_CASE("knn_edges permutation consistency") {
    const std::size_t n = 40;
    auto x = testoracle::random_tensor(n, 3, 31);
    auto graph = knn_edges(x, 5);

    // relabel node i -> perm[i]
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) {
        perm[i] = (i * 17 + 3) % n; // a fixed permutation (17 coprime to 40)
    }
    Tensor permuted(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < 3; ++f) {
            permuted.at(perm[i], f) = x.at(i, f);
        }
    }
    auto graph2 = knn_edges(permuted, 5);

    std::set<std::pair<std::size_t, std::size_t>> mapped;
    for (const auto& e : graph.edges) {
        mapped.emplace(std::min(perm[e.i], perm[e.j]), std::max(perm[e.i], perm[e.j]));
    }
    CHECK(mapped == edge_set(graph2));
}

TEST_CASE("knn_edges allows duplicates and rejects tiny inputs") {
    auto graph = knn_edges(line_points({1.0, 1.0, 2.0}), 1);
    CHECK(graph.edges[0].dist == 0.0);
    try {
        knn_edges(line_points({0.0, 1.0}), 2);
        FAIL("expected TooFewNodes");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooFewNodes);
    }
}

TEST_CASE("median_sigma conventions") {
    auto graph3 = knn_edges(line_points({0.0, 1.0, 3.0}), 2); // complete: dists 1, 2, 3
    CHECK(median_sigma(graph3) == doctest::Approx(2.0));

    auto graph2 = knn_edges(line_points({0.0, 1.0, -1.0, 4.0}), 1);
    // edges: 0-1 (1), 0-2 (1), 1-3 (3): odd count -> middle value
    CHECK(median_sigma(graph2) == doctest::Approx(1.0));

    // even count -> mean of the two central values {1, 3} -> 2
    FeatureGraph manual;
    manual.n_nodes = 4;
    manual.k = 1;
    manual.edges = {{0, 1, 1.0, 0.0}, {2, 3, 3.0, 0.0}};
    CHECK(median_sigma(manual) == doctest::Approx(2.0));
}

TEST_CASE("median_sigma matches a sort-based oracle on a random graph") {
    auto x = testoracle::random_tensor(100, 3, 5);
    auto graph = knn_edges(x, 8);
    std::vector<double> dists;
    for (const auto& e : graph.edges) {
        dists.push_back(e.dist);
    }
    CHECK(median_sigma(graph) == testoracle::sorted_median(dists));
}

TEST_CASE("median_sigma on duplicate-only data raises ZeroSigma") {
    auto graph = knn_edges(line_points({2.0, 2.0, 2.0}), 1);
    try {
        median_sigma(graph);
        FAIL("expected ZeroSigma");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ZeroSigma);
    }
}

TEST_CASE("gaussian_weights analytic values") {
    FeatureGraph graph;
    graph.n_nodes = 4;
    graph.k = 1;
    const double sigma = 0.7;
    graph.edges = {{0, 1, 0.0, 0.0}, {1, 2, sigma * std::sqrt(2.0), 0.0}, {2, 3, sigma, 0.0}};
    graph = gaussian_weights(std::move(graph), sigma);
    CHECK(graph.edges[0].weight == 1.0);
    CHECK(graph.edges[1].weight == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(graph.edges[2].weight == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    for (const auto& e : graph.edges) {
        CHECK(e.weight == std::exp(-(e.dist * e.dist) / (2.0 * sigma * sigma)));
    }
    CHECK_THROWS_AS(gaussian_weights(graph, 0.0), Error);
}

TEST_CASE("weight monotonicity: closer edges weigh more") {
    auto graph = weighted_random_graph(60, 6, 404);
    for (std::size_t a = 0; a < graph.edge_count(); ++a) {
        for (std::size_t b = a + 1; b < graph.edge_count(); ++b) {
            if (graph.edges[a].dist < graph.edges[b].dist) {
                CHECK(graph.edges[a].weight > graph.edges[b].weight);
            }
        }
    }
}

TEST_CASE("normalized Laplacian of the 2-node unit-weight graph") {
    FeatureGraph graph;
    graph.n_nodes = 2;
    graph.k = 1;
    graph.edges = {{0, 1, 0.5, 0.0}};
    graph.neighbors = {{1}, {0}};
    graph.incident = {{0}, {0}};
    graph.edges[0].weight = 1.0;
    graph.weighted = true;
    graph.sigma = 1.0;

    auto op = normalized_laplacian(graph);
    CHECK(op.l_sym.at(0, 0) == doctest::Approx(1.0));
    CHECK(op.l_sym.at(0, 1) == doctest::Approx(-1.0));
    CHECK(op.l_sym.at(1, 0) == doctest::Approx(-1.0));
    CHECK(op.l_sym.at(1, 1) == doctest::Approx(1.0));
    auto eigenvalues = testoracle::symmetric_eigenvalues(op.l_sym);
    CHECK(eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-12));

    // scaled with lambda_max = 2: eigenvalues {-1, 1}
    auto scaled = chebyshev_scale(op);
    auto scaled_eigenvalues = testoracle::symmetric_eigenvalues(scaled);
    CHECK(scaled_eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(scaled_eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Laplacian spectra stay within the theoretical bounds") {
    std::uint64_t seed = 7000;
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n = 10 + 5 * static_cast<std::size_t>(trial);
        auto graph = weighted_random_graph(n, 4, ++seed);
        auto op = normalized_laplacian(graph);
        auto eigenvalues = testoracle::symmetric_eigenvalues(op.l_sym);
        CHECK(eigenvalues.front() >= -1e-10);
        CHECK(eigenvalues.back() <= 2.0 + 1e-10);

        // kNN graphs over random clouds come out connected here: the zero
        // eigenvalue is simple
        CHECK(eigenvalues[1] > 1e-8);

        // L_sym (D^{1/2} 1) = 0
        std::vector<double> sqrt_degrees(n);
        for (std::size_t i = 0; i < n; ++i) {
            sqrt_degrees[i] = std::sqrt(graph.weighted_degree(i));
        }
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                s += op.l_sym.at(i, j) * sqrt_degrees[j];
            }
            CHECK(std::abs(s) < 1e-10);
        }

        auto scaled = chebyshev_scale(op);
        auto scaled_eigenvalues = testoracle::symmetric_eigenvalues(scaled);
        CHECK(scaled_eigenvalues.front() >= -1.0 - 1e-8);
        CHECK(scaled_eigenvalues.back() <= 1.0 + 1e-8);
    }
}

TEST_CASE("power iteration refines lambda_max without breaking the scaled bound") {
    auto graph = weighted_random_graph(30, 6, 11);
    auto op = normalized_laplacian(graph);
    auto eigenvalues = testoracle::symmetric_eigenvalues(op.l_sym);
    const double lambda = power_iteration_lambda_max(op);
    CHECK(lambda == doctest::Approx(eigenvalues.back()).epsilon(1e-3));
    CHECK(lambda >= eigenvalues.back() - 1e-6);

    op.lambda_max = lambda;
    auto scaled = chebyshev_scale(op);
    auto scaled_eigenvalues = testoracle::symmetric_eigenvalues(scaled);
    CHECK(scaled_eigenvalues.back() <= 1.0 + 1e-8);
    CHECK(scaled_eigenvalues.front() >= -1.0 - 1e-8);
}

TEST_CASE("isolated nodes are rejected") {
    FeatureGraph graph;
    graph.n_nodes = 3;
    graph.k = 1;
    graph.edges = {{0, 1, 1.0, 0.5}};
    graph.neighbors = {{1}, {0}, {}};
    graph.incident = {{0}, {0}, {}};
    graph.weighted = true;
    graph.sigma = 1.0;
    try {
        normalized_laplacian(graph);
        FAIL("expected IsolatedNode");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::IsolatedNode);
    }
}

TEST_CASE("chebyshev_scale validates lambda_max") {
    auto graph = weighted_random_graph(10, 3, 77);
    auto op = normalized_laplacian(graph);
    op.lambda_max = 0.0;
    CHECK_THROWS_AS(chebyshev_scale(op), Error);
    op.lambda_max = 2.5;
    CHECK_THROWS_AS(chebyshev_scale(op), Error);
}

TEST_CASE("graph JSON round-trip preserves the edge list exactly") {
    auto graph = weighted_random_graph(25, 4, 2024);
    auto loaded = graph_from_json(graph_to_json(graph));
    CHECK(loaded.n_nodes == graph.n_nodes);
    CHECK(loaded.k == graph.k);
    CHECK(loaded.sigma == graph.sigma);
    REQUIRE(loaded.edge_count() == graph.edge_count());
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        CHECK(loaded.edges[e].i == graph.edges[e].i);
        CHECK(loaded.edges[e].j == graph.edges[e].j);
        CHECK(loaded.edges[e].dist == graph.edges[e].dist);
        CHECK(loaded.edges[e].weight == graph.edges[e].weight);
    }
    CHECK(loaded.neighbors == graph.neighbors);
}
