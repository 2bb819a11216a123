#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "coldspray/tensor.hpp"

namespace coldspray {

/// Undirected edge; i < j always. Distance is Euclidean in the normalized
/// feature space, weight is the Gaussian kernel value once set.
struct GraphEdge {
    std::size_t i = 0;
    std::size_t j = 0;
    double dist = 0.0;
    double weight = 0.0;
};

/// Symmetrized kNN graph. Symmetrization is by union, so every node keeps
/// degree >= k. Neighbor lists are sorted by node index.
struct FeatureGraph {
    std::size_t n_nodes = 0;
    std::size_t k = 0;
    double sigma = 0.0; // 0 until gaussian_weights ran
    bool weighted = false;
    std::vector<GraphEdge> edges;                    // sorted by (i, j)
    std::vector<std::vector<std::size_t>> neighbors; // per node, sorted
    std::vector<std::vector<std::size_t>> incident;  // edge index parallel to neighbors

    std::size_t degree(std::size_t node) const { return neighbors[node].size(); }
    std::size_t edge_count() const { return edges.size(); }

    /// Sum of edge weights at a node; requires weighted graph.
    double weighted_degree(std::size_t node) const;
};

/// Symmetric normalized Laplacian I - D^{-1/2} W D^{-1/2}, stored dense.
struct LaplacianOperator {
    Tensor l_sym;            // n x n
    double lambda_max = 2.0; // safe spectral bound unless refined
};

/// Each node's k nearest rows of X by Euclidean distance (ties broken by
/// lower index), then union-symmetrized. Duplicate points are fine.
FeatureGraph knn_edges(const Tensor& x, std::size_t k);

/// Median of the undirected edge distances (even count: mean of the two
/// central values). Throws ZeroSigma when the median is not positive.
double median_sigma(const FeatureGraph& graph);

/// Sets w_ij = exp(-d_ij^2 / (2 sigma^2)) on every edge.
FeatureGraph gaussian_weights(FeatureGraph graph, double sigma);

/// Dense L_sym with the safe bound lambda_max = 2. Requires weights.
LaplacianOperator normalized_laplacian(const FeatureGraph& graph);

/// Rayleigh-quotient power iteration on L_sym; the estimate is inflated by
/// a small margin so the scaled spectrum still fits [-1, 1].
double power_iteration_lambda_max(const LaplacianOperator& op, std::size_t max_steps = 50,
                                  double tol = 1e-6);

/// L_scaled = (2 / lambda_max) L_sym - I.
Tensor chebyshev_scale(const LaplacianOperator& op);

/// JSON edge list {n, k, sigma, edges: [[i, j, d, w], ...]}.
std::string graph_to_json(const FeatureGraph& graph);
FeatureGraph graph_from_json(const std::string& text);

} // namespace coldspray
