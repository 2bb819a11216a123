#include "coldspray/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "coldspray/numeric.hpp"

namespace coldspray {

namespace {

double euclidean(const Tensor& x, std::size_t a, std::size_t b) {
    double ss = 0.0;
    for (std::size_t f = 0; f < x.cols; ++f) {
        double d = x.at(a, f) - x.at(b, f);
        ss += d * d;
    }
    return std::sqrt(ss);
}

void build_adjacency(FeatureGraph& graph) {
    graph.neighbors.assign(graph.n_nodes, {});
    graph.incident.assign(graph.n_nodes, {});
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        const auto& edge = graph.edges[e];
        graph.neighbors[edge.i].push_back(edge.j);
        graph.incident[edge.i].push_back(e);
        graph.neighbors[edge.j].push_back(edge.i);
        graph.incident[edge.j].push_back(e);
    }
    // Edges are sorted by (i, j); per-node lists need one more pass to be
    // sorted by neighbor index on the j side.
    for (std::size_t v = 0; v < graph.n_nodes; ++v) {
        std::vector<std::size_t> order(graph.neighbors[v].size());
        for (std::size_t idx = 0; idx < order.size(); ++idx) {
            order[idx] = idx;
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return graph.neighbors[v][a] < graph.neighbors[v][b];
        });
        std::vector<std::size_t> nb(order.size()), inc(order.size());
        for (std::size_t idx = 0; idx < order.size(); ++idx) {
            nb[idx] = graph.neighbors[v][order[idx]];
            inc[idx] = graph.incident[v][order[idx]];
        }
        graph.neighbors[v] = std::move(nb);
        graph.incident[v] = std::move(inc);
    }
}

} // namespace

double FeatureGraph::weighted_degree(std::size_t node) const {
    double sum = 0.0;
    for (std::size_t e : incident[node]) {
        sum += edges[e].weight;
    }
    return sum;
}

FeatureGraph knn_edges(const Tensor& x, std::size_t k) {
    const std::size_t n = x.rows;
    if (k < 1) {
        raise(ErrorKind::InvalidArgument, "k must be >= 1");
    }
    if (n < k + 1) {
        raise(ErrorKind::TooFewNodes, "need N >= k+1 = " + std::to_string(k + 1) + ", got " +
                                          std::to_string(n));
    }
    for (double v : x.values) {
        if (!std::isfinite(v)) {
            raise(ErrorKind::InvalidValue, "non-finite feature value");
        }
    }

    // Directed k nearest per node, ties broken by lower index.
    std::set<std::pair<std::size_t, std::size_t>> selected;
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        cand.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                cand.emplace_back(euclidean(x, i, j), j);
            }
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
        for (std::size_t r = 0; r < k; ++r) {
            std::size_t j = cand[r].second;
            selected.emplace(std::min(i, j), std::max(i, j)); // union symmetrization
        }
    }

    FeatureGraph graph;
    graph.n_nodes = n;
    graph.k = k;
    graph.edges.reserve(selected.size());
    for (const auto& [i, j] : selected) {
        GraphEdge e;
        e.i = i;
        e.j = j;
        e.dist = euclidean(x, i, j);
        graph.edges.push_back(e);
    }
    build_adjacency(graph);
    return graph;
}

double median_sigma(const FeatureGraph& graph) {
    if (graph.edges.empty()) {
        raise(ErrorKind::TooFewNodes, "graph has no edges");
    }
    std::vector<double> dists;
    dists.reserve(graph.edges.size());
    for (const auto& e : graph.edges) {
        dists.push_back(e.dist);
    }
    std::sort(dists.begin(), dists.end());
    const std::size_t m = dists.size();
    double median;
    if (m % 2 == 1) {
        median = dists[m / 2];
    } else {
        median = 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
    }
    if (!(median > 0.0)) {
        raise(ErrorKind::ZeroSigma, "median edge distance is zero (duplicate-only data)");
    }
    return median;
}

FeatureGraph gaussian_weights(FeatureGraph graph, double sigma) {
    if (!(sigma > 0.0)) {
        raise(ErrorKind::ZeroSigma, "sigma must be > 0, got " + format_double(sigma));
    }
    for (auto& e : graph.edges) {
        e.weight = std::exp(-(e.dist * e.dist) / (2.0 * sigma * sigma));
    }
    graph.sigma = sigma;
    graph.weighted = true;
    return graph;
}

LaplacianOperator normalized_laplacian(const FeatureGraph& graph) {
    if (!graph.weighted) {
        raise(ErrorKind::UnboundArtifact, "graph weights not set");
    }
    const std::size_t n = graph.n_nodes;
    std::vector<double> inv_sqrt_degree(n);
    for (std::size_t v = 0; v < n; ++v) {
        double d = graph.weighted_degree(v);
        if (!(d > 0.0)) {
            raise(ErrorKind::IsolatedNode, "node " + std::to_string(v) + " has zero weighted degree");
        }
        inv_sqrt_degree[v] = 1.0 / std::sqrt(d);
    }

    LaplacianOperator op;
    op.l_sym = Tensor::identity(n);
    for (const auto& e : graph.edges) {
        const double off = e.weight * inv_sqrt_degree[e.i] * inv_sqrt_degree[e.j];
        op.l_sym.at(e.i, e.j) -= off;
        op.l_sym.at(e.j, e.i) -= off;
    }
    op.lambda_max = 2.0;
    return op;
}

double power_iteration_lambda_max(const LaplacianOperator& op, std::size_t max_steps, double tol) {
    const std::size_t n = op.l_sym.rows;
    Rng rng(12345);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = rng.uniform(-1.0, 1.0);
    }
    double lambda = 0.0;
    std::vector<double> w(n);
    for (std::size_t step = 0; step < max_steps; ++step) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                s += op.l_sym.at(i, j) * v[j];
            }
            w[i] = s;
        }
        double norm = 0.0, dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            norm += w[i] * w[i];
            dot += w[i] * v[i];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            return 2.0; // L_sym annihilated the start vector; keep the safe bound
        }
        double next = dot; // Rayleigh quotient, since v is unit
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = w[i] / norm;
        }
        if (step > 0 && std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // Inflate so a slight underestimate cannot push the scaled spectrum
    // outside [-1, 1]; never exceed the theoretical bound.
    return std::min(lambda * 1.0001, 2.0);
}

Tensor chebyshev_scale(const LaplacianOperator& op) {
    if (!(op.lambda_max > 0.0 && op.lambda_max <= 2.0)) {
        raise(ErrorKind::InvalidArgument, "lambda_max must be in (0, 2], got " + format_double(op.lambda_max));
    }
    const std::size_t n = op.l_sym.rows;
    Tensor scaled(n, n);
    const double s = 2.0 / op.lambda_max;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            scaled.at(i, j) = s * op.l_sym.at(i, j) - (i == j ? 1.0 : 0.0);
        }
    }
    return scaled;
}

std::string graph_to_json(const FeatureGraph& graph) {
    nlohmann::ordered_json j;
    j["n"] = graph.n_nodes;
    j["k"] = graph.k;
    j["sigma"] = graph.sigma;
    auto edges = nlohmann::ordered_json::array();
    for (const auto& e : graph.edges) {
        edges.push_back({e.i, e.j, e.dist, e.weight});
    }
    j["edges"] = std::move(edges);
    return j.dump(2) + "\n";
}

FeatureGraph graph_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    FeatureGraph graph;
    graph.n_nodes = j.at("n").get<std::size_t>();
    graph.k = j.at("k").get<std::size_t>();
    graph.sigma = j.at("sigma").get<double>();
    for (const auto& item : j.at("edges")) {
        GraphEdge e;
        e.i = item.at(0).get<std::size_t>();
        e.j = item.at(1).get<std::size_t>();
        e.dist = item.at(2).get<double>();
        e.weight = item.at(3).get<double>();
        if (e.i >= graph.n_nodes || e.j >= graph.n_nodes || e.i >= e.j) {
            raise(ErrorKind::InvalidValue, "bad edge in graph file");
        }
        graph.edges.push_back(e);
    }
    graph.weighted = graph.sigma > 0.0;
    build_adjacency(graph);
    return graph;
}

} // namespace coldspray
