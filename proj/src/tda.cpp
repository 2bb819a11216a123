#include "coldspray/tda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "coldspray/graph.hpp"

namespace coldspray {

namespace {

struct MstEdge {
    std::size_t a;
    std::size_t b;
    double length;
};

/// Prim's algorithm over the full pairwise distance matrix, O(N^2).
std::vector<MstEdge> euclidean_mst(const Tensor& x) {
    const std::size_t n = x.rows;
    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> parent(n, 0);

    auto dist = [&](std::size_t a, std::size_t b) {
        double ss = 0.0;
        for (std::size_t f = 0; f < x.cols; ++f) {
            double d = x.at(a, f) - x.at(b, f);
            ss += d * d;
        }
        return std::sqrt(ss);
    };

    in_tree[0] = true;
    for (std::size_t j = 1; j < n; ++j) {
        best[j] = dist(0, j);
    }
    std::vector<MstEdge> edges;
    edges.reserve(n - 1);
    for (std::size_t step = 1; step < n; ++step) {
        std::size_t next = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (!in_tree[j] && (next == n || best[j] < best[next])) {
                next = j;
            }
        }
        edges.push_back({parent[next], next, best[next]});
        in_tree[next] = true;
        for (std::size_t j = 0; j < n; ++j) {
            if (!in_tree[j]) {
                double d = dist(next, j);
                if (d < best[j]) {
                    best[j] = d;
                    parent[j] = next;
                }
            }
        }
    }
    return edges;
}

struct Components {
    std::vector<std::size_t> parent;
    std::vector<std::size_t> size;
    std::vector<std::size_t> min_index;
    std::vector<std::vector<std::size_t>> members;

    explicit Components(std::size_t n) : parent(n), size(n, 1), min_index(n), members(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
        std::iota(min_index.begin(), min_index.end(), std::size_t{0});
        for (std::size_t i = 0; i < n; ++i) {
            members[i] = {i};
        }
    }

    std::size_t find(std::size_t v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    }
};

} // namespace

std::vector<double> mst_death_times(const Tensor& x) {
    const std::size_t n = x.rows;
    if (n < 2) {
        raise(ErrorKind::TooFewNodes, "need N >= 2 points, got " + std::to_string(n));
    }

    auto mst = euclidean_mst(x);
    std::sort(mst.begin(), mst.end(), [](const MstEdge& a, const MstEdge& b) {
        if (a.length != b.length) {
            return a.length < b.length;
        }
        return std::make_pair(std::min(a.a, a.b), std::max(a.a, a.b)) <
               std::make_pair(std::min(b.a, b.b), std::max(b.a, b.b));
    });
    const double cap = mst.back().length;

    std::vector<double> death(n, -1.0);
    Components comps(n);
    for (const auto& edge : mst) {
        std::size_t ra = comps.find(edge.a);
        std::size_t rb = comps.find(edge.b);
        // Elder rule: the younger (smaller, ties to the higher minimum
        // index) component dies at this merge.
        std::size_t dying, surviving;
        if (comps.size[ra] != comps.size[rb]) {
            dying = comps.size[ra] < comps.size[rb] ? ra : rb;
        } else {
            dying = comps.min_index[ra] > comps.min_index[rb] ? ra : rb;
        }
        surviving = dying == ra ? rb : ra;
        for (std::size_t member : comps.members[dying]) {
            if (death[member] < 0.0) {
                death[member] = edge.length;
            }
        }
        comps.parent[dying] = surviving;
        comps.size[surviving] += comps.size[dying];
        comps.min_index[surviving] = std::min(comps.min_index[surviving], comps.min_index[dying]);
        auto& dst = comps.members[surviving];
        dst.insert(dst.end(), comps.members[dying].begin(), comps.members[dying].end());
        comps.members[dying].clear();
    }
    for (double& d : death) {
        if (d < 0.0) {
            d = cap; // the component that survived to the end
        }
    }
    return death;
}

Tensor node_descriptors(const Tensor& x, std::size_t k) {
    const std::size_t n = x.rows;
    auto graph = knn_edges(x, k); // validates N >= k+1
    auto deaths = mst_death_times(x);

    Tensor desc(n, kNumDescriptors);
    for (std::size_t i = 0; i < n; ++i) {
        // knn_edges keeps the union of directed kNN picks; recover node i's
        // own k nearest as the k smallest incident distances.
        std::vector<double> dists;
        dists.reserve(graph.incident[i].size());
        for (std::size_t e : graph.incident[i]) {
            dists.push_back(graph.edges[e].dist);
        }
        std::sort(dists.begin(), dists.end());
        dists.resize(k);

        double sum = 0.0, max_d = 0.0;
        for (double d : dists) {
            sum += d;
            max_d = std::max(max_d, d);
        }
        const double mean_d = sum / static_cast<double>(k);
        desc.at(i, 0) = mean_d;
        desc.at(i, 1) = max_d;
        desc.at(i, 2) = mean_d > 0.0 ? static_cast<double>(k) / (mean_d * mean_d * mean_d) : 0.0;
        desc.at(i, 3) = deaths[i];
    }
    return desc;
}

Tensor augment_features(const Tensor& x, const Tensor& descriptors) {
    if (x.rows != descriptors.rows) {
        raise(ErrorKind::RowMismatch, std::to_string(x.rows) + " feature rows vs " +
                                          std::to_string(descriptors.rows) + " descriptor rows");
    }
    Tensor out(x.rows, x.cols + descriptors.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j) {
            out.at(i, j) = x.at(i, j);
        }
        for (std::size_t j = 0; j < descriptors.cols; ++j) {
            out.at(i, x.cols + j) = descriptors.at(i, j);
        }
    }
    return out;
}

} // namespace coldspray
