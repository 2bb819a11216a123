#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "coldspray/numeric.hpp"

namespace testoracle {

using coldspray::Tensor;

MeanVar streaming_mean_var(const std::vector<double>& values) {
    MeanVar mv;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double x : values) {
        ++n;
        const double delta = x - mv.mean;
        mv.mean += delta / static_cast<double>(n);
        m2 += delta * (x - mv.mean);
    }
    mv.population_var = n > 0 ? m2 / static_cast<double>(n) : 0.0;
    return mv;
}

std::vector<std::vector<std::size_t>> brute_force_knn(const Tensor& x, std::size_t k) {
    const std::size_t n = x.rows;
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double ss = 0.0;
            for (std::size_t f = 0; f < x.cols; ++f) {
                const double d = x.at(i, f) - x.at(j, f);
                ss += d * d;
            }
            dist[i][j] = std::sqrt(ss);
        }
    }
    std::set<std::pair<std::size_t, std::size_t>> undirected;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> order;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                order.emplace_back(dist[i][j], j);
            }
        }
        std::sort(order.begin(), order.end());
        for (std::size_t r = 0; r < k; ++r) {
            undirected.emplace(std::min(i, order[r].second), std::max(i, order[r].second));
        }
    }
    std::vector<std::vector<std::size_t>> neighbors(n);
    for (const auto& [i, j] : undirected) {
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
    }
    for (auto& list : neighbors) {
        std::sort(list.begin(), list.end());
    }
    return neighbors;
}

double sorted_median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    return m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

std::vector<double> symmetric_eigenvalues(const Tensor& m) {
    Eigen::MatrixXd mat(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.at(i, j);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(mat);
    std::vector<double> eigenvalues(solver.eigenvalues().data(),
                                    solver.eigenvalues().data() + solver.eigenvalues().size());
    return eigenvalues;
}

Tensor dense_chebyshev_apply(const Tensor& scaled_laplacian, const Tensor& h,
                             const std::vector<Tensor>& thetas) {
    const std::size_t n = scaled_laplacian.rows;
    std::vector<Tensor> t_matrices;
    t_matrices.push_back(Tensor::identity(n));
    if (thetas.size() > 1) {
        t_matrices.push_back(scaled_laplacian);
    }
    for (std::size_t k = 2; k < thetas.size(); ++k) {
        Tensor next = coldspray::matmul(scaled_laplacian, t_matrices[k - 1]);
        for (std::size_t i = 0; i < next.size(); ++i) {
            next.values[i] = 2.0 * next.values[i] - t_matrices[k - 2].values[i];
        }
        t_matrices.push_back(std::move(next));
    }
    Tensor out(h.rows, thetas[0].cols);
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        Tensor term = coldspray::matmul(coldspray::matmul(t_matrices[k], h), thetas[k]);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out.values[i] += term.values[i];
        }
    }
    return out;
}

std::vector<double> prim_mst_edge_lengths(const Tensor& x) {
    const std::size_t n = x.rows;
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double ss = 0.0;
            for (std::size_t f = 0; f < x.cols; ++f) {
                const double d = x.at(i, f) - x.at(j, f);
                ss += d * d;
            }
            dist[i][j] = std::sqrt(ss);
        }
    }
    std::vector<bool> in_tree(n, false);
    in_tree[0] = true;
    std::vector<double> lengths;
    for (std::size_t step = 1; step < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_tree[i]) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (!in_tree[j] && dist[i][j] < best) {
                    best = dist[i][j];
                    best_j = j;
                }
            }
        }
        in_tree[best_j] = true;
        lengths.push_back(best);
    }
    std::sort(lengths.begin(), lengths.end());
    return lengths;
}

std::vector<std::pair<std::string, Tensor>> finite_difference_grads(
    const std::function<double(const coldspray::ParamStore&)>& f, coldspray::ParamStore params,
    double epsilon) {
    std::vector<std::pair<std::string, Tensor>> grads;
    for (auto& [name, tensor] : params.entries()) {
        Tensor grad(tensor.rows, tensor.cols);
        for (std::size_t i = 0; i < tensor.size(); ++i) {
            const double saved = tensor.values[i];
            tensor.values[i] = saved + epsilon;
            const double plus = f(params);
            tensor.values[i] = saved - epsilon;
            const double minus = f(params);
            tensor.values[i] = saved;
            grad.values[i] = (plus - minus) / (2.0 * epsilon);
        }
        grads.emplace_back(name, std::move(grad));
    }
    return grads;
}

double max_relative_error(const std::vector<std::pair<std::string, Tensor>>& analytic,
                          const std::vector<std::pair<std::string, Tensor>>& numeric) {
    double worst = 0.0;
    for (std::size_t p = 0; p < analytic.size(); ++p) {
        const Tensor& a = analytic[p].second;
        const Tensor& b = numeric[p].second;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double denom = std::max({1.0, std::abs(a.values[i]), std::abs(b.values[i])});
            worst = std::max(worst, std::abs(a.values[i] - b.values[i]) / denom);
        }
    }
    return worst;
}

double loop_mse(const std::vector<double>& y, const std::vector<double>& yhat,
                const std::vector<bool>& mask) {
    double sum = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (mask[i]) {
            sum += (y[i] - yhat[i]) * (y[i] - yhat[i]);
            ++m;
        }
    }
    return sum / static_cast<double>(m);
}

double loop_mae(const std::vector<double>& y, const std::vector<double>& yhat,
                const std::vector<bool>& mask) {
    double sum = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (mask[i]) {
            sum += std::abs(y[i] - yhat[i]);
            ++m;
        }
    }
    return sum / static_cast<double>(m);
}

double loop_r2(const std::vector<double>& y, const std::vector<double>& yhat,
               const std::vector<bool>& mask) {
    double mean = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (mask[i]) {
            mean += y[i];
            ++m;
        }
    }
    mean /= static_cast<double>(m);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (mask[i]) {
            ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
            ss_tot += (y[i] - mean) * (y[i] - mean);
        }
    }
    return 1.0 - ss_res / ss_tot;
}

Tensor random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo, double hi) {
    coldspray::Rng rng(seed);
    Tensor t(rows, cols);
    for (double& v : t.values) {
        v = rng.uniform(lo, hi);
    }
    return t;
}

} // namespace testoracle
