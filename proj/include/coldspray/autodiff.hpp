#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "coldspray/tensor.hpp"

namespace coldspray {

/// Reverse-mode tape over dense tensors. Ops append nodes; backward() seeds
/// a scalar root with 1 and walks the tape in reverse creation order, which
/// is a valid topological order because ops only reference earlier nodes.
class Tape {
public:
    using NodeId = std::size_t;

    Tape() = default;
    Tape(const Tape&) = delete;            // recorded closures capture this
    Tape& operator=(const Tape&) = delete;

    /// Grouping structure for per-neighborhood ops: one directed entry per
    /// (node, neighbor) pair, listed in contiguous per-node groups.
    struct EdgeStructure {
        std::vector<std::size_t> src;           // length E
        std::vector<std::size_t> dst;           // length E
        std::vector<std::size_t> group_offsets; // length n_nodes + 1, group g = [off[g], off[g+1])
        std::size_t n_nodes = 0;
    };

    NodeId leaf(Tensor value, bool requires_grad = false);

    NodeId matmul(NodeId a, NodeId b);
    NodeId transpose(NodeId a);
    /// Same-shape elementwise add, or row-broadcast when b is 1 x cols.
    NodeId add(NodeId a, NodeId b);
    NodeId scalar_mul(NodeId a, double c);
    NodeId hadamard(NodeId a, NodeId b);
    NodeId concat_cols(NodeId a, NodeId b);
    NodeId relu(NodeId a);
    NodeId leaky_relu(NodeId a, double slope);
    NodeId tanh(NodeId a);
    NodeId exp(NodeId a);
    NodeId sum_all(NodeId a);

    /// rows of a selected by index (E x d from N x d).
    NodeId gather_rows(NodeId a, std::vector<std::size_t> indices);

    /// Softmax of an E x 1 logit column within each group. Stable (max
    /// subtracted); outputs sum to 1 per group.
    NodeId neighborhood_softmax(NodeId logits, const EdgeStructure& edges);

    /// value / (sum of values in its group); used to renormalize modulated
    /// attention back onto the simplex.
    NodeId neighborhood_normalize(NodeId values, const EdgeStructure& edges);

    /// out[src[e]] += coeff[e] * values[dst[e]] over all directed entries;
    /// coeff is E x 1, values N x d, result n_nodes x d.
    NodeId neighbor_weighted_sum(NodeId coeff, NodeId values, const EdgeStructure& edges);

    /// Mean squared error over masked rows of two N x 1 columns -> 1 x 1.
    NodeId masked_mse(NodeId pred, NodeId target, const std::vector<bool>& mask);

    void backward(NodeId root);

    const Tensor& value(NodeId id) const { return nodes_[id].value; }
    const Tensor& gradient(NodeId id) const { return nodes_[id].value_grad; }
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor value_grad;
        std::function<void()> backprop; // empty for leaves
        bool requires_grad = false;
    };

    NodeId push(Tensor value, bool requires_grad, std::function<void()> backprop);
    Tensor& grad_ref(NodeId id) { return nodes_[id].value_grad; }

    std::vector<Node> nodes_;
};

/// Named parameter collection with deterministic (insertion) iteration order.
class ParamStore {
public:
    void add(const std::string& name, Tensor value);
    bool contains(const std::string& name) const;
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;

    std::size_t size() const { return entries_.size(); }
    const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
    std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }

    std::string to_json() const;
    static ParamStore from_json(const std::string& text);

private:
    std::vector<std::pair<std::string, Tensor>> entries_;
    std::map<std::string, std::size_t> index_;
};

/// Fan-in-scaled uniform init in [-sqrt(6/fan_in), +sqrt(6/fan_in)],
/// deterministic per (shape, seed).
Tensor seeded_init(std::size_t rows, std::size_t cols, std::size_t fan_in, std::uint64_t seed);

struct ValueGrad {
    double value = 0.0;
    std::vector<std::pair<std::string, Tensor>> grads; // same order as the store
};

using ForwardFn = std::function<Tape::NodeId(Tape&, const std::map<std::string, Tape::NodeId>&)>;

/// Runs f on a fresh tape with one differentiable leaf per parameter,
/// requires a 1x1 output (NotScalarOutput otherwise), and returns the value
/// plus d(value)/d(param) for every parameter. Stateless across calls.
ValueGrad value_and_grad(const ForwardFn& f, const ParamStore& params);

} // namespace coldspray
