#include "coldspray/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "coldspray/numeric.hpp"

namespace coldspray {

Tape::NodeId Tape::push(Tensor value, bool requires_grad, std::function<void()> backprop) {
    Node node;
    node.value = std::move(value);
    node.value_grad = Tensor(node.value.rows, node.value.cols);
    node.backprop = std::move(backprop);
    node.requires_grad = requires_grad;
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
}

Tape::NodeId Tape::leaf(Tensor value, bool requires_grad) {
    return push(std::move(value), requires_grad, {});
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    Tensor out = coldspray::matmul(av, bv);
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, a, b, id] {
        const Tensor& g = nodes_[id].value_grad;
        const Tensor& av = nodes_[a].value;
        const Tensor& bv = nodes_[b].value;
        Tensor& ga = grad_ref(a);
        Tensor& gb = grad_ref(b);
        // dA += g * B^T
        for (std::size_t i = 0; i < av.rows; ++i) {
            for (std::size_t k = 0; k < av.cols; ++k) {
                double s = 0.0;
                for (std::size_t j = 0; j < bv.cols; ++j) {
                    s += g.at(i, j) * bv.at(k, j);
                }
                ga.at(i, k) += s;
            }
        }
        // dB += A^T * g
        for (std::size_t k = 0; k < bv.rows; ++k) {
            for (std::size_t i = 0; i < av.rows; ++i) {
                const double aik = av.at(i, k);
                if (aik == 0.0) {
                    continue;
                }
                for (std::size_t j = 0; j < bv.cols; ++j) {
                    gb.at(k, j) += aik * g.at(i, j);
                }
            }
        }
    };
    return id;
}

Tape::NodeId Tape::transpose(NodeId a) {
    const Tensor& av = nodes_[a].value;
    Tensor out(av.cols, av.rows);
    for (std::size_t i = 0; i < av.rows; ++i) {
        for (std::size_t j = 0; j < av.cols; ++j) {
            out.at(j, i) = av.at(i, j);
        }
    }
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, a, id] {
        const Tensor& g = nodes_[id].value_grad;
        Tensor& ga = grad_ref(a);
        for (std::size_t i = 0; i < ga.rows; ++i) {
            for (std::size_t j = 0; j < ga.cols; ++j) {
                ga.at(i, j) += g.at(j, i);
            }
        }
    };
    return id;
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    const bool broadcast = bv.rows == 1 && av.rows != 1 && bv.cols == av.cols;
    if (!broadcast && !av.same_shape(bv)) {
        raise(ErrorKind::ShapeMismatch, "add: " + av.shape_string() + " + " + bv.shape_string());
    }
    Tensor out(av.rows, av.cols);
    for (std::size_t i = 0; i < av.rows; ++i) {
        for (std::size_t j = 0; j < av.cols; ++j) {
            out.at(i, j) = av.at(i, j) + (broadcast ? bv.at(0, j) : bv.at(i, j));
        }
    }
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, a, b, id, broadcast] {
        const Tensor& g = nodes_[id].value_grad;
        Tensor& ga = grad_ref(a);
        Tensor& gb = grad_ref(b);
        for (std::size_t i = 0; i < g.rows; ++i) {
            for (std::size_t j = 0; j < g.cols; ++j) {
                ga.at(i, j) += g.at(i, j);
                gb.at(broadcast ? 0 : i, j) += g.at(i, j);
            }
        }
    };
    return id;
}

Tape::NodeId Tape::scalar_mul(NodeId a, double c) {
    const Tensor& av = nodes_[a].value;
    Tensor out(av.rows, av.cols);
    for (std::size_t i = 0; i < av.size(); ++i) {
        out.values[i] = c * av.values[i];
    }
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, a, id, c] {
        const Tensor& g = nodes_[id].value_grad;
        Tensor& ga = grad_ref(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.values[i] += c * g.values[i];
        }
    };
    return id;
}

Tape::NodeId Tape::hadamard(NodeId a, NodeId b) {
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    if (!av.same_shape(bv)) {
        raise(ErrorKind::ShapeMismatch, "hadamard: " + av.shape_string() + " vs " + bv.shape_string());
    }
    Tensor out(av.rows, av.cols);
    for (std::size_t i = 0; i < av.size(); ++i) {
        out.values[i] = av.values[i] * bv.values[i];
    }
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, a, b, id] {
        const Tensor& g = nodes_[id].value_grad;
        const Tensor& av = nodes_[a].value;
        const Tensor& bv = nodes_[b].value;
        Tensor& ga = grad_ref(a);
        Tensor& gb = grad_ref(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.values[i] += g.values[i] * bv.values[i];
            gb.values[i] += g.values[i] * av.values[i];
        }
    };
    return id;
}

Tape::NodeId Tape::concat_cols(NodeId a, NodeId b) {
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    if (av.rows != bv.rows) {
        raise(ErrorKind::ShapeMismatch, "concat_cols: " + av.shape_string() + " | " + bv.shape_string());
    }
    Tensor out(av.rows, av.cols + bv.cols);
    for (std::size_t i = 0; i < av.rows; ++i) {
        for (std::size_t j = 0; j < av.cols; ++j) {
            out.at(i, j) = av.at(i, j);
        }
        for (std::size_t j = 0; j < bv.cols; ++j) {
            out.at(i, av.cols + j) = bv.at(i, j);
        }
    }
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, a, b, id] {
        const Tensor& g = nodes_[id].value_grad;
        Tensor& ga = grad_ref(a);
        Tensor& gb = grad_ref(b);
        for (std::size_t i = 0; i < ga.rows; ++i) {
            for (std::size_t j = 0; j < ga.cols; ++j) {
                ga.at(i, j) += g.at(i, j);
            }
            for (std::size_t j = 0; j < gb.cols; ++j) {
                gb.at(i, j) += g.at(i, ga.cols + j);
            }
        }
    };
    return id;
}

Tape::NodeId Tape::relu(NodeId a) {
    const Tensor& av = nodes_[a].value;
    Tensor out(av.rows, av.cols);
    for (std::size_t i = 0; i < av.size(); ++i) {
        out.values[i] = av.values[i] > 0.0 ? av.values[i] : 0.0;
    }
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, a, id] {
        const Tensor& g = nodes_[id].value_grad;
        const Tensor& av = nodes_[a].value;
        Tensor& ga = grad_ref(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            // subgradient at 0 is 0
            if (av.values[i] > 0.0) {
                ga.values[i] += g.values[i];
            }
        }
    };
    return id;
}

Tape::NodeId Tape::leaky_relu(NodeId a, double slope) {
    const Tensor& av = nodes_[a].value;
    Tensor out(av.rows, av.cols);
    for (std::size_t i = 0; i < av.size(); ++i) {
        out.values[i] = av.values[i] > 0.0 ? av.values[i] : slope * av.values[i];
    }
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, a, id, slope] {
        const Tensor& g = nodes_[id].value_grad;
        const Tensor& av = nodes_[a].value;
        Tensor& ga = grad_ref(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.values[i] += g.values[i] * (av.values[i] > 0.0 ? 1.0 : slope);
        }
    };
    return id;
}

Tape::NodeId Tape::tanh(NodeId a) {
    const Tensor& av = nodes_[a].value;
    Tensor out(av.rows, av.cols);
    for (std::size_t i = 0; i < av.size(); ++i) {
        out.values[i] = std::tanh(av.values[i]);
    }
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, a, id] {
        const Tensor& g = nodes_[id].value_grad;
        const Tensor& ov = nodes_[id].value;
        Tensor& ga = grad_ref(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.values[i] += g.values[i] * (1.0 - ov.values[i] * ov.values[i]);
        }
    };
    return id;
}

Tape::NodeId Tape::exp(NodeId a) {
    const Tensor& av = nodes_[a].value;
    Tensor out(av.rows, av.cols);
    for (std::size_t i = 0; i < av.size(); ++i) {
        out.values[i] = std::exp(av.values[i]);
    }
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, a, id] {
        const Tensor& g = nodes_[id].value_grad;
        const Tensor& ov = nodes_[id].value;
        Tensor& ga = grad_ref(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.values[i] += g.values[i] * ov.values[i];
        }
    };
    return id;
}

Tape::NodeId Tape::sum_all(NodeId a) {
    const Tensor& av = nodes_[a].value;
    double total = 0.0;
    for (double v : av.values) {
        total += v;
    }
    Tensor out(1, 1);
    out.values[0] = total;
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, a, id] {
        const double g = nodes_[id].value_grad.values[0];
        Tensor& ga = grad_ref(a);
        for (double& v : ga.values) {
            v += g;
        }
    };
    return id;
}

Tape::NodeId Tape::gather_rows(NodeId a, std::vector<std::size_t> indices) {
    const Tensor& av = nodes_[a].value;
    Tensor out(indices.size(), av.cols);
    for (std::size_t e = 0; e < indices.size(); ++e) {
        if (indices[e] >= av.rows) {
            raise(ErrorKind::ShapeMismatch, "gather_rows: index " + std::to_string(indices[e]) +
                                                " out of " + std::to_string(av.rows) + " rows");
        }
        for (std::size_t j = 0; j < av.cols; ++j) {
            out.at(e, j) = av.at(indices[e], j);
        }
    }
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, a, id, idx = std::move(indices)] {
        const Tensor& g = nodes_[id].value_grad;
        Tensor& ga = grad_ref(a);
        for (std::size_t e = 0; e < idx.size(); ++e) {
            for (std::size_t j = 0; j < g.cols; ++j) {
                ga.at(idx[e], j) += g.at(e, j);
            }
        }
    };
    return id;
}

Tape::NodeId Tape::neighborhood_softmax(NodeId logits, const EdgeStructure& edges) {
    const Tensor& lv = nodes_[logits].value;
    require_shape(lv, edges.src.size(), 1, "neighborhood_softmax logits");
    Tensor out(lv.rows, 1);
    for (std::size_t g = 0; g + 1 < edges.group_offsets.size(); ++g) {
        const std::size_t lo = edges.group_offsets[g];
        const std::size_t hi = edges.group_offsets[g + 1];
        if (lo == hi) {
            continue;
        }
        double max_logit = lv.values[lo];
        for (std::size_t e = lo + 1; e < hi; ++e) {
            max_logit = std::max(max_logit, lv.values[e]);
        }
        double denom = 0.0;
        for (std::size_t e = lo; e < hi; ++e) {
            out.values[e] = std::exp(lv.values[e] - max_logit);
            denom += out.values[e];
        }
        for (std::size_t e = lo; e < hi; ++e) {
            out.values[e] /= denom;
        }
    }
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, logits, id, offsets = edges.group_offsets] {
        const Tensor& g = nodes_[id].value_grad;
        const Tensor& s = nodes_[id].value;
        Tensor& gl = grad_ref(logits);
        for (std::size_t grp = 0; grp + 1 < offsets.size(); ++grp) {
            const std::size_t lo = offsets[grp];
            const std::size_t hi = offsets[grp + 1];
            double dot = 0.0;
            for (std::size_t e = lo; e < hi; ++e) {
                dot += g.values[e] * s.values[e];
            }
            for (std::size_t e = lo; e < hi; ++e) {
                gl.values[e] += s.values[e] * (g.values[e] - dot);
            }
        }
    };
    return id;
}

Tape::NodeId Tape::neighborhood_normalize(NodeId values, const EdgeStructure& edges) {
    const Tensor& vv = nodes_[values].value;
    require_shape(vv, edges.src.size(), 1, "neighborhood_normalize values");
    Tensor out(vv.rows, 1);
    std::vector<double> sums(edges.group_offsets.size() - 1, 0.0);
    for (std::size_t g = 0; g + 1 < edges.group_offsets.size(); ++g) {
        double sum = 0.0;
        for (std::size_t e = edges.group_offsets[g]; e < edges.group_offsets[g + 1]; ++e) {
            sum += vv.values[e];
        }
        sums[g] = sum;
        for (std::size_t e = edges.group_offsets[g]; e < edges.group_offsets[g + 1]; ++e) {
            out.values[e] = vv.values[e] / sum;
        }
    }
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, values, id, offsets = edges.group_offsets, sums = std::move(sums)] {
        const Tensor& g = nodes_[id].value_grad;
        const Tensor& o = nodes_[id].value;
        Tensor& gv = grad_ref(values);
        for (std::size_t grp = 0; grp + 1 < offsets.size(); ++grp) {
            const std::size_t lo = offsets[grp];
            const std::size_t hi = offsets[grp + 1];
            double dot = 0.0;
            for (std::size_t e = lo; e < hi; ++e) {
                dot += g.values[e] * o.values[e];
            }
            for (std::size_t e = lo; e < hi; ++e) {
                gv.values[e] += (g.values[e] - dot) / sums[grp];
            }
        }
    };
    return id;
}

Tape::NodeId Tape::neighbor_weighted_sum(NodeId coeff, NodeId values, const EdgeStructure& edges) {
    const Tensor& cv = nodes_[coeff].value;
    const Tensor& vv = nodes_[values].value;
    require_shape(cv, edges.src.size(), 1, "neighbor_weighted_sum coeff");
    Tensor out(edges.n_nodes, vv.cols);
    for (std::size_t e = 0; e < edges.src.size(); ++e) {
        const double c = cv.values[e];
        for (std::size_t j = 0; j < vv.cols; ++j) {
            out.at(edges.src[e], j) += c * vv.at(edges.dst[e], j);
        }
    }
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, coeff, values, id, src = edges.src, dst = edges.dst] {
        const Tensor& g = nodes_[id].value_grad;
        const Tensor& cv = nodes_[coeff].value;
        const Tensor& vv = nodes_[values].value;
        Tensor& gc = grad_ref(coeff);
        Tensor& gv = grad_ref(values);
        for (std::size_t e = 0; e < src.size(); ++e) {
            double dot = 0.0;
            for (std::size_t j = 0; j < vv.cols; ++j) {
                dot += g.at(src[e], j) * vv.at(dst[e], j);
                gv.at(dst[e], j) += cv.values[e] * g.at(src[e], j);
            }
            gc.values[e] += dot;
        }
    };
    return id;
}

Tape::NodeId Tape::masked_mse(NodeId pred, NodeId target, const std::vector<bool>& mask) {
    const Tensor& pv = nodes_[pred].value;
    const Tensor& tv = nodes_[target].value;
    if (pv.cols != 1 || !pv.same_shape(tv)) {
        raise(ErrorKind::ShapeMismatch, "masked_mse: " + pv.shape_string() + " vs " + tv.shape_string());
    }
    if (mask.size() != pv.rows) {
        raise(ErrorKind::MaskMismatch, "mask length " + std::to_string(mask.size()) + " vs " +
                                           std::to_string(pv.rows) + " rows");
    }
    std::size_t m = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
    if (m == 0) {
        raise(ErrorKind::EmptyMask, "masked_mse needs a non-empty mask");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pv.rows; ++i) {
        if (mask[i]) {
            const double r = pv.values[i] - tv.values[i];
            sum += r * r;
        }
    }
    Tensor out(1, 1);
    out.values[0] = sum / static_cast<double>(m);
    NodeId id = push(std::move(out), true, {});
    nodes_[id].backprop = [this, pred, target, id, mask, m] {
        const double g = nodes_[id].value_grad.values[0];
        const Tensor& pv = nodes_[pred].value;
        const Tensor& tv = nodes_[target].value;
        Tensor& gp = grad_ref(pred);
        Tensor& gt = grad_ref(target);
        const double scale = 2.0 * g / static_cast<double>(m);
        for (std::size_t i = 0; i < pv.rows; ++i) {
            if (mask[i]) {
                const double r = pv.values[i] - tv.values[i];
                gp.values[i] += scale * r;
                gt.values[i] -= scale * r;
            }
        }
    };
    return id;
}

void Tape::backward(NodeId root) {
    const Tensor& out = nodes_[root].value;
    if (out.rows != 1 || out.cols != 1) {
        raise(ErrorKind::NotScalarOutput, "backward root is " + out.shape_string());
    }
    nodes_[root].value_grad.values[0] = 1.0;
    for (std::size_t idx = root + 1; idx-- > 0;) {
        if (nodes_[idx].backprop) {
            nodes_[idx].backprop();
        }
    }
}

void ParamStore::add(const std::string& name, Tensor value) {
    if (index_.count(name)) {
        raise(ErrorKind::InvalidArgument, "duplicate parameter name: " + name);
    }
    index_[name] = entries_.size();
    entries_.emplace_back(name, std::move(value));
}

bool ParamStore::contains(const std::string& name) const { return index_.count(name) > 0; }

Tensor& ParamStore::get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) {
        raise(ErrorKind::InvalidArgument, "unknown parameter: " + name);
    }
    return entries_[it->second].second;
}

const Tensor& ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        raise(ErrorKind::InvalidArgument, "unknown parameter: " + name);
    }
    return entries_[it->second].second;
}

std::string ParamStore::to_json() const {
    nlohmann::ordered_json j;
    for (const auto& [name, tensor] : entries_) {
        nlohmann::ordered_json entry;
        entry["shape"] = {tensor.rows, tensor.cols};
        entry["values"] = tensor.values;
        j[name] = std::move(entry);
    }
    return j.dump(2) + "\n";
}

ParamStore ParamStore::from_json(const std::string& text) {
    auto j = nlohmann::ordered_json::parse(text);
    ParamStore store;
    for (const auto& [name, entry] : j.items()) {
        auto shape = entry.at("shape").get<std::vector<std::size_t>>();
        auto values = entry.at("values").get<std::vector<double>>();
        store.add(name, Tensor(shape.at(0), shape.at(1), std::move(values)));
    }
    return store;
}

Tensor seeded_init(std::size_t rows, std::size_t cols, std::size_t fan_in, std::uint64_t seed) {
    if (fan_in < 1) {
        raise(ErrorKind::InvalidArgument, "fan_in must be >= 1");
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Rng rng(seed);
    Tensor t(rows, cols);
    for (double& v : t.values) {
        v = rng.uniform(-bound, bound);
    }
    return t;
}

ValueGrad value_and_grad(const ForwardFn& f, const ParamStore& params) {
    Tape tape;
    std::map<std::string, Tape::NodeId> leaves;
    for (const auto& [name, tensor] : params.entries()) {
        Tensor clean = tensor;
        clean.grad.clear();
        leaves[name] = tape.leaf(std::move(clean), true);
    }
    Tape::NodeId root = f(tape, leaves);
    const Tensor& out = tape.value(root);
    if (out.rows != 1 || out.cols != 1) {
        raise(ErrorKind::NotScalarOutput, "forward produced " + out.shape_string());
    }
    tape.backward(root);

    ValueGrad result;
    result.value = out.values[0];
    for (const auto& [name, tensor] : params.entries()) {
        result.grads.emplace_back(name, tape.gradient(leaves.at(name)));
    }
    return result;
}

} // namespace coldspray
