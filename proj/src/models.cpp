#include "coldspray/models.hpp"

#include <json.hpp>

#include "coldspray/numeric.hpp"

namespace coldspray {

const char* to_string(Family family) {
    switch (family) {
    case Family::GraphSage: return "graphsage";
    case Family::ChebSpectral: return "chebspectral";
    case Family::TdaMlp: return "tdamlp";
    case Family::Gat: return "gat";
    }
    return "?";
}

const char* to_string(Activation activation) {
    switch (activation) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::LeakyRelu: return "leaky_relu";
    }
    return "?";
}

std::optional<Family> family_from_string(const std::string& name) {
    for (Family f : {Family::GraphSage, Family::ChebSpectral, Family::TdaMlp, Family::Gat}) {
        if (name == to_string(f)) {
            return f;
        }
    }
    return std::nullopt;
}

std::optional<Activation> activation_from_string(const std::string& name) {
    for (Activation a : {Activation::Relu, Activation::Tanh, Activation::LeakyRelu}) {
        if (name == to_string(a)) {
            return a;
        }
    }
    return std::nullopt;
}

std::vector<std::string> family_names() {
    return {"graphsage", "chebspectral", "tdamlp", "gat"};
}

void ModelConfig::validate() const {
    if (hidden_dims.empty()) {
        raise(ErrorKind::InvalidArgument, "hidden_dims must be non-empty");
    }
    for (std::size_t w : hidden_dims) {
        if (w < 1) {
            raise(ErrorKind::InvalidArgument, "hidden layer width must be >= 1");
        }
    }
    if (cheb_order < 1) {
        raise(ErrorKind::InvalidArgument, "cheb_order must be >= 1");
    }
    if (gat_heads < 1) {
        raise(ErrorKind::InvalidArgument, "gat_heads must be >= 1");
    }
    if (family == Family::Gat) {
        for (std::size_t w : hidden_dims) {
            if (w % gat_heads != 0) {
                raise(ErrorKind::InvalidArgument, "hidden width " + std::to_string(w) +
                                                      " not divisible by " + std::to_string(gat_heads) +
                                                      " heads");
            }
        }
    }
}

namespace {

std::uint64_t param_seed(std::uint64_t base, std::size_t counter) {
    return base + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(counter + 1);
}

} // namespace

ModelInstance init_model(const ModelConfig& config, std::size_t input_dim) {
    config.validate();
    ModelInstance instance;
    instance.config = config;
    std::size_t counter = 0;
    auto init = [&](std::size_t rows, std::size_t cols, std::size_t fan_in) {
        return seeded_init(rows, cols, fan_in, param_seed(config.seed, counter++));
    };

    std::size_t d_in = input_dim;
    for (std::size_t l = 0; l < config.hidden_dims.size(); ++l) {
        const std::size_t d_out = config.hidden_dims[l];
        const std::string prefix = "layer" + std::to_string(l) + ".";
        switch (config.family) {
        case Family::GraphSage:
            instance.params.add(prefix + "W_self", init(d_in, d_out, d_in));
            instance.params.add(prefix + "W_neigh", init(d_in, d_out, d_in));
            break;
        case Family::ChebSpectral:
            for (std::size_t k = 0; k < config.cheb_order; ++k) {
                instance.params.add(prefix + "theta" + std::to_string(k), init(d_in, d_out, d_in));
            }
            break;
        case Family::TdaMlp:
            instance.params.add(prefix + "W", init(d_in, d_out, d_in));
            instance.params.add(prefix + "b", Tensor(1, d_out));
            break;
        case Family::Gat: {
            const std::size_t head_dim = d_out / config.gat_heads;
            for (std::size_t h = 0; h < config.gat_heads; ++h) {
                const std::string hp = prefix + "head" + std::to_string(h) + ".";
                instance.params.add(hp + "W", init(d_in, head_dim, d_in));
                instance.params.add(hp + "a", init(2 * head_dim, 1, 2 * head_dim));
            }
            break;
        }
        }
        d_in = d_out;
    }
    instance.params.add("readout.W", init(d_in, 1, d_in));
    instance.params.add("readout.b", Tensor(1, 1));
    return instance;
}

Tensor build_agg_matrix(const FeatureGraph& graph) {
    if (!graph.weighted) {
        raise(ErrorKind::UnboundArtifact, "graph weights not set");
    }
    Tensor agg(graph.n_nodes, graph.n_nodes);
    for (std::size_t i = 0; i < graph.n_nodes; ++i) {
        double total = graph.weighted_degree(i);
        if (!(total > 0.0)) {
            raise(ErrorKind::IsolatedNode, "node " + std::to_string(i) + " has zero weighted degree");
        }
        for (std::size_t idx = 0; idx < graph.neighbors[i].size(); ++idx) {
            const auto& edge = graph.edges[graph.incident[i][idx]];
            agg.at(i, graph.neighbors[i][idx]) = edge.weight / total;
        }
    }
    return agg;
}

std::pair<Tape::EdgeStructure, Tensor> build_edge_structure(const FeatureGraph& graph) {
    if (!graph.weighted) {
        raise(ErrorKind::UnboundArtifact, "graph weights not set");
    }
    Tape::EdgeStructure edges;
    edges.n_nodes = graph.n_nodes;
    edges.group_offsets.push_back(0);
    std::vector<double> weights;
    for (std::size_t i = 0; i < graph.n_nodes; ++i) {
        for (std::size_t idx = 0; idx < graph.neighbors[i].size(); ++idx) {
            edges.src.push_back(i);
            edges.dst.push_back(graph.neighbors[i][idx]);
            weights.push_back(graph.edges[graph.incident[i][idx]].weight);
        }
        edges.group_offsets.push_back(edges.src.size());
    }
    return {std::move(edges), Tensor::column(std::move(weights))};
}

Tape::NodeId sage_combine(Tape& tape, Tape::NodeId h, Tape::NodeId agg_matrix, Tape::NodeId w_self,
                          Tape::NodeId w_neigh) {
    auto self_term = tape.matmul(h, w_self);
    auto aggregated = tape.matmul(agg_matrix, h);
    auto neigh_term = tape.matmul(aggregated, w_neigh);
    return tape.add(self_term, neigh_term);
}

Tape::NodeId cheb_combine(Tape& tape, Tape::NodeId h, Tape::NodeId scaled_laplacian,
                          const std::vector<Tape::NodeId>& thetas) {
    if (thetas.empty()) {
        raise(ErrorKind::InvalidArgument, "cheb_combine needs at least one theta");
    }
    // T_k(L) h by the three-term recurrence; only N x d products, never a
    // dense polynomial of the operator.
    Tape::NodeId t_prev2 = h;
    Tape::NodeId out = tape.matmul(t_prev2, thetas[0]);
    if (thetas.size() == 1) {
        return out;
    }
    Tape::NodeId t_prev1 = tape.matmul(scaled_laplacian, h);
    out = tape.add(out, tape.matmul(t_prev1, thetas[1]));
    for (std::size_t k = 2; k < thetas.size(); ++k) {
        auto t_k = tape.add(tape.scalar_mul(tape.matmul(scaled_laplacian, t_prev1), 2.0),
                            tape.scalar_mul(t_prev2, -1.0));
        out = tape.add(out, tape.matmul(t_k, thetas[k]));
        t_prev2 = t_prev1;
        t_prev1 = t_k;
    }
    return out;
}

Tape::NodeId gat_combine(Tape& tape, Tape::NodeId h, const Tape::EdgeStructure& edges,
                         Tape::NodeId edge_weights, Tape::NodeId weight, Tape::NodeId attention,
                         double leaky_slope) {
    for (std::size_t g = 0; g + 1 < edges.group_offsets.size(); ++g) {
        if (edges.group_offsets[g] == edges.group_offsets[g + 1]) {
            raise(ErrorKind::EmptyNeighborhood, "node " + std::to_string(g) + " has no neighbors");
        }
    }
    auto transformed = tape.matmul(h, weight); // N x d_out
    const std::size_t d_out = tape.value(transformed).cols;
    require_shape(tape.value(attention), 2 * d_out, 1, "gat attention vector");

    // Split a into its source and destination halves; a^T [Wh_i || Wh_j]
    // = (a_src . Wh_i) + (a_dst . Wh_j).
    std::vector<std::size_t> src_half(d_out), dst_half(d_out);
    for (std::size_t j = 0; j < d_out; ++j) {
        src_half[j] = j;
        dst_half[j] = d_out + j;
    }
    auto score_src = tape.matmul(transformed, tape.gather_rows(attention, src_half)); // N x 1
    auto score_dst = tape.matmul(transformed, tape.gather_rows(attention, dst_half)); // N x 1

    auto logits = tape.leaky_relu(
        tape.add(tape.gather_rows(score_src, edges.src), tape.gather_rows(score_dst, edges.dst)),
        leaky_slope);
    auto softmaxed = tape.neighborhood_softmax(logits, edges);
    auto modulated = tape.hadamard(softmaxed, edge_weights);
    auto renormalized = tape.neighborhood_normalize(modulated, edges);
    return tape.neighbor_weighted_sum(renormalized, transformed, edges);
}

Tape::NodeId dense_combine(Tape& tape, Tape::NodeId h, Tape::NodeId weight, Tape::NodeId bias) {
    return tape.add(tape.matmul(h, weight), bias);
}

Tape::NodeId apply_activation(Tape& tape, Tape::NodeId h, Activation activation, double leaky_slope) {
    switch (activation) {
    case Activation::Relu: return tape.relu(h);
    case Activation::Tanh: return tape.tanh(h);
    case Activation::LeakyRelu: return tape.leaky_relu(h, leaky_slope);
    }
    raise(ErrorKind::InvalidArgument, "unknown activation");
}

Tape::NodeId model_forward(Tape& tape, const ModelConfig& config,
                           const std::map<std::string, Tape::NodeId>& params, Tape::NodeId features,
                           const ModelInputs& inputs) {
    config.validate();
    auto param = [&](const std::string& name) {
        auto it = params.find(name);
        if (it == params.end()) {
            raise(ErrorKind::InvalidArgument, "missing parameter node: " + name);
        }
        return it->second;
    };

    std::optional<Tape::NodeId> agg_node, lap_node, edge_w_node;
    if (config.family == Family::GraphSage) {
        if (!inputs.agg_matrix) {
            raise(ErrorKind::UnboundArtifact, "graphsage forward needs the aggregation matrix");
        }
        agg_node = tape.leaf(*inputs.agg_matrix);
    } else if (config.family == Family::ChebSpectral) {
        if (!inputs.scaled_laplacian) {
            raise(ErrorKind::UnboundArtifact, "chebspectral forward needs the scaled Laplacian");
        }
        lap_node = tape.leaf(*inputs.scaled_laplacian);
    } else if (config.family == Family::Gat) {
        if (!inputs.edges || !inputs.edge_weights) {
            raise(ErrorKind::UnboundArtifact, "gat forward needs the edge structure and weights");
        }
        edge_w_node = tape.leaf(*inputs.edge_weights);
    }

    Tape::NodeId h = features;
    for (std::size_t l = 0; l < config.hidden_dims.size(); ++l) {
        const std::string prefix = "layer" + std::to_string(l) + ".";
        Tape::NodeId pre = h;
        switch (config.family) {
        case Family::GraphSage:
            pre = sage_combine(tape, h, *agg_node, param(prefix + "W_self"), param(prefix + "W_neigh"));
            break;
        case Family::ChebSpectral: {
            std::vector<Tape::NodeId> thetas;
            for (std::size_t k = 0; k < config.cheb_order; ++k) {
                thetas.push_back(param(prefix + "theta" + std::to_string(k)));
            }
            pre = cheb_combine(tape, h, *lap_node, thetas);
            break;
        }
        case Family::TdaMlp:
            pre = dense_combine(tape, h, param(prefix + "W"), param(prefix + "b"));
            break;
        case Family::Gat: {
            std::vector<Tape::NodeId> heads;
            for (std::size_t hd = 0; hd < config.gat_heads; ++hd) {
                const std::string hp = prefix + "head" + std::to_string(hd) + ".";
                heads.push_back(gat_combine(tape, h, *inputs.edges, *edge_w_node, param(hp + "W"),
                                            param(hp + "a"), config.leaky_slope));
            }
            pre = heads[0];
            for (std::size_t hd = 1; hd < heads.size(); ++hd) {
                pre = tape.concat_cols(pre, heads[hd]);
            }
            break;
        }
        }
        h = apply_activation(tape, pre, config.activation, config.leaky_slope);
    }
    return dense_combine(tape, h, param("readout.W"), param("readout.b"));
}

Tensor predict(const ModelInstance& instance, const ModelInputs& inputs) {
    Tape tape;
    std::map<std::string, Tape::NodeId> params;
    for (const auto& [name, tensor] : instance.params.entries()) {
        params[name] = tape.leaf(tensor);
    }
    auto features = tape.leaf(inputs.features);
    auto out = model_forward(tape, instance.config, params, features, inputs);
    return tape.value(out);
}

std::string model_config_to_json(const ModelConfig& config) {
    nlohmann::ordered_json j;
    j["family"] = to_string(config.family);
    j["hidden_dims"] = config.hidden_dims;
    j["activation"] = to_string(config.activation);
    j["cheb_order"] = config.cheb_order;
    j["gat_heads"] = config.gat_heads;
    j["leaky_slope"] = config.leaky_slope;
    j["seed"] = config.seed;
    return j.dump();
}

ModelConfig model_config_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    ModelConfig config;
    auto family = family_from_string(j.at("family").get<std::string>());
    if (!family) {
        raise(ErrorKind::InvalidArgument, "unknown family in config");
    }
    config.family = *family;
    config.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
    auto act = activation_from_string(j.at("activation").get<std::string>());
    if (!act) {
        raise(ErrorKind::InvalidArgument, "unknown activation in config");
    }
    config.activation = *act;
    config.cheb_order = j.at("cheb_order").get<std::size_t>();
    config.gat_heads = j.at("gat_heads").get<std::size_t>();
    config.leaky_slope = j.at("leaky_slope").get<double>();
    config.seed = j.at("seed").get<std::uint64_t>();
    config.validate();
    return config;
}

} // namespace coldspray
