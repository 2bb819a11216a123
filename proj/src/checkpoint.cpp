#include "coldspray/checkpoint.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coldspray/numeric.hpp"
#include "coldspray/tda.hpp"

namespace coldspray {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorKind::Io, "cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::ordered_json stats_json(const NormStats& stats) {
    nlohmann::ordered_json j;
    j["columns"] = stats.columns;
    j["mean"] = stats.mean;
    j["std"] = stats.std_dev;
    return j;
}

NormStats stats_from(const nlohmann::json& j) {
    NormStats stats;
    stats.columns = j.at("columns").get<std::vector<std::string>>();
    stats.mean = j.at("mean").get<std::vector<double>>();
    stats.std_dev = j.at("std").get<std::vector<double>>();
    return stats;
}

} // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
    nlohmann::ordered_json j;
    j["format"] = "coldspray-checkpoint-v1";
    j["version"] = kToolkitVersion;
    j["target"] = checkpoint.target;
    j["k"] = checkpoint.k;
    j["config"] = nlohmann::ordered_json::parse(model_config_to_json(checkpoint.config));
    j["train_config"] = {
        {"max_epochs", checkpoint.train_config.max_epochs},
        {"learning_rate", checkpoint.train_config.learning_rate},
        {"adam_beta1", checkpoint.train_config.adam_beta1},
        {"adam_beta2", checkpoint.train_config.adam_beta2},
        {"adam_epsilon", checkpoint.train_config.adam_epsilon},
        {"patience", checkpoint.train_config.patience},
        {"seed", checkpoint.train_config.seed},
    };
    j["input_stats"] = stats_json(checkpoint.input_stats);
    j["target_stats"] = {{"mean", checkpoint.target_stats.mean}, {"std", checkpoint.target_stats.std_dev}};
    if (checkpoint.descriptor_stats) {
        j["descriptor_stats"] = stats_json(*checkpoint.descriptor_stats);
    }
    std::vector<int> train(checkpoint.masks.train_mask.begin(), checkpoint.masks.train_mask.end());
    std::vector<int> test(checkpoint.masks.test_mask.begin(), checkpoint.masks.test_mask.end());
    j["masks"] = {{"train", train}, {"test", test}};
    j["input_medians"] = checkpoint.input_medians;
    auto nodes = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < checkpoint.nodes_raw.rows; ++i) {
        nodes.push_back({checkpoint.nodes_raw.at(i, 0), checkpoint.nodes_raw.at(i, 1),
                         checkpoint.nodes_raw.at(i, 2)});
    }
    j["nodes"] = std::move(nodes);
    j["sigma"] = checkpoint.sigma;
    j["lambda_max"] = checkpoint.lambda_max;
    j["graph_file"] = checkpoint.graph_file;
    j["params"] = nlohmann::ordered_json::parse(checkpoint.params.to_json());
    j["best_epoch"] = checkpoint.best_epoch;
    j["best_loss"] = checkpoint.best_loss;

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorKind::Io, "cannot write checkpoint: " + path);
    }
    out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
    auto j = nlohmann::ordered_json::parse(read_file(path));
    if (j.value("format", "") != "coldspray-checkpoint-v1") {
        raise(ErrorKind::InvalidValue, "unrecognized checkpoint format in " + path);
    }
    Checkpoint c;
    c.target = j.at("target").get<std::string>();
    c.k = j.at("k").get<std::size_t>();
    c.config = model_config_from_json(j.at("config").dump());
    const auto& tc = j.at("train_config");
    c.train_config.max_epochs = tc.at("max_epochs").get<std::size_t>();
    c.train_config.learning_rate = tc.at("learning_rate").get<double>();
    c.train_config.adam_beta1 = tc.at("adam_beta1").get<double>();
    c.train_config.adam_beta2 = tc.at("adam_beta2").get<double>();
    c.train_config.adam_epsilon = tc.at("adam_epsilon").get<double>();
    c.train_config.patience = tc.at("patience").get<std::size_t>();
    c.train_config.seed = tc.at("seed").get<std::uint64_t>();
    c.train_config.target = c.target;
    c.input_stats = stats_from(j.at("input_stats"));
    c.target_stats.mean = j.at("target_stats").at("mean").get<double>();
    c.target_stats.std_dev = j.at("target_stats").at("std").get<double>();
    if (j.contains("descriptor_stats")) {
        c.descriptor_stats = stats_from(j.at("descriptor_stats"));
    }
    for (int v : j.at("masks").at("train").get<std::vector<int>>()) {
        c.masks.train_mask.push_back(v != 0);
    }
    for (int v : j.at("masks").at("test").get<std::vector<int>>()) {
        c.masks.test_mask.push_back(v != 0);
    }
    auto medians = j.at("input_medians").get<std::vector<double>>();
    std::copy_n(medians.begin(), kNumInputs, c.input_medians.begin());
    const auto& nodes = j.at("nodes");
    c.nodes_raw = Tensor(nodes.size(), kNumInputs);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t f = 0; f < kNumInputs; ++f) {
            c.nodes_raw.at(i, f) = nodes[i][f].get<double>();
        }
    }
    c.sigma = j.at("sigma").get<double>();
    c.lambda_max = j.at("lambda_max").get<double>();
    c.graph_file = j.at("graph_file").get<std::string>();
    c.params = ParamStore::from_json(j.at("params").dump());
    c.best_epoch = j.at("best_epoch").get<std::size_t>();
    c.best_loss = j.at("best_loss").get<double>();
    return c;
}

ModelInputs checkpoint_inputs(const Checkpoint& checkpoint, const FeatureGraph& graph,
                              const Tensor& raw_features) {
    ModelInputs inputs;
    Tensor x_norm = zscore_apply(raw_features, checkpoint.input_stats);
    switch (checkpoint.config.family) {
    case Family::GraphSage:
        inputs.features = std::move(x_norm);
        inputs.agg_matrix = build_agg_matrix(graph);
        break;
    case Family::ChebSpectral: {
        inputs.features = std::move(x_norm);
        LaplacianOperator lap = normalized_laplacian(graph);
        lap.lambda_max = checkpoint.lambda_max;
        inputs.scaled_laplacian = chebyshev_scale(lap);
        break;
    }
    case Family::Gat: {
        inputs.features = std::move(x_norm);
        auto [edges, weights] = build_edge_structure(graph);
        inputs.edges = std::move(edges);
        inputs.edge_weights = std::move(weights);
        break;
    }
    case Family::TdaMlp: {
        if (!checkpoint.descriptor_stats) {
            raise(ErrorKind::UnboundArtifact, "checkpoint lacks descriptor stats");
        }
        Tensor raw_desc = node_descriptors(x_norm, checkpoint.k);
        inputs.features = augment_features(x_norm, zscore_apply(raw_desc, *checkpoint.descriptor_stats));
        break;
    }
    }
    return inputs;
}

LoadedModel load_model(const std::string& checkpoint_path) {
    LoadedModel model;
    model.meta = load_checkpoint(checkpoint_path);
    const auto graph_path =
        std::filesystem::path(checkpoint_path).parent_path() / model.meta.graph_file;
    model.graph = graph_from_json(read_file(graph_path.string()));
    if (model.graph.n_nodes != model.meta.nodes_raw.rows) {
        raise(ErrorKind::MaskMismatch, "graph file and checkpoint disagree on node count");
    }
    model.inputs = checkpoint_inputs(model.meta, model.graph, model.meta.nodes_raw);
    model.instance.config = model.meta.config;
    model.instance.params = model.meta.params;
    return model;
}

Tensor repredict(const LoadedModel& model) {
    Tensor pred = predict(model.instance, model.inputs);
    for (double& v : pred.values) {
        v = v * model.meta.target_stats.std_dev + model.meta.target_stats.mean;
    }
    return pred;
}

namespace {

struct Attachment {
    std::vector<std::size_t> neighbors; // train-node indices, k of them
    std::vector<double> dists;
    std::vector<double> weights;
};

Attachment attach_query(const Checkpoint& meta, const Tensor& x_norm, const Tensor& query_norm) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t i = 0; i < x_norm.rows; ++i) {
        if (!meta.masks.train_mask[i]) {
            continue;
        }
        double ss = 0.0;
        for (std::size_t f = 0; f < x_norm.cols; ++f) {
            double d = query_norm.at(0, f) - x_norm.at(i, f);
            ss += d * d;
        }
        cand.emplace_back(std::sqrt(ss), i);
    }
    const std::size_t k = std::min(meta.k, cand.size());
    if (k == 0) {
        raise(ErrorKind::TooFewNodes, "no training nodes to attach to");
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    Attachment att;
    for (std::size_t r = 0; r < k; ++r) {
        att.neighbors.push_back(cand[r].second);
        att.dists.push_back(cand[r].first);
        att.weights.push_back(std::exp(-(cand[r].first * cand[r].first) / (2.0 * meta.sigma * meta.sigma)));
    }
    return att;
}

Tensor append_row(const Tensor& x, const Tensor& row) {
    Tensor out(x.rows + 1, x.cols);
    std::copy(x.values.begin(), x.values.end(), out.values.begin());
    for (std::size_t f = 0; f < x.cols; ++f) {
        out.at(x.rows, f) = row.at(0, f);
    }
    return out;
}

} // namespace

double predict_point(const LoadedModel& model, double velocity, double particle_temp, double friction) {
    const Checkpoint& meta = model.meta;
    Tensor query_raw(1, kNumInputs, {velocity, particle_temp, friction});
    Tensor query_norm = zscore_apply(query_raw, meta.input_stats);
    const Tensor& x_norm =
        meta.config.family == Family::TdaMlp ? zscore_apply(meta.nodes_raw, meta.input_stats)
                                             : model.inputs.features;

    double pred_norm = 0.0;
    switch (meta.config.family) {
    case Family::TdaMlp: {
        // A query that exactly matches a stored node is that node; otherwise
        // descriptors come from the cloud with the query appended.
        std::optional<std::size_t> coincident;
        for (std::size_t i = 0; i < x_norm.rows && !coincident; ++i) {
            bool same = true;
            for (std::size_t f = 0; f < kNumInputs; ++f) {
                same = same && x_norm.at(i, f) == query_norm.at(0, f);
            }
            if (same) {
                coincident = i;
            }
        }
        Tensor desc_row(1, kNumDescriptors);
        if (coincident) {
            Tensor all_desc = node_descriptors(x_norm, meta.k);
            for (std::size_t c = 0; c < kNumDescriptors; ++c) {
                desc_row.at(0, c) = all_desc.at(*coincident, c);
            }
        } else {
            Tensor extended = append_row(x_norm, query_norm);
            Tensor all_desc = node_descriptors(extended, meta.k);
            for (std::size_t c = 0; c < kNumDescriptors; ++c) {
                desc_row.at(0, c) = all_desc.at(x_norm.rows, c);
            }
        }
        ModelInputs single;
        single.features =
            augment_features(query_norm, zscore_apply(desc_row, *meta.descriptor_stats));
        pred_norm = predict(model.instance, single).values[0];
        break;
    }
    case Family::GraphSage: {
        auto att = attach_query(meta, x_norm, query_norm);
        const std::size_t n = x_norm.rows;
        ModelInputs ext;
        ext.features = append_row(x_norm, query_norm);
        Tensor agg(n + 1, n + 1);
        const Tensor& base = *model.inputs.agg_matrix;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                agg.at(i, j) = base.at(i, j);
            }
        }
        double total = 0.0;
        for (double w : att.weights) {
            total += w;
        }
        for (std::size_t r = 0; r < att.neighbors.size(); ++r) {
            agg.at(n, att.neighbors[r]) = att.weights[r] / total;
        }
        ext.agg_matrix = std::move(agg);
        pred_norm = predict(model.instance, ext).values[n];
        break;
    }
    case Family::Gat: {
        auto att = attach_query(meta, x_norm, query_norm);
        const std::size_t n = x_norm.rows;
        ModelInputs ext;
        ext.features = append_row(x_norm, query_norm);
        Tape::EdgeStructure edges = *model.inputs.edges;
        Tensor weights = *model.inputs.edge_weights;
        edges.n_nodes = n + 1;
        for (std::size_t r = 0; r < att.neighbors.size(); ++r) {
            edges.src.push_back(n);
            edges.dst.push_back(att.neighbors[r]);
            weights.values.push_back(att.weights[r]);
        }
        weights.rows = weights.values.size();
        edges.group_offsets.push_back(edges.src.size());
        ext.edges = std::move(edges);
        ext.edge_weights = std::move(weights);
        pred_norm = predict(model.instance, ext).values[n];
        break;
    }
    case Family::ChebSpectral: {
        // Symmetric extension: the query joins the Laplacian like a real
        // node so the spectral operator stays symmetric.
        auto att = attach_query(meta, x_norm, query_norm);
        const std::size_t n = x_norm.rows;
        FeatureGraph ext_graph = model.graph;
        ext_graph.n_nodes = n + 1;
        ext_graph.neighbors.emplace_back();
        ext_graph.incident.emplace_back();
        for (std::size_t r = 0; r < att.neighbors.size(); ++r) {
            GraphEdge e;
            e.i = att.neighbors[r];
            e.j = n;
            e.dist = att.dists[r];
            e.weight = att.weights[r];
            ext_graph.edges.push_back(e);
            const std::size_t edge_idx = ext_graph.edges.size() - 1;
            ext_graph.neighbors[e.i].push_back(n);
            ext_graph.incident[e.i].push_back(edge_idx);
            ext_graph.neighbors[n].push_back(e.i);
            ext_graph.incident[n].push_back(edge_idx);
        }
        ModelInputs ext;
        ext.features = append_row(x_norm, query_norm);
        LaplacianOperator lap = normalized_laplacian(ext_graph);
        lap.lambda_max = meta.lambda_max;
        ext.scaled_laplacian = chebyshev_scale(lap);
        pred_norm = predict(model.instance, ext).values[n];
        break;
    }
    }
    return pred_norm * meta.target_stats.std_dev + meta.target_stats.mean;
}

} // namespace coldspray
