#include "coldspray/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "coldspray/numeric.hpp"
#include "coldspray/tda.hpp"

namespace coldspray {

void TrainConfig::validate() const {
    if (max_epochs < 1) {
        raise(ErrorKind::InvalidArgument, "max_epochs must be >= 1");
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        raise(ErrorKind::InvalidArgument, "learning_rate must be >= 0");
    }
    if (!target_index(target)) {
        raise(ErrorKind::UnknownParameter, "unknown target: " + target);
    }
}

namespace {

std::size_t mask_count(const std::vector<bool>& mask) {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

void check_metric_args(const Tensor& a, const Tensor& b, const std::vector<bool>& mask) {
    if (a.cols != 1 || !a.same_shape(b)) {
        raise(ErrorKind::ShapeMismatch, "metric columns: " + a.shape_string() + " vs " + b.shape_string());
    }
    if (mask.size() != a.rows) {
        raise(ErrorKind::MaskMismatch, "mask length " + std::to_string(mask.size()) + " vs " +
                                           std::to_string(a.rows) + " rows");
    }
    if (mask_count(mask) == 0) {
        raise(ErrorKind::EmptyMask, "metric over an empty mask");
    }
}

} // namespace

double masked_mse_value(const Tensor& pred, const Tensor& target, const std::vector<bool>& mask) {
    check_metric_args(pred, target, mask);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.rows; ++i) {
        if (mask[i]) {
            const double r = pred.values[i] - target.values[i];
            sum += r * r;
        }
    }
    return sum / static_cast<double>(mask_count(mask));
}

double masked_mae(const Tensor& pred, const Tensor& target, const std::vector<bool>& mask) {
    check_metric_args(pred, target, mask);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.rows; ++i) {
        if (mask[i]) {
            sum += std::abs(pred.values[i] - target.values[i]);
        }
    }
    return sum / static_cast<double>(mask_count(mask));
}

double r_squared(const Tensor& actual, const Tensor& predicted, const std::vector<bool>& mask) {
    check_metric_args(actual, predicted, mask);
    const std::size_t m = mask_count(mask);
    if (m < 2) {
        raise(ErrorKind::ZeroVariance, "R^2 needs >= 2 masked rows");
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < actual.rows; ++i) {
        if (mask[i]) {
            mean += actual.values[i];
        }
    }
    mean /= static_cast<double>(m);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < actual.rows; ++i) {
        if (mask[i]) {
            const double r = actual.values[i] - predicted.values[i];
            const double d = actual.values[i] - mean;
            ss_res += r * r;
            ss_tot += d * d;
        }
    }
    if (ss_tot == 0.0) {
        raise(ErrorKind::ZeroVariance, "target has zero variance over the mask");
    }
    return 1.0 - ss_res / ss_tot;
}

TargetStats fit_target_stats(const Tensor& target, const std::vector<bool>& train_mask) {
    if (train_mask.size() != target.rows) {
        raise(ErrorKind::MaskMismatch, "mask length vs target rows");
    }
    const std::size_t m = mask_count(train_mask);
    if (m < 2) {
        raise(ErrorKind::TooFewRows, "need >= 2 training rows for target stats");
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < target.rows; ++i) {
        if (train_mask[i]) {
            mean += target.values[i];
        }
    }
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t i = 0; i < target.rows; ++i) {
        if (train_mask[i]) {
            const double d = target.values[i] - mean;
            ss += d * d;
        }
    }
    const double sd = std::sqrt(ss / static_cast<double>(m));
    if (!(sd > 0.0)) {
        raise(ErrorKind::ZeroVariance, "target is constant over training rows");
    }
    return {mean, sd};
}

PipelineArtifacts build_artifacts(const std::vector<SampleRecord>& records, const SplitMasks& masks,
                                  std::size_t k, bool with_tda) {
    if (masks.size() != records.size()) {
        raise(ErrorKind::MaskMismatch, "mask length " + std::to_string(masks.size()) + " vs " +
                                           std::to_string(records.size()) + " records");
    }
    PipelineArtifacts art;
    art.input_stats = zscore_fit(records, masks.train_mask);
    art.x_norm = zscore_apply(records, art.input_stats);

    art.graph = knn_edges(art.x_norm, k);
    art.graph = gaussian_weights(std::move(art.graph), median_sigma(art.graph));

    auto lap = normalized_laplacian(art.graph);
    art.lambda_max = lap.lambda_max;
    art.scaled_laplacian = chebyshev_scale(lap);
    art.agg_matrix = build_agg_matrix(art.graph);
    std::tie(art.edges, art.edge_weights) = build_edge_structure(art.graph);

    if (with_tda) {
        Tensor raw_desc = node_descriptors(art.x_norm, k);
        art.descriptor_stats = zscore_fit(raw_desc, masks.train_mask, kDescriptorNames);
        art.x_augmented = augment_features(art.x_norm, zscore_apply(raw_desc, art.descriptor_stats));
        art.has_tda = true;
    }

    // Raw-scale per-input medians (whole dataset), for slice exports.
    Tensor raw = input_matrix(records);
    for (std::size_t f = 0; f < kNumInputs; ++f) {
        std::vector<double> col(raw.rows);
        for (std::size_t i = 0; i < raw.rows; ++i) {
            col[i] = raw.at(i, f);
        }
        std::sort(col.begin(), col.end());
        art.input_medians[f] = col.size() % 2 == 1
                                   ? col[col.size() / 2]
                                   : 0.5 * (col[col.size() / 2 - 1] + col[col.size() / 2]);
    }
    return art;
}

ModelInputs make_inputs(const PipelineArtifacts& artifacts, Family family) {
    ModelInputs inputs;
    switch (family) {
    case Family::GraphSage:
        inputs.features = artifacts.x_norm;
        inputs.agg_matrix = artifacts.agg_matrix;
        break;
    case Family::ChebSpectral:
        inputs.features = artifacts.x_norm;
        inputs.scaled_laplacian = artifacts.scaled_laplacian;
        break;
    case Family::Gat:
        inputs.features = artifacts.x_norm;
        inputs.edges = artifacts.edges;
        inputs.edge_weights = artifacts.edge_weights;
        break;
    case Family::TdaMlp:
        if (!artifacts.has_tda) {
            raise(ErrorKind::UnboundArtifact, "artifacts were built without descriptors");
        }
        inputs.features = artifacts.x_augmented;
        break;
    }
    return inputs;
}

namespace {

/// Classic Adam, one moment pair per parameter tensor.
class AdamOptimizer {
public:
    AdamOptimizer(const ParamStore& params, const TrainConfig& config) : config_(config) {
        for (const auto& [name, tensor] : params.entries()) {
            m_.emplace_back(tensor.rows, tensor.cols);
            v_.emplace_back(tensor.rows, tensor.cols);
        }
    }

    void step(ParamStore& params, const std::vector<std::pair<std::string, Tensor>>& grads) {
        ++t_;
        const double bc1 = 1.0 - std::pow(config_.adam_beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(config_.adam_beta2, static_cast<double>(t_));
        for (std::size_t p = 0; p < grads.size(); ++p) {
            Tensor& param = params.entries()[p].second;
            const Tensor& g = grads[p].second;
            Tensor& m = m_[p];
            Tensor& v = v_[p];
            for (std::size_t i = 0; i < param.size(); ++i) {
                m.values[i] = config_.adam_beta1 * m.values[i] + (1.0 - config_.adam_beta1) * g.values[i];
                v.values[i] =
                    config_.adam_beta2 * v.values[i] + (1.0 - config_.adam_beta2) * g.values[i] * g.values[i];
                const double m_hat = m.values[i] / bc1;
                const double v_hat = v.values[i] / bc2;
                param.values[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.adam_epsilon);
            }
        }
    }

private:
    TrainConfig config_;
    std::vector<Tensor> m_, v_;
    std::size_t t_ = 0;
};

} // namespace

TrainResult train(const ModelInstance& initial, const ModelInputs& inputs, const Tensor& target_raw,
                  const std::vector<bool>& train_mask, const TrainConfig& config) {
    config.validate();
    if (train_mask.size() != target_raw.rows || target_raw.rows != inputs.features.rows) {
        raise(ErrorKind::MaskMismatch, "rows disagree between features, target, and mask");
    }

    TrainResult result;
    result.target_stats = fit_target_stats(target_raw, train_mask);

    Tensor target_norm(target_raw.rows, 1);
    for (std::size_t i = 0; i < target_raw.rows; ++i) {
        target_norm.values[i] = (target_raw.values[i] - result.target_stats.mean) / result.target_stats.std_dev;
    }
    const double raw_scale = result.target_stats.std_dev * result.target_stats.std_dev;

    ModelInstance current = initial;
    AdamOptimizer optimizer(current.params, config);

    ForwardFn forward = [&](Tape& tape, const std::map<std::string, Tape::NodeId>& leaves) {
        auto features = tape.leaf(inputs.features);
        auto pred = model_forward(tape, current.config, leaves, features, inputs);
        auto target_leaf = tape.leaf(target_norm);
        return tape.masked_mse(pred, target_leaf, train_mask);
    };

    result.model = current;
    result.best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        auto vg = value_and_grad(forward, current.params);
        const double loss_raw = vg.value * raw_scale;
        if (!std::isfinite(loss_raw)) {
            raise(ErrorKind::NonFiniteLoss, "training diverged at epoch " + std::to_string(epoch));
        }
        result.loss_history.push_back(loss_raw);
        if (loss_raw < result.best_loss) {
            result.best_loss = loss_raw;
            result.best_epoch = epoch;
            result.model = current;
        } else if (epoch - result.best_epoch >= config.patience) {
            break;
        }
        optimizer.step(current.params, vg.grads);
    }
    return result;
}

MetricsEntry compute_metrics(const std::string& family, const std::string& target, const Tensor& actual,
                             const Tensor& predicted, const SplitMasks& masks) {
    MetricsEntry entry;
    entry.family = family;
    entry.target = target;
    entry.test_mse = masked_mse_value(predicted, actual, masks.test_mask);
    entry.test_mae = masked_mae(predicted, actual, masks.test_mask);
    entry.test_r2 = r_squared(actual, predicted, masks.test_mask);
    entry.train_mse = masked_mse_value(predicted, actual, masks.train_mask);
    entry.train_mae = masked_mae(predicted, actual, masks.train_mask);
    entry.train_r2 = r_squared(actual, predicted, masks.train_mask);
    return entry;
}

SuiteResult evaluate_suite(const std::vector<SampleRecord>& records, const SplitMasks& masks,
                           const std::vector<Family>& families, const std::vector<std::string>& targets,
                           const ModelConfig& base_config, const TrainConfig& train_config, std::size_t k) {
    const bool with_tda =
        std::find(families.begin(), families.end(), Family::TdaMlp) != families.end();
    auto artifacts = build_artifacts(records, masks, k, with_tda);
    return run_suite(records, masks, artifacts, families, targets, base_config, train_config);
}

SuiteResult run_suite(const std::vector<SampleRecord>& records, const SplitMasks& masks,
                      const PipelineArtifacts& artifacts, const std::vector<Family>& families,
                      const std::vector<std::string>& targets, const ModelConfig& base_config,
                      const TrainConfig& train_config) {
    SuiteResult result;
    std::vector<bool> all_rows(records.size(), true);
    for (Family family : families) {
        auto inputs = make_inputs(artifacts, family);
        for (const auto& target_name : targets) {
            auto t_idx = target_index(target_name);
            if (!t_idx) {
                raise(ErrorKind::UnknownParameter, "unknown target: " + target_name);
            }
            // Both masks feed metrics, so the whole column must be present.
            Tensor actual = target_column(records, *t_idx, all_rows);

            ModelConfig config = base_config;
            config.family = family;
            TrainConfig tc = train_config;
            tc.target = target_name;

            auto instance = init_model(config, inputs.features.cols);
            auto run = train(instance, inputs, actual, masks.train_mask, tc);

            Tensor pred_norm = predict(run.model, inputs);
            Tensor pred(pred_norm.rows, 1);
            for (std::size_t i = 0; i < pred.rows; ++i) {
                pred.values[i] = pred_norm.values[i] * run.target_stats.std_dev + run.target_stats.mean;
            }

            result.report.entries.push_back(
                compute_metrics(to_string(family), target_name, actual, pred, masks));
            result.predictions.push_back(std::move(pred));
            result.runs.push_back(std::move(run));
        }
    }
    return result;
}

std::string metrics_to_json(const MetricsReport& report) {
    nlohmann::ordered_json j;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : report.entries) {
        nlohmann::ordered_json item;
        item["family"] = e.family;
        item["target"] = e.target;
        item["test"] = {{"mse", e.test_mse}, {"mae", e.test_mae}, {"r2", e.test_r2}};
        item["train"] = {{"mse", e.train_mse}, {"mae", e.train_mae}, {"r2", e.train_r2}};
        entries.push_back(std::move(item));
    }
    j["entries"] = std::move(entries);
    return j.dump(2) + "\n";
}

MetricsReport metrics_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    MetricsReport report;
    for (const auto& item : j.at("entries")) {
        MetricsEntry e;
        e.family = item.at("family").get<std::string>();
        e.target = item.at("target").get<std::string>();
        e.test_mse = item.at("test").at("mse").get<double>();
        e.test_mae = item.at("test").at("mae").get<double>();
        e.test_r2 = item.at("test").at("r2").get<double>();
        e.train_mse = item.at("train").at("mse").get<double>();
        e.train_mae = item.at("train").at("mae").get<double>();
        e.train_r2 = item.at("train").at("r2").get<double>();
        report.entries.push_back(std::move(e));
    }
    return report;
}

std::string metrics_to_table(const MetricsReport& report) {
    // Group rows by target, one block per target.
    std::vector<std::string> targets;
    for (const auto& e : report.entries) {
        if (std::find(targets.begin(), targets.end(), e.target) == targets.end()) {
            targets.push_back(e.target);
        }
    }
    std::ostringstream out;
    for (const auto& target : targets) {
        out << "== " << target << " ==\n";
        out << "Algorithm       MSE             MAE             R2\n";
        for (const auto& e : report.entries) {
            if (e.target != target) {
                continue;
            }
            char line[128];
            std::snprintf(line, sizeof(line), "%-15s %-15.6f %-15.6f %.4f\n", e.family.c_str(), e.test_mse,
                          e.test_mae, e.test_r2);
            out << line;
        }
        out << "\n";
    }
    return out.str();
}

} // namespace coldspray
