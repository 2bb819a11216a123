#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coldspray/dataset.hpp"
#include "coldspray/models.hpp"

namespace coldspray {

struct TrainConfig {
    std::size_t max_epochs = 2000;
    double learning_rate = 1e-2;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t patience = 200; // epochs without a new best train loss
    std::string target = "max_peeq";
    std::uint64_t seed = 0;

    void validate() const;
};

/// Masked-row metrics on whatever scale the inputs carry.
double masked_mse_value(const Tensor& pred, const Tensor& target, const std::vector<bool>& mask);
double masked_mae(const Tensor& pred, const Tensor& target, const std::vector<bool>& mask);
/// R^2 = 1 - SS_res / SS_tot with the mean over masked rows; may be negative.
double r_squared(const Tensor& actual, const Tensor& predicted, const std::vector<bool>& mask);

/// Mean / population std of a target over training rows; used to condition
/// the optimizer. Predictions and reported metrics stay on the raw scale.
struct TargetStats {
    double mean = 0.0;
    double std_dev = 1.0;
};
TargetStats fit_target_stats(const Tensor& target, const std::vector<bool>& train_mask);

/// Normalized inputs plus every graph-derived artifact a forward pass may
/// bind. Descriptor artifacts are only built when with_tda is set.
struct PipelineArtifacts {
    NormStats input_stats;
    Tensor x_norm; // N x 3
    FeatureGraph graph;
    double lambda_max = 2.0;
    Tensor scaled_laplacian;
    Tensor agg_matrix;
    Tape::EdgeStructure edges;
    Tensor edge_weights;
    bool has_tda = false;
    NormStats descriptor_stats;
    Tensor x_augmented; // N x 7
    std::array<double, kNumInputs> input_medians{};
};

PipelineArtifacts build_artifacts(const std::vector<SampleRecord>& records, const SplitMasks& masks,
                                  std::size_t k, bool with_tda);

ModelInputs make_inputs(const PipelineArtifacts& artifacts, Family family);

struct TrainResult {
    ModelInstance model; // parameters of the best (lowest train loss) epoch
    TargetStats target_stats;
    std::vector<double> loss_history; // per-epoch train MSE, raw target scale
    std::size_t best_epoch = 0;
    double best_loss = 0.0;
};

/// Full-batch Adam on the masked MSE. Test nodes participate in message
/// passing but never in the loss. Deterministic for a fixed seed; throws
/// NonFiniteLoss naming the epoch on divergence.
TrainResult train(const ModelInstance& initial, const ModelInputs& inputs, const Tensor& target_raw,
                  const std::vector<bool>& train_mask, const TrainConfig& config);

struct MetricsEntry {
    std::string family;
    std::string target;
    double test_mse = 0.0, test_mae = 0.0, test_r2 = 0.0;
    double train_mse = 0.0, train_mae = 0.0, train_r2 = 0.0;
};

struct MetricsReport {
    std::vector<MetricsEntry> entries;
};

MetricsEntry compute_metrics(const std::string& family, const std::string& target, const Tensor& actual,
                             const Tensor& predicted, const SplitMasks& masks);

/// Trains every (family, target) cell on shared artifacts and reports
/// test-mask metrics (train-mask duplicates included for diagnostics).
struct SuiteResult {
    MetricsReport report;
    // Denormalized predictions per cell, aligned with report.entries.
    std::vector<Tensor> predictions;
    std::vector<TrainResult> runs;
};
SuiteResult evaluate_suite(const std::vector<SampleRecord>& records, const SplitMasks& masks,
                           const std::vector<Family>& families, const std::vector<std::string>& targets,
                           const ModelConfig& base_config, const TrainConfig& train_config, std::size_t k);

/// Same grid over artifacts the caller already built.
SuiteResult run_suite(const std::vector<SampleRecord>& records, const SplitMasks& masks,
                      const PipelineArtifacts& artifacts, const std::vector<Family>& families,
                      const std::vector<std::string>& targets, const ModelConfig& base_config,
                      const TrainConfig& train_config);

std::string metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const std::string& text);
/// Fixed-width per-target blocks: one row per algorithm with MSE, MAE, R^2.
std::string metrics_to_table(const MetricsReport& report);

} // namespace coldspray
