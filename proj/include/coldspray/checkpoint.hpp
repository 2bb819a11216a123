#pragma once

#include <optional>
#include <string>

#include "coldspray/training.hpp"

namespace coldspray {

/// Everything needed to reload a trained model and predict: configuration,
/// parameters, normalization stats, the split, the raw node coordinates,
/// and a reference to the graph edge-list file saved next to it.
struct Checkpoint {
    ModelConfig config;
    TrainConfig train_config;
    std::string target;
    std::size_t k = 8;
    NormStats input_stats;
    TargetStats target_stats;
    std::optional<NormStats> descriptor_stats; // tdamlp only
    SplitMasks masks;
    std::array<double, kNumInputs> input_medians{};
    Tensor nodes_raw; // N x 3 raw inputs the graph was built on
    double sigma = 0.0;
    double lambda_max = 2.0;
    std::string graph_file; // relative to the checkpoint's directory
    ParamStore params;
    std::size_t best_epoch = 0;
    double best_loss = 0.0;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Checkpoint plus the reloaded graph and the forward-ready artifacts
/// rebuilt deterministically from the stored inputs.
struct LoadedModel {
    Checkpoint meta;
    FeatureGraph graph;
    ModelInputs inputs;
    ModelInstance instance;
};

LoadedModel load_model(const std::string& checkpoint_path);

/// Build the forward inputs for a checkpoint from an explicit feature
/// matrix (defaults to the stored nodes).
ModelInputs checkpoint_inputs(const Checkpoint& checkpoint, const FeatureGraph& graph,
                              const Tensor& raw_features);

/// Transductive predictions for all stored nodes, denormalized.
Tensor repredict(const LoadedModel& model);

/// Single-point prediction. Graph families attach the query to the stored
/// graph through its k nearest training nodes with Gaussian weights; the
/// spectral family extends the Laplacian symmetrically. The MLP family
/// recomputes query descriptors against the stored cloud (a query that
/// exactly coincides with a stored node reuses that node's descriptors).
double predict_point(const LoadedModel& model, double velocity, double particle_temp, double friction);

} // namespace coldspray
