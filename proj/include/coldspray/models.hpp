#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coldspray/autodiff.hpp"
#include "coldspray/graph.hpp"

namespace coldspray {

enum class Family { GraphSage, ChebSpectral, TdaMlp, Gat };

enum class Activation { Relu, Tanh, LeakyRelu };

const char* to_string(Family family);
const char* to_string(Activation activation);
std::optional<Family> family_from_string(const std::string& name);
std::optional<Activation> activation_from_string(const std::string& name);
std::vector<std::string> family_names();

struct ModelConfig {
    Family family = Family::GraphSage;
    std::vector<std::size_t> hidden_dims{32, 32};
    Activation activation = Activation::Relu;
    std::size_t cheb_order = 3; // polynomial terms per spectral layer
    std::size_t gat_heads = 1;
    double leaky_slope = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Everything a forward pass consumes besides parameters. Which members must
/// be present depends on the family; missing ones raise UnboundArtifact.
struct ModelInputs {
    Tensor features;                               // N x d (augmented for tdamlp)
    std::optional<Tensor> agg_matrix;              // graphsage: row-normalized weighted adjacency
    std::optional<Tensor> scaled_laplacian;        // chebspectral
    std::optional<Tape::EdgeStructure> edges;      // gat
    std::optional<Tensor> edge_weights;            // gat: E x 1 Gaussian weights
};

struct ModelInstance {
    ModelConfig config;
    ParamStore params;
};

/// Seeded parameter construction for the family's layer stack plus the
/// linear scalar readout.
ModelInstance init_model(const ModelConfig& config, std::size_t input_dim);

/// Weighted-mean aggregation operator: row i holds w_ij / sum_j w_ij over
/// the neighborhood of i, zero elsewhere.
Tensor build_agg_matrix(const FeatureGraph& graph);

/// Directed (node, neighbor) entries in contiguous per-node groups, plus the
/// matching E x 1 Gaussian weight column.
std::pair<Tape::EdgeStructure, Tensor> build_edge_structure(const FeatureGraph& graph);

/// Single layers, pre-activation. Exposed for tests and composition.
Tape::NodeId sage_combine(Tape& tape, Tape::NodeId h, Tape::NodeId agg_matrix, Tape::NodeId w_self,
                          Tape::NodeId w_neigh);
Tape::NodeId cheb_combine(Tape& tape, Tape::NodeId h, Tape::NodeId scaled_laplacian,
                          const std::vector<Tape::NodeId>& thetas);
Tape::NodeId gat_combine(Tape& tape, Tape::NodeId h, const Tape::EdgeStructure& edges,
                         Tape::NodeId edge_weights, Tape::NodeId weight, Tape::NodeId attention,
                         double leaky_slope);
Tape::NodeId dense_combine(Tape& tape, Tape::NodeId h, Tape::NodeId weight, Tape::NodeId bias);

Tape::NodeId apply_activation(Tape& tape, Tape::NodeId h, Activation activation, double leaky_slope);

/// Full stack: hidden layers of the family's type with activation, then the
/// linear readout to one output per node.
Tape::NodeId model_forward(Tape& tape, const ModelConfig& config,
                           const std::map<std::string, Tape::NodeId>& params, Tape::NodeId features,
                           const ModelInputs& inputs);

/// Convenience: run the forward pass on a throwaway tape and return values.
Tensor predict(const ModelInstance& instance, const ModelInputs& inputs);

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& text);

} // namespace coldspray
