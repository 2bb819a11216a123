#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "coldspray/oracle.hpp"
#include "coldspray/training.hpp"

namespace coldspray::cli {

/// generate: synthetic dataset CSV plus a config sidecar and a manifest.
struct GenerateCmd {
    std::size_t n = 100;
    std::uint64_t seed = 0;
    double noise = 0.02;
    std::string out;
};
void run_generate(const GenerateCmd& cmd);

/// train: normalization, split, graph, (descriptors), training, checkpoint.
/// family/target accept "all" for the full grid.
struct TrainCmd {
    std::string data;
    std::string family = "graphsage";
    std::string target = "max_peeq";
    std::size_t k = 8;
    double test_fraction = 0.2;
    std::uint64_t seed = 7;
    std::size_t epochs = 2000;
    double learning_rate = 1e-2;
    std::string out;
};
void run_train(const TrainCmd& cmd);

/// evaluate: metrics on each checkpoint's stored test mask, plus per-sample
/// actual,predicted CSVs for plotting.
struct EvaluateCmd {
    std::vector<std::string> checkpoints;
    std::string data;
    std::string out = ".";
    bool json_stdout = false;
};
void run_evaluate(const EvaluateCmd& cmd, std::ostream& stdout_stream);

/// surface: fix one input (value or dataset median), sweep the other two
/// over their default envelopes on a grid x grid lattice.
struct SurfaceCmd {
    std::string checkpoint;
    std::string fix; // "<param>=<value|median>"
    std::size_t grid = 50;
    std::string out;
};
void run_surface(const SurfaceCmd& cmd);

struct PredictCmd {
    std::string checkpoint;
    double velocity = 0.0;
    double particle_temp = 0.0;
    double friction = 0.0;
};
void run_predict(const PredictCmd& cmd, std::ostream& stdout_stream);

/// Shared exit-code policy: 0 success, 2 usage/validation, 3 numerical.
int exit_code_for(const Error& error);

} // namespace coldspray::cli
