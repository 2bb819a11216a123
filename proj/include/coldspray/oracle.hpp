#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coldspray/dataset.hpp"

namespace coldspray {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Default sampling envelopes for the three process inputs.
inline constexpr Range kVelocityRange{400.0, 900.0};   // m/s
inline constexpr Range kTempRange{300.0, 600.0};       // K
inline constexpr Range kFrictionRange{0.10, 0.50};     // dimensionless

struct OracleConfig {
    std::size_t n_samples = 100;
    std::uint64_t seed = 0;
    double noise_std = 0.02; // relative, per target
    Range velocity = kVelocityRange;
    Range particle_temp = kTempRange;
    Range friction = kFrictionRange;

    void validate() const;
};

struct InputPoint {
    double velocity;
    double particle_temp;
    double friction;
};

/// Midpoint Latin-hypercube design: each 1-D marginal places exactly one
/// point at the center of each of n equal bins; bin order per dimension is
/// a seeded permutation.
std::vector<InputPoint> sample_inputs(const OracleConfig& config);

/// Noise-free closed-form responses, ordered as the canonical target columns.
std::array<double, kNumTargets> respond(double velocity, double particle_temp, double friction);

/// sample_inputs + respond + multiplicative Gaussian noise of relative scale
/// noise_std on every target. Fully deterministic for a fixed config.
std::vector<SampleRecord> generate(const OracleConfig& config);

/// Config snapshot written next to a generated dataset.
std::string oracle_config_to_json(const OracleConfig& config);
OracleConfig oracle_config_from_json(const std::string& text);

} // namespace coldspray
