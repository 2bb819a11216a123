#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coldspray/tensor.hpp"

namespace coldspray {

inline constexpr std::size_t kNumInputs = 3;
inline constexpr std::size_t kNumTargets = 5;

inline constexpr std::array<const char*, kNumInputs> kInputNames = {
    "velocity", "particle_temp", "friction"};

inline constexpr std::array<const char*, kNumTargets> kTargetNames = {
    "max_peeq", "avg_peeq_contact", "max_temp_K", "max_von_mises_MPa", "deformation_ratio"};

inline constexpr const char* kCsvHeader =
    "velocity_ms,particle_temp_K,friction,max_peeq,avg_peeq_contact,max_temp_K,"
    "max_von_mises_MPa,deformation_ratio";

/// Index of a target column by canonical name, or nullopt.
std::optional<std::size_t> target_index(const std::string& name);
std::optional<std::size_t> input_index(const std::string& name);

/// One process condition. Inputs are always present; each target is optional
/// so partially populated datasets can still train per-target models.
struct SampleRecord {
    double velocity = 0.0;      // m/s
    double particle_temp = 0.0; // K
    double friction = 0.0;      // dimensionless
    std::array<std::optional<double>, kNumTargets> targets;

    double input(std::size_t f) const {
        return f == 0 ? velocity : (f == 1 ? particle_temp : friction);
    }
};

/// Per-feature mean and population std, fit on training rows only.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> std_dev; // strictly positive
    std::vector<std::string> columns;
};

struct SplitMasks {
    std::vector<bool> train_mask;
    std::vector<bool> test_mask;

    std::size_t size() const { return train_mask.size(); }
    std::size_t train_count() const;
    std::size_t test_count() const;
};

/// Parse the canonical CSV. Throws MalformedHeader / MalformedRow /
/// NonNumericCell / EmptyFile / InvalidValue per the schema contract.
std::vector<SampleRecord> load_csv(const std::string& path);

/// Serialize records in the canonical format (exact header, LF, '.' decimal,
/// shortest round-trip numbers, empty cell for a missing target).
std::string to_csv(const std::vector<SampleRecord>& records);
void write_csv(const std::vector<SampleRecord>& records, const std::string& path);

/// Hard invariants (finite values, friction >= 0, temp > 0, ...). Throws
/// InvalidValue naming the offending row and field.
void validate_records(const std::vector<SampleRecord>& records);

/// Soft Table-2 envelope checks; returns one human-readable warning per
/// out-of-range value.
std::vector<std::string> range_warnings(const std::vector<SampleRecord>& records);

/// N x 3 matrix of raw input features.
Tensor input_matrix(const std::vector<SampleRecord>& records);

/// Column f of the targets; throws MissingTarget if any masked row lacks it.
/// Rows outside the mask may be absent and are returned as 0.
Tensor target_column(const std::vector<SampleRecord>& records, std::size_t target,
                     const std::vector<bool>& required_mask);

/// Mean / population std of each column over training rows only.
/// Throws TooFewRows (< 2 training rows) or ConstantFeature (zero std).
NormStats zscore_fit(const Tensor& features, const std::vector<bool>& train_mask,
                     const std::vector<std::string>& column_names);
NormStats zscore_fit(const std::vector<SampleRecord>& records, const std::vector<bool>& train_mask);

/// (x - mean) / std per column, applied to every row.
Tensor zscore_apply(const Tensor& features, const NormStats& stats);
Tensor zscore_apply(const std::vector<SampleRecord>& records, const NormStats& stats);

/// Deterministic shuffle split; test count = round(n * test_fraction).
SplitMasks split_masks(std::size_t n, double test_fraction, std::uint64_t seed);

/// JSON (de)serialization for run reproducibility.
std::string norm_stats_to_json(const NormStats& stats);
NormStats norm_stats_from_json(const std::string& text);
std::string split_masks_to_json(const SplitMasks& masks);
SplitMasks split_masks_from_json(const std::string& text);

} // namespace coldspray
