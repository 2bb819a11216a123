#pragma once

#include <cstddef>
#include <vector>

#include "coldspray/tensor.hpp"

namespace coldspray {

inline constexpr std::size_t kNumDescriptors = 4;

inline const std::vector<std::string> kDescriptorNames = {
    "tda_mean_knn_dist", "tda_max_knn_dist", "tda_inv_density", "tda_death_time"};

/// Zero-dimensional persistence death times from single-linkage clustering
/// (the Euclidean minimum spanning tree). MST edges are processed in
/// ascending length; at each merge the younger component dies (smaller
/// size, ties to the higher minimum node index) and its members without a
/// death time receive the merge length. Survivors of the last merge get the
/// longest MST edge as a finite cap.
std::vector<double> mst_death_times(const Tensor& x);

/// Per-node raw descriptors, columns ordered as kDescriptorNames:
/// mean kNN distance, max kNN distance, k / (mean kNN distance)^3 (a
/// nearest-neighbor density proxy in the 3-D feature space; 0 when the mean
/// distance is 0), and the 0-dim persistence death time.
Tensor node_descriptors(const Tensor& x, std::size_t k);

/// Column concatenation [x | descriptors]; rows must match.
Tensor augment_features(const Tensor& x, const Tensor& descriptors);

} // namespace coldspray
