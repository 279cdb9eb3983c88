#pragma once

#include <vector>

#include "sphembed/tensor.hpp"

namespace sphembed {

/// N×d embedding matrix with per-row class labels.
struct EmbeddingBatch {
    Tensor vectors; // N×d
    std::vector<int> labels;
    bool normalized = false;

    std::size_t count() const { return vectors.dim(0); }
    std::size_t dim() const { return vectors.dim(1); }
};

/// Row-wise unit normalization onto the hypersphere.
EmbeddingBatch l2_normalize(const EmbeddingBatch &batch);

/// 1 − aᵀb for unit vectors; range [0, 2].
double cosine_distance(const std::vector<double> &a,
                       const std::vector<double> &b);

/// sqrt(2 · cosine_distance); equals ‖a−b‖ on the unit sphere.
double euclidean_distance(const std::vector<double> &a,
                          const std::vector<double> &b);

/// arccos of the clamped dot product; range [0, π].
double angle_between(const std::vector<double> &a,
                     const std::vector<double> &b);

struct SeparationStats {
    Tensor centroids; // n_classes × d unit directions
    double mean_intra_angle = 0.0;
    double min_inter_angle = 0.0;
};

/// Class-compactness / separability summary over a normalized batch.
SeparationStats separation_stats(const EmbeddingBatch &batch);

} // namespace sphembed
