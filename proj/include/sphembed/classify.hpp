#pragma once

#include <vector>

#include "sphembed/geometry.hpp"

namespace sphembed {

/// Immutable reference set for nearest-neighbor classification.
struct KnnIndex {
    EmbeddingBatch reference; // normalized, >= 2 classes
    int n_classes = 0;
};

KnnIndex build_knn_index(const EmbeddingBatch &reference);

enum class KnnMetric { Euclidean, Cosine };

/// Majority vote among the k nearest references. Ties broken by
/// smallest summed distance, then lowest class index. The metric
/// choice cannot change the result on normalized embeddings; both are
/// kept so the equivalence is testable end-to-end.
std::vector<int> knn_classify(const KnnIndex &index,
                              const EmbeddingBatch &queries, int k,
                              KnnMetric metric = KnnMetric::Euclidean,
                              bool exclude_self = false);

struct SweepResult {
    int best_k = 1;
    std::vector<double> accuracy; // accuracy[k-1] for k = 1..k_max
};

/// Evaluates k = 1..k_max and returns the smallest k with maximal
/// accuracy plus the full curve.
SweepResult knn_sweep(const KnnIndex &index, const EmbeddingBatch &validation,
                      int k_max = 30);

/// score(query, class) = 1 − min cosine distance to any reference of
/// that class; the one-vs-rest score feeding ROC/AUC.
Tensor class_scores(const KnnIndex &index, const EmbeddingBatch &queries);

} // namespace sphembed
