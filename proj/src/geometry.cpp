#include "sphembed/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace sphembed {

namespace {

double dot(const std::vector<double> &a, const std::vector<double> &b) {
    if (a.size() != b.size())
        throw contract_error("vector dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i] * b[i];
    return acc;
}

void require_unit(const std::vector<double> &v, const char *which) {
    const double n = std::sqrt(dot(v, v));
    if (std::abs(n - 1.0) > 1e-6)
        throw contract_error(std::string(which) +
                             " vector is not unit-norm (norm " +
                             std::to_string(n) + ")");
}

} // namespace

EmbeddingBatch l2_normalize(const EmbeddingBatch &batch) {
    const std::size_t n = batch.count();
    const std::size_t d = batch.dim();
    EmbeddingBatch out = batch;
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            sq += batch.vectors.at2(i, j) * batch.vectors.at2(i, j);
        const double norm = std::sqrt(sq);
        if (norm == 0.0)
            throw contract_error("l2_normalize: row " + std::to_string(i) +
                                 " has zero norm");
        for (std::size_t j = 0; j < d; ++j)
            out.vectors.at2(i, j) = batch.vectors.at2(i, j) / norm;
    }
    out.normalized = true;
    return out;
}

double cosine_distance(const std::vector<double> &a,
                       const std::vector<double> &b) {
    require_unit(a, "first");
    require_unit(b, "second");
    return 1.0 - dot(a, b);
}

double euclidean_distance(const std::vector<double> &a,
                          const std::vector<double> &b) {
    return std::sqrt(std::max(0.0, 2.0 * cosine_distance(a, b)));
}

double angle_between(const std::vector<double> &a,
                     const std::vector<double> &b) {
    require_unit(a, "first");
    require_unit(b, "second");
    return std::acos(std::clamp(dot(a, b), -1.0, 1.0));
}

SeparationStats separation_stats(const EmbeddingBatch &batch) {
    if (!batch.normalized)
        throw contract_error("separation_stats requires a normalized batch");
    const std::size_t n = batch.count();
    const std::size_t d = batch.dim();
    std::set<int> classes(batch.labels.begin(), batch.labels.end());
    if (classes.size() < 2)
        throw contract_error("separation_stats needs at least 2 classes");
    const int n_classes = *classes.rbegin() + 1;

    Tensor centroids({static_cast<std::size_t>(n_classes), d});
    std::vector<std::size_t> counts(n_classes, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = batch.labels[i];
        counts[c]++;
        for (std::size_t j = 0; j < d; ++j)
            centroids.at2(c, j) += batch.vectors.at2(i, j);
    }
    for (int c = 0; c < n_classes; ++c) {
        if (counts[c] == 0)
            throw contract_error("separation_stats: class " +
                                 std::to_string(c) + " is empty");
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            sq += centroids.at2(c, j) * centroids.at2(c, j);
        const double norm = std::sqrt(sq);
        if (norm == 0.0)
            throw contract_error("separation_stats: class " +
                                 std::to_string(c) +
                                 " has a zero mean direction");
        for (std::size_t j = 0; j < d; ++j)
            centroids.at2(c, j) /= norm;
    }

    double intra_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int c = batch.labels[i];
        double t = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            t += batch.vectors.at2(i, j) * centroids.at2(c, j);
        intra_sum += std::acos(std::clamp(t, -1.0, 1.0));
    }

    double min_inter = std::numbers::pi;
    for (int a = 0; a < n_classes; ++a)
        for (int b = a + 1; b < n_classes; ++b) {
            double t = 0.0;
            for (std::size_t j = 0; j < d; ++j)
                t += centroids.at2(a, j) * centroids.at2(b, j);
            min_inter =
                std::min(min_inter, std::acos(std::clamp(t, -1.0, 1.0)));
        }

    SeparationStats stats;
    stats.centroids = std::move(centroids);
    stats.mean_intra_angle = intra_sum / static_cast<double>(n);
    stats.min_inter_angle = min_inter;
    return stats;
}

} // namespace sphembed
