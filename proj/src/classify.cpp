#include "sphembed/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sphembed/kernels.hpp"

namespace sphembed {

KnnIndex build_knn_index(const EmbeddingBatch &reference) {
    if (reference.count() == 0)
        throw contract_error("knn index: reference set is empty");
    if (!reference.normalized)
        throw contract_error("knn index: reference must be normalized");
    std::set<int> classes(reference.labels.begin(), reference.labels.end());
    if (classes.size() < 2)
        throw contract_error("knn index: need at least 2 classes");
    KnnIndex index;
    index.reference = reference;
    index.n_classes = *classes.rbegin() + 1;
    return index;
}

namespace {

struct Neighbor {
    double dist;
    std::size_t idx;
};

int vote(const KnnIndex &index, const std::vector<Neighbor> &neighbors,
         int k) {
    std::vector<int> counts(index.n_classes, 0);
    std::vector<double> sums(index.n_classes, 0.0);
    for (int i = 0; i < k; ++i) {
        const int c = index.reference.labels[neighbors[i].idx];
        counts[c]++;
        sums[c] += neighbors[i].dist;
    }
    int best = -1;
    for (int c = 0; c < index.n_classes; ++c) {
        if (counts[c] == 0)
            continue;
        if (best < 0 || counts[c] > counts[best] ||
            (counts[c] == counts[best] && sums[c] < sums[best]))
            best = c;
    }
    return best;
}

} // namespace

std::vector<int> knn_classify(const KnnIndex &index,
                              const EmbeddingBatch &queries, int k,
                              KnnMetric metric, bool exclude_self) {
    const std::size_t nq = queries.count();
    const std::size_t nr = index.reference.count();
    if (k < 1 || static_cast<std::size_t>(k) > nr)
        throw contract_error("k must be in [1, reference size]");
    if (!queries.normalized)
        throw contract_error("knn_classify: queries must be normalized");
    if (queries.dim() != index.reference.dim())
        throw contract_error("knn_classify: dimension mismatch");
    if (exclude_self && nq != nr)
        throw contract_error("exclude_self requires queries == reference");

    Tensor dist({nq, nr});
    kernels::pairwise_sqdist(queries.vectors.data(),
                             index.reference.vectors.data(), dist.data(), nq,
                             nr, queries.dim());
    if (metric == KnnMetric::Cosine) {
        // 1 − qᵀr = ‖q−r‖²/2 on unit vectors; a monotone remap, so the
        // ordering (and therefore every prediction) is unchanged.
        for (std::size_t i = 0; i < dist.size(); ++i)
            dist[i] *= 0.5;
    }

    std::vector<int> predictions(nq);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(nq); ++qi) {
        std::vector<Neighbor> neighbors;
        neighbors.reserve(nr);
        for (std::size_t r = 0; r < nr; ++r) {
            if (exclude_self && r == static_cast<std::size_t>(qi))
                continue;
            neighbors.push_back({dist.at2(qi, r), r});
        }
        std::sort(neighbors.begin(), neighbors.end(),
                  [](const Neighbor &a, const Neighbor &b) {
                      return a.dist != b.dist ? a.dist < b.dist
                                              : a.idx < b.idx;
                  });
        predictions[qi] = vote(index, neighbors, k);
    }
    return predictions;
}

SweepResult knn_sweep(const KnnIndex &index, const EmbeddingBatch &validation,
                      int k_max) {
    if (k_max < 1 ||
        static_cast<std::size_t>(k_max) > index.reference.count())
        throw contract_error("k_max must be in [1, reference size]");
    SweepResult result;
    result.accuracy.resize(k_max);
    const std::size_t n = validation.count();
    for (int k = 1; k <= k_max; ++k) {
        const std::vector<int> pred = knn_classify(index, validation, k);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (pred[i] == validation.labels[i])
                ++hits;
        result.accuracy[k - 1] =
            n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
    }
    result.best_k = 1;
    for (int k = 2; k <= k_max; ++k)
        if (result.accuracy[k - 1] > result.accuracy[result.best_k - 1])
            result.best_k = k;
    return result;
}

Tensor class_scores(const KnnIndex &index, const EmbeddingBatch &queries) {
    if (!queries.normalized)
        throw contract_error("class_scores: queries must be normalized");
    const std::size_t nq = queries.count();
    const std::size_t nr = index.reference.count();
    const std::size_t d = queries.dim();
    const int nc = index.n_classes;
    for (int c = 0; c < nc; ++c) {
        if (std::find(index.reference.labels.begin(),
                      index.reference.labels.end(),
                      c) == index.reference.labels.end())
            throw contract_error("class_scores: class " + std::to_string(c) +
                                 " absent from index");
    }

    Tensor scores({nq, static_cast<std::size_t>(nc)});
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(nq); ++qi) {
        std::vector<double> best(nc, std::numeric_limits<double>::infinity());
        for (std::size_t r = 0; r < nr; ++r) {
            double dot = 0.0;
            for (std::size_t u = 0; u < d; ++u)
                dot += queries.vectors.at2(qi, u) *
                       index.reference.vectors.at2(r, u);
            const double cosdist = 1.0 - dot;
            const int c = index.reference.labels[r];
            best[c] = std::min(best[c], cosdist);
        }
        for (int c = 0; c < nc; ++c)
            scores.at2(qi, c) = 1.0 - best[c];
    }
    return scores;
}

} // namespace sphembed
