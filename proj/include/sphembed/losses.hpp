#pragma once

#include <array>
#include <string>
#include <vector>

#include "sphembed/geometry.hpp"
#include "sphembed/tensor.hpp"

namespace sphembed {

enum class LossKind { Softmax, ModifiedSoftmax, SphereFace, Triplet };

std::string loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string &name);

struct LossConfig {
    LossKind kind = LossKind::SphereFace;
    int m = 5;                   // integer angular margin
    double s = 30.0;             // logit scale
    double triplet_margin = 0.2; // squared-distance hinge margin
};

/// Non-fatal configuration notes (e.g. m below the recommended range).
std::vector<std::string> loss_config_warnings(const LossConfig &config);

/// One weight column per class; d×n.
struct ClassWeights {
    Tensor W;
    std::size_t classes() const { return W.dim(1); }
    std::size_t dim() const { return W.dim(0); }
};

struct LossResult {
    double loss = 0.0;
    Tensor grad_x; // N×d, wrt raw (pre-normalization) embeddings
    Tensor grad_W; // d×n
};

/// Piecewise monotone angular surrogate (−1)^k cos(mθ) − 2k with
/// θ ∈ [kπ/m, (k+1)π/m]. Continuous and non-increasing on [0, π].
double psi(double theta, int m);
/// dΨ/dθ on the interior of a segment.
double psi_dtheta(double theta, int m);

/// Plain softmax cross-entropy on raw logits Wᵀx (no normalization).
LossResult softmax_loss(const EmbeddingBatch &batch,
                        const ClassWeights &weights);

/// Angular-margin loss over internally unit-normalized embeddings and
/// weight columns; gradients flow through the normalization.
LossResult sphereface_loss(const EmbeddingBatch &batch,
                           const ClassWeights &weights,
                           const LossConfig &config);

/// Normalized angular softmax without margin (margin m = 1).
LossResult modified_softmax_loss(const EmbeddingBatch &batch,
                                 const ClassWeights &weights, double s);

using Triplet = std::array<std::size_t, 3>; // anchor, positive, negative

/// Batch-hard mining on unit-normalized embeddings: farthest positive,
/// nearest negative per anchor. Empty result when no valid triple exists.
std::vector<Triplet> mine_triplets(const EmbeddingBatch &batch);

struct TripletLossResult {
    double loss = 0.0;
    Tensor grad_x;
};

/// Hinged squared-distance triplet loss on unit-normalized embeddings.
TripletLossResult triplet_loss(const EmbeddingBatch &batch,
                               const std::vector<Triplet> &triples,
                               double margin);

} // namespace sphembed
