#include "sphembed/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sphembed {

namespace {

constexpr double kCosClamp = 1e-12;

struct NormalizedView {
    std::vector<double> norms;
    Tensor unit; // same shape as source
};

NormalizedView normalize_rows(const Tensor &m, const char *who) {
    const std::size_t n = m.dim(0), d = m.dim(1);
    NormalizedView v{std::vector<double>(n), Tensor(m.shape())};
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            sq += m.at2(i, j) * m.at2(i, j);
        const double norm = std::sqrt(sq);
        if (norm == 0.0)
            throw contract_error(std::string(who) + " row " +
                                 std::to_string(i) + " has zero norm");
        v.norms[i] = norm;
        for (std::size_t j = 0; j < d; ++j)
            v.unit.at2(i, j) = m.at2(i, j) / norm;
    }
    return v;
}

NormalizedView normalize_cols(const Tensor &m, const char *who) {
    const std::size_t d = m.dim(0), n = m.dim(1);
    NormalizedView v{std::vector<double>(n), Tensor(m.shape())};
    for (std::size_t j = 0; j < n; ++j) {
        double sq = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            sq += m.at2(i, j) * m.at2(i, j);
        const double norm = std::sqrt(sq);
        if (norm == 0.0)
            throw contract_error(std::string(who) + " column " +
                                 std::to_string(j) + " has zero norm");
        v.norms[j] = norm;
        for (std::size_t i = 0; i < d; ++i)
            v.unit.at2(i, j) = m.at2(i, j) / norm;
    }
    return v;
}

void check_labels(const EmbeddingBatch &batch, std::size_t n_classes) {
    if (batch.labels.size() != batch.count())
        throw contract_error("label count does not match batch size");
    for (int y : batch.labels)
        if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
            throw contract_error("label " + std::to_string(y) +
                                 " outside [0, " + std::to_string(n_classes) +
                                 ")");
}

} // namespace

std::string loss_kind_name(LossKind kind) {
    switch (kind) {
    case LossKind::Softmax: return "softmax";
    case LossKind::ModifiedSoftmax: return "modified-softmax";
    case LossKind::SphereFace: return "sphereface";
    case LossKind::Triplet: return "triplet";
    }
    return "?";
}

LossKind loss_kind_from_name(const std::string &name) {
    if (name == "softmax") return LossKind::Softmax;
    if (name == "modified-softmax") return LossKind::ModifiedSoftmax;
    if (name == "sphereface") return LossKind::SphereFace;
    if (name == "triplet") return LossKind::Triplet;
    throw contract_error("unknown loss kind '" + name + "'");
}

std::vector<std::string> loss_config_warnings(const LossConfig &config) {
    std::vector<std::string> out;
    if (config.kind == LossKind::SphereFace && config.m < 4)
        out.push_back("margin m=" + std::to_string(config.m) +
                      " is below the recommended m >= 4 range");
    return out;
}

double psi(double theta, int m) {
    if (m < 1)
        throw contract_error("psi: margin m must be a positive integer");
    if (theta < 0.0 || theta > std::numbers::pi)
        throw contract_error("psi: theta outside [0, pi]");
    if (theta == std::numbers::pi)
        return -(2.0 * m - 1.0); // exact endpoint
    int k = static_cast<int>(std::floor(theta * m / std::numbers::pi));
    k = std::clamp(k, 0, m - 1);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return sign * std::cos(m * theta) - 2.0 * k;
}

double psi_dtheta(double theta, int m) {
    if (m < 1)
        throw contract_error("psi_dtheta: margin m must be positive");
    theta = std::clamp(theta, 0.0, std::numbers::pi);
    int k = static_cast<int>(std::floor(theta * m / std::numbers::pi));
    k = std::clamp(k, 0, m - 1);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return -sign * m * std::sin(m * theta);
}

LossResult softmax_loss(const EmbeddingBatch &batch,
                        const ClassWeights &weights) {
    const std::size_t n = batch.count(), d = batch.dim(),
                      c = weights.classes();
    if (weights.dim() != d)
        throw contract_error("class weight rows do not match embedding dim");
    check_labels(batch, c);

    LossResult out;
    out.grad_x = Tensor({n, d});
    out.grad_W = Tensor({d, c});
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<double> logits(c), probs(c);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            double z = 0.0;
            for (std::size_t t = 0; t < d; ++t)
                z += batch.vectors.at2(i, t) * weights.W.at2(t, j);
            logits[j] = z;
        }
        const double zmax = *std::max_element(logits.begin(), logits.end());
        double denom = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            probs[j] = std::exp(logits[j] - zmax);
            denom += probs[j];
        }
        const std::size_t y = static_cast<std::size_t>(batch.labels[i]);
        total += std::log(denom) - (logits[y] - zmax);
        for (std::size_t j = 0; j < c; ++j) {
            const double dz =
                (probs[j] / denom - (j == y ? 1.0 : 0.0)) * inv_n;
            for (std::size_t t = 0; t < d; ++t) {
                out.grad_x.at2(i, t) += dz * weights.W.at2(t, j);
                out.grad_W.at2(t, j) += dz * batch.vectors.at2(i, t);
            }
        }
    }
    out.loss = total * inv_n;
    if (!std::isfinite(out.loss))
        throw numeric_error("softmax_loss produced a non-finite value");
    return out;
}

LossResult sphereface_loss(const EmbeddingBatch &batch,
                           const ClassWeights &weights,
                           const LossConfig &config) {
    if (config.m < 1)
        throw contract_error("sphereface_loss: m must be a positive integer");
    if (!(config.s > 0.0))
        throw contract_error("sphereface_loss: scale s must be positive");
    const std::size_t n = batch.count(), d = batch.dim(),
                      c = weights.classes();
    if (weights.dim() != d)
        throw contract_error("class weight rows do not match embedding dim");
    check_labels(batch, c);

    const NormalizedView xs = normalize_rows(batch.vectors, "embedding");
    const NormalizedView ws = normalize_cols(weights.W, "weight");
    const double s = config.s;
    const int m = config.m;

    LossResult out;
    out.grad_x = Tensor({n, d});
    out.grad_W = Tensor({d, c});
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<double> cosines(c), logits(c), probs(c), dcos(c);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t y = static_cast<std::size_t>(batch.labels[i]);
        for (std::size_t j = 0; j < c; ++j) {
            double t = 0.0;
            for (std::size_t u = 0; u < d; ++u)
                t += xs.unit.at2(i, u) * ws.unit.at2(u, j);
            cosines[j] = t;
            logits[j] = s * t;
        }
        // target logit goes through the margin surrogate
        const double tc =
            std::clamp(cosines[y], -1.0 + kCosClamp, 1.0 - kCosClamp);
        const double theta = std::acos(tc);
        logits[y] = s * psi(theta, m);

        const double zmax = *std::max_element(logits.begin(), logits.end());
        double denom = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            probs[j] = std::exp(logits[j] - zmax);
            denom += probs[j];
        }
        total += std::log(denom) - (logits[y] - zmax);

        // dθ/dcos via the clamped value keeps the factor bounded
        const double dtheta_dcos = -1.0 / std::sqrt(1.0 - tc * tc);
        for (std::size_t j = 0; j < c; ++j) {
            const double dz =
                (probs[j] / denom - (j == y ? 1.0 : 0.0)) * inv_n;
            dcos[j] = j == y
                          ? dz * s * psi_dtheta(theta, m) * dtheta_dcos
                          : dz * s;
        }
        // chain through both unit normalizations
        for (std::size_t j = 0; j < c; ++j) {
            const double g = dcos[j];
            if (g == 0.0)
                continue;
            const double t = cosines[j];
            for (std::size_t u = 0; u < d; ++u) {
                out.grad_x.at2(i, u) +=
                    g * (ws.unit.at2(u, j) - t * xs.unit.at2(i, u)) /
                    xs.norms[i];
                out.grad_W.at2(u, j) +=
                    g * (xs.unit.at2(i, u) - t * ws.unit.at2(u, j)) /
                    ws.norms[j];
            }
        }
    }
    out.loss = total * inv_n;
    if (!std::isfinite(out.loss))
        throw numeric_error("sphereface_loss produced a non-finite value");
    return out;
}

LossResult modified_softmax_loss(const EmbeddingBatch &batch,
                                 const ClassWeights &weights, double s) {
    LossConfig config;
    config.kind = LossKind::ModifiedSoftmax;
    config.m = 1;
    config.s = s;
    return sphereface_loss(batch, weights, config);
}

std::vector<Triplet> mine_triplets(const EmbeddingBatch &batch) {
    const std::size_t n = batch.count();
    if (batch.labels.size() != n)
        throw contract_error("label count does not match batch size");
    const EmbeddingBatch unit =
        batch.normalized ? batch : l2_normalize(batch);
    const std::size_t d = unit.dim();

    std::vector<Triplet> triples;
    for (std::size_t a = 0; a < n; ++a) {
        std::ptrdiff_t best_pos = -1, best_neg = -1;
        double pos_dist = -1.0, neg_dist = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == a)
                continue;
            double sq = 0.0;
            for (std::size_t u = 0; u < d; ++u) {
                const double diff =
                    unit.vectors.at2(a, u) - unit.vectors.at2(j, u);
                sq += diff * diff;
            }
            if (batch.labels[j] == batch.labels[a]) {
                if (sq > pos_dist) {
                    pos_dist = sq;
                    best_pos = static_cast<std::ptrdiff_t>(j);
                }
            } else {
                if (best_neg < 0 || sq < neg_dist) {
                    neg_dist = sq;
                    best_neg = static_cast<std::ptrdiff_t>(j);
                }
            }
        }
        if (best_pos >= 0 && best_neg >= 0)
            triples.push_back({a, static_cast<std::size_t>(best_pos),
                               static_cast<std::size_t>(best_neg)});
    }
    return triples;
}

TripletLossResult triplet_loss(const EmbeddingBatch &batch,
                               const std::vector<Triplet> &triples,
                               double margin) {
    if (!(margin > 0.0))
        throw contract_error("triplet margin must be positive");
    const std::size_t n = batch.count(), d = batch.dim();
    TripletLossResult out;
    out.grad_x = Tensor({n, d});
    if (triples.empty())
        return out;

    const NormalizedView xs = normalize_rows(batch.vectors, "embedding");
    Tensor grad_unit({n, d});
    double total = 0.0;
    const double inv_t = 1.0 / static_cast<double>(triples.size());

    for (const Triplet &t : triples) {
        const auto [a, p, g] = t;
        if (a >= n || p >= n || g >= n)
            throw contract_error("triplet index out of range");
        double dp = 0.0, dn = 0.0;
        for (std::size_t u = 0; u < d; ++u) {
            const double ap = xs.unit.at2(a, u) - xs.unit.at2(p, u);
            const double an = xs.unit.at2(a, u) - xs.unit.at2(g, u);
            dp += ap * ap;
            dn += an * an;
        }
        const double hinge = dp - dn + margin;
        if (hinge <= 0.0)
            continue; // inactive triple, zero gradient
        total += hinge;
        for (std::size_t u = 0; u < d; ++u) {
            const double xa = xs.unit.at2(a, u), xp = xs.unit.at2(p, u),
                         xn = xs.unit.at2(g, u);
            grad_unit.at2(a, u) += 2.0 * (xn - xp) * inv_t;
            grad_unit.at2(p, u) += -2.0 * (xa - xp) * inv_t;
            grad_unit.at2(g, u) += 2.0 * (xa - xn) * inv_t;
        }
    }
    out.loss = total * inv_t;

    // project the unit-sphere gradient back to the raw embeddings
    for (std::size_t i = 0; i < n; ++i) {
        double dotg = 0.0;
        for (std::size_t u = 0; u < d; ++u)
            dotg += xs.unit.at2(i, u) * grad_unit.at2(i, u);
        for (std::size_t u = 0; u < d; ++u)
            out.grad_x.at2(i, u) =
                (grad_unit.at2(i, u) - dotg * xs.unit.at2(i, u)) /
                xs.norms[i];
    }
    return out;
}

} // namespace sphembed
