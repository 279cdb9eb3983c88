// Acceptance gate: one pass/fail line per criterion, nonzero exit on
// any failure. Each criterion is self-contained and uses independent
// oracles where the checked quantity allows one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sphembed/classify.hpp"
#include "sphembed/data.hpp"
#include "sphembed/gradcheck.hpp"
#include "sphembed/harness.hpp"
#include "sphembed/layers.hpp"
#include "sphembed/losses.hpp"
#include "sphembed/metrics.hpp"
#include "sphembed/optim.hpp"

using namespace sphembed;

namespace {

int failures = 0;

void report(int criterion, const std::string &name, bool pass,
            const std::string &detail = "") {
    std::printf("%s criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL",
                criterion, name.c_str(), detail.empty() ? "" : " — ",
                detail.c_str());
    if (!pass)
        ++failures;
}

Tensor random_tensor(Rng &rng, Shape shape, double stddev = 1.0) {
    return rng.normal_tensor(std::move(shape), 0.0, stddev);
}

// ---- criterion 1: gradient suite --------------------------------------

/// f(x) = sum R ⊙ layer(x); dropout reseeded per call so the mask is a
/// fixed function of the probe, making finite differences well defined.
struct Probe {
    Layer &layer;
    Tensor projection;
    std::uint64_t dropout_seed;

    double operator()(const Tensor &input) const {
        Rng rng(dropout_seed);
        const Tensor out = layer.forward(input, Mode::Training, &rng);
        double acc = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i)
            acc += projection[i] * out[i];
        return acc;
    }
};

bool check_layer(Layer &layer, const Tensor &input, Rng &rng,
                 std::string &why) {
    Rng warm(rng.next_u64());
    const Tensor out = layer.forward(input, Mode::Training, &warm);
    Probe probe{layer, random_tensor(rng, out.shape()), rng.next_u64()};

    Rng replay(probe.dropout_seed);
    layer.forward(input, Mode::Training, &replay);
    const Tensor grad_in = layer.backward(probe.projection);
    std::vector<Tensor> param_grads;
    for (Param *p : layer.params())
        param_grads.push_back(p->grad);

    auto rep = finite_difference_check(std::cref(probe), input, grad_in, 1e-5,
                                       1e-5);
    if (!rep.pass) {
        why = "input grad rel err " + std::to_string(rep.max_rel_err);
        return false;
    }
    std::size_t pi = 0;
    for (Param *p : layer.params()) {
        const Tensor saved = p->value;
        auto fn = [&](const Tensor &value) {
            p->value = value;
            const double r = probe(input);
            return r;
        };
        rep = finite_difference_check(fn, saved, param_grads[pi], 1e-5, 1e-5);
        p->value = saved;
        if (!rep.pass) {
            why = "param '" + p->name + "' rel err " +
                  std::to_string(rep.max_rel_err);
            return false;
        }
        ++pi;
    }
    return true;
}

bool criterion1(std::string &detail) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    std::string why;

    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(3);
        const std::size_t in = 2 + rng.uniform_index(4);
        const std::size_t out = 2 + rng.uniform_index(4);

        DenseLayer dense(in, out, trial % 2 == 0, rng);
        if (!check_layer(dense, random_tensor(rng, {n, in}), rng, why)) {
            detail = "dense trial " + std::to_string(trial) + ": " + why;
            return false;
        }
        ReluLayer relu;
        // offset away from the kink so finite differences are valid
        Tensor rin = random_tensor(rng, {n, in});
        for (std::size_t i = 0; i < rin.size(); ++i)
            if (std::abs(rin[i]) < 1e-3)
                rin[i] = 0.1;
        if (!check_layer(relu, rin, rng, why)) {
            detail = "relu trial " + std::to_string(trial) + ": " + why;
            return false;
        }
        DropoutLayer dropout(0.3);
        if (!check_layer(dropout, random_tensor(rng, {n, in}), rng, why)) {
            detail = "dropout trial " + std::to_string(trial) + ": " + why;
            return false;
        }
        BatchNormLayer bn(in);
        if (!check_layer(bn, random_tensor(rng, {4, in}), rng, why)) {
            detail = "batch-norm trial " + std::to_string(trial) + ": " + why;
            return false;
        }
        GlobalAvgPoolLayer gap;
        if (!check_layer(gap, random_tensor(rng, {n, 3, 3, in}), rng, why)) {
            detail = "pool trial " + std::to_string(trial) + ": " + why;
            return false;
        }
        DepthwiseSeparableConvLayer conv(2, 3, 3, 1 + trial % 2, rng);
        if (!check_layer(conv, random_tensor(rng, {2, 4, 4, 2}), rng, why)) {
            detail = "conv trial " + std::to_string(trial) + ": " + why;
            return false;
        }
    }

    // losses: gradients wrt raw embeddings and class weights
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 4 + rng.uniform_index(3);
        const std::size_t d = 3 + rng.uniform_index(4);
        const int classes = 3;
        EmbeddingBatch batch;
        batch.vectors = random_tensor(rng, {n, d});
        for (std::size_t i = 0; i < n; ++i)
            batch.labels.push_back(static_cast<int>(rng.uniform_index(classes)));
        batch.labels[0] = 0;
        batch.labels[1] = 1;
        batch.labels[2] = 2;
        const ClassWeights w{random_tensor(rng, {d, 3})};
        LossConfig cfg;
        cfg.m = 2 + trial % 5;

        struct Case {
            const char *name;
            std::function<LossResult(const EmbeddingBatch &,
                                     const ClassWeights &)> fn;
        };
        const Case cases[] = {
            {"softmax",
             [](const EmbeddingBatch &b, const ClassWeights &cw) {
                 return softmax_loss(b, cw);
             }},
            {"modified-softmax",
             [](const EmbeddingBatch &b, const ClassWeights &cw) {
                 return modified_softmax_loss(b, cw, 30.0);
             }},
            {"sphereface",
             [&cfg](const EmbeddingBatch &b, const ClassWeights &cw) {
                 return sphereface_loss(b, cw, cfg);
             }},
        };
        for (const Case &c : cases) {
            const LossResult base = c.fn(batch, w);
            auto fx = [&](const Tensor &x) {
                EmbeddingBatch b = batch;
                b.vectors = x;
                return c.fn(b, w).loss;
            };
            auto rep = finite_difference_check(fx, batch.vectors, base.grad_x,
                                               1e-6, 1e-5);
            if (!rep.pass) {
                detail = std::string(c.name) + " grad_x trial " +
                         std::to_string(trial) + " rel err " +
                         std::to_string(rep.max_rel_err);
                return false;
            }
            auto fw = [&](const Tensor &wt) {
                return c.fn(batch, ClassWeights{wt}).loss;
            };
            rep = finite_difference_check(fw, w.W, base.grad_W, 1e-6, 1e-5);
            if (!rep.pass) {
                detail = std::string(c.name) + " grad_W trial " +
                         std::to_string(trial) + " rel err " +
                         std::to_string(rep.max_rel_err);
                return false;
            }
        }

        const auto triples = mine_triplets(batch);
        if (!triples.empty()) {
            const TripletLossResult base = triplet_loss(batch, triples, 0.5);
            auto ft = [&](const Tensor &x) {
                EmbeddingBatch b = batch;
                b.vectors = x;
                return triplet_loss(b, triples, 0.5).loss;
            };
            auto rep = finite_difference_check(ft, batch.vectors, base.grad_x,
                                               1e-6, 1e-5);
            if (!rep.pass) {
                detail = "triplet grad trial " + std::to_string(trial) +
                         " rel err " + std::to_string(rep.max_rel_err);
                return false;
            }
        }
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::ostringstream os;
    os.precision(3);
    os << secs << " s";
    detail = os.str();
    return secs < 60.0;
}

// ---- criterion 2: psi suite -------------------------------------------

bool criterion2(std::string &detail) {
    constexpr double pi = std::numbers::pi;
    for (int m = 1; m <= 8; ++m) {
        if (psi(0.0, m) != 1.0) {
            detail = "psi(0) not exactly 1 at m=" + std::to_string(m);
            return false;
        }
        if (psi(pi, m) != -(2.0 * m - 1.0)) {
            detail = "psi(pi) not exact at m=" + std::to_string(m);
            return false;
        }
        for (int k = 1; k < m; ++k) {
            const double b = k * pi / m;
            if (std::abs(psi(b - 1e-9, m) - psi(b + 1e-9, m)) >= 1e-7) {
                detail = "continuity gap at m=" + std::to_string(m) +
                         " k=" + std::to_string(k);
                return false;
            }
        }
        double prev = psi(0.0, m);
        for (int i = 1; i < 10000; ++i) {
            const double theta = pi * i / 9999.0;
            const double v = psi(theta, m);
            if (v > prev + 1e-12) {
                detail = "not monotone at m=" + std::to_string(m);
                return false;
            }
            if (v > std::cos(theta) + 1e-12) {
                detail = "psi above cos at m=" + std::to_string(m);
                return false;
            }
            prev = v;
        }
    }
    return true;
}

// ---- criterion 3: distance equivalence + knn oracle -------------------

int brute_knn(const EmbeddingBatch &ref, int n_classes,
              const std::vector<double> &query, int k) {
    const std::size_t nr = ref.count();
    const std::size_t d = ref.dim();
    std::vector<std::pair<double, std::size_t>> order(nr);
    for (std::size_t r = 0; r < nr; ++r) {
        double sq = 0.0;
        for (std::size_t u = 0; u < d; ++u) {
            const double diff = query[u] - ref.vectors.at2(r, u);
            sq += diff * diff;
        }
        order[r] = {sq, r};
    }
    std::sort(order.begin(), order.end());
    std::vector<int> counts(n_classes, 0);
    std::vector<double> sums(n_classes, 0.0);
    for (int i = 0; i < k; ++i) {
        const int c = ref.labels[order[i].second];
        counts[c]++;
        sums[c] += order[i].first;
    }
    int best = -1;
    for (int c = 0; c < n_classes; ++c) {
        if (counts[c] == 0)
            continue;
        if (best < 0 || counts[c] > counts[best] ||
            (counts[c] == counts[best] && sums[c] < sums[best]))
            best = c;
    }
    return best;
}

EmbeddingBatch random_unit_batch(Rng &rng, std::size_t n, std::size_t d,
                                 int n_classes) {
    EmbeddingBatch batch;
    batch.vectors = random_tensor(rng, {n, d});
    batch.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        batch.labels[i] = static_cast<int>(rng.uniform_index(n_classes));
    for (int c = 0; c < n_classes; ++c)
        batch.labels[c] = c;
    return l2_normalize(batch);
}

bool criterion3(std::string &detail) {
    Rng rng(303);
    for (int trial = 0; trial < 100; ++trial) {
        const EmbeddingBatch pair = random_unit_batch(rng, 2, 6, 2);
        std::vector<double> a(6), b(6);
        for (std::size_t j = 0; j < 6; ++j) {
            a[j] = pair.vectors.at2(0, j);
            b[j] = pair.vectors.at2(1, j);
        }
        const double euc = euclidean_distance(a, b);
        const double cosd = cosine_distance(a, b);
        if (std::abs(euc - std::sqrt(2.0 * cosd)) > 1e-12) {
            detail = "distance identity violated at trial " +
                     std::to_string(trial);
            return false;
        }
    }

    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t nr = 10 + rng.uniform_index(41); // up to 50
        const EmbeddingBatch ref = random_unit_batch(rng, nr, 5, 3);
        const EmbeddingBatch queries = random_unit_batch(rng, 8, 5, 3);
        const KnnIndex index = build_knn_index(ref);
        const int k = 1 + static_cast<int>(rng.uniform_index(nr));
        const auto pe = knn_classify(index, queries, k, KnnMetric::Euclidean);
        const auto pc = knn_classify(index, queries, k, KnnMetric::Cosine);
        if (pe != pc) {
            detail = "metric choice changed predictions at trial " +
                     std::to_string(trial);
            return false;
        }
        for (std::size_t q = 0; q < queries.count(); ++q) {
            std::vector<double> v(5);
            for (std::size_t u = 0; u < 5; ++u)
                v[u] = queries.vectors.at2(q, u);
            if (pe[q] != brute_knn(ref, 3, v, k)) {
                detail = "brute-force mismatch at trial " +
                         std::to_string(trial);
                return false;
            }
        }
    }
    return true;
}

// ---- criterion 4: loss identities -------------------------------------

bool criterion4(std::string &detail) {
    Rng rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        EmbeddingBatch batch;
        batch.vectors = random_tensor(rng, {5, 4});
        batch.labels = {0, 1, 2, 0, 1};
        const ClassWeights w{random_tensor(rng, {4, 3})};
        LossConfig cfg;
        cfg.m = 1;
        const double a = sphereface_loss(batch, w, cfg).loss;
        const double b = modified_softmax_loss(batch, w, cfg.s).loss;
        if (std::abs(a - b) > 1e-12) {
            detail = "m=1 equivalence off by " + std::to_string(a - b);
            return false;
        }
    }

    EmbeddingBatch zero;
    zero.vectors = Tensor({3, 4});
    zero.labels = {0, 1, 2};
    const ClassWeights w{random_tensor(rng, {4, 3})};
    if (std::abs(softmax_loss(zero, w).loss - std::log(3.0)) > 1e-12) {
        detail = "uniform-logit softmax != ln(3)";
        return false;
    }

    EmbeddingBatch aligned;
    aligned.vectors = Tensor({1, 2}, {2.0, 0.0});
    aligned.labels = {0};
    const ClassWeights ortho{Tensor({2, 2}, {3.0, 0.0, 0.0, 1.0})};
    LossConfig cfg; // m=5, s=30
    const double expect = std::log(1.0 + std::exp(-cfg.s));
    if (std::abs(sphereface_loss(aligned, ortho, cfg).loss - expect) > 1e-12) {
        detail = "aligned-orthogonal closed form violated";
        return false;
    }
    return true;
}

// ---- criterion 5: metrics vs brute force ------------------------------

bool criterion5(std::string &detail) {
    Rng rng(505);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t samples = 20 + rng.uniform_index(30);
        std::vector<int> truth(samples), pred(samples);
        Tensor scores({samples, 3});
        for (std::size_t i = 0; i < samples; ++i) {
            truth[i] = static_cast<int>(rng.uniform_index(3));
            pred[i] = static_cast<int>(rng.uniform_index(3));
            for (int c = 0; c < 3; ++c) // quantized to force score ties
                scores.at2(i, c) = std::floor(rng.uniform() * 8.0) / 8.0;
        }
        truth[0] = 0;
        truth[1] = 1;
        truth[2] = 2;

        const ConfusionMatrix cm = confusion_matrix(truth, pred, 3);
        const MetricsReport r = classification_report(cm);

        long long hits = 0;
        for (std::size_t i = 0; i < samples; ++i)
            hits += truth[i] == pred[i];
        if (r.average_accuracy !=
            static_cast<double>(hits) / static_cast<double>(samples)) {
            detail = "accuracy mismatch at trial " + std::to_string(trial);
            return false;
        }
        for (int c = 0; c < 3; ++c) {
            long long tp = 0, fp = 0, fn = 0, tn = 0;
            for (std::size_t i = 0; i < samples; ++i) {
                const bool t = truth[i] == c, p = pred[i] == c;
                tp += t && p;
                fp += !t && p;
                fn += t && !p;
                tn += !t && !p;
            }
            if (cm.at(c, c) != tp || cm.row_sum(c) != tp + fn ||
                cm.col_sum(c) != tp + fp) {
                detail = "count mismatch at trial " + std::to_string(trial);
                return false;
            }
            const double prec =
                (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
            const double rec =
                (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
            if (r.precision[c] != prec || r.recall[c] != rec) {
                detail = "ratio mismatch at trial " + std::to_string(trial);
                return false;
            }
            const double denom =
                std::sqrt(static_cast<double>(tp + fp) * (tp + fn) *
                          (tn + fp) * (tn + fn));
            const double m =
                denom > 0.0
                    ? (static_cast<double>(tp) * tn -
                       static_cast<double>(fp) * fn) /
                          denom
                    : 0.0;
            if (std::abs(r.per_class_mcc[c] - m) > 1e-12) {
                detail = "mcc mismatch at trial " + std::to_string(trial);
                return false;
            }
        }

        const AucResult auc = roc_auc(scores, truth);
        for (int c = 0; c < 3; ++c) {
            double wins = 0.0;
            std::size_t pairs = 0;
            for (std::size_t i = 0; i < samples; ++i)
                for (std::size_t j = 0; j < samples; ++j) {
                    if (truth[i] != c || truth[j] == c)
                        continue;
                    ++pairs;
                    if (scores.at2(i, c) > scores.at2(j, c))
                        wins += 1.0;
                    else if (scores.at2(i, c) == scores.at2(j, c))
                        wins += 0.5;
                }
            if (!auc.per_class[c] ||
                std::abs(*auc.per_class[c] - wins / pairs) > 1e-12) {
                detail = "auc mismatch at trial " + std::to_string(trial);
                return false;
            }
        }
    }
    return true;
}

// ---- criterion 6: learning-rate schedule ------------------------------

bool criterion6(std::string &detail) {
    const LrSchedule s;
    for (int epoch = 0; epoch < 275; ++epoch) {
        const double expect =
            epoch < 125 ? 1e-4 : (epoch < 175 ? 1e-5 : 1e-6);
        if (learning_rate_at(s, epoch) != expect) {
            detail = "wrong rate at epoch " + std::to_string(epoch);
            return false;
        }
    }
    return true;
}

// ---- criteria 7/8: desk-scale training and separation -----------------

ExperimentConfig desk_config(std::uint64_t seed) {
    ExperimentConfig c;
    c.dataset.n_classes = 3;
    c.dataset.dim = 32;
    c.dataset.samples_per_class = 200; // 100 train + 100 test at 0.5
    c.dataset.separation = 6.0;
    c.dataset.spread = 1.0;
    c.backbone.hidden = {64};
    c.embedding_dim = 32;
    c.loss.kind = LossKind::SphereFace;
    c.loss.m = 5;
    c.loss.s = 30.0;
    c.epochs = 200;
    c.batch_size = 32;
    c.train_fraction = 0.5;
    c.dropout_rate = 0.0; // the m=5 target is hard enough without noise
    c.seed = seed;
    return c;
}

bool criterion7(std::string &detail) {
#ifdef _OPENMP
    omp_set_num_threads(1);
#endif
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentResult res = run_experiment(desk_config(7));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    const double first = res.record.loss_history.front();
    const double last = res.record.loss_history.back();
    const double acc = res.eval.report.average_accuracy;
    std::ostringstream os;
    os.precision(4);
    os << "loss " << first << " -> " << last << ", k-NN(1) accuracy " << acc
       << ", " << secs << " s";
    detail = os.str();
    return last < 0.2 * first && acc >= 0.95 && secs < 180.0;
}

bool criterion8(std::string &detail) {
    std::vector<double> intra_sphere, intra_mod, inter_sphere, inter_mod;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ExperimentConfig sphere = desk_config(seed);
        ExperimentConfig mod = desk_config(seed);
        mod.loss.kind = LossKind::ModifiedSoftmax;
        const ExperimentResult rs = run_experiment(sphere);
        const ExperimentResult rm = run_experiment(mod);
        intra_sphere.push_back(rs.eval.separation.mean_intra_angle);
        inter_sphere.push_back(rs.eval.separation.min_inter_angle);
        intra_mod.push_back(rm.eval.separation.mean_intra_angle);
        inter_mod.push_back(rm.eval.separation.min_inter_angle);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    const double mi_s = median(intra_sphere), mi_m = median(intra_mod);
    const double me_s = median(inter_sphere), me_m = median(inter_mod);
    std::ostringstream os;
    os.precision(4);
    os << "median intra angle " << mi_s << " (margin) vs " << mi_m
       << " (no margin); median min-inter angle " << me_s << " vs " << me_m;
    detail = os.str();
    return mi_s <= mi_m && me_s >= me_m;
}

// ---- criterion 9: ablation harness determinism ------------------------

bool criterion9(std::string &detail) {
    ExperimentConfig c;
    c.dataset.n_classes = 3;
    c.dataset.dim = 8;
    c.dataset.samples_per_class = 20;
    c.dataset.separation = 5.0;
    c.dataset.spread = 0.8;
    c.backbone.hidden = {16};
    c.embedding_dim = 8;
    c.epochs = 8;
    c.batch_size = 16;
    c.seed = 9;

    const std::string margin_a = ablate_margin(c, {4, 5, 6}).format();
    const std::string margin_b = ablate_margin(c, {4, 5, 6}).format();
    if (margin_a != margin_b) {
        detail = "margin ablation not byte-identical";
        return false;
    }
    for (const char *row : {"m=4", "m=5", "m=6"})
        if (margin_a.find(row) == std::string::npos) {
            detail = std::string("margin report missing row ") + row;
            return false;
        }

    const std::string losses_a = compare_losses(c).format();
    const std::string losses_b = compare_losses(c).format();
    if (losses_a != losses_b) {
        detail = "loss comparison not byte-identical";
        return false;
    }
    for (const char *row :
         {"softmax", "modified-softmax", "triplet", "sphereface"})
        if (losses_a.find(row) == std::string::npos) {
            detail = std::string("loss report missing row ") + row;
            return false;
        }
    return true;
}

// ---- criterion 10: split arithmetic -----------------------------------

bool criterion10(std::string &detail) {
    Dataset ds;
    ds.class_names = {"meningioma", "glioma", "pituitary"};
    const int sizes[3] = {708, 1426, 930};
    for (int c = 0; c < 3; ++c)
        for (int s = 0; s < sizes[c]; ++s) {
            ds.samples.push_back(Tensor({1}, {c * 10000.0 + s}));
            ds.labels.push_back(c);
        }
    Rng rng(10);
    auto [train, test] = stratified_split(ds, 0.7, rng);
    auto counts = [](const Dataset &d) {
        std::vector<int> c(3, 0);
        for (int l : d.labels)
            c[l]++;
        return c;
    };
    if (counts(train) != std::vector<int>{495, 998, 651} ||
        counts(test) != std::vector<int>{213, 428, 279}) {
        detail = "train/test class counts wrong";
        return false;
    }

    // the swap protocol is exactly the exchanged pair: verify the union
    // is the original dataset and the parts are disjoint
    std::vector<double> all;
    for (const auto &s : train.samples)
        all.push_back(s[0]);
    for (const auto &s : test.samples)
        all.push_back(s[0]);
    std::sort(all.begin(), all.end());
    std::vector<double> expect;
    for (const auto &s : ds.samples)
        expect.push_back(s[0]);
    std::sort(expect.begin(), expect.end());
    if (all != expect) {
        detail = "partitions do not exchange into the original dataset";
        return false;
    }
    std::swap(train, test);
    if (counts(train) != std::vector<int>{213, 428, 279}) {
        detail = "swap protocol does not exchange partitions";
        return false;
    }
    return true;
}

} // namespace

int main() {
    struct Entry {
        int id;
        const char *name;
        bool (*fn)(std::string &);
    };
    const Entry entries[] = {
        {1, "gradient suite (layers and losses, 20 configs each)",
         criterion1},
        {2, "angular surrogate suite", criterion2},
        {3, "distance equivalence and k-NN oracle", criterion3},
        {4, "loss identities", criterion4},
        {5, "metrics against brute-force oracles", criterion5},
        {6, "learning-rate schedule", criterion6},
        {7, "desk-scale training", criterion7},
        {8, "separation property over 5 seeds", criterion8},
        {9, "ablation harness determinism", criterion9},
        {10, "split arithmetic", criterion10},
    };
    for (const Entry &e : entries) {
        std::string detail;
        bool pass = false;
        try {
            pass = e.fn(detail);
        } catch (const std::exception &ex) {
            detail = std::string("exception: ") + ex.what();
        }
        report(e.id, e.name, pass, detail);
    }
    return failures == 0 ? 0 : 1;
}
