#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sphembed/classify.hpp"
#include "sphembed/data.hpp"
#include "sphembed/layers.hpp"
#include "sphembed/losses.hpp"
#include "sphembed/metrics.hpp"
#include "sphembed/optim.hpp"

namespace sphembed {

struct BackboneSpec {
    enum class Kind { Mlp, Conv };
    Kind kind = Kind::Mlp;
    std::vector<std::size_t> hidden = {64}; // MLP hidden widths
    int conv_blocks = 2;
    std::size_t conv_channels = 8;
};

struct DatasetSpec {
    std::string manifest_path; // empty → synthetic clusters
    int n_classes = 3;
    int dim = 32;
    int samples_per_class = 200;
    double separation = 3.0;
    double spread = 1.0;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    BackboneSpec backbone;
    std::size_t embedding_dim = 256;
    LossConfig loss;
    int epochs = 200;
    bool paper_faithful = false; // 275 epochs, breakpoints 125/175
    int batch_size = 32;
    std::uint64_t seed = 1;
    double train_fraction = 0.7;
    int k_max = 30;
    bool augment = false;
    AugmentConfig augment_config;
    double dropout_rate = 0.2;
    AdamConfig adam;

    int effective_epochs() const { return paper_faithful ? 275 : epochs; }
    LrSchedule schedule() const;
};

nlohmann::json config_to_json(const ExperimentConfig &config);
/// Fields present in `j` override `base`; the rest pass through.
ExperimentConfig config_from_json(const nlohmann::json &j,
                                  ExperimentConfig base = {});

struct RunRecord {
    nlohmann::json config_snapshot;
    std::vector<double> loss_history; // one entry per epoch
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
};

/// Training phase: shuffle → (augment) → forward → loss → backward →
/// Adam with the scheduled learning rate. Deterministic per seed.
std::pair<Model, RunRecord> train(const ExperimentConfig &config,
                                  const Dataset &train_set);

/// Inference-mode embeddings for a whole dataset, L2-normalized.
EmbeddingBatch extract_embeddings(Model &model, const Dataset &dataset);

struct EvalOptions {
    int k = 1;
    bool sweep = false;
    int k_max = 30;
};

struct EvalResult {
    MetricsReport report;
    SeparationStats separation;
    std::optional<SweepResult> sweep;
    int k_used = 1;
    EmbeddingBatch test_embeddings;
};

EvalResult evaluate(Model &model, const Dataset &train_set,
                    const Dataset &test_set, const EvalOptions &options = {});

/// Synthetic generation or manifest load, per the config. Deterministic.
Dataset prepare_dataset(const ExperimentConfig &config);

struct ExperimentResult {
    RunRecord record;
    EvalResult eval;
};

/// Full pipeline: dataset → split → train → evaluate.
ExperimentResult run_experiment(const ExperimentConfig &config,
                                Model *model_out = nullptr);

struct ComparisonRow {
    std::string label;
    MetricsReport report;
    SeparationStats separation;
};

struct ComparisonTable {
    std::string title;
    std::vector<std::string> class_names;
    std::vector<ComparisonRow> rows;

    std::string format() const; // stable text, no timestamps
};

/// One training run per margin, shared seed and data.
ComparisonTable ablate_margin(const ExperimentConfig &config,
                              const std::vector<int> &margins = {4, 5, 6});

/// One training run per loss kind, shared seed and backbone shape.
ComparisonTable compare_losses(
    const ExperimentConfig &config,
    const std::vector<LossKind> &losses = {LossKind::Softmax,
                                           LossKind::ModifiedSoftmax,
                                           LossKind::Triplet,
                                           LossKind::SphereFace});

/// Delimited-text embedding export; round-trips at full precision.
void export_embeddings(const EmbeddingBatch &batch,
                       const std::filesystem::path &path);
EmbeddingBatch import_embeddings(const std::filesystem::path &path);

/// Loss-per-epoch table for plotting convergence curves.
void write_loss_history(const RunRecord &record,
                        const std::filesystem::path &path);

} // namespace sphembed
