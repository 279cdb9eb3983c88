#include "sphembed/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace sphembed {

LrSchedule ExperimentConfig::schedule() const {
    if (paper_faithful)
        return LrSchedule{};
    return scaled_schedule(epochs);
}

nlohmann::json config_to_json(const ExperimentConfig &c) {
    nlohmann::json j;
    j["dataset"] = {{"manifest", c.dataset.manifest_path},
                    {"n_classes", c.dataset.n_classes},
                    {"dim", c.dataset.dim},
                    {"samples_per_class", c.dataset.samples_per_class},
                    {"separation", c.dataset.separation},
                    {"spread", c.dataset.spread}};
    j["backbone"] = {
        {"kind", c.backbone.kind == BackboneSpec::Kind::Mlp ? "mlp" : "conv"},
        {"hidden", c.backbone.hidden},
        {"conv_blocks", c.backbone.conv_blocks},
        {"conv_channels", c.backbone.conv_channels}};
    j["embedding_dim"] = c.embedding_dim;
    j["loss"] = {{"kind", loss_kind_name(c.loss.kind)},
                 {"m", c.loss.m},
                 {"s", c.loss.s},
                 {"triplet_margin", c.loss.triplet_margin}};
    j["epochs"] = c.epochs;
    j["paper_faithful"] = c.paper_faithful;
    j["batch_size"] = c.batch_size;
    j["seed"] = c.seed;
    j["train_fraction"] = c.train_fraction;
    j["k_max"] = c.k_max;
    j["augment"] = c.augment;
    j["augment_config"] = {{"rotation_deg", c.augment_config.rotation_deg},
                           {"brightness", c.augment_config.brightness},
                           {"flip_prob", c.augment_config.flip_prob},
                           {"zoom", c.augment_config.zoom}};
    j["dropout_rate"] = c.dropout_rate;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json &j,
                                  ExperimentConfig base) {
    ExperimentConfig c = std::move(base);
    if (j.contains("dataset")) {
        const auto &d = j["dataset"];
        c.dataset.manifest_path = d.value("manifest", c.dataset.manifest_path);
        c.dataset.n_classes = d.value("n_classes", c.dataset.n_classes);
        c.dataset.dim = d.value("dim", c.dataset.dim);
        c.dataset.samples_per_class =
            d.value("samples_per_class", c.dataset.samples_per_class);
        c.dataset.separation = d.value("separation", c.dataset.separation);
        c.dataset.spread = d.value("spread", c.dataset.spread);
    }
    if (j.contains("backbone")) {
        const auto &b = j["backbone"];
        const std::string kind = b.value("kind", std::string("mlp"));
        if (kind == "mlp")
            c.backbone.kind = BackboneSpec::Kind::Mlp;
        else if (kind == "conv")
            c.backbone.kind = BackboneSpec::Kind::Conv;
        else
            throw contract_error("unknown backbone kind '" + kind + "'");
        c.backbone.hidden = b.value("hidden", c.backbone.hidden);
        c.backbone.conv_blocks = b.value("conv_blocks", c.backbone.conv_blocks);
        c.backbone.conv_channels =
            b.value("conv_channels", c.backbone.conv_channels);
    }
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    if (j.contains("loss")) {
        const auto &l = j["loss"];
        c.loss.kind = loss_kind_from_name(
            l.value("kind", loss_kind_name(c.loss.kind)));
        c.loss.m = l.value("m", c.loss.m);
        c.loss.s = l.value("s", c.loss.s);
        c.loss.triplet_margin = l.value("triplet_margin", c.loss.triplet_margin);
    }
    c.epochs = j.value("epochs", c.epochs);
    c.paper_faithful = j.value("paper_faithful", c.paper_faithful);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.k_max = j.value("k_max", c.k_max);
    c.augment = j.value("augment", c.augment);
    if (j.contains("augment_config")) {
        const auto &a = j["augment_config"];
        c.augment_config.rotation_deg =
            a.value("rotation_deg", c.augment_config.rotation_deg);
        c.augment_config.brightness =
            a.value("brightness", c.augment_config.brightness);
        c.augment_config.flip_prob =
            a.value("flip_prob", c.augment_config.flip_prob);
        c.augment_config.zoom = a.value("zoom", c.augment_config.zoom);
    }
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
    return c;
}

namespace {

Model build_model(const ExperimentConfig &config, const Dataset &train_set,
                  Rng &rng) {
    Model model;
    model.embedding_dim = config.embedding_dim;
    const Tensor &first = train_set.samples.at(0);

    std::size_t width;
    if (config.backbone.kind == BackboneSpec::Kind::Mlp) {
        width = first.size();
        for (std::size_t w : config.backbone.hidden) {
            model.layers.push_back(
                std::make_unique<DenseLayer>(width, w, true, rng));
            model.layers.push_back(std::make_unique<ReluLayer>());
            width = w;
        }
    } else {
        if (first.rank() != 3)
            throw contract_error("conv backbone requires H×W×C samples");
        std::size_t channels = first.dim(2);
        for (int b = 0; b < config.backbone.conv_blocks; ++b) {
            model.layers.push_back(
                std::make_unique<DepthwiseSeparableConvLayer>(
                    channels, config.backbone.conv_channels, 3, 2, rng));
            model.layers.push_back(std::make_unique<ReluLayer>());
            channels = config.backbone.conv_channels;
        }
        model.layers.push_back(std::make_unique<GlobalAvgPoolLayer>());
        model.layers.push_back(std::make_unique<DenseLayer>(
            channels, config.embedding_dim, true, rng));
        model.layers.push_back(std::make_unique<ReluLayer>());
        width = config.embedding_dim;
    }

    model.layers.push_back(
        std::make_unique<DropoutLayer>(config.dropout_rate));
    // final embedding head: linear, He-initialized, bias-free, then
    // batch normalization
    model.layers.push_back(std::make_unique<DenseLayer>(
        width, config.embedding_dim, false, rng));
    model.layers.push_back(
        std::make_unique<BatchNormLayer>(config.embedding_dim));
    return model;
}

Tensor stack_batch(const Dataset &ds, const std::vector<std::size_t> &idx,
                   bool augment, const AugmentConfig &aug, Rng *aug_rng) {
    const Tensor &first = ds.samples[idx[0]];
    Shape shape;
    shape.push_back(idx.size());
    for (std::size_t d : first.shape())
        shape.push_back(d);
    Tensor out(shape);
    const std::size_t width = first.size();
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const Tensor *src = &ds.samples[idx[i]];
        Tensor augmented;
        if (augment && src->rank() == 3) {
            Rng sample_rng = aug_rng->child(idx[i]);
            augmented = augment_sample(*src, aug, sample_rng);
            src = &augmented;
        }
        if (src->size() != width)
            throw contract_error("dataset samples have inconsistent shapes");
        std::copy(src->data(), src->data() + width, out.data() + i * width);
    }
    return out;
}

} // namespace

std::pair<Model, RunRecord> train(const ExperimentConfig &config,
                                  const Dataset &train_set) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto &w : loss_config_warnings(config.loss))
        std::cerr << "warning: " << w << "\n";

    Rng model_rng = Rng(config.seed).child(1);
    Rng loop_rng = Rng(config.seed).child(2);
    Rng aug_rng = Rng(config.seed).child(3);

    Model model = build_model(config, train_set, model_rng);
    RunRecord record;
    record.config_snapshot = config_to_json(config);
    record.seed = config.seed;

    const int epochs = config.effective_epochs();
    const LrSchedule schedule = config.schedule();
    const std::size_t n = train_set.size();
    const bool needs_head = config.loss.kind != LossKind::Triplet;
    const int n_classes = train_set.n_classes();

    Param class_weights(
        "class_weights",
        needs_head ? model_rng.normal_tensor(
                         {config.embedding_dim,
                          static_cast<std::size_t>(n_classes)},
                         0.0, 1.0 / std::sqrt(static_cast<double>(
                                        config.embedding_dim)))
                   : Tensor({1, 1}));

    std::vector<Param *> params = model.params();
    if (needs_head)
        params.push_back(&class_weights);
    Adam adam(config.adam);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        const double lr = learning_rate_at(schedule, epoch);
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[loop_rng.uniform_index(i)]);

        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < n;
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(
                n, start + static_cast<std::size_t>(config.batch_size));
            std::vector<std::size_t> idx(order.begin() + start,
                                         order.begin() + end);
            Tensor input = stack_batch(train_set, idx, config.augment,
                                       config.augment_config, &aug_rng);
            if (input.rank() > 2 &&
                config.backbone.kind == BackboneSpec::Kind::Mlp)
                input = input.reshaped(
                    {idx.size(), input.size() / idx.size()});

            EmbeddingBatch batch;
            batch.vectors =
                model.forward(input, Mode::Training, &loop_rng);
            for (std::size_t i : idx)
                batch.labels.push_back(train_set.labels[i]);

            double batch_loss;
            Tensor grad_x;
            if (config.loss.kind == LossKind::Triplet) {
                const auto triples = mine_triplets(batch);
                const TripletLossResult res =
                    triplet_loss(batch, triples, config.loss.triplet_margin);
                batch_loss = res.loss;
                grad_x = res.grad_x;
            } else {
                ClassWeights head{class_weights.value};
                LossResult res;
                switch (config.loss.kind) {
                case LossKind::Softmax:
                    res = softmax_loss(batch, head);
                    break;
                case LossKind::ModifiedSoftmax:
                    res = modified_softmax_loss(batch, head, config.loss.s);
                    break;
                default:
                    res = sphereface_loss(batch, head, config.loss);
                    break;
                }
                batch_loss = res.loss;
                grad_x = res.grad_x;
                class_weights.grad = res.grad_W;
            }
            if (!std::isfinite(batch_loss))
                throw numeric_error(
                    "non-finite loss at epoch " + std::to_string(epoch) +
                    ", batch starting at sample " + std::to_string(start));

            model.backward(grad_x);
            if (!needs_head)
                class_weights.grad.fill(0.0);
            adam.step(params, lr);

            epoch_loss += batch_loss * static_cast<double>(idx.size());
            seen += idx.size();
        }
        record.loss_history.push_back(epoch_loss /
                                      static_cast<double>(seen ? seen : 1));
    }

    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return {std::move(model), std::move(record)};
}

EmbeddingBatch extract_embeddings(Model &model, const Dataset &dataset) {
    const std::size_t n = dataset.size();
    EmbeddingBatch batch;
    batch.labels = dataset.labels;
    batch.vectors = Tensor({n, model.embedding_dim});
    const std::size_t chunk = 256;
    for (std::size_t start = 0; start < n; start += chunk) {
        const std::size_t end = std::min(n, start + chunk);
        std::vector<std::size_t> idx(end - start);
        for (std::size_t i = 0; i < idx.size(); ++i)
            idx[i] = start + i;
        Tensor input = stack_batch(dataset, idx, false, {}, nullptr);
        const bool is_mlp =
            dynamic_cast<DenseLayer *>(model.layers.at(0).get()) != nullptr;
        if (input.rank() > 2 && is_mlp)
            input = input.reshaped({idx.size(), input.size() / idx.size()});
        Tensor out = model.forward(input, Mode::Inference);
        std::copy(out.data(), out.data() + out.size(),
                  batch.vectors.data() + start * model.embedding_dim);
    }
    return l2_normalize(batch);
}

EvalResult evaluate(Model &model, const Dataset &train_set,
                    const Dataset &test_set, const EvalOptions &options) {
    EvalResult result;
    const EmbeddingBatch train_emb = extract_embeddings(model, train_set);
    result.test_embeddings = extract_embeddings(model, test_set);
    const KnnIndex index = build_knn_index(train_emb);

    int k = options.k;
    if (options.sweep) {
        const int k_max = std::min<int>(
            options.k_max, static_cast<int>(train_emb.count()));
        result.sweep = knn_sweep(index, result.test_embeddings, k_max);
        k = result.sweep->best_k;
    }
    result.k_used = k;

    const std::vector<int> predictions =
        knn_classify(index, result.test_embeddings, k);
    const ConfusionMatrix cm = confusion_matrix(
        test_set.labels, predictions, index.n_classes);
    result.report = classification_report(cm);
    const Tensor scores = class_scores(index, result.test_embeddings);
    const AucResult auc = roc_auc(scores, test_set.labels);
    result.report.per_class_auc = auc.per_class;
    result.report.average_auc = auc.average;
    result.separation = separation_stats(result.test_embeddings);
    return result;
}

Dataset prepare_dataset(const ExperimentConfig &config) {
    if (!config.dataset.manifest_path.empty())
        return load_dataset(config.dataset.manifest_path);
    Rng rng = Rng(config.seed).child(0);
    return gen_gaussian_clusters(rng, config.dataset.n_classes,
                                 config.dataset.dim,
                                 config.dataset.samples_per_class,
                                 config.dataset.separation,
                                 config.dataset.spread);
}

ExperimentResult run_experiment(const ExperimentConfig &config,
                                Model *model_out) {
    const Dataset dataset = prepare_dataset(config);
    Rng split_rng = Rng(config.seed).child(4);
    auto [train_set, test_set] =
        stratified_split(dataset, config.train_fraction, split_rng);
    auto [model, record] = train(config, train_set);
    ExperimentResult result;
    result.record = std::move(record);
    result.eval = evaluate(model, train_set, test_set,
                           {.k = 1, .sweep = false, .k_max = config.k_max});
    if (model_out)
        *model_out = std::move(model);
    return result;
}

std::string ComparisonTable::format() const {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << title << "\n";
    os << "run               avg-acc   macro-F1  micro-F1  MCC       "
          "avg-AUC   intra-angle  min-inter-angle\n";
    for (const auto &row : rows) {
        os << row.label;
        for (std::size_t p = row.label.size(); p < 18; ++p)
            os << ' ';
        os << row.report.average_accuracy << "    " << row.report.macro_f1
           << "    " << row.report.micro_f1 << "    "
           << row.report.multiclass_mcc << "    ";
        if (row.report.average_auc)
            os << *row.report.average_auc;
        else
            os << "--    ";
        os << "    " << row.separation.mean_intra_angle << "       "
           << row.separation.min_inter_angle << "\n";
    }
    os << "\nper-class detail\n";
    for (const auto &row : rows) {
        os << "== " << row.label << " ==\n"
           << format_report(row.report, class_names);
    }
    return os.str();
}

ComparisonTable ablate_margin(const ExperimentConfig &config,
                              const std::vector<int> &margins) {
    if (margins.empty())
        throw contract_error("ablate_margin: margin set is empty");
    ComparisonTable table;
    std::ostringstream title;
    title << "margin ablation (loss=sphereface, s=" << config.loss.s << ")";
    table.title = title.str();
    for (int m : margins) {
        ExperimentConfig run = config;
        run.loss.kind = LossKind::SphereFace;
        run.loss.m = m;
        const ExperimentResult res = run_experiment(run);
        if (table.class_names.empty())
            table.class_names = prepare_dataset(run).class_names;
        table.rows.push_back({"m=" + std::to_string(m), res.eval.report,
                              res.eval.separation});
    }
    return table;
}

ComparisonTable compare_losses(const ExperimentConfig &config,
                               const std::vector<LossKind> &losses) {
    if (losses.empty())
        throw contract_error("compare_losses: loss set is empty");
    ComparisonTable table;
    table.title = "loss comparison";
    for (LossKind kind : losses) {
        ExperimentConfig run = config;
        run.loss.kind = kind;
        const ExperimentResult res = run_experiment(run);
        if (table.class_names.empty())
            table.class_names = prepare_dataset(run).class_names;
        table.rows.push_back(
            {loss_kind_name(kind), res.eval.report, res.eval.separation});
    }
    return table;
}

void export_embeddings(const EmbeddingBatch &batch,
                       const std::filesystem::path &path) {
    std::ofstream os(path);
    if (!os)
        throw numeric_error("cannot open " + path.string() + " for writing");
    os << "# normalized=" << (batch.normalized ? 1 : 0)
       << " dim=" << (batch.count() ? batch.dim() : 0) << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < batch.count(); ++i) {
        os << batch.labels[i];
        for (std::size_t j = 0; j < batch.dim(); ++j)
            os << "," << batch.vectors.at2(i, j);
        os << "\n";
    }
    if (!os)
        throw numeric_error("write to " + path.string() + " failed");
}

EmbeddingBatch import_embeddings(const std::filesystem::path &path) {
    std::ifstream is(path);
    if (!is)
        throw contract_error("cannot open " + path.string());
    std::string header;
    std::getline(is, header);
    int normalized = 0;
    std::size_t dim = 0;
    if (std::sscanf(header.c_str(), "# normalized=%d dim=%zu", &normalized,
                    &dim) != 2)
        throw contract_error("bad embedding header in " + path.string());

    std::vector<double> values;
    std::vector<int> labels;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        labels.push_back(std::stoi(cell));
        std::size_t got = 0;
        while (std::getline(ss, cell, ',')) {
            values.push_back(std::stod(cell));
            ++got;
        }
        if (got != dim)
            throw contract_error("row width mismatch in " + path.string());
    }
    EmbeddingBatch batch;
    batch.labels = std::move(labels);
    batch.vectors = Tensor({batch.labels.size(), dim});
    std::copy(values.begin(), values.end(), batch.vectors.data());
    batch.normalized = normalized != 0;
    return batch;
}

void write_loss_history(const RunRecord &record,
                        const std::filesystem::path &path) {
    std::ofstream os(path);
    os << "epoch\tloss\n";
    os.precision(17);
    for (std::size_t e = 0; e < record.loss_history.size(); ++e)
        os << e << "\t" << record.loss_history[e] << "\n";
}

} // namespace sphembed
