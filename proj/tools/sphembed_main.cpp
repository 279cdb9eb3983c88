// Command-line front end: synthetic data generation, training,
// evaluation, the loss-comparison and margin-ablation protocols, and
// embedding export.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sphembed/harness.hpp"

namespace {

using sphembed::ExperimentConfig;

struct CommonOpts {
    ExperimentConfig config;
    std::string config_path;
    std::string loss_name = "sphereface";
    std::string backbone_name = "mlp";
    std::string hidden_csv = "64";
};

void add_common(CLI::App *cmd, CommonOpts &o) {
    cmd->add_option("--config", o.config_path,
                    "JSON config file; its fields override flags");
    cmd->add_option("--manifest", o.config.dataset.manifest_path,
                    "dataset manifest path (default: synthetic clusters)");
    cmd->add_option("--classes", o.config.dataset.n_classes);
    cmd->add_option("--dim", o.config.dataset.dim);
    cmd->add_option("--per-class", o.config.dataset.samples_per_class);
    cmd->add_option("--separation", o.config.dataset.separation);
    cmd->add_option("--spread", o.config.dataset.spread);
    cmd->add_option("--backbone", o.backbone_name, "mlp or conv");
    cmd->add_option("--hidden", o.hidden_csv, "MLP hidden widths, e.g. 64,64");
    cmd->add_option("--conv-blocks", o.config.backbone.conv_blocks);
    cmd->add_option("--conv-channels", o.config.backbone.conv_channels);
    cmd->add_option("--embedding-dim", o.config.embedding_dim);
    cmd->add_option("--loss", o.loss_name,
                    "softmax | modified-softmax | sphereface | triplet");
    cmd->add_option("-m,--margin", o.config.loss.m, "angular margin");
    cmd->add_option("-s,--scale", o.config.loss.s, "logit scale");
    cmd->add_option("--triplet-margin", o.config.loss.triplet_margin);
    cmd->add_option("--epochs", o.config.epochs);
    cmd->add_flag("--paper-faithful", o.config.paper_faithful,
                  "275 epochs with breakpoints 125/175");
    cmd->add_option("--batch-size", o.config.batch_size);
    cmd->add_option("--seed", o.config.seed);
    cmd->add_option("--train-fraction", o.config.train_fraction);
    cmd->add_option("--k-max", o.config.k_max);
    cmd->add_flag("--augment", o.config.augment);
    cmd->add_option("--dropout", o.config.dropout_rate);
}

ExperimentConfig finalize(CommonOpts &o) {
    o.config.loss.kind = sphembed::loss_kind_from_name(o.loss_name);
    if (o.backbone_name == "mlp")
        o.config.backbone.kind = sphembed::BackboneSpec::Kind::Mlp;
    else if (o.backbone_name == "conv")
        o.config.backbone.kind = sphembed::BackboneSpec::Kind::Conv;
    else
        throw sphembed::contract_error("unknown backbone '" + o.backbone_name +
                                     "'");
    o.config.backbone.hidden.clear();
    std::stringstream ss(o.hidden_csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty())
            o.config.backbone.hidden.push_back(std::stoul(tok));

    if (!o.config_path.empty()) {
        std::ifstream is(o.config_path);
        if (!is)
            throw sphembed::contract_error("cannot open config file " +
                                         o.config_path);
        o.config = sphembed::config_from_json(nlohmann::json::parse(is),
                                            o.config);
    }
    return o.config;
}

void write_or_print(const std::string &text, const std::string &path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(path);
    if (!os)
        throw sphembed::numeric_error("cannot open " + path + " for writing");
    os << text;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"hypersphere angular metric-learning toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string out_path, model_dir, report_path, history_path;
    std::string split = "test";
    std::string margins_csv = "4,5,6";
    std::string losses_csv = "softmax,modified-softmax,triplet,sphereface";
    int eval_k = 1;
    bool sweep = false;

    auto *gen = app.add_subcommand(
        "gen-data", "write a synthetic cluster dataset as manifest + tensors");
    add_common(gen, opts);
    gen->add_option("--out", out_path, "output directory")->required();

    auto *train_cmd =
        app.add_subcommand("train", "train an embedding model");
    add_common(train_cmd, opts);
    train_cmd->add_option("--model-out", model_dir,
                          "checkpoint output directory");
    train_cmd->add_option("--history", history_path,
                          "loss-per-epoch table output path");

    auto *eval_cmd = app.add_subcommand(
        "evaluate", "k-NN evaluation of a trained or freshly trained model");
    add_common(eval_cmd, opts);
    eval_cmd->add_option("--model", model_dir, "checkpoint to load "
                                               "(default: train first)");
    eval_cmd->add_option("-k", eval_k, "neighbor count");
    eval_cmd->add_flag("--sweep", sweep, "sweep k = 1..k-max");
    eval_cmd->add_option("--report", report_path, "report output path");

    auto *cmp = app.add_subcommand("compare-losses",
                                   "train one model per loss function");
    add_common(cmp, opts);
    cmp->add_option("--losses", losses_csv);
    cmp->add_option("--out", report_path, "table output path");

    auto *abl = app.add_subcommand("ablate-margin",
                                   "train one model per angular margin");
    add_common(abl, opts);
    abl->add_option("--margins", margins_csv);
    abl->add_option("--out", report_path, "table output path");

    auto *exp = app.add_subcommand("export-embeddings",
                                   "extract and export embeddings");
    add_common(exp, opts);
    exp->add_option("--model", model_dir, "checkpoint to load "
                                          "(default: train first)");
    exp->add_option("--out", out_path, "output file")->required();
    exp->add_option("--split", split, "train | test | all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const ExperimentConfig config = finalize(opts);

        if (*gen) {
            const sphembed::Dataset ds = sphembed::prepare_dataset(config);
            sphembed::save_dataset(ds, out_path);
            std::cout << "wrote " << ds.size() << " samples, "
                      << ds.n_classes() << " classes to " << out_path << "\n";
        } else if (*train_cmd) {
            const sphembed::Dataset dataset = sphembed::prepare_dataset(config);
            sphembed::Rng split_rng = sphembed::Rng(config.seed).child(4);
            auto [train_set, test_set] = sphembed::stratified_split(
                dataset, config.train_fraction, split_rng);
            auto [model, record] = sphembed::train(config, train_set);
            if (!model_dir.empty())
                model.save(model_dir);
            if (!history_path.empty())
                sphembed::write_loss_history(record, history_path);
            std::cout << "trained " << record.loss_history.size()
                      << " epochs; first-epoch loss "
                      << (record.loss_history.empty()
                              ? 0.0
                              : record.loss_history.front())
                      << ", final " << (record.loss_history.empty()
                                            ? 0.0
                                            : record.loss_history.back())
                      << " (" << record.wall_seconds << " s)\n";
        } else if (*eval_cmd) {
            const sphembed::Dataset dataset = sphembed::prepare_dataset(config);
            sphembed::Rng split_rng = sphembed::Rng(config.seed).child(4);
            auto [train_set, test_set] = sphembed::stratified_split(
                dataset, config.train_fraction, split_rng);
            sphembed::Model model;
            if (!model_dir.empty())
                model = sphembed::Model::load(model_dir);
            else
                model = sphembed::train(config, train_set).first;
            const sphembed::EvalResult res = sphembed::evaluate(
                model, train_set, test_set,
                {.k = eval_k, .sweep = sweep, .k_max = config.k_max});
            std::ostringstream os;
            os << "k used: " << res.k_used << "\n";
            if (res.sweep) {
                os << "accuracy per k:";
                for (double a : res.sweep->accuracy)
                    os << " " << a;
                os << "\n";
            }
            os << sphembed::format_report(res.report, dataset.class_names);
            os << "mean intra-class angle: "
               << res.separation.mean_intra_angle
               << "\nmin inter-centroid angle: "
               << res.separation.min_inter_angle << "\n";
            write_or_print(os.str(), report_path);
        } else if (*cmp) {
            std::vector<sphembed::LossKind> kinds;
            std::stringstream ss(losses_csv);
            std::string tok;
            while (std::getline(ss, tok, ','))
                kinds.push_back(sphembed::loss_kind_from_name(tok));
            write_or_print(sphembed::compare_losses(config, kinds).format(),
                           report_path);
        } else if (*abl) {
            std::vector<int> margins;
            std::stringstream ss(margins_csv);
            std::string tok;
            while (std::getline(ss, tok, ','))
                margins.push_back(std::stoi(tok));
            write_or_print(sphembed::ablate_margin(config, margins).format(),
                           report_path);
        } else if (*exp) {
            const sphembed::Dataset dataset = sphembed::prepare_dataset(config);
            sphembed::Rng split_rng = sphembed::Rng(config.seed).child(4);
            auto [train_set, test_set] = sphembed::stratified_split(
                dataset, config.train_fraction, split_rng);
            sphembed::Model model;
            if (!model_dir.empty())
                model = sphembed::Model::load(model_dir);
            else
                model = sphembed::train(config, train_set).first;
            const sphembed::Dataset *target = &test_set;
            if (split == "train")
                target = &train_set;
            else if (split == "all")
                target = &dataset;
            else if (split != "test")
                throw sphembed::contract_error("unknown split '" + split + "'");
            const sphembed::EmbeddingBatch emb =
                sphembed::extract_embeddings(model, *target);
            sphembed::export_embeddings(emb, out_path);
            std::cout << "exported " << emb.count() << " embeddings to "
                      << out_path << "\n";
        }
    } catch (const sphembed::numeric_error &e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const sphembed::contract_error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
