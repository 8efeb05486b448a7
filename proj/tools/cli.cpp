// Copyright 2026 The evid Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "evid/checkpoint.hpp"
#include "evid/data.hpp"
#include "evid/errors.hpp"
#include "evid/format.hpp"
#include "evid/metrics.hpp"
#include "evid/random.hpp"
#include "evid/selfcheck.hpp"
#include "evid/trainer.hpp"

namespace evid::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSyntheticPreset = "synthetic-2d";
constexpr const char* kModelPrefix = "enn";
constexpr const char* kBaselinePrefix = "msp";

/// Check failures map to kCheckFailure.
class CheckFailed : public Error {
public:
    using Error::Error;
};

fs::path out_dir(const RunConfig& rc) {
    fs::path dir(rc.out);
    fs::create_directories(dir);
    return dir;
}

fs::path checkpoint_path(const RunConfig& rc) {
    return rc.checkpoint.empty() ? fs::path(rc.out) / "model.ckpt" : fs::path(rc.checkpoint);
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot write " + path.string());
    }
    return os;
}

std::string dataset_name(const std::string& path) {
    return fs::path(path).stem().string();
}

TrainingConfig resolve_training_config(const RunConfig& rc) {
    TrainingConfig cfg;
    const Architecture arch = parse_architecture(rc.arch);
    const bool synthetic = arch == Architecture::mlp2d;
    // Token models and feature models have separate defaults.
    cfg.betas.beta_in = rc.beta_in.value_or(synthetic ? 0.01 : 0.1);
    cfg.betas.beta_oe = rc.beta_oe.value_or(1.0);
    cfg.betas.beta_ad = rc.beta_ad.value_or(synthetic ? 0.1 : 0.0);
    cfg.delta_off = rc.delta_off.value_or(0.01);
    cfg.lr = rc.lr.value_or(synthetic ? 5e-3 : 1e-4);
    cfg.batch_size = rc.batch_size.value_or(synthetic ? 64 : 128);
    cfg.epochs = rc.epochs.value_or(synthetic ? 100 : 10);
    cfg.seed = rc.seed;
    cfg.fused = rc.fused;
    cfg.arch.kind = arch;
    cfg.arch.activation = parse_activation(rc.activation);
    cfg.arch.mlp_hidden = rc.mlp_hidden;
    cfg.arch.embed_dim = rc.embed_dim;
    cfg.arch.hidden_dim = rc.hidden_dim;
    cfg.arch.max_length = rc.max_length;
    if (cfg.betas.beta_in < 0.0 || cfg.betas.beta_oe < 0.0 || cfg.betas.beta_ad < 0.0) {
        throw ConfigError("--beta-in, --beta-oe and --beta-ad must be nonnegative");
    }
    if (!(cfg.delta_off > 0.0) || !(cfg.lr > 0.0) || cfg.batch_size < 1 || cfg.epochs < 1) {
        throw ConfigError("--delta-off, --lr, --batch-size and --epochs must be positive");
    }
    return cfg;
}

std::vector<double> parse_sweep(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
                   item.end());
        if (item.empty()) {
            continue;
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size() || !(v > 0.0)) {
                throw std::invalid_argument(item);
            }
            out.push_back(v);
        } catch (const std::logic_error&) {
            throw ConfigError("--sweep-delta-off: '" + item + "' is not a positive number");
        }
    }
    if (out.empty()) {
        throw ConfigError("--sweep-delta-off: empty list");
    }
    return out;
}

// Data sets of one run, already encoded for the model.
struct NamedCorpus {
    std::string name;
    Corpus corpus;
};

struct RunData {
    Corpus id_train;
    std::optional<Corpus> oe;
    std::optional<NamedCorpus> id_test;
    std::vector<NamedCorpus> ood;
    std::string in_name;
};

SyntheticData synthetic_for(std::uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    return generate_synthetic_2d(spec);
}

void require_file(const std::string& path, const char* flag) {
    if (path.empty()) {
        throw ConfigError(std::string(flag) + " is required");
    }
    if (!fs::exists(path)) {
        throw ConfigError(std::string(flag) + ": no such file '" + path + "'");
    }
}

int feature_dim(const Corpus& c) {
    const auto d = c.examples.front().features.size();
    for (const auto& ex : c.examples) {
        if (ex.features.size() != d) {
            throw IoError(c.source + ": feature vectors differ in length");
        }
    }
    if (d == 0) {
        throw IoError(c.source + ": mlp2d needs a 'features' array on every line");
    }
    return static_cast<int>(d);
}

// Loads train-time data and fixes the data-dependent architecture fields.
RunData load_training_data(const RunConfig& rc, TrainingConfig& cfg, Checkpoint& ckpt, bool need_eval_sets) {
    RunData data;
    const bool preset = rc.preset == kSyntheticPreset;
    if (!rc.preset.empty() && !preset) {
        throw ConfigError("--preset: unknown preset '" + rc.preset + "' (expected synthetic-2d)");
    }
    if (preset) {
        if (cfg.arch.kind != Architecture::mlp2d) {
            throw ConfigError("--preset synthetic-2d requires --arch mlp2d");
        }
        SyntheticData syn = synthetic_for(rc.seed);
        data.id_train = std::move(syn.id_train);
        data.oe = std::move(syn.oe);
        data.id_test = NamedCorpus{"id_test", std::move(syn.id_test)};
        data.ood.push_back({"far_ood", std::move(syn.far_ood)});
        data.in_name = "synthetic";
        ckpt.meta["data.preset"] = kSyntheticPreset;
        ckpt.meta["data.seed"] = std::to_string(rc.seed);
    } else {
        require_file(rc.id_train, "--id-train");
        if (cfg.betas.beta_oe > 0.0 && rc.oe.empty()) {
            throw ConfigError("--oe is required when --beta-oe > 0 (pass --beta-oe 0 to train without outliers)");
        }
        if (!rc.oe.empty()) {
            require_file(rc.oe, "--oe");
        }
        if (need_eval_sets) {
            require_file(rc.id_test, "--id-test");
            if (rc.ood.empty()) {
                throw ConfigError("--ood is required");
            }
        }
        data.id_train = load_jsonl_corpus(rc.id_train, JsonlSchema{});
        if (!data.id_train.labeled()) {
            throw ConfigError("--id-train: every line needs a label");
        }
        data.in_name = dataset_name(rc.id_train);
        JsonlSchema fixed;
        fixed.class_names = data.id_train.class_names;
        JsonlSchema outliers;
        outliers.ignore_labels = true;
        if (!rc.oe.empty()) {
            data.oe = load_jsonl_corpus(rc.oe, outliers);
        }
        if (need_eval_sets) {
            data.id_test = NamedCorpus{dataset_name(rc.id_test), load_jsonl_corpus(rc.id_test, fixed)};
            for (const auto& p : rc.ood) {
                require_file(p, "--ood");
                data.ood.push_back({dataset_name(p), load_jsonl_corpus(p, outliers)});
            }
        }
    }
    cfg.arch.num_classes = static_cast<int>(data.id_train.class_names.size());
    if (cfg.arch.num_classes < 2) {
        throw ConfigError("--id-train: need at least two classes");
    }
    if (cfg.arch.kind == Architecture::mlp2d) {
        cfg.arch.input_dim = feature_dim(data.id_train);
    } else {
        Vocab vocab = build_vocab_and_encode(data.id_train, rc.min_freq, static_cast<std::size_t>(rc.max_vocab));
        cfg.arch.vocab_size = static_cast<int>(vocab.size());
        if (data.oe) {
            encode_corpus(*data.oe, vocab);
        }
        if (data.id_test) {
            encode_corpus(data.id_test->corpus, vocab);
        }
        for (auto& o : data.ood) {
            encode_corpus(o.corpus, vocab);
        }
        ckpt.lists["vocab"] = vocab.tokens();
    }
    ckpt.lists["classes"] = data.id_train.class_names;
    return data;
}

void print_epoch(std::ostream& out, const char* label, const EpochRecord& r) {
    out << label << " epoch " << r.epoch << ": id_loss=" << format_number(r.id_loss)
        << " id_acc=" << format_number(r.id_accuracy) << " id_vac=" << format_number(r.id_vacuity)
        << " oe_vac=" << format_number(r.oe_vacuity) << " ad_vac=" << format_number(r.ad_vacuity) << '\n';
}

std::span<const LabeledExample> outliers_of(const RunData& data) {
    return data.oe ? std::span<const LabeledExample>(data.oe->examples) : std::span<const LabeledExample>{};
}

ScoredSet base_rate_scores(const std::vector<double>& id_scores, const std::vector<double>& ood_scores,
                           std::uint64_t seed) {
    const BaseRate ratio{1, 5};
    const std::size_t n_id = std::min(id_scores.size(), ood_scores.size() * 5);
    return subsample_base_rate(id_scores, ood_scores, ratio, seed, n_id);
}

std::vector<double> vacuity_scores(const Classifier& model, const Corpus& c) {
    std::vector<double> out;
    for (const auto& r : predict_reports(model, make_batch(c.examples, model.spec()))) {
        out.push_back(r.vacuity);
    }
    return out;
}

int cmd_sweep(const RunConfig& rc, std::ostream& out) {
    TrainingConfig cfg = resolve_training_config(rc);
    Checkpoint unused;
    const RunData data = load_training_data(rc, cfg, unused, true);
    const auto deltas = parse_sweep(rc.sweep_delta_off);
    const fs::path path = out_dir(rc) / "sweep_delta_off.csv";
    std::ofstream csv = open_output(path);
    csv << "delta_off,in_dataset,out_dataset,score,auroc,aupr,fpr90\n";
    const auto subsample_seed = derive_seed(rc.seed, Stream::subsample);
    for (double delta : deltas) {
        TrainingConfig c = cfg;
        c.delta_off = delta;
        const TrainResult trained = train(data.id_train.examples, outliers_of(data), c);
        const auto id_scores = vacuity_scores(trained.model, data.id_test->corpus);
        for (const auto& o : data.ood) {
            const auto m =
                detection_metrics(base_rate_scores(id_scores, vacuity_scores(trained.model, o.corpus), subsample_seed));
            csv << format_number(delta) << ',' << data.in_name << ',' << o.name << ",vacuity,"
                << format_number(m.auroc) << ',' << format_number(m.aupr) << ',' << format_number(m.fpr90) << '\n';
            out << "delta_off=" << format_number(delta) << ' ' << o.name << " fpr90=" << format_number(m.fpr90)
                << '\n';
        }
    }
    out << "wrote " << path.string() << '\n';
    return kOk;
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
    if (!rc.sweep_delta_off.empty()) {
        return cmd_sweep(rc, out);
    }
    TrainingConfig cfg = resolve_training_config(rc);
    Checkpoint ckpt;
    const RunData data = load_training_data(rc, cfg, ckpt, false);
    const fs::path dir = out_dir(rc);

    const TrainResult trained = train(data.id_train.examples, outliers_of(data), cfg);
    store_classifier(ckpt, kModelPrefix, trained.model);
    {
        std::ofstream log = open_output(dir / "train_log.csv");
        write_training_log_csv(log, trained.log, rc.log_wall_time);
    }
    print_epoch(out, "enn", trained.log.epochs.back());
    if (trained.log.zero_gradient_samples > 0) {
        out << "off-manifold samples with zero loss gradient: " << trained.log.zero_gradient_samples << '\n';
    }
    if (!rc.no_baseline) {
        const TrainResult baseline = train_softmax_baseline(data.id_train.examples, cfg);
        store_classifier(ckpt, kBaselinePrefix, baseline.model);
        std::ofstream log = open_output(dir / "baseline_log.csv");
        write_training_log_csv(log, baseline.log, rc.log_wall_time);
        print_epoch(out, "msp", baseline.log.epochs.back());
    }
    ckpt.meta["train.beta_in"] = format_number(cfg.betas.beta_in);
    ckpt.meta["train.beta_oe"] = format_number(cfg.betas.beta_oe);
    ckpt.meta["train.beta_ad"] = format_number(cfg.betas.beta_ad);
    ckpt.meta["train.delta_off"] = format_number(cfg.delta_off);
    ckpt.meta["train.epochs"] = std::to_string(cfg.epochs);
    ckpt.meta["train.seed"] = std::to_string(cfg.seed);
    const fs::path path = checkpoint_path(rc);
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    save_checkpoint(path, ckpt);
    out << "wrote " << path.string() << '\n';
    return kOk;
}

struct LoadedModels {
    Checkpoint ckpt;
    Classifier model;
    std::optional<Classifier> baseline;
    std::optional<Vocab> vocab;
};

LoadedModels load_models(const RunConfig& rc) {
    const fs::path path = checkpoint_path(rc);
    if (!fs::exists(path)) {
        throw ConfigError("checkpoint not found: " + path.string() + " (run `evid train` or pass --checkpoint)");
    }
    Checkpoint ckpt = load_checkpoint(path);
    if (!has_classifier(ckpt, kModelPrefix)) {
        throw IoError(path.string() + ": no evidential model in checkpoint");
    }
    Classifier model = restore_classifier(ckpt, kModelPrefix);
    std::optional<Classifier> baseline;
    if (has_classifier(ckpt, kBaselinePrefix)) {
        baseline = restore_classifier(ckpt, kBaselinePrefix);
    }
    std::optional<Vocab> vocab;
    if (auto it = ckpt.lists.find("vocab"); it != ckpt.lists.end()) {
        vocab = Vocab(it->second);
    }
    return {std::move(ckpt), std::move(model), std::move(baseline), std::move(vocab)};
}

std::vector<std::string> selected_scores(const std::string& score) {
    static const std::vector<std::string> all{"vacuity", "dissonance", "entropy", "msp"};
    if (score == "all") {
        return all;
    }
    if (std::find(all.begin(), all.end(), score) == all.end()) {
        throw ConfigError("--score: unknown score '" + score + "'");
    }
    return {score};
}

int cmd_eval_ood(const RunConfig& rc, std::ostream& out) {
    const auto scores = selected_scores(rc.score);
    LoadedModels models = load_models(rc);
    const ArchitectureSpec& spec = models.model.spec();

    NamedCorpus id_test;
    std::vector<NamedCorpus> ood;
    std::string in_name;
    const auto preset = models.ckpt.meta.find("data.preset");
    if (preset != models.ckpt.meta.end() && rc.id_test.empty() && rc.ood.empty()) {
        SyntheticData syn = synthetic_for(std::stoull(models.ckpt.meta_value("data.seed")));
        id_test = {"id_test", std::move(syn.id_test)};
        ood.push_back({"far_ood", std::move(syn.far_ood)});
        in_name = "synthetic";
    } else {
        require_file(rc.id_test, "--id-test");
        if (rc.ood.empty()) {
            throw ConfigError("--ood is required (repeat it for several OOD sets)");
        }
        JsonlSchema fixed;
        fixed.class_names = models.ckpt.lists.at("classes");
        JsonlSchema outliers;
        outliers.ignore_labels = true;
        id_test = {dataset_name(rc.id_test), load_jsonl_corpus(rc.id_test, fixed)};
        for (const auto& p : rc.ood) {
            require_file(p, "--ood");
            ood.push_back({dataset_name(p), load_jsonl_corpus(p, outliers)});
        }
        in_name = dataset_name(rc.id_test);
        if (models.vocab) {
            encode_corpus(id_test.corpus, *models.vocab);
            for (auto& o : ood) {
                encode_corpus(o.corpus, *models.vocab);
            }
        }
    }
    if (std::find(scores.begin(), scores.end(), "msp") != scores.end() && !models.baseline) {
        if (rc.score == "msp") {
            throw ConfigError("--score msp needs a checkpoint trained with the softmax baseline");
        }
        out << "note: checkpoint has no softmax baseline; skipping msp\n";
    }

    auto score_of = [](const UncertaintyReport& r, const std::string& s) {
        return s == "vacuity" ? r.vacuity : (s == "dissonance" ? r.dissonance : r.entropy);
    };
    const fs::path dir = out_dir(rc);
    const auto id_reports = predict_reports(models.model, make_batch(id_test.corpus.examples, spec));
    std::vector<double> id_msp;
    if (models.baseline) {
        id_msp = msp_scores(*models.baseline, make_batch(id_test.corpus.examples, spec));
    }
    std::vector<TaggedReport> tagged;
    for (std::size_t i = 0; i < id_reports.size(); ++i) {
        tagged.push_back({id_reports[i], false, id_test.corpus.examples[i].label});
    }
    std::ofstream reports = open_output(dir / "reports.jsonl");
    auto dump_reports = [&](const std::string& name, const std::vector<UncertaintyReport>& rs) {
        for (std::size_t i = 0; i < rs.size(); ++i) {
            reports << "{\"dataset\":\"" << name << "\",\"index\":" << i << ',' << report_to_json(rs[i]).substr(1)
                    << '\n';
        }
    };
    dump_reports(id_test.name, id_reports);

    std::vector<MetricRow> rows;
    const auto subsample_seed = derive_seed(rc.seed, Stream::subsample);
    for (const auto& o : ood) {
        const auto o_reports = predict_reports(models.model, make_batch(o.corpus.examples, spec));
        dump_reports(o.name, o_reports);
        for (const auto& r : o_reports) {
            tagged.push_back({r, true, std::nullopt});
        }
        for (const auto& s : scores) {
            std::vector<double> id_s, ood_s;
            if (s == "msp") {
                if (!models.baseline) {
                    continue;
                }
                id_s = id_msp;
                ood_s = msp_scores(*models.baseline, make_batch(o.corpus.examples, spec));
            } else {
                for (const auto& r : id_reports) {
                    id_s.push_back(score_of(r, s));
                }
                for (const auto& r : o_reports) {
                    ood_s.push_back(score_of(r, s));
                }
            }
            const ScoredSet set = base_rate_scores(id_s, ood_s, subsample_seed);
            rows.push_back({in_name, o.name, s == "msp" ? "msp" : "enn", s, detection_metrics(set),
                            set.id_scores.size(), set.ood_scores.size()});
        }
    }
    {
        std::ofstream csv = open_output(dir / "metrics.csv");
        write_metrics_csv(csv, rows);
    }
    {
        std::ofstream csv = open_output(dir / "uncertainty_summary.csv");
        write_summary_csv(csv, summarize_uncertainty(tagged));
    }
    out << std::left << std::setw(14) << "out_dataset" << std::setw(12) << "score" << std::setw(10) << "auroc"
        << std::setw(10) << "aupr" << "fpr90\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(14) << r.out_dataset << std::setw(12) << r.score << std::fixed
            << std::setprecision(4) << std::setw(10) << r.metrics.auroc << std::setw(10) << r.metrics.aupr
            << r.metrics.fpr90 << '\n';
        out << std::defaultfloat;
    }
    out << "wrote " << (dir / "metrics.csv").string() << '\n';
    return kOk;
}

int cmd_map(const RunConfig& rc, std::ostream& out) {
    LoadedModels models = load_models(rc);
    if (models.model.spec().kind != Architecture::mlp2d || models.model.spec().input_dim != 2) {
        throw ConfigError("map: the checkpoint's model does not take 2-D inputs");
    }
    if (!(rc.grid_min < rc.grid_max)) {
        throw ConfigError("--grid-min must be below --grid-max");
    }
    GridSpec grid{rc.grid_min, rc.grid_max, rc.grid_min, rc.grid_max, rc.grid_resolution};
    const auto rows = uncertainty_grid(models.model, grid);
    const fs::path path = out_dir(rc) / "uncertainty_grid.csv";
    std::ofstream csv = open_output(path);
    write_grid_csv(csv, rows);
    out << "wrote " << rows.size() << " grid points to " << path.string() << '\n';
    return kOk;
}

int cmd_selfcheck(const RunConfig& rc, std::ostream& out) {
    SelfcheckOptions opts;
    opts.seed = rc.seed;
    opts.loss_perturbation = rc.perturb_loss;
    opts.monte_carlo_draws = rc.selfcheck_draws;
    const auto results = run_selfcheck(opts);
    write_check_report(out, results);
    const bool ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
    out << (ok ? "all checks passed\n" : "self-check FAILED\n");
    return ok ? kOk : kCheckFailure;
}

int cmd_gen_synthetic(const RunConfig& rc, std::ostream& out) {
    const SyntheticData d = synthetic_for(rc.seed);
    const fs::path dir = out_dir(rc);
    const std::pair<const char*, const Corpus*> files[] = {
        {"id_train.jsonl", &d.id_train}, {"id_test.jsonl", &d.id_test},
        {"oe.jsonl", &d.oe},             {"far_ood.jsonl", &d.far_ood},
        {"boundary_probes.jsonl", &d.boundary_probes}, {"core_probes.jsonl", &d.core_probes}};
    for (const auto& [name, corpus] : files) {
        std::ofstream os = open_output(dir / name);
        write_jsonl_corpus(os, *corpus);
    }
    out << "wrote synthetic 2-D data to " << dir.string() << '\n';
    return kOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig rc;
    CLI::App app{"Evidential uncertainty classification and out-of-distribution detection"};
    app.set_config("--config", "", "Flat key = value file; command-line flags take precedence");
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--seed", rc.seed, "Root seed for every random stream");
    app.add_option("--preset", rc.preset, "Built-in data set (synthetic-2d)");
    app.add_option("--id-train", rc.id_train, "In-distribution training JSONL");
    app.add_option("--id-test", rc.id_test, "In-distribution test JSONL");
    app.add_option("--oe", rc.oe, "Auxiliary outlier JSONL");
    app.add_option("--ood", rc.ood, "Out-of-distribution test JSONL (repeatable)");
    app.add_option("--checkpoint", rc.checkpoint, "Checkpoint path (default <out>/model.ckpt)");
    app.add_option("--out", rc.out, "Output directory");
    app.add_option("--beta-in", rc.beta_in, "Weight of the ID vacuity penalty");
    app.add_option("--beta-oe", rc.beta_oe, "Weight of the outlier vacuity reward");
    app.add_option("--beta-ad", rc.beta_ad, "Weight of the off-manifold vacuity reward");
    app.add_option("--delta-off", rc.delta_off, "Off-manifold l-inf radius");
    app.add_option("--lr", rc.lr, "Adam learning rate");
    app.add_option("--batch-size", rc.batch_size, "Minibatch size");
    app.add_option("--epochs", rc.epochs, "Training epochs");
    app.add_option("--arch", rc.arch, "Architecture")->check(CLI::IsMember({"mlp2d", "gru"}));
    app.add_option("--activation", rc.activation, "Evidence activation")->check(CLI::IsMember({"softplus", "relu"}));
    app.add_option("--mlp-hidden", rc.mlp_hidden, "Hidden width of mlp2d");
    app.add_option("--embed-dim", rc.embed_dim, "Token embedding width (gru)");
    app.add_option("--hidden-dim", rc.hidden_dim, "GRU state width");
    app.add_option("--max-length", rc.max_length, "Token sequences are truncated to this length");
    app.add_option("--min-freq", rc.min_freq, "Tokens rarer than this map to <unk>");
    app.add_option("--max-vocab", rc.max_vocab, "Vocabulary cap excluding specials (0: none)");
    app.add_flag("--fused", rc.fused, "Optimize the combined objective in one step per iteration");
    app.add_flag("--no-baseline", rc.no_baseline, "Skip training the softmax baseline");
    app.add_flag("--log-wall-time", rc.log_wall_time, "Add a wall_seconds column to training logs");
    app.add_option("--score", rc.score, "OOD score")
        ->check(CLI::IsMember({"vacuity", "dissonance", "entropy", "msp", "all"}));
    app.add_option("--sweep-delta-off", rc.sweep_delta_off, "Comma-separated delta_off values to sweep");
    app.add_option("--grid-resolution", rc.grid_resolution, "Grid points per axis for `map`");
    app.add_option("--grid-min", rc.grid_min, "Lower grid bound on both axes");
    app.add_option("--grid-max", rc.grid_max, "Upper grid bound on both axes");
    app.add_option("--perturb-loss", rc.perturb_loss, "Offset added to the loss inside selfcheck (oracle test)");
    app.add_option("--selfcheck-draws", rc.selfcheck_draws, "Dirichlet draws per Monte-Carlo loss check");

    const std::map<std::string, std::function<int(const RunConfig&, std::ostream&)>> commands{
        {"train", cmd_train},         {"eval-ood", cmd_eval_ood},          {"map", cmd_map},
        {"selfcheck", cmd_selfcheck}, {"gen-synthetic", cmd_gen_synthetic}};
    const std::map<std::string, std::string> help{
        {"train", "Train the evidential model (and softmax baseline); --sweep-delta-off runs a sweep"},
        {"eval-ood", "AUROC/AUPR/FPR90 per score and OOD set at a 1:5 base rate"},
        {"map", "Uncertainty grid CSV for a 2-D model"},
        {"selfcheck", "Built-in numerical checks"},
        {"gen-synthetic", "Write the synthetic 2-D data sets as JSONL"}};
    for (const auto& [name, text] : help) {
        app.add_subcommand(name, text)->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, er;
        const int code = app.exit(e, o, er);
        out << o.str();
        err << er.str();
        return code == 0 ? kOk : kValidationError;
    }
    rc.command = app.get_subcommands().front()->get_name();
    try {
        return commands.at(rc.command)(rc, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

} // namespace evid::cli
