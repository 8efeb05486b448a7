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

#include "evid/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>

#include "evid/adversarial.hpp"
#include "evid/errors.hpp"
#include "evid/format.hpp"
#include "evid/optimizer.hpp"
#include "evid/random.hpp"

namespace evid {

void TrainingConfig::validate() const {
    betas.validate();
    if (!(delta_off > 0.0)) {
        throw ConfigError("delta_off must be positive");
    }
    if (!(lr > 0.0)) {
        throw ConfigError("learning rate must be positive");
    }
    if (batch_size < 1) {
        throw ConfigError("batch size must be positive");
    }
    if (epochs < 1) {
        throw ConfigError("epochs must be positive");
    }
    arch.validate();
}

void write_training_log_csv(std::ostream& os, const TrainingLog& log, bool include_wall_time) {
    os << "epoch,id_loss,id_vacuity,oe_vacuity,ad_vacuity,id_accuracy";
    if (include_wall_time) {
        os << ",wall_seconds";
    }
    os << '\n';
    for (const auto& r : log.epochs) {
        os << r.epoch << ',' << format_number(r.id_loss) << ',' << format_number(r.id_vacuity) << ','
           << format_number(r.oe_vacuity) << ',' << format_number(r.ad_vacuity) << ','
           << format_number(r.id_accuracy);
        if (include_wall_time) {
            os << ',' << format_number(r.wall_seconds);
        }
        os << '\n';
    }
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_labeled(std::span<const LabeledExample> set, int num_classes) {
    if (set.empty()) {
        throw DomainError("training set is empty");
    }
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (!set[i].label || *set[i].label < 0 || *set[i].label >= num_classes) {
            throw DomainError("training example " + std::to_string(i) + " has no valid label");
        }
    }
}

std::vector<std::size_t> permutation(std::size_t n, Rng rng) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

std::size_t correct_predictions(const ad::Matrix& scores, std::span<const int> labels) {
    std::size_t correct = 0;
    for (Eigen::Index b = 0; b < scores.cols(); ++b) {
        Eigen::Index arg = 0;
        scores.col(b).maxCoeff(&arg);
        correct += static_cast<int>(arg) == labels[static_cast<std::size_t>(b)] ? 1 : 0;
    }
    return correct;
}

double column_mean_vacuity(const ad::Matrix& alpha) {
    return (static_cast<double>(alpha.rows()) * alpha.colwise().sum().cwiseInverse()).mean();
}

struct Running {
    double sum = 0.0;
    std::size_t n = 0;
    void add(double v, std::size_t w) {
        sum += v * static_cast<double>(w);
        n += w;
    }
    double mean() const { return n == 0 ? kNaN : sum / static_cast<double>(n); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

TrainResult train(std::span<const LabeledExample> id_set, std::span<const LabeledExample> oe_set,
                  const TrainingConfig& cfg) {
    cfg.validate();
    require_labeled(id_set, cfg.arch.num_classes);
    if (cfg.betas.beta_oe > 0.0 && oe_set.empty()) {
        throw DomainError("beta_oe > 0 requires a nonempty outlier set");
    }

    TrainResult result{Classifier(cfg.arch, derive_seed(cfg.seed, Stream::init)), {}};
    Classifier& model = result.model;
    Adam adam(AdamConfig{cfg.lr});
    const PerturbationConfig perturb{cfg.delta_off, cfg.seed, true};
    const auto m = static_cast<std::size_t>(cfg.batch_size);
    const std::size_t iterations = (id_set.size() + m - 1) / m;
    const int k = cfg.arch.num_classes;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto order = permutation(id_set.size(), make_rng(cfg.seed, Stream::shuffle, {std::uint64_t(epoch)}));
        const auto oe_order =
            oe_set.empty() ? std::vector<std::size_t>{}
                           : permutation(oe_set.size(), make_rng(cfg.seed, Stream::outlier_sampling,
                                                                 {std::uint64_t(epoch)}));
        Running id_loss, id_vac, oe_vac, ad_vac, id_acc;

        for (std::size_t it = 0; it < iterations; ++it) {
            const std::size_t begin = it * m;
            const std::size_t end = std::min(begin + m, id_set.size());
            const std::span<const std::size_t> id_idx(order.data() + begin, end - begin);
            const Batch id_batch = make_batch(id_set, id_idx, cfg.arch);
            const std::size_t n = id_batch.size();

            std::optional<Batch> oe_batch;
            if (!oe_set.empty()) {
                std::vector<std::size_t> oe_idx(n);
                for (std::size_t i = 0; i < n; ++i) {
                    oe_idx[i] = oe_order[(begin + i) % oe_order.size()];
                }
                oe_batch = make_batch(oe_set, oe_idx, cfg.arch);
            }

            const std::uint64_t global_iter = static_cast<std::uint64_t>(epoch) * iterations + it;
            auto off_manifold = [&] {
                std::vector<std::uint64_t> draws(n);
                for (std::size_t i = 0; i < n; ++i) {
                    draws[i] = global_iter * m + i;
                }
                auto s = generate_off_manifold(model, id_batch, perturb, draws);
                result.log.zero_gradient_samples += s.zero_gradient;
                return s;
            };

            if (cfg.fused) {
                std::optional<OffManifoldSamples> ad;
                if (cfg.betas.beta_ad > 0.0) {
                    ad = off_manifold();
                }
                ad::Tape tape;
                ad::Var objective = total_objective(tape, model, id_batch, oe_batch ? &*oe_batch : nullptr,
                                                    ad ? &ad->perturbed : nullptr, cfg.betas);
                model.params().zero_grad();
                tape.backward(objective);
                adam.step(model.params());
            } else {
                // Step 1: classification + ID vacuity.
                {
                    ad::Tape tape;
                    ad::Var alpha = model.alpha(tape, model.embed(tape, id_batch));
                    ad::Var loss = enn_loss_mean(alpha, one_hot(id_batch.labels, k));
                    id_loss.add(loss.scalar(), n);
                    id_vac.add(column_mean_vacuity(alpha.value()), n);
                    id_acc.add(static_cast<double>(correct_predictions(alpha.value(), id_batch.labels)) /
                                   static_cast<double>(n),
                               n);
                    ad::Var objective = cfg.betas.beta_in > 0.0
                                            ? loss + ad::scale(vacuity_mean(alpha), cfg.betas.beta_in)
                                            : loss;
                    model.params().zero_grad();
                    tape.backward(objective);
                    adam.step(model.params());
                }
                // Step 2: outlier vacuity ascent.
                if (oe_batch) {
                    if (cfg.betas.beta_oe > 0.0) {
                        ad::Tape tape;
                        ad::Var vac = vacuity_mean(model.alpha(tape, model.embed(tape, *oe_batch)));
                        oe_vac.add(vac.scalar(), n);
                        model.params().zero_grad();
                        tape.backward(ad::scale(vac, -cfg.betas.beta_oe));
                        adam.step(model.params());
                    } else {
                        oe_vac.add(column_mean_vacuity(model.predict_alpha(*oe_batch)), n);
                    }
                }
                // Step 3: off-manifold vacuity ascent.
                if (cfg.betas.beta_ad > 0.0) {
                    const auto samples = off_manifold();
                    ad::Tape tape;
                    ad::Var vac =
                        vacuity_mean(model.alpha(tape, Classifier::bind(tape, samples.perturbed, false)));
                    ad_vac.add(vac.scalar(), n);
                    model.params().zero_grad();
                    tape.backward(ad::scale(vac, -cfg.betas.beta_ad));
                    adam.step(model.params());
                }
            }
        }

        EpochRecord rec;
        rec.epoch = epoch + 1;
        if (cfg.fused) {
            const auto stats = evaluate_epoch(model, id_set);
            rec.id_loss = stats.mean_loss;
            rec.id_vacuity = stats.mean_vacuity;
            rec.id_accuracy = stats.accuracy;
            rec.oe_vacuity = oe_set.empty() ? kNaN
                                            : column_mean_vacuity(model.predict_alpha(make_batch(oe_set, cfg.arch)));
            rec.ad_vacuity = kNaN;
        } else {
            rec.id_loss = id_loss.mean();
            rec.id_vacuity = id_vac.mean();
            rec.oe_vacuity = oe_vac.mean();
            rec.ad_vacuity = ad_vac.mean();
            rec.id_accuracy = id_acc.mean();
        }
        rec.wall_seconds = seconds_since(t0);
        result.log.epochs.push_back(rec);
    }
    return result;
}

TrainResult train_softmax_baseline(std::span<const LabeledExample> id_set, const TrainingConfig& cfg) {
    cfg.validate();
    require_labeled(id_set, cfg.arch.num_classes);
    TrainResult result{Classifier(cfg.arch, derive_seed(cfg.seed, Stream::init)), {}};
    Classifier& model = result.model;
    Adam adam(AdamConfig{cfg.lr});
    const auto m = static_cast<std::size_t>(cfg.batch_size);
    const std::size_t iterations = (id_set.size() + m - 1) / m;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto order = permutation(id_set.size(), make_rng(cfg.seed, Stream::shuffle, {std::uint64_t(epoch)}));
        Running loss_avg, acc;
        for (std::size_t it = 0; it < iterations; ++it) {
            const std::size_t begin = it * m;
            const std::size_t end = std::min(begin + m, id_set.size());
            const Batch batch =
                make_batch(id_set, std::span<const std::size_t>(order.data() + begin, end - begin), cfg.arch);
            ad::Tape tape;
            ad::Var logits = model.logits(tape, model.embed(tape, batch));
            ad::Var loss = softmax_cross_entropy_mean(logits, batch.labels);
            loss_avg.add(loss.scalar(), batch.size());
            acc.add(static_cast<double>(correct_predictions(logits.value(), batch.labels)) /
                        static_cast<double>(batch.size()),
                    batch.size());
            model.params().zero_grad();
            tape.backward(loss);
            adam.step(model.params());
        }
        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.id_loss = loss_avg.mean();
        rec.id_accuracy = acc.mean();
        rec.id_vacuity = rec.oe_vacuity = rec.ad_vacuity = kNaN;
        rec.wall_seconds = seconds_since(t0);
        result.log.epochs.push_back(rec);
    }
    return result;
}

EvaluationStats evaluate_epoch(const Classifier& model, std::span<const LabeledExample> labeled) {
    require_labeled(labeled, model.spec().num_classes);
    constexpr std::size_t kChunk = 1024;
    EvaluationStats stats;
    double loss = 0.0, vac = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < labeled.size(); begin += kChunk) {
        const auto chunk = labeled.subspan(begin, std::min(kChunk, labeled.size() - begin));
        const Batch batch = make_batch(chunk, model.spec());
        ad::Tape tape;
        ad::Var alpha = model.alpha_from_logits(model.frozen_logits(tape, Classifier::bind(tape, model.embed_values(batch), false)));
        loss += enn_loss_mean(alpha, one_hot(batch.labels, model.spec().num_classes)).scalar() *
                static_cast<double>(batch.size());
        vac += column_mean_vacuity(alpha.value()) * static_cast<double>(batch.size());
        correct += correct_predictions(alpha.value(), batch.labels);
    }
    stats.count = labeled.size();
    stats.accuracy = static_cast<double>(correct) / static_cast<double>(stats.count);
    stats.mean_loss = loss / static_cast<double>(stats.count);
    stats.mean_vacuity = vac / static_cast<double>(stats.count);
    return stats;
}

} // namespace evid
