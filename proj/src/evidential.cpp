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

#include "evid/evidential.hpp"

#include <algorithm>

#include <json.hpp>

namespace evid {

ad::Matrix one_hot(std::span<const int> labels, int num_classes) {
    ad::Matrix y = ad::Matrix::Zero(num_classes, static_cast<Eigen::Index>(labels.size()));
    for (std::size_t b = 0; b < labels.size(); ++b) {
        if (labels[b] < 0 || labels[b] >= num_classes) {
            throw DomainError("one_hot: label " + std::to_string(labels[b]) + " outside [0, " +
                              std::to_string(num_classes) + ")");
        }
        y(labels[b], static_cast<Eigen::Index>(b)) = 1.0;
    }
    return y;
}

ad::Var enn_loss_mean(ad::Var alpha, const ad::Matrix& y) {
    const ad::Matrix& a = alpha.value();
    if (a.rows() != y.rows() || a.cols() != y.cols()) {
        throw ShapeError("enn_loss_mean: alpha is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         ", labels are " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()));
    }
    if (a.cols() == 0) {
        throw ShapeError("enn_loss_mean: empty batch");
    }
    const double inv_b = 1.0 / static_cast<double>(a.cols());
    const Eigen::RowVectorXd s = a.colwise().sum();
    double total = 0.0;
    for (Eigen::Index b = 0; b < a.cols(); ++b) {
        const double sb = s(b);
        for (Eigen::Index j = 0; j < a.rows(); ++j) {
            const double yj = y(j, b);
            total += yj * yj - 2.0 * yj * a(j, b) / sb + a(j, b) * (a(j, b) + 1.0) / (sb * (sb + 1.0));
        }
    }
    ad::Matrix out(1, 1);
    out(0, 0) = total * inv_b;
    const auto ia = alpha.index();
    return alpha.tape()->record("enn_loss_mean", std::move(out), {alpha},
                                [ia, y, inv_b](ad::Tape& tp, std::size_t self) {
                                    const ad::Matrix& a = tp.value(ia);
                                    const double g = tp.grad(self)(0, 0) * inv_b;
                                    ad::Matrix& ga = tp.grad(ia);
                                    for (Eigen::Index b = 0; b < a.cols(); ++b) {
                                        const double sb = a.col(b).sum();
                                        const double ya = y.col(b).dot(a.col(b));
                                        const double sq = a.col(b).squaredNorm() + sb;
                                        const double common = 2.0 * ya / (sb * sb) -
                                                              sq * (2.0 * sb + 1.0) / (sb * sb * (sb + 1.0) * (sb + 1.0));
                                        for (Eigen::Index k = 0; k < a.rows(); ++k) {
                                            const double d = -2.0 * y(k, b) / sb +
                                                             (2.0 * a(k, b) + 1.0) / (sb * (sb + 1.0)) + common;
                                            ga(k, b) += g * d;
                                        }
                                    }
                                });
}

ad::Var vacuity_mean(ad::Var alpha) {
    const ad::Matrix& a = alpha.value();
    if (a.cols() == 0) {
        throw ShapeError("vacuity_mean: empty batch");
    }
    const double k = static_cast<double>(a.rows());
    const double inv_b = 1.0 / static_cast<double>(a.cols());
    const Eigen::RowVectorXd s = a.colwise().sum();
    ad::Matrix out(1, 1);
    out(0, 0) = (k * s.cwiseInverse()).sum() * inv_b;
    const auto ia = alpha.index();
    return alpha.tape()->record("vacuity_mean", std::move(out), {alpha},
                                [ia, k, inv_b, s](ad::Tape& tp, std::size_t self) {
                                    const double g = tp.grad(self)(0, 0) * inv_b;
                                    ad::Matrix& ga = tp.grad(ia);
                                    for (Eigen::Index b = 0; b < ga.cols(); ++b) {
                                        ga.col(b).array() -= g * k / (s(b) * s(b));
                                    }
                                });
}

ad::Var softmax_cross_entropy_mean(ad::Var logits, std::span<const int> labels) {
    const ad::Matrix& z = logits.value();
    if (z.cols() != static_cast<Eigen::Index>(labels.size()) || z.cols() == 0) {
        throw ShapeError("softmax_cross_entropy_mean: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(z.cols()) + " columns");
    }
    const ad::Matrix y = one_hot(labels, static_cast<int>(z.rows()));
    ad::Matrix prob(z.rows(), z.cols());
    double total = 0.0;
    for (Eigen::Index b = 0; b < z.cols(); ++b) {
        const double mx = z.col(b).maxCoeff();
        const Eigen::VectorXd e = (z.col(b).array() - mx).exp();
        const double norm = e.sum();
        prob.col(b) = e / norm;
        total -= z(labels[static_cast<std::size_t>(b)], b) - mx - std::log(norm);
    }
    const double inv_b = 1.0 / static_cast<double>(z.cols());
    ad::Matrix out(1, 1);
    out(0, 0) = total * inv_b;
    const auto iz = logits.index();
    return logits.tape()->record("softmax_cross_entropy_mean", std::move(out), {logits},
                                 [iz, inv_b, prob = std::move(prob), y](ad::Tape& tp, std::size_t self) {
                                     tp.grad(iz) += (tp.grad(self)(0, 0) * inv_b) * (prob - y);
                                 });
}

void ObjectiveWeights::validate() const {
    if (beta_in < 0.0 || beta_oe < 0.0 || beta_ad < 0.0) {
        throw DomainError("objective weights must be nonnegative");
    }
}

namespace {

double mean_vacuity(const ad::Matrix& alpha) {
    double total = 0.0;
    for (Eigen::Index b = 0; b < alpha.cols(); ++b) {
        total += vacuity(DirichletParams<double>(alpha.col(b)));
    }
    return total / static_cast<double>(alpha.cols());
}

} // namespace

double objective_from_alphas(const ad::Matrix& id_alpha, std::span<const int> id_labels,
                             const ad::Matrix& oe_alpha, const ad::Matrix& ad_alpha, const ObjectiveWeights& w) {
    w.validate();
    if (id_alpha.cols() == 0 || id_alpha.cols() != static_cast<Eigen::Index>(id_labels.size())) {
        throw DomainError("objective: ID batch must be nonempty and fully labeled");
    }
    const ad::Matrix y = one_hot(id_labels, static_cast<int>(id_alpha.rows()));
    double loss = 0.0;
    for (Eigen::Index b = 0; b < id_alpha.cols(); ++b) {
        loss += enn_loss(DirichletParams<double>(id_alpha.col(b)), y.col(b));
    }
    double objective = loss / static_cast<double>(id_alpha.cols());
    if (w.beta_in > 0.0) {
        objective += w.beta_in * mean_vacuity(id_alpha);
    }
    if (w.beta_oe > 0.0) {
        if (oe_alpha.cols() == 0) {
            throw DomainError("objective: beta_oe > 0 needs a nonempty outlier batch");
        }
        objective -= w.beta_oe * mean_vacuity(oe_alpha);
    }
    if (w.beta_ad > 0.0) {
        if (ad_alpha.cols() == 0) {
            throw DomainError("objective: beta_ad > 0 needs a nonempty off-manifold batch");
        }
        objective -= w.beta_ad * mean_vacuity(ad_alpha);
    }
    return objective;
}

ad::Var total_objective(ad::Tape& tape, Classifier& model, const Batch& id, const Batch* oe,
                        const EmbeddingValues* off_manifold, const ObjectiveWeights& w) {
    w.validate();
    if (id.size() == 0) {
        throw DomainError("objective: empty ID batch");
    }
    ad::Var id_alpha = model.alpha(tape, model.embed(tape, id));
    ad::Var objective = enn_loss_mean(id_alpha, one_hot(id.labels, model.spec().num_classes));
    if (w.beta_in > 0.0) {
        objective = objective + ad::scale(vacuity_mean(id_alpha), w.beta_in);
    }
    if (w.beta_oe > 0.0) {
        if (oe == nullptr || oe->size() == 0) {
            throw DomainError("objective: beta_oe > 0 needs a nonempty outlier batch");
        }
        ad::Var oe_alpha = model.alpha(tape, model.embed(tape, *oe));
        objective = objective - ad::scale(vacuity_mean(oe_alpha), w.beta_oe);
    }
    if (w.beta_ad > 0.0) {
        if (off_manifold == nullptr || off_manifold->steps.empty()) {
            throw DomainError("objective: beta_ad > 0 needs a nonempty off-manifold batch");
        }
        ad::Var ad_alpha = model.alpha(tape, Classifier::bind(tape, *off_manifold, false));
        objective = objective - ad::scale(vacuity_mean(ad_alpha), w.beta_ad);
    }
    return objective;
}

double msp_score(const Eigen::VectorXd& logits) {
    const double mx = logits.maxCoeff();
    const double norm = (logits.array() - mx).exp().sum();
    return -1.0 / norm;
}

std::vector<double> msp_scores(const Classifier& baseline, const Batch& batch) {
    const ad::Matrix z = baseline.predict_logits(batch);
    std::vector<double> out(static_cast<std::size_t>(z.cols()));
    for (Eigen::Index b = 0; b < z.cols(); ++b) {
        out[static_cast<std::size_t>(b)] = msp_score(z.col(b));
    }
    return out;
}

UncertaintyReport make_report(const DirichletParams<double>& d) {
    UncertaintyReport r;
    r.alpha = d.alpha();
    r.expected_probs = expected_probability(d);
    Eigen::Index arg = 0;
    r.expected_probs.maxCoeff(&arg);
    r.predicted_class = static_cast<int>(arg);
    r.vacuity = vacuity(d);
    r.dissonance = dissonance(d);
    r.entropy = shannon_entropy(r.expected_probs, true);
    return r;
}

std::vector<UncertaintyReport> predict_reports(const Classifier& model, const Batch& batch) {
    const ad::Matrix alpha = model.predict_alpha(batch);
    std::vector<UncertaintyReport> out;
    out.reserve(static_cast<std::size_t>(alpha.cols()));
    for (Eigen::Index b = 0; b < alpha.cols(); ++b) {
        out.push_back(make_report(DirichletParams<double>(alpha.col(b))));
    }
    return out;
}

UncertaintyReport predict_report(const Classifier& model, const LabeledExample& example) {
    return predict_reports(model, make_batch(std::span<const LabeledExample>(&example, 1), model.spec())).front();
}

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd from_std(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

std::string report_to_json(const UncertaintyReport& r) {
    nlohmann::ordered_json j;
    j["predicted_class"] = r.predicted_class;
    j["expected_probs"] = to_std(r.expected_probs);
    j["vacuity"] = r.vacuity;
    j["dissonance"] = r.dissonance;
    j["dissonance_sqrt"] = r.dissonance_sqrt();
    j["entropy"] = r.entropy;
    j["alpha"] = to_std(r.alpha);
    return j.dump();
}

UncertaintyReport report_from_json(std::string_view line) {
    try {
        const auto j = nlohmann::json::parse(line);
        UncertaintyReport r;
        r.predicted_class = j.at("predicted_class").get<int>();
        r.expected_probs = from_std(j.at("expected_probs").get<std::vector<double>>());
        r.vacuity = j.at("vacuity").get<double>();
        r.dissonance = j.at("dissonance").get<double>();
        r.entropy = j.at("entropy").get<double>();
        r.alpha = from_std(j.at("alpha").get<std::vector<double>>());
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("uncertainty report: ") + e.what());
    }
}

} // namespace evid
