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

#pragma once

// Evidential loss terms, the regularized objective and uncertainty reports.

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evid/autodiff.hpp"
#include "evid/errors.hpp"
#include "evid/network.hpp"
#include "evid/subjective_logic.hpp"

namespace evid {

/// Expected squared error ||y - p||^2 under p ~ Dir(alpha):
/// sum_j y_j^2 - 2 y_j E[p_j] + E[p_j^2].
template <typename Scalar, typename Derived>
Scalar enn_loss(const DirichletParams<Scalar>& d, const Eigen::MatrixBase<Derived>& y) {
    const auto& alpha = d.alpha();
    if (y.size() != alpha.size()) {
        throw DomainError("enn_loss: label vector has " + std::to_string(y.size()) + " entries for " +
                          std::to_string(alpha.size()) + " classes");
    }
    int ones = 0;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        if (y(j) == Scalar(1)) {
            ++ones;
        } else if (y(j) != Scalar(0)) {
            throw DomainError("enn_loss: label vector is not one-hot");
        }
    }
    if (ones != 1) {
        throw DomainError("enn_loss: label vector is not one-hot");
    }
    const Scalar s = d.strength();
    Scalar loss(0);
    for (Eigen::Index j = 0; j < alpha.size(); ++j) {
        const Scalar mean = alpha(j) / s;
        const Scalar second = alpha(j) * (alpha(j) + Scalar(1)) / (s * (s + Scalar(1)));
        loss += y(j) * y(j) - Scalar(2) * y(j) * mean + second;
    }
    return loss;
}

ad::Matrix one_hot(std::span<const int> labels, int num_classes);

// Tape ops over K x B concentration matrices (columns are examples).

/// Mean over columns of the expected squared error.
ad::Var enn_loss_mean(ad::Var alpha, const ad::Matrix& one_hot_labels);
/// Mean over columns of K / S.
ad::Var vacuity_mean(ad::Var alpha);
/// Softmax cross-entropy for the baseline classifier.
ad::Var softmax_cross_entropy_mean(ad::Var logits, std::span<const int> labels);

struct ObjectiveWeights {
    double beta_in = 0.0;
    double beta_oe = 0.0;
    double beta_ad = 0.0;

    void validate() const;
};

/// mean ENN loss(ID) + beta_in vac(ID) - beta_oe vac(OE) - beta_ad vac(AD),
/// evaluated from concentrations. Empty OE/AD matrices are allowed only with a
/// zero weight.
double objective_from_alphas(const ad::Matrix& id_alpha, std::span<const int> id_labels,
                             const ad::Matrix& oe_alpha, const ad::Matrix& ad_alpha, const ObjectiveWeights& w);

/// The same objective recorded on `tape` with trainable parameters of `model`.
/// `oe` and `off_manifold` may be null when the matching weight is zero; the
/// off-manifold inputs enter as constants.
ad::Var total_objective(ad::Tape& tape, Classifier& model, const Batch& id, const Batch* oe,
                        const EmbeddingValues* off_manifold, const ObjectiveWeights& w);

/// -max softmax(logits); higher means more likely out-of-distribution.
double msp_score(const Eigen::VectorXd& logits);
std::vector<double> msp_scores(const Classifier& baseline, const Batch& batch);

struct UncertaintyReport {
    int predicted_class = 0;
    Eigen::VectorXd expected_probs;
    double vacuity = 0.0;
    double dissonance = 0.0;
    /// Shannon entropy of expected_probs divided by ln K.
    double entropy = 0.0;
    Eigen::VectorXd alpha;

    double dissonance_sqrt() const { return std::sqrt(dissonance); }
};

UncertaintyReport make_report(const DirichletParams<double>& d);
std::vector<UncertaintyReport> predict_reports(const Classifier& model, const Batch& batch);
UncertaintyReport predict_report(const Classifier& model, const LabeledExample& example);

/// One JSON object per line: predicted_class, expected_probs, vacuity,
/// dissonance, dissonance_sqrt, entropy, alpha.
std::string report_to_json(const UncertaintyReport& r);
UncertaintyReport report_from_json(std::string_view line);

} // namespace evid
