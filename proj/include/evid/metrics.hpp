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

// Out-of-distribution detection metrics. Scores follow the convention that a
// higher score means "more likely out-of-distribution".

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evid/evidential.hpp"

namespace evid {

struct ScoredSet {
    std::vector<double> id_scores;
    std::vector<double> ood_scores;
};

struct DetectionMetrics {
    double auroc = 0.0;
    double aupr = 0.0;
    double fpr90 = 0.0;
};

enum class PositiveClass { ood, id };

/// P(ood score > id score) + 0.5 P(tie), via midranks.
double auroc(const ScoredSet& s);
/// Average precision over a descending threshold sweep (ties share a threshold).
double aupr(const ScoredSet& s, PositiveClass positive = PositiveClass::ood);
/// Fraction of ID scores >= t for the largest t flagging >= `recall_target`
/// of the OOD scores.
double fpr_at_recall(const ScoredSet& s, double recall_target = 0.9);
DetectionMetrics detection_metrics(const ScoredSet& s, PositiveClass positive = PositiveClass::ood);

/// |OOD| : |ID| = ood : id.
struct BaseRate {
    int ood = 1;
    int id = 5;
};

/// Seeded subsample of `id_count` ID scores (default: all) and the matching
/// number of OOD scores. Throws DomainError naming the shortfall.
ScoredSet subsample_base_rate(std::span<const double> id_pool, std::span<const double> ood_pool, BaseRate ratio,
                              std::uint64_t seed, std::optional<std::size_t> id_count = std::nullopt);

/// Five-number summary with nearest-rank quantiles.
struct BoxStats {
    std::size_t count = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

BoxStats box_stats(std::vector<double> values);

struct TaggedReport {
    UncertaintyReport report;
    bool ood = false;
    std::optional<int> label;
};

struct UncertaintyGroup {
    std::string name;
    /// False when the group has no members (e.g. no misclassifications).
    bool present = false;
    BoxStats vacuity;
    BoxStats dissonance;
    BoxStats entropy;
};

/// Groups: id_all, id_correct, id_incorrect, ood.
std::vector<UncertaintyGroup> summarize_uncertainty(std::span<const TaggedReport> reports);

struct MetricRow {
    std::string in_dataset;
    std::string out_dataset;
    std::string model;
    std::string score;
    DetectionMetrics metrics;
    std::size_t n_id = 0;
    std::size_t n_ood = 0;
};

/// Header: in_dataset,out_dataset,model,score,auroc,aupr,fpr90,n_id,n_ood
void write_metrics_csv(std::ostream& os, std::span<const MetricRow> rows);
/// Header: group,measure,present,count,min,q1,median,q3,max
void write_summary_csv(std::ostream& os, std::span<const UncertaintyGroup> groups);

} // namespace evid
