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

#include "evid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "evid/errors.hpp"
#include "evid/format.hpp"
#include "evid/random.hpp"

namespace evid {

namespace {

void require_populations(const ScoredSet& s, const char* what) {
    if (s.id_scores.empty() || s.ood_scores.empty()) {
        throw DomainError(std::string(what) + ": both score populations must be nonempty (id=" +
                          std::to_string(s.id_scores.size()) + ", ood=" + std::to_string(s.ood_scores.size()) + ")");
    }
}

} // namespace

double auroc(const ScoredSet& s) {
    require_populations(s, "auroc");
    struct Item {
        double score;
        bool ood;
    };
    std::vector<Item> all;
    all.reserve(s.id_scores.size() + s.ood_scores.size());
    for (double x : s.id_scores) {
        all.push_back({x, false});
    }
    for (double x : s.ood_scores) {
        all.push_back({x, true});
    }
    std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.score < b.score; });
    // Sum of OOD midranks (1-based), kept in half-units to stay exact.
    double rank_sum2 = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        std::size_t ood_in_tie = 0;
        while (j < all.size() && all[j].score == all[i].score) {
            ood_in_tie += all[j].ood ? 1 : 0;
            ++j;
        }
        const double midrank2 = static_cast<double>(i + 1 + j); // 2 * (i+1 + j) / 2
        rank_sum2 += midrank2 * static_cast<double>(ood_in_tie);
        i = j;
    }
    const double n_ood = static_cast<double>(s.ood_scores.size());
    const double n_id = static_cast<double>(s.id_scores.size());
    const double u2 = rank_sum2 - n_ood * (n_ood + 1.0);
    return (u2 / 2.0) / (n_ood * n_id);
}

double aupr(const ScoredSet& s, PositiveClass positive) {
    require_populations(s, "aupr");
    const bool ood_positive = positive == PositiveClass::ood;
    struct Item {
        double score;
        bool positive;
    };
    std::vector<Item> all;
    all.reserve(s.id_scores.size() + s.ood_scores.size());
    for (double x : s.id_scores) {
        all.push_back({ood_positive ? x : -x, !ood_positive});
    }
    for (double x : s.ood_scores) {
        all.push_back({ood_positive ? x : -x, ood_positive});
    }
    std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.score > b.score; });
    const double n_pos = static_cast<double>(ood_positive ? s.ood_scores.size() : s.id_scores.size());
    double tp = 0.0, fp = 0.0, prev_recall = 0.0, area = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) {
            (all[j].positive ? tp : fp) += 1.0;
            ++j;
        }
        const double recall = tp / n_pos;
        area += (recall - prev_recall) * (tp / (tp + fp));
        prev_recall = recall;
        i = j;
    }
    return area;
}

double fpr_at_recall(const ScoredSet& s, double recall_target) {
    require_populations(s, "fpr_at_recall");
    if (!(recall_target > 0.0 && recall_target <= 1.0)) {
        throw DomainError("fpr_at_recall: recall target must lie in (0, 1]");
    }
    std::vector<double> ood = s.ood_scores;
    std::sort(ood.begin(), ood.end(), std::greater<>());
    const double n = static_cast<double>(ood.size());
    auto k = static_cast<std::size_t>(std::ceil(recall_target * n - 1e-9));
    k = std::clamp<std::size_t>(k, 1, ood.size());
    const double threshold = ood[k - 1];
    const auto flagged = std::count_if(s.id_scores.begin(), s.id_scores.end(),
                                       [threshold](double x) { return x >= threshold; });
    return static_cast<double>(flagged) / static_cast<double>(s.id_scores.size());
}

DetectionMetrics detection_metrics(const ScoredSet& s, PositiveClass positive) {
    return {auroc(s), aupr(s, positive), fpr_at_recall(s, 0.9)};
}

ScoredSet subsample_base_rate(std::span<const double> id_pool, std::span<const double> ood_pool, BaseRate ratio,
                              std::uint64_t seed, std::optional<std::size_t> id_count) {
    if (ratio.ood < 1 || ratio.id < 1) {
        throw DomainError("subsample_base_rate: ratio terms must be positive");
    }
    const std::size_t n_id = id_count.value_or(id_pool.size());
    if (n_id > id_pool.size()) {
        throw DomainError("subsample_base_rate: requested " + std::to_string(n_id) + " ID scores but the pool has " +
                          std::to_string(id_pool.size()) + " (short by " + std::to_string(n_id - id_pool.size()) +
                          ")");
    }
    const std::size_t n_ood = n_id * static_cast<std::size_t>(ratio.ood) / static_cast<std::size_t>(ratio.id);
    if (n_ood == 0) {
        throw DomainError("subsample_base_rate: " + std::to_string(n_id) + " ID scores yield no OOD scores at " +
                          std::to_string(ratio.ood) + ":" + std::to_string(ratio.id));
    }
    if (n_ood > ood_pool.size()) {
        throw DomainError("subsample_base_rate: need " + std::to_string(n_ood) + " OOD scores but the pool has " +
                          std::to_string(ood_pool.size()) + " (short by " +
                          std::to_string(n_ood - ood_pool.size()) + ")");
    }
    auto pick = [seed](std::span<const double> pool, std::size_t n, std::uint64_t stream) {
        std::vector<std::size_t> idx(pool.size());
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng = make_rng(seed, Stream::subsample, {stream});
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(n);
        std::sort(idx.begin(), idx.end());
        std::vector<double> out;
        out.reserve(n);
        for (std::size_t i : idx) {
            out.push_back(pool[i]);
        }
        return out;
    };
    return {pick(id_pool, n_id, 0), pick(ood_pool, n_ood, 1)};
}

BoxStats box_stats(std::vector<double> values) {
    if (values.empty()) {
        throw DomainError("box_stats: no values");
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    auto rank = [&](double p) {
        auto r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-12));
        return values[std::clamp<std::size_t>(r, 1, n) - 1];
    };
    return {n, values.front(), rank(0.25), rank(0.5), rank(0.75), values.back()};
}

std::vector<UncertaintyGroup> summarize_uncertainty(std::span<const TaggedReport> reports) {
    if (reports.empty()) {
        throw DomainError("summarize_uncertainty: no reports");
    }
    struct Bucket {
        std::vector<double> vac, dis, ent;
    };
    const char* names[] = {"id_all", "id_correct", "id_incorrect", "ood"};
    Bucket buckets[4];
    auto add = [&](int g, const UncertaintyReport& r) {
        buckets[g].vac.push_back(r.vacuity);
        buckets[g].dis.push_back(r.dissonance);
        buckets[g].ent.push_back(r.entropy);
    };
    for (const auto& t : reports) {
        if (t.ood) {
            add(3, t.report);
            continue;
        }
        add(0, t.report);
        if (t.label) {
            add(t.report.predicted_class == *t.label ? 1 : 2, t.report);
        }
    }
    std::vector<UncertaintyGroup> out;
    for (int g = 0; g < 4; ++g) {
        UncertaintyGroup group;
        group.name = names[g];
        group.present = !buckets[g].vac.empty();
        if (group.present) {
            group.vacuity = box_stats(buckets[g].vac);
            group.dissonance = box_stats(buckets[g].dis);
            group.entropy = box_stats(buckets[g].ent);
        }
        out.push_back(std::move(group));
    }
    return out;
}

void write_metrics_csv(std::ostream& os, std::span<const MetricRow> rows) {
    os << "in_dataset,out_dataset,model,score,auroc,aupr,fpr90,n_id,n_ood\n";
    for (const auto& r : rows) {
        os << r.in_dataset << ',' << r.out_dataset << ',' << r.model << ',' << r.score << ','
           << format_number(r.metrics.auroc) << ',' << format_number(r.metrics.aupr) << ','
           << format_number(r.metrics.fpr90) << ',' << r.n_id << ',' << r.n_ood << '\n';
    }
}

void write_summary_csv(std::ostream& os, std::span<const UncertaintyGroup> groups) {
    os << "group,measure,present,count,min,q1,median,q3,max\n";
    for (const auto& g : groups) {
        const std::pair<const char*, const BoxStats*> measures[] = {
            {"vacuity", &g.vacuity}, {"dissonance", &g.dissonance}, {"entropy", &g.entropy}};
        for (const auto& [name, b] : measures) {
            os << g.name << ',' << name << ',' << (g.present ? 1 : 0) << ',' << b->count;
            if (g.present) {
                os << ',' << format_number(b->min) << ',' << format_number(b->q1) << ','
                   << format_number(b->median) << ',' << format_number(b->q3) << ',' << format_number(b->max);
            } else {
                os << ",,,,,";
            }
            os << '\n';
        }
    }
}

} // namespace evid
