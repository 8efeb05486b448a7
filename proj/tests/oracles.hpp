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

// Independent reference implementations used only by the tests. They are
// written with plain loops over std::vector so they share no code with the
// library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <set>
#include <vector>

namespace oracle {

inline double pair_count_auroc(const std::vector<double>& id, const std::vector<double>& ood) {
    double wins = 0.0;
    for (double o : ood) {
        for (double i : id) {
            if (o > i) {
                wins += 1.0;
            } else if (o == i) {
                wins += 0.5;
            }
        }
    }
    return wins / (static_cast<double>(id.size()) * static_cast<double>(ood.size()));
}

// Largest threshold whose OOD recall reaches the target, by scanning every
// candidate threshold.
inline double scan_fpr_at_recall(const std::vector<double>& id, const std::vector<double>& ood, double target) {
    std::set<double> candidates(id.begin(), id.end());
    candidates.insert(ood.begin(), ood.end());
    for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
        const double t = *it;
        const double hits = static_cast<double>(std::count_if(ood.begin(), ood.end(), [t](double s) { return s >= t; }));
        if (hits / static_cast<double>(ood.size()) >= target) {
            const double fp = static_cast<double>(std::count_if(id.begin(), id.end(), [t](double s) { return s >= t; }));
            return fp / static_cast<double>(id.size());
        }
    }
    return 1.0;
}

// Step-interpolated area under precision/recall, one step per distinct
// threshold, OOD positive.
inline double threshold_sweep_aupr(const std::vector<double>& id, const std::vector<double>& ood) {
    std::set<double> candidates(id.begin(), id.end());
    candidates.insert(ood.begin(), ood.end());
    double area = 0.0;
    double prev_recall = 0.0;
    for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
        const double t = *it;
        const double tp = static_cast<double>(std::count_if(ood.begin(), ood.end(), [t](double s) { return s >= t; }));
        const double fp = static_cast<double>(std::count_if(id.begin(), id.end(), [t](double s) { return s >= t; }));
        const double recall = tp / static_cast<double>(ood.size());
        if (tp + fp > 0) {
            area += (recall - prev_recall) * tp / (tp + fp);
        }
        prev_recall = recall;
    }
    return area;
}

inline double enn_loss(const std::vector<double>& alpha, std::size_t label) {
    double s = 0.0;
    for (double a : alpha) {
        s += a;
    }
    double loss = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        const double p = alpha[j] / s;
        const double var = p * (1.0 - p) / (s + 1.0);
        const double y = j == label ? 1.0 : 0.0;
        loss += (y - p) * (y - p) + var;
    }
    return loss;
}

inline std::vector<double> sample_dirichlet(const std::vector<double>& alpha, std::mt19937_64& rng) {
    std::vector<double> p(alpha.size());
    double total = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        std::gamma_distribution<double> g(alpha[j], 1.0);
        p[j] = g(rng);
        total += p[j];
    }
    for (double& v : p) {
        v /= total;
    }
    return p;
}

inline double monte_carlo_enn_loss(const std::vector<double>& alpha, std::size_t label, int draws,
                                   std::mt19937_64& rng) {
    std::vector<std::gamma_distribution<double>> gammas;
    for (double a : alpha) {
        gammas.emplace_back(a, 1.0);
    }
    std::vector<double> p(alpha.size());
    double acc = 0.0;
    for (int n = 0; n < draws; ++n) {
        double total = 0.0;
        for (std::size_t j = 0; j < alpha.size(); ++j) {
            p[j] = gammas[j](rng);
            total += p[j];
        }
        double sq = 0.0;
        for (std::size_t j = 0; j < alpha.size(); ++j) {
            const double y = j == label ? 1.0 : 0.0;
            const double d = y - p[j] / total;
            sq += d * d;
        }
        acc += sq;
    }
    return acc / draws;
}

inline double dissonance(const std::vector<double>& alpha) {
    double s = 0.0;
    for (double a : alpha) {
        s += a;
    }
    std::vector<double> b;
    for (double a : alpha) {
        b.push_back((a - 1.0) / s);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (j == i) {
                continue;
            }
            const double bal = (b[i] > 0 && b[j] > 0) ? 1.0 - std::fabs(b[j] - b[i]) / (b[j] + b[i]) : 0.0;
            num += b[j] * bal;
            den += b[j];
        }
        if (den > 0) {
            total += b[i] * num / den;
        }
    }
    return total;
}

inline double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

// One GRU step with row-major weight arrays: w is [hidden][input], u is
// [hidden][hidden]. Cho form, h' = z*h + (1-z)*n.
struct GruCell {
    std::vector<std::vector<double>> wz, uz, wr, ur, wn, un;
    std::vector<double> bz, br, bn;
};

inline std::vector<double> gru_step(const GruCell& c, const std::vector<double>& x, const std::vector<double>& h) {
    const std::size_t n = h.size();
    auto affine = [&](const std::vector<std::vector<double>>& w, const std::vector<double>& v, std::size_t row) {
        double acc = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            acc += w[row][j] * v[j];
        }
        return acc;
    };
    std::vector<double> z(n), r(n), rh(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = sigmoid(affine(c.wz, x, i) + affine(c.uz, h, i) + c.bz[i]);
        r[i] = sigmoid(affine(c.wr, x, i) + affine(c.ur, h, i) + c.br[i]);
        rh[i] = r[i] * h[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double cand = std::tanh(affine(c.wn, x, i) + affine(c.un, rh, i) + c.bn[i]);
        out[i] = z[i] * h[i] + (1.0 - z[i]) * cand;
    }
    return out;
}

// Nearest-rank quantile: smallest value with at least q of the mass at or
// below it.
inline double nearest_rank(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
    rank = std::max<std::size_t>(rank, 1);
    return v[rank - 1];
}

} // namespace oracle
