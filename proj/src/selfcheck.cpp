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

#include "evid/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "evid/adversarial.hpp"
#include "evid/format.hpp"
#include "evid/metrics.hpp"
#include "evid/random.hpp"

namespace evid {

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out(i++) = x;
    }
    return out;
}

DirichletParams<double> dir(std::initializer_list<double> alpha) {
    return DirichletParams<double>(vec(alpha));
}

CheckResult make(std::string name, double measured, double tolerance, std::string detail = {}) {
    return {std::move(name), measured <= tolerance, measured, tolerance, std::move(detail)};
}

} // namespace

CheckResult check_table_values() {
    double err = 0.0;
    err = std::max(err, (expected_probability(dir({1, 99})) - vec({0.01, 0.99})).cwiseAbs().maxCoeff());
    err = std::max(err, (expected_probability(dir({50, 50})) - vec({0.5, 0.5})).cwiseAbs().maxCoeff());
    err = std::max(err, std::abs(vacuity(dir({1, 1})) - 1.0));
    err = std::max(err, std::abs(vacuity(dir({50, 50})) - 0.02));
    err = std::max(err, std::abs(dissonance(dir({50, 50})) - 0.98));
    return make("table_values", err, 1e-9, "expected probabilities, vacuity, dissonance of [1,99], [50,50], [1,1]");
}

CheckResult check_uncertainty_ordering() {
    const auto a1 = dir({1, 99}), a2 = dir({50, 50}), a3 = dir({1, 1});
    const bool ok = vacuity(a3) > vacuity(a2) && vacuity(a2) == vacuity(a1) && dissonance(a2) > dissonance(a1) &&
                    dissonance(a1) == 0.0 && dissonance(a3) == 0.0;
    return {"uncertainty_ordering", ok, ok ? 0.0 : 1.0, 0.0,
            "vac[1,1] > vac[50,50] = vac[1,99]; diss[50,50] > diss[1,99] = diss[1,1] = 0"};
}

CheckResult check_loss_hand_values(const LossFunction& loss) {
    const double e1 = std::abs(loss(dir({1, 1}), vec({1, 0})) - 2.0 / 3.0);
    const double e2 = std::abs(loss(dir({99, 1}), vec({0, 1})) - 198.0 / 101.0);
    return make("loss_hand_values", std::max(e1, e2), 1e-9, "alpha=[1,1],y=[1,0] -> 2/3; alpha=[99,1],y=[0,1] -> 198/101");
}

CheckResult check_loss_monte_carlo(const LossFunction& loss, int cases, int draws, std::uint64_t seed) {
    Rng rng = make_rng(seed, Stream::selfcheck, {1});
    std::uniform_real_distribution<double> conc(1.0, 100.0);
    std::uniform_int_distribution<int> classes(2, 4);
    double worst = 0.0;
    for (int c = 0; c < cases; ++c) {
        const int k = classes(rng);
        Eigen::VectorXd alpha(k);
        for (int j = 0; j < k; ++j) {
            alpha(j) = conc(rng);
        }
        Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
        y(std::uniform_int_distribution<int>(0, k - 1)(rng)) = 1.0;
        std::vector<std::gamma_distribution<double>> gammas;
        for (int j = 0; j < k; ++j) {
            gammas.emplace_back(alpha(j), 1.0);
        }
        double acc = 0.0;
        Eigen::VectorXd p(k);
        for (int d = 0; d < draws; ++d) {
            for (int j = 0; j < k; ++j) {
                p(j) = gammas[static_cast<std::size_t>(j)](rng);
            }
            p /= p.sum();
            acc += (y - p).squaredNorm();
        }
        worst = std::max(worst, std::abs(acc / draws - loss(DirichletParams<double>(alpha), y)));
    }
    return make("loss_monte_carlo", worst, 1e-2,
                std::to_string(cases) + " cases x " + std::to_string(draws) + " Dirichlet draws");
}

GradientCheck objective_gradient_check(Classifier& model, const Batch& id, const Batch& oe,
                                       const EmbeddingValues& off_manifold, const ObjectiveWeights& w, double h) {
    auto with_backward = [&] {
        ad::Tape tape;
        ad::Var obj = total_objective(tape, model, id, &oe, &off_manifold, w);
        tape.backward(obj);
        return obj.scalar();
    };
    auto value = [&] {
        ad::Tape tape;
        return total_objective(tape, model, id, &oe, &off_manifold, w).scalar();
    };
    return check_gradients(with_backward, value, model.params(), h);
}

CheckResult check_objective_gradients(Architecture arch, std::uint64_t seed) {
    ArchitectureSpec spec;
    spec.kind = arch;
    spec.num_classes = 3;
    spec.mlp_hidden = 6;
    spec.vocab_size = 12;
    spec.embed_dim = 4;
    spec.hidden_dim = 4;
    spec.max_length = 5;
    Classifier model(spec, derive_seed(seed, Stream::selfcheck, {2}));
    Rng rng = make_rng(seed, Stream::selfcheck, {3});
    std::normal_distribution<double> normal(0.0, 1.5);
    std::uniform_int_distribution<int> token(0, spec.vocab_size - 1);
    std::uniform_int_distribution<int> length(1, spec.max_length);
    auto examples = [&](int n, bool labeled) {
        std::vector<LabeledExample> out(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            auto& ex = out[static_cast<std::size_t>(i)];
            if (arch == Architecture::mlp2d) {
                ex.features = Eigen::Vector2d(normal(rng), normal(rng));
            } else {
                ex.tokens.resize(static_cast<std::size_t>(length(rng)));
                for (auto& t : ex.tokens) {
                    t = token(rng);
                }
            }
            if (labeled) {
                ex.label = i % spec.num_classes;
            }
        }
        return out;
    };
    const auto id_set = examples(4, true);
    const auto oe_set = examples(3, false);
    const Batch id = make_batch(id_set, spec);
    const Batch oe = make_batch(oe_set, spec);
    std::vector<std::uint64_t> draws{0, 1, 2, 3};
    const auto ad = generate_off_manifold(model, id, PerturbationConfig{0.1, seed, true}, draws);
    const auto result = objective_gradient_check(model, id, oe, ad.perturbed, ObjectiveWeights{0.1, 1.0, 0.5});
    return make("objective_gradients_" + to_string(arch), result.max_relative_error, 1e-4,
                std::to_string(result.coordinates) + " coordinates, h=1e-5");
}

CheckResult check_metric_oracles(std::uint64_t seed) {
    Rng rng = make_rng(seed, Stream::selfcheck, {4});
    std::uniform_int_distribution<int> size(1, 10);
    std::uniform_int_distribution<int> level(0, 5);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        ScoredSet s;
        for (int i = size(rng); i > 0; --i) {
            s.id_scores.push_back(level(rng));
        }
        for (int i = size(rng); i > 0; --i) {
            s.ood_scores.push_back(level(rng));
        }
        double pairs = 0.0;
        for (double o : s.ood_scores) {
            for (double x : s.id_scores) {
                pairs += o > x ? 1.0 : (o == x ? 0.5 : 0.0);
            }
        }
        const double brute = pairs / static_cast<double>(s.ood_scores.size() * s.id_scores.size());
        worst = std::max(worst, std::abs(auroc(s) - brute));
    }
    const ScoredSet hand{{0.55, 0.45, 0.35, 0.25}, {0.9, 0.8, 0.7, 0.6, 0.5}};
    worst = std::max(worst, std::abs(fpr_at_recall(hand, 0.9) - 0.25));
    worst = std::max(worst, std::abs(aupr(ScoredSet{{0.0, 0.0}, {1.0, 1.0}}) - 1.0));
    return make("metric_oracles", worst, 0.0, "auroc vs pair counting (100 instances), fpr90 hand case, perfect aupr");
}

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options) {
    const double shift = options.loss_perturbation;
    const LossFunction loss = [shift](const DirichletParams<double>& d, const Eigen::VectorXd& y) {
        return enn_loss(d, y) + shift;
    };
    return {check_table_values(),
            check_uncertainty_ordering(),
            check_loss_hand_values(loss),
            check_loss_monte_carlo(loss, options.monte_carlo_cases, options.monte_carlo_draws, options.seed),
            check_objective_gradients(Architecture::mlp2d, options.seed),
            check_objective_gradients(Architecture::gru, options.seed),
            check_metric_oracles(options.seed)};
}

void write_check_report(std::ostream& os, std::span<const CheckResult> results) {
    for (const auto& r : results) {
        os << (r.passed ? "PASS " : "FAIL ") << r.name << " measured=" << format_number(r.measured)
           << " tolerance=" << format_number(r.tolerance);
        if (!r.detail.empty()) {
            os << " (" << r.detail << ")";
        }
        os << '\n';
    }
}

} // namespace evid
