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

#include <doctest.h>

#include <numeric>
#include <random>

#include "evid/adversarial.hpp"
#include "evid/evidential.hpp"
#include "evid/gradcheck.hpp"
#include "evid/selfcheck.hpp"
#include "oracles.hpp"

using namespace evid;
using ad::Matrix;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

DirichletParams<double> dir(const VectorXd& a) {
    return DirichletParams<double>(a);
}

Matrix column(std::initializer_list<double> v) {
    Matrix m(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) {
        m(i++, 0) = x;
    }
    return m;
}

std::vector<LabeledExample> random_points(int n, std::mt19937_64& rng, bool labeled) {
    std::normal_distribution<double> g(0.0, 1.5);
    std::vector<LabeledExample> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)].features = Vector2d(g(rng), g(rng));
        if (labeled) {
            out[static_cast<std::size_t>(i)].label = i % 2;
        }
    }
    return out;
}

} // namespace

TEST_CASE("enn loss hand values") {
    CHECK(std::abs(enn_loss(dir(Vector2d(1, 1)), Vector2d(1, 0)) - 2.0 / 3.0) < 1e-12);
    CHECK(std::abs(enn_loss(dir(Vector2d(99, 1)), Vector2d(0, 1)) - 198.0 / 101.0) < 1e-12);
    CHECK(std::abs(enn_loss(dir(Vector2d(99, 1)), Vector2d(0, 1)) - 1.960396) < 1e-6);
    double prev = 1.0;
    for (double c : {10.0, 100.0, 1e3, 1e5, 1e7}) {
        const double l = enn_loss(dir(Vector2d(c, 1)), Vector2d(1, 0));
        CHECK(l < prev);
        prev = l;
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("enn loss rejects labels that are not one-hot") {
    CHECK_THROWS_AS(enn_loss(dir(Vector2d(2, 3)), Vector2d(0.5, 0.5)), DomainError);
    CHECK_THROWS_AS(enn_loss(dir(Vector2d(2, 3)), Vector2d(1, 1)), DomainError);
    CHECK_THROWS_AS(enn_loss(dir(Vector2d(2, 3)), Vector2d(0, 0)), DomainError);
    CHECK_THROWS_AS(enn_loss(dir(Vector2d(2, 3)), Eigen::Vector3d(0, 0, 1)), DomainError);
}

TEST_CASE("enn loss agrees with the closed-form oracle and a Monte-Carlo estimate") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> a(1.0, 100.0);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t k = 2 + static_cast<std::size_t>(trial % 3);
        std::vector<double> alpha(k);
        VectorXd av(static_cast<Eigen::Index>(k));
        for (std::size_t j = 0; j < k; ++j) {
            alpha[j] = a(rng);
            av(static_cast<Eigen::Index>(j)) = alpha[j];
        }
        const std::size_t label = static_cast<std::size_t>(trial) % k;
        VectorXd y = VectorXd::Zero(static_cast<Eigen::Index>(k));
        y(static_cast<Eigen::Index>(label)) = 1.0;
        const double lib = enn_loss(dir(av), y);
        CHECK(std::abs(lib - oracle::enn_loss(alpha, label)) < 1e-12);
        CHECK(std::abs(lib - oracle::monte_carlo_enn_loss(alpha, label, 100000, rng)) < 1e-2);
    }
}

TEST_CASE("property: enn loss is invariant under joint permutation of alpha and y") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> a(1.0, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        VectorXd alpha(4), y = VectorXd::Zero(4);
        for (int j = 0; j < 4; ++j) {
            alpha(j) = a(rng);
        }
        y(trial % 4) = 1.0;
        std::vector<int> perm{0, 1, 2, 3};
        std::shuffle(perm.begin(), perm.end(), rng);
        VectorXd pa(4), py(4);
        for (int j = 0; j < 4; ++j) {
            pa(j) = alpha(perm[j]);
            py(j) = y(perm[j]);
        }
        CHECK(enn_loss(dir(alpha), y) == doctest::Approx(enn_loss(dir(pa), py)).epsilon(1e-14));
    }
}

TEST_CASE("tape loss ops match plain evaluation and finite differences") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> a(1.0, 20.0);
    Matrix alpha(3, 5);
    for (int i = 0; i < alpha.size(); ++i) {
        alpha.data()[i] = a(rng);
    }
    const std::vector<int> labels{0, 2, 1, 1, 0};
    const Matrix y = one_hot(labels, 3);
    double expected = 0.0;
    double vac = 0.0;
    for (int b = 0; b < 5; ++b) {
        expected += enn_loss(dir(alpha.col(b)), y.col(b)) / 5.0;
        vac += vacuity(dir(alpha.col(b))) / 5.0;
    }
    ad::Tape tape;
    ad::Var in = tape.input(alpha);
    ad::Var loss = enn_loss_mean(in, y) + ad::scale(vacuity_mean(in), 0.7);
    CHECK(loss.scalar() == doctest::Approx(expected + 0.7 * vac).epsilon(1e-14));
    tape.backward(loss);
    const Matrix analytic = tape.gradient(in);

    auto plain = [&](const VectorXd& flat) {
        Matrix m = Eigen::Map<const Matrix>(flat.data(), 3, 5);
        double l = 0.0;
        for (int b = 0; b < 5; ++b) {
            l += (enn_loss(dir(m.col(b)), y.col(b)) + 0.7 * vacuity(dir(m.col(b)))) / 5.0;
        }
        return l;
    };
    const VectorXd flat = Eigen::Map<const VectorXd>(alpha.data(), alpha.size());
    const VectorXd numeric = finite_difference_gradient(plain, flat, 1e-5);
    CHECK(max_relative_error(analytic, Eigen::Map<const Matrix>(numeric.data(), 3, 5)) < 1e-6);
}

TEST_CASE("softmax cross-entropy tape op") {
    ad::Tape tape;
    Matrix z(2, 2);
    z << 1.0, 0.0, 0.0, 0.0;
    ad::Var in = tape.input(z);
    const std::vector<int> labels{0, 1};
    ad::Var l = softmax_cross_entropy_mean(in, labels);
    const double expected = (std::log(1.0 + std::exp(-1.0)) + std::log(2.0)) / 2.0;
    CHECK(l.scalar() == doctest::Approx(expected).epsilon(1e-14));
    tape.backward(l);
    CHECK(tape.gradient(in)(0, 0) == doctest::Approx((oracle::sigmoid(1.0) - 1.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("objective composition") {
    const std::vector<int> label0{0};
    const Matrix empty(2, 0);
    ObjectiveWeights w;
    CHECK(objective_from_alphas(column({1, 1}), label0, empty, empty, w) == doctest::Approx(2.0 / 3.0));
    w.beta_in = 0.3;
    CHECK(objective_from_alphas(column({1, 1}), label0, empty, empty, w) == doctest::Approx(2.0 / 3.0 + 0.3));

    ObjectiveWeights with_oe{0.0, 1.0, 0.0};
    const Matrix oe = column({3, 5});
    const double base = objective_from_alphas(column({4, 2}), label0, Matrix(2, 0), Matrix(2, 0), ObjectiveWeights{});
    const double lowered = objective_from_alphas(column({4, 2}), label0, oe, empty, with_oe);
    CHECK(base - lowered == doctest::Approx(vacuity(dir(oe.col(0)))).epsilon(1e-14));

    ObjectiveWeights negative{-0.1, 0.0, 0.0};
    CHECK_THROWS_AS(negative.validate(), DomainError);
    CHECK_THROWS_AS(objective_from_alphas(column({1, 1}), label0, empty, empty, negative), DomainError);
    CHECK_THROWS_AS(objective_from_alphas(column({1, 1}), label0, empty, empty, with_oe), DomainError);
}

TEST_CASE("property: objective falls as any outlier's vacuity rises") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> a(1.0, 30.0);
    const std::vector<int> labels{1, 0};
    Matrix id(2, 2), oe(2, 3), adv(2, 1);
    for (Matrix* m : {&id, &oe, &adv}) {
        for (int i = 0; i < m->size(); ++i) {
            m->data()[i] = a(rng);
        }
    }
    const ObjectiveWeights w{0.1, 0.8, 0.5};
    const double before = objective_from_alphas(id, labels, oe, adv, w);
    for (int b = 0; b < 3; ++b) {
        Matrix raised = oe;
        raised.col(b) = (raised.col(b).array() - 1.0) * 0.5 + 1.0;
        CHECK(objective_from_alphas(id, labels, raised, adv, w) < before);
    }
}

TEST_CASE("total objective on a model equals plain evaluation of its alphas") {
    std::mt19937_64 rng(2);
    ArchitectureSpec spec;
    spec.mlp_hidden = 6;
    Classifier model(spec, 5);
    const auto id_ex = random_points(6, rng, true);
    const auto oe_ex = random_points(4, rng, false);
    const Batch id = make_batch(id_ex, spec);
    const Batch oe = make_batch(oe_ex, spec);
    PerturbationConfig pc;
    pc.delta_off = 0.1;
    std::vector<std::uint64_t> draws(6);
    std::iota(draws.begin(), draws.end(), 0);
    const auto off = generate_off_manifold(model, id, pc, draws);
    const ObjectiveWeights w{0.1, 1.0, 0.5};
    ad::Tape tape;
    const double taped = total_objective(tape, model, id, &oe, &off.perturbed, w).scalar();
    ad::Tape t2;
    const Matrix ad_alpha = model.alpha(t2, Classifier::bind(t2, off.perturbed, false)).value();
    const double plain = objective_from_alphas(model.predict_alpha(id), id.labels, model.predict_alpha(oe), ad_alpha, w);
    CHECK(taped == doctest::Approx(plain).epsilon(1e-13));

    ad::Tape t3;
    const ObjectiveWeights zero;
    const double reduced = total_objective(t3, model, id, nullptr, nullptr, zero).scalar();
    CHECK(reduced == doctest::Approx(objective_from_alphas(model.predict_alpha(id), id.labels, Matrix(2, 0),
                                                           Matrix(2, 0), zero)).epsilon(1e-13));
    ad::Tape t4;
    CHECK_THROWS_AS(total_objective(t4, model, id, nullptr, nullptr, w), DomainError);
}

TEST_CASE("total objective gradients pass the finite-difference check") {
    for (Architecture arch : {Architecture::mlp2d, Architecture::gru}) {
        CAPTURE(to_string(arch));
        const CheckResult r = check_objective_gradients(arch, 13);
        CHECK(r.passed);
        CHECK(r.measured < 1e-4);
    }
}

TEST_CASE("msp score") {
    CHECK(msp_score(Vector2d(10, -10)) == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(msp_score(Vector2d(0, 0)) == -0.5);
    CHECK(std::abs(msp_score(Vector2d(1, 0)) + 0.731058) < 1e-6);
}

TEST_CASE("uncertainty reports") {
    const auto r1 = make_report(dir(Vector2d(1, 1)));
    CHECK(r1.vacuity == 1.0);
    CHECK(r1.dissonance == 0.0);
    CHECK(r1.entropy == doctest::Approx(1.0).epsilon(1e-14));
    const auto r2 = make_report(dir(Vector2d(50, 50)));
    CHECK(r2.vacuity == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(r2.dissonance == doctest::Approx(0.98).epsilon(1e-12));
    const auto r3 = make_report(dir(Vector2d(1, 99)));
    CHECK(r3.predicted_class == 1);
    CHECK(std::abs(r3.expected_probs(0) - 0.01) < 1e-12);
    CHECK(std::abs(r3.expected_probs(1) - 0.99) < 1e-12);
    CHECK(r2.dissonance_sqrt() == doctest::Approx(std::sqrt(0.98)));
}

TEST_CASE("property: model reports are consistent with the opinion algebra") {
    std::mt19937_64 rng(17);
    ArchitectureSpec spec;
    spec.num_classes = 3;
    Classifier model(spec, 9);
    auto ex = random_points(50, rng, false);
    for (auto& e : ex) {
        e.features *= 4.0;
    }
    const auto reports = predict_reports(model, make_batch(ex, spec));
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        const DirichletParams<double> d(r.alpha);
        CHECK((r.alpha.array() >= 1.0).all());
        Eigen::Index arg = 0;
        r.expected_probs.maxCoeff(&arg);
        CHECK(r.predicted_class == arg);
        CHECK(std::abs(r.vacuity - vacuity(d)) < 1e-10);
        CHECK(std::abs(r.dissonance - dissonance(d)) < 1e-10);
        CHECK(std::abs(r.entropy - shannon_entropy(expected_probability(d), true)) < 1e-10);
        const auto single = predict_report(model, ex[i]);
        CHECK((single.alpha - r.alpha).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("report json round trip") {
    const auto r = make_report(dir(Eigen::Vector3d(2.5, 1.0, 7.25)));
    const std::string line = report_to_json(r);
    CHECK(line.find("\"predicted_class\":2") == 1);
    CHECK(line.find("\"dissonance_sqrt\"") != std::string::npos);
    const auto back = report_from_json(line);
    CHECK(back.predicted_class == r.predicted_class);
    CHECK(back.alpha == r.alpha);
    CHECK(back.vacuity == r.vacuity);
    CHECK(back.dissonance == r.dissonance);
    CHECK(back.entropy == r.entropy);
    CHECK(back.expected_probs == r.expected_probs);
}
