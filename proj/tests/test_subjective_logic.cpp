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

#include <random>

#include "evid/errors.hpp"
#include "evid/subjective_logic.hpp"
#include "oracles.hpp"

using evid::DirichletParams;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

DirichletParams<double> dir(std::initializer_list<double> a) {
    VectorXd v(static_cast<Eigen::Index>(a.size()));
    Eigen::Index i = 0;
    for (double x : a) {
        v(i++) = x;
    }
    return DirichletParams<double>(v);
}

const Vector2d kHalf(0.5, 0.5);

} // namespace

TEST_CASE("opinion_from_evidence maps evidence to belief and uncertainty mass") {
    auto none = evid::opinion_from_evidence(Vector2d(0, 0), kHalf);
    CHECK(none.beliefs().isApprox(Vector2d(0, 0)));
    CHECK(none.uncertainty() == 1.0);

    auto even = evid::opinion_from_evidence(Vector2d(49, 49), kHalf);
    CHECK(even.beliefs()(0) == doctest::Approx(0.49).epsilon(1e-12));
    CHECK(even.beliefs()(1) == doctest::Approx(0.49).epsilon(1e-12));
    CHECK(even.uncertainty() == doctest::Approx(0.02).epsilon(1e-12));

    auto lopsided = evid::opinion_from_evidence(Vector2d(0, 98), kHalf);
    CHECK(lopsided.beliefs()(0) == 0.0);
    CHECK(lopsided.beliefs()(1) == doctest::Approx(0.98).epsilon(1e-12));
    CHECK(lopsided.uncertainty() == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("opinion_from_evidence rejects bad input") {
    CHECK_THROWS_AS(evid::opinion_from_evidence(Vector2d(-1, 2), kHalf), evid::DomainError);
    VectorXd one(1);
    one << 3.0;
    CHECK_THROWS_AS(evid::opinion_from_evidence(one), evid::DomainError);
    CHECK_THROWS_AS(evid::opinion_from_evidence(Vector2d(1, 1), Vector2d(0.2, 0.2)), evid::DomainError);
    CHECK_THROWS_AS(dir({0.5, 2.0}), evid::DomainError);
    CHECK_THROWS_AS(dir({3.0}), evid::DomainError);
}

TEST_CASE("projected probability") {
    auto p0 = evid::projected_probability(evid::opinion_from_evidence(Vector2d(0, 0), kHalf));
    CHECK(p0(0) == 0.5);
    CHECK(p0(1) == 0.5);
    auto p1 = evid::projected_probability(evid::opinion_from_evidence(Vector2d(0, 98), kHalf));
    CHECK(p1(0) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(p1(1) == doctest::Approx(0.99).epsilon(1e-12));
    auto p2 = evid::projected_probability(evid::opinion_from_evidence(Vector2d(49, 49), kHalf));
    CHECK(p2(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("expected probability and vacuity of the three reference opinions") {
    auto e1 = evid::expected_probability(dir({1, 1}));
    CHECK(e1(0) == 0.5);
    auto e2 = evid::expected_probability(dir({50, 50}));
    CHECK(e2(1) == 0.5);
    auto e3 = evid::expected_probability(dir({1, 99}));
    CHECK(std::abs(e3(0) - 0.01) < 1e-12);
    CHECK(std::abs(e3(1) - 0.99) < 1e-12);

    CHECK(evid::vacuity(dir({1, 1})) == 1.0);
    CHECK(std::abs(evid::vacuity(dir({50, 50})) - 0.02) < 1e-12);
    CHECK(std::abs(evid::vacuity(dir({1, 99})) - 0.02) < 1e-12);
}

TEST_CASE("mass balance") {
    CHECK(evid::mass_balance(0.5, 0.5) == 1.0);
    CHECK(evid::mass_balance(0.0, 0.7) == 0.0);
    CHECK(evid::mass_balance(0.2, 0.6) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("dissonance") {
    CHECK(evid::dissonance(dir({1, 1})) == 0.0);
    CHECK(evid::dissonance(dir({50, 50})) == doctest::Approx(0.98).epsilon(1e-12));
    CHECK(evid::dissonance(dir({1, 99})) == 0.0);
    CHECK(evid::dissonance(dir({2, 2, 2})) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(evid::dissonance(dir({3, 1, 1, 7})) == doctest::Approx(oracle::dissonance({3, 1, 1, 7})).epsilon(1e-12));
}

TEST_CASE("shannon entropy") {
    CHECK(evid::shannon_entropy(Vector2d(1, 0)) == 0.0);
    CHECK(evid::shannon_entropy(Vector2d(0.5, 0.5), true) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(evid::shannon_entropy(Vector2d(0.01, 0.99)) - 0.056002) < 1e-5);
}

TEST_CASE("property: opinion invariants and projected = expected for random evidence") {
    std::mt19937_64 rng(20260101);
    std::uniform_int_distribution<int> classes(2, 10);
    std::exponential_distribution<double> ev(0.05);
    std::bernoulli_distribution zero(0.2);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = classes(rng);
        VectorXd e(k);
        for (int j = 0; j < k; ++j) {
            e(j) = zero(rng) ? 0.0 : ev(rng);
        }
        auto op = evid::opinion_from_evidence(e);
        REQUIRE(std::abs(op.beliefs().sum() + op.uncertainty() - 1.0) < 1e-12);
        REQUIRE(std::abs(op.base_rates().sum() - 1.0) < 1e-12);
        REQUIRE((op.beliefs().array() >= 0.0).all());
        auto d = DirichletParams<double>::from_evidence(e);
        REQUIRE(d.strength() >= d.prior_weight());
        const VectorXd pp = evid::projected_probability(op);
        const VectorXd ep = evid::expected_probability(d);
        REQUIRE((pp - ep).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE(std::abs(ep.sum() - 1.0) < 1e-12);
        const double dis = evid::dissonance(d);
        REQUIRE(dis >= 0.0);
        REQUIRE(dis < 1.0);
        std::vector<double> a(d.alpha().data(), d.alpha().data() + k);
        REQUIRE(std::abs(dis - oracle::dissonance(a)) < 1e-12);
    }
}

TEST_CASE("property: vacuity strictly decreases with total evidence") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int trial = 0; trial < 500; ++trial) {
        VectorXd e(3), e2(3);
        for (int j = 0; j < 3; ++j) {
            e(j) = u(rng);
            e2(j) = u(rng);
        }
        if (e2.sum() == e.sum()) {
            continue;
        }
        const double v1 = evid::vacuity(DirichletParams<double>::from_evidence(e));
        const double v2 = evid::vacuity(DirichletParams<double>::from_evidence(e2));
        CHECK((e2.sum() > e.sum()) == (v2 < v1));
    }
}

TEST_CASE("property: dissonance vanishes on one-hot evidence and peaks at equal split") {
    for (int k = 2; k <= 6; ++k) {
        CHECK(evid::dissonance(DirichletParams<double>(VectorXd::Ones(k))) == 0.0);
        for (int hot = 0; hot < k; ++hot) {
            VectorXd e = VectorXd::Zero(k);
            e(hot) = 17.0;
            CHECK(evid::dissonance(DirichletParams<double>::from_evidence(e)) == 0.0);
        }
    }
    for (double s : {10.0, 100.0}) {
        const double total_evidence = s - 2.0;
        double best = -1.0;
        double best_split = -1.0;
        for (int step = 0; step <= 1000; ++step) {
            const double first = total_evidence * step / 1000.0;
            const double d = evid::dissonance(DirichletParams<double>::from_evidence(Vector2d(first, total_evidence - first)));
            if (d > best) {
                best = d;
                best_split = first;
            }
        }
        CHECK(best_split == doctest::Approx(total_evidence / 2).epsilon(1e-12));
    }
}

TEST_CASE("property: mass balance is symmetric") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::bernoulli_distribution zero(0.1);
    for (int i = 0; i < 1000; ++i) {
        const double x = zero(rng) ? 0.0 : u(rng);
        const double y = zero(rng) ? 0.0 : u(rng);
        REQUIRE(evid::mass_balance(x, y) == evid::mass_balance(y, x));
    }
}

TEST_CASE("templated on scalar type") {
    Eigen::Vector2f e(0.0f, 98.0f);
    auto d = DirichletParams<float>::from_evidence(e);
    CHECK(evid::vacuity(d) == doctest::Approx(0.02f));
    CHECK(evid::expected_probability(d)(1) == doctest::Approx(0.99f));
}
