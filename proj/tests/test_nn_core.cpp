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

#include <cmath>
#include <sstream>

#include "evid/autodiff.hpp"
#include "evid/checkpoint.hpp"
#include "evid/errors.hpp"
#include "evid/gradcheck.hpp"
#include "evid/network.hpp"
#include "evid/optimizer.hpp"
#include "oracles.hpp"

using namespace evid;
using ad::Matrix;
using ad::Tape;
using ad::Var;

TEST_CASE("affine with identity weights is the identity") {
    Tape tape;
    Matrix x(3, 2);
    x << 1, -2, 3, 0.5, -4, 7;
    Var y = ad::add_bias(ad::matmul(tape.constant(Matrix::Identity(3, 3)), tape.constant(x)),
                         tape.constant(Matrix::Zero(3, 1)));
    CHECK(y.value() == x);
}

TEST_CASE("softplus, sigmoid and pooling forward values") {
    Tape tape;
    CHECK(ad::softplus(tape.constant(Matrix::Zero(1, 1))).scalar() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    Matrix v(2, 1);
    v << 0.3, -1.2;
    std::vector<Var> steps{tape.constant(v), tape.constant(v), tape.constant(v)};
    Var pooled = ad::masked_mean_pool(steps, Matrix::Ones(3, 1));
    CHECK((pooled.value() - v).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("masked mean pooling ignores pad positions") {
    Tape tape;
    Matrix a(1, 2), b(1, 2);
    a << 1.0, 4.0;
    b << 3.0, 100.0;
    Matrix mask(2, 2);
    mask << 1, 1, 1, 0;
    std::vector<Var> steps{tape.constant(a), tape.constant(b)};
    Var pooled = ad::masked_mean_pool(steps, mask);
    CHECK(pooled.value()(0, 0) == 2.0);
    CHECK(pooled.value()(0, 1) == 4.0);
}

TEST_CASE("backward on simple graphs") {
    ad::ModelParams params;
    auto& x = params.add("x", Matrix::Constant(1, 1, 3.0));
    auto& unused = params.add("unused", Matrix::Constant(2, 2, 1.0));
    params.zero_grad();
    Tape tape;
    Var xv = tape.parameter(x);
    tape.parameter(unused);
    tape.backward(ad::sum(ad::cwise_product(xv, xv)));
    CHECK(x.grad(0, 0) == 6.0);
    CHECK(unused.grad.isZero());

    Tape t2;
    Var in = t2.input(Matrix::Zero(4, 1));
    t2.backward(ad::sum(ad::softplus(in)));
    CHECK(t2.gradient(in).isApprox(Matrix::Constant(4, 1, 0.5)));

    Tape t3;
    params.zero_grad();
    Var p = t3.parameter(x);
    Var c = t3.constant(Matrix::Constant(1, 1, 5.0));
    t3.backward(ad::sum(c) + ad::scale(p, 0.0));
    CHECK(x.grad(0, 0) == 0.0);
}

TEST_CASE("usage and shape errors") {
    Tape tape;
    Var v = tape.input(Matrix::Ones(2, 2));
    CHECK_THROWS_AS(tape.gradient(v), UsageError);
    CHECK_THROWS_AS(tape.backward(v), UsageError);
    CHECK_THROWS_AS(ad::matmul(v, tape.constant(Matrix::Ones(3, 1))), ShapeError);
    try {
        ad::matmul(v, tape.constant(Matrix::Ones(3, 1)));
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).find("matmul") != std::string::npos);
    }
    ad::ModelParams params;
    params.add("w", Matrix::Ones(1, 1));
    CHECK_THROWS_AS(params.add("w", Matrix::Ones(1, 1)), UsageError);
}

TEST_CASE("softplus gradient stays finite on a wide input range") {
    Tape tape;
    Matrix x(1, 101);
    for (int i = 0; i <= 100; ++i) {
        x(0, i) = -50.0 + i;
    }
    Var in = tape.input(x);
    tape.backward(ad::sum(ad::add_scalar(ad::softplus(in), 1.0)));
    CHECK(tape.gradient(in).allFinite());
    CHECK(ad::softplus(tape.constant(x)).value().allFinite());
}

TEST_CASE("backprop agrees with finite differences on composite ops") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ad::ModelParams params;
    auto rnd = [&](int r, int c) {
        Matrix m(r, c);
        for (int i = 0; i < m.size(); ++i) {
            m.data()[i] = u(rng);
        }
        return m;
    };
    params.add("table", rnd(3, 5));
    params.add("w", rnd(4, 3));
    params.add("b", rnd(4, 1));
    const std::vector<int> ids_a{0, 2, 4};
    const std::vector<int> ids_b{1, 1, 3};
    auto build = [&](Tape& tape) {
        std::vector<Var> steps{ad::gather_columns(tape.parameter(params.at("table")), ids_a),
                               ad::gather_columns(tape.parameter(params.at("table")), ids_b)};
        Matrix mask(2, 3);
        mask << 1, 1, 1, 1, 0, 1;
        Var pooled = ad::masked_mean_pool(steps, mask);
        Var h = ad::add_bias(ad::matmul(tape.parameter(params.at("w")), pooled), tape.parameter(params.at("b")));
        Var mix = ad::cwise_product(ad::sigmoid(h), ad::tanh(h)) - ad::relu(ad::scale(h, 0.5));
        return ad::mean(ad::one_minus(ad::softplus(mix)));
    };
    auto loss_and_backward = [&] {
        Tape tape;
        Var l = build(tape);
        tape.backward(l);
        return l.scalar();
    };
    auto loss = [&] {
        Tape tape;
        return build(tape).scalar();
    };
    const GradientCheck r = check_gradients(loss_and_backward, loss, params);
    CHECK(r.coordinates == 15 + 12 + 4);
    CHECK(r.max_relative_error < 1e-6);
}

TEST_CASE("finite differences: exact on linear loss, O(h^2) on a cubic") {
    auto linear = [](const Eigen::VectorXd& x) { return 3.0 * x(0) - 2.0 * x(1) + 0.5; };
    Eigen::VectorXd x(2);
    x << 0.7, -1.3;
    for (double h : {1e-1, 1e-3}) {
        Eigen::VectorXd g = finite_difference_gradient(linear, x, h);
        CHECK(g(0) == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(g(1) == doctest::Approx(-2.0).epsilon(1e-9));
    }
    // Central differences are exact on quadratics; the h^2 term shows on cubics.
    auto cubic = [](const Eigen::VectorXd& v) { return v(0) * v(0) * v(0) + v(0) * v(0); };
    Eigen::VectorXd p(1);
    p << 1.0;
    const double exact = 5.0;
    const double e1 = std::abs(finite_difference_gradient(cubic, p, 1e-2)(0) - exact);
    const double e2 = std::abs(finite_difference_gradient(cubic, p, 5e-3)(0) - exact);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(1e-3));
    auto quadratic = [](const Eigen::VectorXd& v) { return 2.0 * v(0) * v(0) - v(0); };
    CHECK(std::abs(finite_difference_gradient(quadratic, p, 1e-2)(0) - 3.0) < 1e-10);
}

TEST_CASE("gru cell: zero weights give zero state") {
    Tape tape;
    GruWeights w;
    for (Var* v : {&w.w_z, &w.w_r, &w.w_n}) {
        *v = tape.constant(Matrix::Zero(3, 2));
    }
    for (Var* v : {&w.u_z, &w.u_r, &w.u_n}) {
        *v = tape.constant(Matrix::Zero(3, 3));
    }
    for (Var* v : {&w.b_z, &w.b_r, &w.b_n}) {
        *v = tape.constant(Matrix::Zero(3, 1));
    }
    Var h = gru_cell_forward(tape.constant(Matrix::Zero(2, 1)), tape.constant(Matrix::Zero(3, 1)), w);
    CHECK(h.value().isZero());
}

TEST_CASE("gru cell matches a hand-evaluated two-unit cell") {
    oracle::GruCell c;
    c.wz = {{0.1, -0.2, 0.3}, {0.05, 0.4, -0.1}};
    c.wr = {{-0.3, 0.2, 0.1}, {0.2, -0.1, 0.25}};
    c.wn = {{0.5, 0.1, -0.4}, {-0.2, 0.3, 0.2}};
    c.uz = {{0.2, -0.1}, {0.3, 0.1}};
    c.ur = {{-0.2, 0.4}, {0.1, -0.3}};
    c.un = {{0.3, 0.2}, {-0.4, 0.1}};
    c.bz = {0.01, -0.02};
    c.br = {0.03, 0.0};
    c.bn = {-0.05, 0.04};
    auto to_matrix = [](const std::vector<std::vector<double>>& rows) {
        Matrix m(rows.size(), rows[0].size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < rows[0].size(); ++j) {
                m(i, j) = rows[i][j];
            }
        }
        return m;
    };
    auto col = [](const std::vector<double>& v) { return Matrix(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size())); };
    auto weights = [&](Tape& t) {
        return GruWeights{t.constant(to_matrix(c.wz)), t.constant(to_matrix(c.uz)), t.constant(col(c.bz)),
                          t.constant(to_matrix(c.wr)), t.constant(to_matrix(c.ur)), t.constant(col(c.br)),
                          t.constant(to_matrix(c.wn)), t.constant(to_matrix(c.un)), t.constant(col(c.bn))};
    };
    Tape tape;
    const GruWeights w = weights(tape);
    const std::vector<double> x{0.7, -1.1, 0.4};
    const std::vector<double> h{0.2, -0.5};
    const std::vector<double> expected = oracle::gru_step(c, x, h);
    Var out = gru_cell_forward(tape.constant(col(x)), tape.constant(col(h)), w);
    CHECK(std::abs(out.value()(0, 0) - expected[0]) < 1e-10);
    CHECK(std::abs(out.value()(1, 0) - expected[1]) < 1e-10);

    // Repeating one token drives the state to a fixed point.
    std::vector<double> state{0.0, 0.0};
    std::vector<double> diffs;
    for (int t = 0; t < 60; ++t) {
        auto next = oracle::gru_step(c, x, state);
        Tape tt;
        Var lib = gru_cell_forward(tt.constant(col(x)), tt.constant(col(state)), weights(tt));
        CHECK(std::abs(lib.value()(0, 0) - next[0]) < 1e-10);
        diffs.push_back(std::max(std::abs(next[0] - state[0]), std::abs(next[1] - state[1])));
        CHECK(std::abs(next[0]) < 1.0);
        state = next;
    }
    for (std::size_t t = 10; t + 1 < diffs.size(); ++t) {
        CHECK(diffs[t + 1] <= diffs[t]);
    }
}

TEST_CASE("adam") {
    AdamConfig cfg;
    cfg.lr = 0.1;
    Matrix w = Matrix::Constant(1, 1, 1.0);
    AdamMoments state;
    adam_step(w, Matrix::Zero(1, 1), state, cfg);
    CHECK(w(0, 0) == 1.0);

    AdamMoments s2;
    Matrix v = Matrix::Constant(1, 1, 1.0);
    adam_step(v, 2.0 * v, s2, cfg);
    CHECK(v(0, 0) < 1.0);

    AdamMoments s3;
    Matrix q = Matrix::Constant(1, 1, 0.0);
    double prev = 3.0;
    for (int i = 0; i < 10; ++i) {
        adam_step(q, 2.0 * (q.array() - 3.0).matrix(), s3, cfg);
        const double dist = std::abs(q(0, 0) - 3.0);
        CHECK(dist < prev);
        prev = dist;
    }
}

TEST_CASE("classifier construction is deterministic and bit-reproducible") {
    ArchitectureSpec spec;
    spec.kind = Architecture::gru;
    spec.vocab_size = 12;
    spec.embed_dim = 4;
    spec.hidden_dim = 5;
    spec.num_classes = 3;
    Classifier a(spec, 42), b(spec, 42), c(spec, 43);
    std::vector<LabeledExample> ex(3);
    ex[0].tokens = {2, 3, 4};
    ex[1].tokens = {5};
    ex[2].tokens = {6, 7, 8, 9, 10, 11};
    const Batch batch = make_batch(ex, spec);
    const Matrix alpha = a.predict_alpha(batch);
    CHECK(alpha == b.predict_alpha(batch));
    CHECK(alpha != c.predict_alpha(batch));
    CHECK((alpha.array() >= 1.0).all());
    CHECK(a.params().contains("gru1.u_n"));
    CHECK(a.params().at("embedding").value.rows() == 4);
    // Uniform in +-1/sqrt(fan_in): embed_dim 4 for layer-0 inputs, hidden 5 elsewhere.
    for (const auto& p : a.params()) {
        double fan_in = 5.0;
        if (p.name == "embedding") {
            fan_in = 1.0;
        } else if (p.name.rfind("gru0.w_", 0) == 0) {
            fan_in = 4.0;
        }
        CHECK(p.value.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(fan_in));
    }
}

TEST_CASE("zero-weight network with softplus evidence gives alpha = ln2 + 1") {
    ArchitectureSpec spec;
    Classifier model(spec, 1);
    for (auto& p : model.params()) {
        p.value.setZero();
    }
    std::vector<LabeledExample> ex(1);
    ex[0].features = Eigen::Vector2d(3.0, -1.0);
    const Matrix alpha = model.predict_alpha(make_batch(ex, spec));
    CHECK(alpha(0, 0) == doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-15));
    CHECK(alpha(1, 0) == doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-15));
}

TEST_CASE("out-of-range token id is an error") {
    ArchitectureSpec spec;
    spec.kind = Architecture::gru;
    spec.vocab_size = 5;
    spec.embed_dim = 2;
    spec.hidden_dim = 2;
    Classifier model(spec, 0);
    std::vector<LabeledExample> ex(1);
    ex[0].tokens = {7};
    CHECK_THROWS_AS(model.predict_alpha(make_batch(ex, spec)), ShapeError);
}

TEST_CASE("checkpoint round trip is exact") {
    ArchitectureSpec spec;
    spec.kind = Architecture::gru;
    spec.vocab_size = 9;
    spec.embed_dim = 3;
    spec.hidden_dim = 4;
    spec.activation = EvidenceActivation::relu;
    Classifier model(spec, 77);
    Checkpoint ckpt;
    ckpt.meta["note"] = "hello world";
    ckpt.lists["vocab"] = {"<pad>", "<unk>", "a", "b"};
    store_classifier(ckpt, "enn", model);
    std::stringstream ss;
    write_checkpoint(ss, ckpt);
    const std::string first = ss.str();
    const Checkpoint back = read_checkpoint(ss);
    CHECK(back.meta_value("note") == "hello world");
    CHECK(back.lists.at("vocab").size() == 4);
    CHECK(has_classifier(back, "enn"));
    CHECK_FALSE(has_classifier(back, "msp"));
    const Classifier restored = restore_classifier(back, "enn");
    CHECK(restored.spec().activation == EvidenceActivation::relu);
    for (const auto& p : model.params()) {
        CHECK(restored.params().at(p.name).value == p.value);
    }
    std::stringstream again;
    write_checkpoint(again, back);
    CHECK(again.str() == first);
}

TEST_CASE("corrupted checkpoints are rejected") {
    std::stringstream bad("not a checkpoint\n");
    CHECK_THROWS_AS(read_checkpoint(bad), IoError);
    std::stringstream truncated("evid-checkpoint 1\ntensor x 2 2\n1 2\n");
    CHECK_THROWS_AS(read_checkpoint(truncated), IoError);
    ArchitectureSpec spec;
    Classifier model(spec, 1);
    ad::ModelParams wrong;
    wrong.add("fc1.w", Matrix::Zero(3, 3));
    CHECK_THROWS_AS(Classifier(spec, std::move(wrong)), ShapeError);
}
