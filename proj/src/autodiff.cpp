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

#include "evid/autodiff.hpp"

#include <cmath>
#include <sstream>

#include "evid/errors.hpp"

namespace evid::ad {

namespace {

std::string shape_of(const Matrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

[[noreturn]] void shape_mismatch(std::string_view op, const Matrix& a, const Matrix& b) {
    throw ShapeError(std::string(op) + ": incompatible operands " + shape_of(a) + " and " + shape_of(b));
}

} // namespace

double softplus_value(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid_value(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// ModelParams

Parameter& ModelParams::add(std::string name, Matrix init) {
    if (index_.count(name) != 0) {
        throw UsageError("ModelParams: parameter '" + name + "' registered twice");
    }
    index_.emplace(name, params_.size());
    Matrix zero = Matrix::Zero(init.rows(), init.cols());
    params_.push_back(Parameter{std::move(name), std::move(init), std::move(zero)});
    return params_.back();
}

Parameter& ModelParams::at(std::string_view name) {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw UsageError("ModelParams: no parameter named '" + std::string(name) + "'");
    }
    return params_[it->second];
}

const Parameter& ModelParams::at(std::string_view name) const {
    return const_cast<ModelParams*>(this)->at(name);
}

bool ModelParams::contains(std::string_view name) const {
    return index_.find(name) != index_.end();
}

std::size_t ModelParams::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) {
        n += static_cast<std::size_t>(p.value.size());
    }
    return n;
}

void ModelParams::zero_grad() {
    for (auto& p : params_) {
        p.grad.setZero(p.value.rows(), p.value.cols());
    }
}

// Var

const Matrix& Var::value() const {
    if (tape_ == nullptr) {
        throw UsageError("Var: value of an unrecorded variable");
    }
    return tape_->value(index_);
}

double Var::scalar() const {
    const Matrix& v = value();
    if (v.size() != 1) {
        throw ShapeError("Var::scalar: node is " + shape_of(v) + ", not 1x1");
    }
    return v(0, 0);
}

// Tape

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    differentiated_ = false;
    return Var(this, nodes_.size() - 1);
}

void Tape::check_owned(Var v, std::string_view op) const {
    if (v.tape_ != this) {
        throw UsageError(std::string(op) + ": operand recorded on a different tape");
    }
}

Var Tape::constant(Matrix value) {
    return push(Node{"constant", std::move(value), {}, {}, nullptr, false});
}

Var Tape::input(Matrix value) {
    return push(Node{"input", std::move(value), {}, {}, nullptr, true});
}

Var Tape::parameter(Parameter& p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
        return Var(this, it->second);
    }
    Var v = push(Node{"parameter:" + p.name, p.value, {}, {}, &p, true});
    param_nodes_.emplace(&p, v.index_);
    return v;
}

Var Tape::record(std::string_view op, Matrix value, std::initializer_list<Var> parents, Backward backward) {
    return record(op, std::move(value), std::span<const Var>(parents.begin(), parents.size()), std::move(backward));
}

Var Tape::record(std::string_view op, Matrix value, std::span<const Var> parents, Backward backward) {
    bool needs = false;
    for (const Var& p : parents) {
        check_owned(p, op);
        needs = needs || nodes_[p.index_].requires_grad;
    }
    return push(Node{std::string(op), std::move(value), {}, needs ? std::move(backward) : Backward{}, nullptr,
                     needs});
}

void Tape::backward(Var root, double seed) {
    if (nodes_.empty() || root.tape_ != this) {
        throw UsageError("Tape::backward: no forward pass recorded for this root");
    }
    const Matrix& rv = nodes_[root.index_].value;
    if (rv.size() != 1) {
        throw UsageError("Tape::backward: root must be a scalar, got " + shape_of(rv));
    }
    for (auto& n : nodes_) {
        n.grad.setZero(n.value.rows(), n.value.cols());
    }
    nodes_[root.index_].grad(0, 0) = seed;
    for (std::size_t i = root.index_ + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.requires_grad && n.backward) {
            n.backward(*this, i);
        }
    }
    for (auto& n : nodes_) {
        if (n.param != nullptr) {
            if (n.param->grad.rows() != n.value.rows() || n.param->grad.cols() != n.value.cols()) {
                n.param->grad.setZero(n.value.rows(), n.value.cols());
            }
            n.param->grad += n.grad;
        }
    }
    differentiated_ = true;
}

const Matrix& Tape::gradient(Var v) const {
    check_owned(v, "Tape::gradient");
    if (!differentiated_) {
        throw UsageError("Tape::gradient: backward() has not been run");
    }
    return nodes_[v.index_].grad;
}

Matrix& Tape::grad(std::size_t node) {
    return nodes_[node].grad;
}

// Ops

Var matmul(Var a, Var b) {
    if (a.cols() != b.rows()) {
        shape_mismatch("matmul", a.value(), b.value());
    }
    Tape& t = *a.tape();
    const auto ia = a.index(), ib = b.index();
    return t.record("matmul", a.value() * b.value(), {a, b}, [ia, ib](Tape& tp, std::size_t self) {
        const Matrix& g = tp.grad(self);
        if (tp.needs_grad(ia)) {
            tp.grad(ia).noalias() += g * tp.value(ib).transpose();
        }
        if (tp.needs_grad(ib)) {
            tp.grad(ib).noalias() += tp.value(ia).transpose() * g;
        }
    });
}

Var operator+(Var a, Var b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        shape_mismatch("add", a.value(), b.value());
    }
    Tape& t = *a.tape();
    const auto ia = a.index(), ib = b.index();
    return t.record("add", a.value() + b.value(), {a, b}, [ia, ib](Tape& tp, std::size_t self) {
        if (tp.needs_grad(ia)) {
            tp.grad(ia) += tp.grad(self);
        }
        if (tp.needs_grad(ib)) {
            tp.grad(ib) += tp.grad(self);
        }
    });
}

Var operator-(Var a, Var b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        shape_mismatch("sub", a.value(), b.value());
    }
    Tape& t = *a.tape();
    const auto ia = a.index(), ib = b.index();
    return t.record("sub", a.value() - b.value(), {a, b}, [ia, ib](Tape& tp, std::size_t self) {
        if (tp.needs_grad(ia)) {
            tp.grad(ia) += tp.grad(self);
        }
        if (tp.needs_grad(ib)) {
            tp.grad(ib) -= tp.grad(self);
        }
    });
}

Var cwise_product(Var a, Var b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        shape_mismatch("cwise_product", a.value(), b.value());
    }
    Tape& t = *a.tape();
    const auto ia = a.index(), ib = b.index();
    return t.record("cwise_product", a.value().cwiseProduct(b.value()), {a, b},
                    [ia, ib](Tape& tp, std::size_t self) {
                        const Matrix& g = tp.grad(self);
                        if (tp.needs_grad(ia)) {
                            tp.grad(ia) += g.cwiseProduct(tp.value(ib));
                        }
                        if (tp.needs_grad(ib)) {
                            tp.grad(ib) += g.cwiseProduct(tp.value(ia));
                        }
                    });
}

Var add_bias(Var a, Var bias) {
    if (bias.cols() != 1 || bias.rows() != a.rows()) {
        shape_mismatch("add_bias", a.value(), bias.value());
    }
    Tape& t = *a.tape();
    const auto ia = a.index(), ib = bias.index();
    Matrix out = a.value().colwise() + bias.value().col(0);
    return t.record("add_bias", std::move(out), {a, bias}, [ia, ib](Tape& tp, std::size_t self) {
        const Matrix& g = tp.grad(self);
        if (tp.needs_grad(ia)) {
            tp.grad(ia) += g;
        }
        if (tp.needs_grad(ib)) {
            tp.grad(ib) += g.rowwise().sum();
        }
    });
}

Var scale(Var a, double s) {
    const auto ia = a.index();
    return a.tape()->record("scale", a.value() * s, {a}, [ia, s](Tape& tp, std::size_t self) {
        tp.grad(ia) += tp.grad(self) * s;
    });
}

Var add_scalar(Var a, double s) {
    const auto ia = a.index();
    Matrix out = a.value().array() + s;
    return a.tape()->record("add_scalar", std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
        tp.grad(ia) += tp.grad(self);
    });
}

Var one_minus(Var a) {
    return add_scalar(scale(a, -1.0), 1.0);
}

Var softplus(Var a) {
    const auto ia = a.index();
    Matrix out = a.value().unaryExpr(&softplus_value);
    return a.tape()->record("softplus", std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
        tp.grad(ia) += tp.grad(self).cwiseProduct(tp.value(ia).unaryExpr(&sigmoid_value));
    });
}

Var relu(Var a) {
    const auto ia = a.index();
    Matrix out = a.value().cwiseMax(0.0);
    return a.tape()->record("relu", std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
        const Matrix mask = (tp.value(ia).array() > 0.0).cast<double>();
        tp.grad(ia) += tp.grad(self).cwiseProduct(mask);
    });
}

Var sigmoid(Var a) {
    const auto ia = a.index();
    Matrix out = a.value().unaryExpr(&sigmoid_value);
    return a.tape()->record("sigmoid", std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
        const Matrix& y = tp.value(self);
        tp.grad(ia).array() += tp.grad(self).array() * y.array() * (1.0 - y.array());
    });
}

Var tanh(Var a) {
    const auto ia = a.index();
    Matrix out = a.value().array().tanh();
    return a.tape()->record("tanh", std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
        const Matrix& y = tp.value(self);
        tp.grad(ia).array() += tp.grad(self).array() * (1.0 - y.array().square());
    });
}

Var sum(Var a) {
    const auto ia = a.index();
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    return a.tape()->record("sum", std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
        tp.grad(ia).array() += tp.grad(self)(0, 0);
    });
}

Var mean(Var a) {
    if (a.value().size() == 0) {
        throw ShapeError("mean: empty operand");
    }
    return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var gather_columns(Var table, std::span<const int> ids) {
    const Matrix& tv = table.value();
    Matrix out(tv.rows(), static_cast<Eigen::Index>(ids.size()));
    for (std::size_t c = 0; c < ids.size(); ++c) {
        if (ids[c] < 0 || ids[c] >= tv.cols()) {
            throw ShapeError("gather_columns: id " + std::to_string(ids[c]) + " outside table of " +
                             std::to_string(tv.cols()) + " columns");
        }
        out.col(static_cast<Eigen::Index>(c)) = tv.col(ids[c]);
    }
    const auto it = table.index();
    std::vector<int> idx(ids.begin(), ids.end());
    return table.tape()->record("gather_columns", std::move(out), {table},
                                [it, idx = std::move(idx)](Tape& tp, std::size_t self) {
                                    const Matrix& g = tp.grad(self);
                                    Matrix& gt = tp.grad(it);
                                    for (std::size_t c = 0; c < idx.size(); ++c) {
                                        gt.col(idx[c]) += g.col(static_cast<Eigen::Index>(c));
                                    }
                                });
}

Var masked_mean_pool(std::span<const Var> steps, const Matrix& mask) {
    if (steps.empty()) {
        throw ShapeError("masked_mean_pool: no steps");
    }
    const auto rows = steps[0].rows();
    const auto cols = steps[0].cols();
    if (mask.rows() != static_cast<Eigen::Index>(steps.size()) || mask.cols() != cols) {
        throw ShapeError("masked_mean_pool: mask is " + shape_of(mask) + " for " + std::to_string(steps.size()) +
                         " steps of " + std::to_string(cols) + " columns");
    }
    const Eigen::RowVectorXd counts = mask.colwise().sum();
    if ((counts.array() <= 0.0).any()) {
        throw ShapeError("masked_mean_pool: a column has no unmasked step");
    }
    const Eigen::RowVectorXd inv = counts.cwiseInverse();
    Matrix out = Matrix::Zero(rows, cols);
    for (std::size_t t = 0; t < steps.size(); ++t) {
        if (steps[t].rows() != rows || steps[t].cols() != cols) {
            shape_mismatch("masked_mean_pool", steps[0].value(), steps[t].value());
        }
        const Eigen::RowVectorXd w = mask.row(static_cast<Eigen::Index>(t)).cwiseProduct(inv);
        out += steps[t].value() * w.asDiagonal();
    }
    std::vector<std::size_t> idx;
    idx.reserve(steps.size());
    for (const Var& s : steps) {
        idx.push_back(s.index());
    }
    Matrix weights = mask * inv.asDiagonal();
    return steps[0].tape()->record("masked_mean_pool", std::move(out), steps,
                                   [idx = std::move(idx), weights = std::move(weights)](Tape& tp, std::size_t self) {
                                       const Matrix& g = tp.grad(self);
                                       for (std::size_t t = 0; t < idx.size(); ++t) {
                                           if (tp.needs_grad(idx[t])) {
                                               tp.grad(idx[t]) +=
                                                   g * weights.row(static_cast<Eigen::Index>(t)).asDiagonal();
                                           }
                                       }
                                   });
}

} // namespace evid::ad
