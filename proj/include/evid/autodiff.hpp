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

// Tape-based reverse-mode automatic differentiation over dense Eigen matrices.
//
// A Tape records one forward pass. Every node owns its value; gradients are
// allocated by Tape::backward. Parameters live outside the tape in a
// ModelParams collection and receive accumulated gradients when the pass that
// used them is differentiated.

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace evid::ad {

using Matrix = Eigen::MatrixXd;

struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
};

/// Named, ordered set of trainable tensors. References stay valid as
/// parameters are added.
class ModelParams {
public:
    Parameter& add(std::string name, Matrix init);

    Parameter& at(std::string_view name);
    const Parameter& at(std::string_view name) const;
    bool contains(std::string_view name) const;

    std::size_t size() const { return params_.size(); }
    std::size_t scalar_count() const;
    void zero_grad();

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    std::uint64_t seed = 0;

private:
    std::deque<Parameter> params_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

class Tape;

/// Handle to a node recorded on a Tape.
class Var {
public:
    Var() = default;

    const Matrix& value() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
    double scalar() const;

    Tape* tape() const { return tape_; }
    std::size_t index() const { return index_; }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

    Tape* tape_ = nullptr;
    std::size_t index_ = 0;
};

class Tape {
public:
    /// Propagates node `self`'s gradient into its parents.
    using Backward = std::function<void(Tape&, std::size_t self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix value);
    /// Leaf whose gradient is kept and readable after backward().
    Var input(Matrix value);
    /// Leaf bound to `p`; one node per parameter per tape.
    Var parameter(Parameter& p);

    /// Record an op. `parents` decides whether the node needs a gradient.
    Var record(std::string_view op, Matrix value, std::initializer_list<Var> parents, Backward backward);
    Var record(std::string_view op, Matrix value, std::span<const Var> parents, Backward backward);

    /// Reverse sweep from a 1x1 root. Parameter gradients are accumulated into
    /// Parameter::grad (callers zero them first).
    void backward(Var root, double seed = 1.0);

    const Matrix& value(std::size_t node) const { return nodes_[node].value; }
    const Matrix& gradient(Var v) const;
    /// Gradient slot of a node, for use inside Backward callbacks.
    Matrix& grad(std::size_t node);
    bool needs_grad(std::size_t node) const { return nodes_[node].requires_grad; }
    const std::string& op(std::size_t node) const { return nodes_[node].op; }
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        std::string op;
        Matrix value;
        Matrix grad;
        Backward backward;
        Parameter* param = nullptr;
        bool requires_grad = false;
    };

    Var push(Node node);
    void check_owned(Var v, std::string_view op) const;

    std::vector<Node> nodes_;
    std::unordered_map<const Parameter*, std::size_t> param_nodes_;
    bool differentiated_ = false;
};

// Primitive ops. Each throws ShapeError naming the op on mismatched operands.

Var matmul(Var a, Var b);
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var cwise_product(Var a, Var b);
/// Adds a column vector to every column of `a`.
Var add_bias(Var a, Var bias);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var one_minus(Var a);
Var softplus(Var a);
Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var sum(Var a);
Var mean(Var a);
/// Columns of `table` selected by `ids` (embedding lookup).
Var gather_columns(Var table, std::span<const int> ids);
/// Per-column average of `steps` weighted by `mask` (T x B, entries 0/1).
Var masked_mean_pool(std::span<const Var> steps, const Matrix& mask);

/// Numerically stable softplus for plain values.
double softplus_value(double x);
double sigmoid_value(double x);

} // namespace evid::ad
