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

// Central finite differences, used as the oracle for backpropagated gradients.

#include <functional>
#include <vector>

#include "evid/autodiff.hpp"

namespace evid {

/// (f(theta + h e_i) - f(theta - h e_i)) / 2h for every coordinate of every
/// parameter. Parameters are restored afterwards. One matrix per parameter,
/// in registration order.
std::vector<ad::Matrix> finite_difference_gradient(const std::function<double()>& loss, ad::ModelParams& params,
                                                   double h);

/// Same, over a free vector argument.
Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& loss,
                                           const Eigen::VectorXd& x, double h);

/// max_i |a_i - n_i| / max(|a_i|, |n_i|, floor).
double max_relative_error(const ad::Matrix& analytic, const ad::Matrix& numeric, double floor = 1e-6);

struct GradientCheck {
    double max_relative_error = 0.0;
    std::size_t coordinates = 0;
};

/// Backprop (via `loss_and_backward`, which must accumulate into
/// Parameter::grad and return the loss) versus finite differences of `loss`.
GradientCheck check_gradients(const std::function<double()>& loss_and_backward,
                              const std::function<double()>& loss, ad::ModelParams& params, double h = 1e-5);

} // namespace evid
