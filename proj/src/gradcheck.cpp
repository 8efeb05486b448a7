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

#include "evid/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "evid/errors.hpp"

namespace evid {

std::vector<ad::Matrix> finite_difference_gradient(const std::function<double()>& loss, ad::ModelParams& params,
                                                   double h) {
    if (!(h > 0.0)) {
        throw DomainError("finite_difference_gradient: step must be positive");
    }
    std::vector<ad::Matrix> out;
    out.reserve(params.size());
    for (auto& p : params) {
        ad::Matrix g(p.value.rows(), p.value.cols());
        for (Eigen::Index i = 0; i < p.value.size(); ++i) {
            double& x = p.value.data()[i];
            const double saved = x;
            x = saved + h;
            const double up = loss();
            x = saved - h;
            const double down = loss();
            x = saved;
            g.data()[i] = (up - down) / (2.0 * h);
        }
        out.push_back(std::move(g));
    }
    return out;
}

Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& loss,
                                           const Eigen::VectorXd& x, double h) {
    if (!(h > 0.0)) {
        throw DomainError("finite_difference_gradient: step must be positive");
    }
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + h;
        const double up = loss(probe);
        probe(i) = x(i) - h;
        const double down = loss(probe);
        probe(i) = x(i);
        g(i) = (up - down) / (2.0 * h);
    }
    return g;
}

double max_relative_error(const ad::Matrix& analytic, const ad::Matrix& numeric, double floor) {
    if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols()) {
        throw ShapeError("max_relative_error: shapes differ");
    }
    double worst = 0.0;
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        const double a = analytic.data()[i];
        const double n = numeric.data()[i];
        const double denom = std::max({std::abs(a), std::abs(n), floor});
        worst = std::max(worst, std::abs(a - n) / denom);
    }
    return worst;
}

GradientCheck check_gradients(const std::function<double()>& loss_and_backward,
                              const std::function<double()>& loss, ad::ModelParams& params, double h) {
    params.zero_grad();
    loss_and_backward();
    std::vector<ad::Matrix> analytic;
    for (const auto& p : params) {
        analytic.push_back(p.grad);
    }
    const auto numeric = finite_difference_gradient(loss, params, h);
    GradientCheck result;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        result.max_relative_error = std::max(result.max_relative_error, max_relative_error(analytic[i], numeric[i]));
        result.coordinates += static_cast<std::size_t>(analytic[i].size());
    }
    return result;
}

} // namespace evid
