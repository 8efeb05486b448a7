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

// Built-in verification suite run by `evid selfcheck`.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evid/evidential.hpp"
#include "evid/gradcheck.hpp"

namespace evid {

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

using LossFunction = std::function<double(const DirichletParams<double>&, const Eigen::VectorXd&)>;

struct SelfcheckOptions {
    std::uint64_t seed = 0;
    int monte_carlo_cases = 20;
    int monte_carlo_draws = 200000;
    /// Added to every ENN loss evaluation; nonzero values must make the
    /// loss checks fail.
    double loss_perturbation = 0.0;
};

CheckResult check_table_values();
CheckResult check_uncertainty_ordering();
CheckResult check_loss_hand_values(const LossFunction& loss);
/// Sample mean of ||y - p||^2 over Dirichlet draws versus `loss`.
CheckResult check_loss_monte_carlo(const LossFunction& loss, int cases, int draws, std::uint64_t seed);
CheckResult check_objective_gradients(Architecture arch, std::uint64_t seed);
CheckResult check_metric_oracles(std::uint64_t seed);

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options);

/// One line per check: PASS|FAIL name measured=.. tolerance=.. detail
void write_check_report(std::ostream& os, std::span<const CheckResult> results);

/// Backprop versus central differences of the full regularized objective on
/// fixed batches (off-manifold inputs frozen).
GradientCheck objective_gradient_check(Classifier& model, const Batch& id, const Batch& oe,
                                       const EmbeddingValues& off_manifold, const ObjectiveWeights& w,
                                       double h = 1e-5);

} // namespace evid
