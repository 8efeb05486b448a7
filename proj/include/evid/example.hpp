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

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace evid {

/// One input: a token-id sequence (text models) or a feature vector
/// (feature models). Outlier and unlabeled examples carry no label.
struct LabeledExample {
    std::vector<int> tokens;
    Eigen::VectorXd features;
    std::optional<int> label;
};

} // namespace evid
