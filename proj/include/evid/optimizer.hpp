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

#include <vector>

#include "evid/autodiff.hpp"

namespace evid {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moment estimates for one tensor.
struct AdamMoments {
    ad::Matrix m;
    ad::Matrix v;
    long step = 0;
};

/// One bias-corrected Adam update of `w` along descent direction `grad`.
void adam_step(ad::Matrix& w, const ad::Matrix& grad, AdamMoments& state, const AdamConfig& cfg);

/// Adam over every tensor of a ModelParams, using Parameter::grad.
class Adam {
public:
    explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

    void step(ad::ModelParams& params);
    const AdamConfig& config() const { return cfg_; }
    long steps() const { return steps_; }

private:
    AdamConfig cfg_;
    std::vector<AdamMoments> moments_;
    long steps_ = 0;
};

} // namespace evid
