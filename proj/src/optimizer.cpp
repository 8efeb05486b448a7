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

#include "evid/optimizer.hpp"

#include <cmath>

#include "evid/errors.hpp"

namespace evid {

void adam_step(ad::Matrix& w, const ad::Matrix& grad, AdamMoments& state, const AdamConfig& cfg) {
    if (grad.rows() != w.rows() || grad.cols() != w.cols()) {
        throw ShapeError("adam_step: gradient shape differs from parameter shape");
    }
    if (state.m.size() == 0) {
        state.m = ad::Matrix::Zero(w.rows(), w.cols());
        state.v = ad::Matrix::Zero(w.rows(), w.cols());
    }
    ++state.step;
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    w.array() -= cfg.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.eps);
}

void Adam::step(ad::ModelParams& params) {
    if (moments_.empty()) {
        moments_.resize(params.size());
    } else if (moments_.size() != params.size()) {
        throw UsageError("Adam::step: parameter set changed between steps");
    }
    std::size_t i = 0;
    for (auto& p : params) {
        adam_step(p.value, p.grad, moments_[i++], cfg_);
    }
    ++steps_;
}

} // namespace evid
