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

// Off-manifold pseudo-samples: one signed-gradient step of radius delta_off in
// embedding space, started from uniform noise and projected onto the l-inf
// sphere of that radius.

#include <cstdint>
#include <span>
#include <vector>

#include "evid/network.hpp"

namespace evid {

struct PerturbationConfig {
    double delta_off = 0.01;
    std::uint64_t seed = 0;
    /// Uniform start noise in [-delta_off, delta_off]; off only in tests.
    bool initial_noise = true;

    void validate() const;
};

struct OffManifoldSamples {
    EmbeddingValues perturbed;
    EmbeddingValues origin;
    /// Examples whose loss gradient vanished in every coordinate; those keep
    /// only the clamped noise.
    std::size_t zero_gradient = 0;
};

/// Gradient of the mean ENN loss w.r.t. the encoder inputs, parameters frozen.
std::vector<ad::Matrix> classification_input_gradient(const Classifier& model, const EmbeddingValues& inputs,
                                                      std::span<const int> labels);

/// x' = x + P(v + delta * sign(grad_x L)) over the valid coordinates of each
/// example, where P clamps every coordinate to [-delta, delta] and, if the
/// result is still strictly inside the ball, moves its largest coordinate onto
/// the surface (the nearest point of the l-inf sphere). Examples with an
/// all-zero gradient keep the clamped noise. `draw_ids[b]` selects the noise stream of
/// column b; it must hold one id per example.
OffManifoldSamples generate_off_manifold(const Classifier& model, const Batch& batch, const PerturbationConfig& cfg,
                                         std::span<const std::uint64_t> draw_ids);

/// Largest |x'-x| over the valid coordinates of column b.
double linf_distance(const EmbeddingValues& a, const EmbeddingValues& b, Eigen::Index column);

} // namespace evid
