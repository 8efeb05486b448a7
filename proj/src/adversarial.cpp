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

#include "evid/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "evid/errors.hpp"
#include "evid/evidential.hpp"
#include "evid/random.hpp"

namespace evid {

void PerturbationConfig::validate() const {
    if (!(delta_off > 0.0) || !std::isfinite(delta_off)) {
        throw ConfigError("delta_off must be a positive finite number");
    }
}

std::vector<ad::Matrix> classification_input_gradient(const Classifier& model, const EmbeddingValues& inputs,
                                                      std::span<const int> labels) {
    ad::Tape tape;
    const EmbeddedBatch in = Classifier::bind(tape, inputs, true);
    ad::Var alpha = model.alpha_from_logits(model.frozen_logits(tape, in));
    ad::Var loss = enn_loss_mean(alpha, one_hot(labels, model.spec().num_classes));
    tape.backward(loss);
    std::vector<ad::Matrix> grads;
    grads.reserve(in.steps.size());
    for (const auto& s : in.steps) {
        grads.push_back(tape.gradient(s));
    }
    return grads;
}

OffManifoldSamples generate_off_manifold(const Classifier& model, const Batch& batch, const PerturbationConfig& cfg,
                                         std::span<const std::uint64_t> draw_ids) {
    cfg.validate();
    if (draw_ids.size() != batch.size()) {
        throw UsageError("generate_off_manifold: need one draw id per example");
    }
    OffManifoldSamples out;
    out.origin = model.embed_values(batch);
    const auto grads = classification_input_gradient(model, out.origin, batch.labels);
    out.perturbed = out.origin;

    const double delta = cfg.delta_off;
    const auto cols = out.origin.mask.cols();
    std::uniform_real_distribution<double> noise(-delta, delta);
    struct Coordinate {
        std::size_t step;
        Eigen::Index row;
        double offset;
        double sign;
    };
    std::vector<Coordinate> coords;
    for (Eigen::Index b = 0; b < cols; ++b) {
        Rng rng = make_rng(cfg.seed, Stream::off_manifold, {draw_ids[static_cast<std::size_t>(b)]});
        coords.clear();
        bool any_gradient = false;
        for (std::size_t t = 0; t < out.origin.steps.size(); ++t) {
            if (out.origin.mask(static_cast<Eigen::Index>(t), b) == 0.0) {
                continue;
            }
            const auto g = grads[t].col(b);
            for (Eigen::Index i = 0; i < g.size(); ++i) {
                const double v = cfg.initial_noise ? noise(rng) : 0.0;
                const double s = g(i) > 0.0 ? 1.0 : (g(i) < 0.0 ? -1.0 : 0.0);
                any_gradient = any_gradient || s != 0.0;
                coords.push_back({t, i, std::clamp(v + delta * s, -delta, delta), s});
            }
        }
        if (!any_gradient) {
            ++out.zero_gradient;
        } else {
            // Nearest point on the sphere: an interior offset moves its
            // dominant coordinate onto the surface.
            auto dominant = std::max_element(coords.begin(), coords.end(), [](const auto& a, const auto& c) {
                return std::abs(a.offset) < std::abs(c.offset);
            });
            if (std::abs(dominant->offset) < delta) {
                const double dir = dominant->offset != 0.0 ? (dominant->offset > 0.0 ? 1.0 : -1.0)
                                                           : (dominant->sign != 0.0 ? dominant->sign : 1.0);
                dominant->offset = dir * delta;
            }
        }
        for (const auto& c : coords) {
            out.perturbed.steps[c.step](c.row, b) += c.offset;
        }
    }
    return out;
}

double linf_distance(const EmbeddingValues& a, const EmbeddingValues& b, Eigen::Index column) {
    if (a.steps.size() != b.steps.size()) {
        throw ShapeError("linf_distance: step counts differ");
    }
    double worst = 0.0;
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
        if (a.mask(static_cast<Eigen::Index>(t), column) == 0.0) {
            continue;
        }
        worst = std::max(worst, (a.steps[t].col(column) - b.steps[t].col(column)).cwiseAbs().maxCoeff());
    }
    return worst;
}

} // namespace evid
