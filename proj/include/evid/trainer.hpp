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

// Mixed-regularization training. Each iteration draws matched ID and outlier
// batches and applies three optimizer steps in sequence:
//   1. descend  mean ENN loss(ID) + beta_in * vacuity(ID)
//   2. ascend   beta_oe * vacuity(outliers)
//   3. generate off-manifold samples from the ID batch and ascend
//      beta_ad * vacuity(off-manifold)
// A step whose weight is zero is skipped. `fused` replaces the three steps by
// one step on the combined objective.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "evid/evidential.hpp"
#include "evid/network.hpp"

namespace evid {

struct TrainingConfig {
    ObjectiveWeights betas{0.1, 1.0, 0.0};
    double delta_off = 0.01;
    double lr = 1e-4;
    int batch_size = 128;
    int epochs = 10;
    std::uint64_t seed = 0;
    ArchitectureSpec arch;
    bool fused = false;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double id_loss = 0.0;
    double id_vacuity = 0.0;
    double oe_vacuity = 0.0;
    double ad_vacuity = 0.0;
    double id_accuracy = 0.0;
    double wall_seconds = 0.0;
};

struct TrainingLog {
    std::vector<EpochRecord> epochs;
    /// Off-manifold samples whose loss gradient vanished.
    std::size_t zero_gradient_samples = 0;
};

/// Header: epoch,id_loss,id_vacuity,oe_vacuity,ad_vacuity,id_accuracy[,wall_seconds].
/// Quantities not measured in a run (no outliers, beta_ad = 0) are written as nan.
void write_training_log_csv(std::ostream& os, const TrainingLog& log, bool include_wall_time = false);

struct TrainResult {
    Classifier model;
    TrainingLog log;
};

TrainResult train(std::span<const LabeledExample> id_set, std::span<const LabeledExample> oe_set,
                  const TrainingConfig& cfg);

/// Softmax classifier with the same architecture trained by cross-entropy;
/// only lr, batch_size, epochs, seed and arch of `cfg` are used. The log
/// carries cross-entropy in id_loss.
TrainResult train_softmax_baseline(std::span<const LabeledExample> id_set, const TrainingConfig& cfg);

struct EvaluationStats {
    double accuracy = 0.0;
    double mean_loss = 0.0;
    double mean_vacuity = 0.0;
    std::size_t count = 0;
};

EvaluationStats evaluate_epoch(const Classifier& model, std::span<const LabeledExample> labeled);

} // namespace evid
