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

// The evidential classifier f = h o g: an input encoder (identity for feature
// vectors, embedding + stacked GRU + masked mean pooling for token sequences)
// followed by an affine head. The same network produces logits for the
// softmax baseline and evidence for the evidential model.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evid/autodiff.hpp"
#include "evid/example.hpp"

namespace evid {

enum class Architecture { mlp2d, gru };
enum class EvidenceActivation { softplus, relu };

std::string to_string(Architecture a);
std::string to_string(EvidenceActivation a);
Architecture parse_architecture(std::string_view s);
EvidenceActivation parse_activation(std::string_view s);

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;

struct ArchitectureSpec {
    Architecture kind = Architecture::mlp2d;
    int num_classes = 2;
    // Feature models.
    int input_dim = 2;
    int mlp_hidden = 32;
    // Token models.
    int vocab_size = 0;
    int embed_dim = 64;
    int hidden_dim = 64;
    int gru_layers = 2;
    int max_length = 64;
    EvidenceActivation activation = EvidenceActivation::softplus;

    void validate() const;
};

/// Inputs of a minibatch, column b of every matrix belongs to example b.
struct Batch {
    ad::Matrix features;                  // input_dim x B
    std::vector<std::vector<int>> tokens; // B sequences
    std::vector<int> labels;              // -1 when absent
    std::size_t size() const { return labels.size(); }
};

Batch make_batch(std::span<const LabeledExample> examples, std::span<const std::size_t> indices,
                 const ArchitectureSpec& spec);
Batch make_batch(std::span<const LabeledExample> examples, const ArchitectureSpec& spec);

/// Plain values of the encoder input: one d x B matrix per time step and a
/// T x B validity mask. Feature models have a single step.
struct EmbeddingValues {
    std::vector<ad::Matrix> steps;
    ad::Matrix mask;
};

struct EmbeddedBatch {
    std::vector<ad::Var> steps;
    ad::Matrix mask;
};

struct GruWeights {
    ad::Var w_z, u_z, b_z;
    ad::Var w_r, u_r, b_r;
    ad::Var w_n, u_n, b_n;
};

/// One GRU step: z = sig(Wz x + Uz h + bz), r = sig(Wr x + Ur h + br),
/// n = tanh(Wn x + Un (r*h) + bn), h' = z*h + (1-z)*n. Columns are examples.
ad::Var gru_cell_forward(ad::Var x, ad::Var h_prev, const GruWeights& w);

class Classifier {
public:
    Classifier(ArchitectureSpec spec, std::uint64_t seed);
    /// Adopts existing parameters; throws ShapeError if they do not match `spec`.
    Classifier(ArchitectureSpec spec, ad::ModelParams params);

    const ArchitectureSpec& spec() const { return spec_; }
    ad::ModelParams& params() { return params_; }
    const ad::ModelParams& params() const { return params_; }

    EmbeddingValues embed_values(const Batch& batch) const;
    /// Encoder input on the tape; token models look up the trainable table.
    EmbeddedBatch embed(ad::Tape& tape, const Batch& batch);
    /// Encoder input from given values, as differentiable inputs or constants.
    static EmbeddedBatch bind(ad::Tape& tape, const EmbeddingValues& values, bool differentiable);

    /// K x B logits with trainable parameters.
    ad::Var logits(ad::Tape& tape, const EmbeddedBatch& in);
    /// K x B logits with parameters bound as constants.
    ad::Var frozen_logits(ad::Tape& tape, const EmbeddedBatch& in) const;

    /// alpha = activation(logits) + 1.
    ad::Var alpha(ad::Tape& tape, const EmbeddedBatch& in);
    ad::Var alpha_from_logits(ad::Var logits) const;

    ad::Matrix predict_logits(const Batch& batch) const;
    ad::Matrix predict_alpha(const Batch& batch) const;

private:
    template <typename Bind>
    ad::Var forward(ad::Tape& tape, const EmbeddedBatch& in, Bind&& bind) const;
    void check_params() const;

    ArchitectureSpec spec_;
    ad::ModelParams params_;
};

} // namespace evid
