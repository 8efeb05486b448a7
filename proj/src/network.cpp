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

#include "evid/network.hpp"

#include <algorithm>
#include <cmath>

#include "evid/errors.hpp"
#include "evid/random.hpp"

namespace evid {

std::string to_string(Architecture a) {
    return a == Architecture::mlp2d ? "mlp2d" : "gru";
}

std::string to_string(EvidenceActivation a) {
    return a == EvidenceActivation::softplus ? "softplus" : "relu";
}

Architecture parse_architecture(std::string_view s) {
    if (s == "mlp2d") {
        return Architecture::mlp2d;
    }
    if (s == "gru") {
        return Architecture::gru;
    }
    throw ConfigError("unknown architecture '" + std::string(s) + "' (expected mlp2d or gru)");
}

EvidenceActivation parse_activation(std::string_view s) {
    if (s == "softplus") {
        return EvidenceActivation::softplus;
    }
    if (s == "relu") {
        return EvidenceActivation::relu;
    }
    throw ConfigError("unknown evidence activation '" + std::string(s) + "' (expected softplus or relu)");
}

void ArchitectureSpec::validate() const {
    if (num_classes < 2) {
        throw ConfigError("architecture: num_classes must be >= 2");
    }
    if (kind == Architecture::mlp2d) {
        if (input_dim < 1 || mlp_hidden < 1) {
            throw ConfigError("architecture: mlp2d needs positive input_dim and mlp_hidden");
        }
    } else {
        if (vocab_size < 2 || embed_dim < 1 || hidden_dim < 1 || gru_layers < 1 || max_length < 1) {
            throw ConfigError("architecture: gru needs vocab_size >= 2 and positive embed_dim, hidden_dim, "
                              "gru_layers, max_length");
        }
    }
}

Batch make_batch(std::span<const LabeledExample> examples, std::span<const std::size_t> indices,
                 const ArchitectureSpec& spec) {
    Batch b;
    b.labels.reserve(indices.size());
    if (spec.kind == Architecture::mlp2d) {
        b.features.resize(spec.input_dim, static_cast<Eigen::Index>(indices.size()));
    } else {
        b.tokens.reserve(indices.size());
    }
    for (std::size_t c = 0; c < indices.size(); ++c) {
        const LabeledExample& ex = examples[indices[c]];
        b.labels.push_back(ex.label.value_or(-1));
        if (spec.kind == Architecture::mlp2d) {
            if (ex.features.size() != spec.input_dim) {
                throw ShapeError("make_batch: example has " + std::to_string(ex.features.size()) +
                                 " features, model expects " + std::to_string(spec.input_dim));
            }
            b.features.col(static_cast<Eigen::Index>(c)) = ex.features;
        } else {
            const auto len = std::min<std::size_t>(ex.tokens.size(), static_cast<std::size_t>(spec.max_length));
            std::vector<int> seq(ex.tokens.begin(), ex.tokens.begin() + static_cast<std::ptrdiff_t>(len));
            if (seq.empty()) {
                seq.push_back(kPadId);
            }
            b.tokens.push_back(std::move(seq));
        }
    }
    return b;
}

Batch make_batch(std::span<const LabeledExample> examples, const ArchitectureSpec& spec) {
    std::vector<std::size_t> all(examples.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    return make_batch(examples, all, spec);
}

ad::Var gru_cell_forward(ad::Var x, ad::Var h_prev, const GruWeights& w) {
    using namespace ad;
    Var z = sigmoid(add_bias(matmul(w.w_z, x) + matmul(w.u_z, h_prev), w.b_z));
    Var r = sigmoid(add_bias(matmul(w.w_r, x) + matmul(w.u_r, h_prev), w.b_r));
    Var n = ad::tanh(add_bias(matmul(w.w_n, x) + matmul(w.u_n, cwise_product(r, h_prev)), w.b_n));
    return cwise_product(z, h_prev) + cwise_product(one_minus(z), n);
}

namespace {

void add_uniform(ad::ModelParams& params, Rng& rng, std::string name, Eigen::Index rows, Eigen::Index cols,
                 double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    ad::Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            m(i, j) = dist(rng);
        }
    }
    params.add(std::move(name), std::move(m));
}

const char* const kGates[] = {"z", "r", "n"};

std::string gru_name(int layer, const char* kind, const char* gate) {
    return "gru" + std::to_string(layer) + "." + kind + "_" + gate;
}

} // namespace

Classifier::Classifier(ArchitectureSpec spec, std::uint64_t seed) : spec_(spec) {
    spec_.validate();
    params_.seed = seed;
    Rng rng = make_rng(seed, Stream::init);
    const int k = spec_.num_classes;
    if (spec_.kind == Architecture::mlp2d) {
        const int h = spec_.mlp_hidden;
        add_uniform(params_, rng, "fc1.w", h, spec_.input_dim, spec_.input_dim);
        add_uniform(params_, rng, "fc1.b", h, 1, spec_.input_dim);
        add_uniform(params_, rng, "fc2.w", h, h, h);
        add_uniform(params_, rng, "fc2.b", h, 1, h);
        add_uniform(params_, rng, "head.w", k, h, h);
        add_uniform(params_, rng, "head.b", k, 1, h);
    } else {
        const int d = spec_.hidden_dim;
        add_uniform(params_, rng, "embedding", spec_.embed_dim, spec_.vocab_size, 1.0);
        for (int l = 0; l < spec_.gru_layers; ++l) {
            const int in = l == 0 ? spec_.embed_dim : d;
            for (const char* g : kGates) {
                add_uniform(params_, rng, gru_name(l, "w", g), d, in, in);
                add_uniform(params_, rng, gru_name(l, "u", g), d, d, d);
                add_uniform(params_, rng, gru_name(l, "b", g), d, 1, d);
            }
        }
        add_uniform(params_, rng, "head.w", k, d, d);
        add_uniform(params_, rng, "head.b", k, 1, d);
    }
}

Classifier::Classifier(ArchitectureSpec spec, ad::ModelParams params) : spec_(spec), params_(std::move(params)) {
    spec_.validate();
    check_params();
}

void Classifier::check_params() const {
    // Rebuild the reference layout and compare names and shapes.
    const Classifier reference(spec_, 0);
    if (reference.params_.size() != params_.size()) {
        throw ShapeError("Classifier: expected " + std::to_string(reference.params_.size()) + " parameters, got " +
                         std::to_string(params_.size()));
    }
    for (const auto& ref : reference.params_) {
        if (!params_.contains(ref.name)) {
            throw ShapeError("Classifier: missing parameter '" + ref.name + "'");
        }
        const auto& p = params_.at(ref.name);
        if (p.value.rows() != ref.value.rows() || p.value.cols() != ref.value.cols()) {
            throw ShapeError("Classifier: parameter '" + ref.name + "' has shape " + std::to_string(p.value.rows()) +
                             "x" + std::to_string(p.value.cols()) + ", expected " +
                             std::to_string(ref.value.rows()) + "x" + std::to_string(ref.value.cols()));
        }
    }
}

namespace {

ad::Matrix sequence_mask(const Batch& batch, std::size_t& steps) {
    steps = 0;
    for (const auto& s : batch.tokens) {
        steps = std::max(steps, s.size());
    }
    ad::Matrix mask = ad::Matrix::Zero(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(batch.size()));
    for (std::size_t b = 0; b < batch.tokens.size(); ++b) {
        mask.col(static_cast<Eigen::Index>(b)).head(static_cast<Eigen::Index>(batch.tokens[b].size())).setOnes();
    }
    return mask;
}

std::vector<int> step_ids(const Batch& batch, std::size_t t) {
    std::vector<int> ids(batch.tokens.size(), kPadId);
    for (std::size_t b = 0; b < batch.tokens.size(); ++b) {
        if (t < batch.tokens[b].size()) {
            ids[b] = batch.tokens[b][t];
        }
    }
    return ids;
}

} // namespace

EmbeddingValues Classifier::embed_values(const Batch& batch) const {
    EmbeddingValues out;
    if (spec_.kind == Architecture::mlp2d) {
        out.steps.push_back(batch.features);
        out.mask = ad::Matrix::Ones(1, static_cast<Eigen::Index>(batch.size()));
        return out;
    }
    std::size_t steps = 0;
    out.mask = sequence_mask(batch, steps);
    const ad::Matrix& table = params_.at("embedding").value;
    for (std::size_t t = 0; t < steps; ++t) {
        const auto ids = step_ids(batch, t);
        ad::Matrix m(table.rows(), static_cast<Eigen::Index>(ids.size()));
        for (std::size_t b = 0; b < ids.size(); ++b) {
            if (ids[b] < 0 || ids[b] >= table.cols()) {
                throw ShapeError("embedding: token id " + std::to_string(ids[b]) + " outside vocabulary of " +
                                 std::to_string(table.cols()));
            }
            m.col(static_cast<Eigen::Index>(b)) = table.col(ids[b]);
        }
        out.steps.push_back(std::move(m));
    }
    return out;
}

EmbeddedBatch Classifier::embed(ad::Tape& tape, const Batch& batch) {
    if (spec_.kind == Architecture::mlp2d) {
        return bind(tape, embed_values(batch), false);
    }
    EmbeddedBatch out;
    std::size_t steps = 0;
    out.mask = sequence_mask(batch, steps);
    ad::Var table = tape.parameter(params_.at("embedding"));
    for (std::size_t t = 0; t < steps; ++t) {
        const auto ids = step_ids(batch, t);
        out.steps.push_back(ad::gather_columns(table, ids));
    }
    return out;
}

EmbeddedBatch Classifier::bind(ad::Tape& tape, const EmbeddingValues& values, bool differentiable) {
    EmbeddedBatch out;
    out.mask = values.mask;
    for (const auto& s : values.steps) {
        out.steps.push_back(differentiable ? tape.input(s) : tape.constant(s));
    }
    return out;
}

template <typename Bind>
ad::Var Classifier::forward(ad::Tape& tape, const EmbeddedBatch& in, Bind&& bind) const {
    using namespace ad;
    if (in.steps.empty()) {
        throw ShapeError("classifier input: empty batch");
    }
    Var pooled;
    if (spec_.kind == Architecture::mlp2d) {
        if (in.steps.size() != 1 || in.steps[0].rows() != spec_.input_dim) {
            throw ShapeError("classifier input: expected one " + std::to_string(spec_.input_dim) +
                             "-row step for mlp2d");
        }
        Var h1 = ad::tanh(add_bias(matmul(bind("fc1.w"), in.steps[0]), bind("fc1.b")));
        pooled = ad::tanh(add_bias(matmul(bind("fc2.w"), h1), bind("fc2.b")));
    } else {
        std::vector<Var> layer_in = in.steps;
        const Eigen::Index batch = in.steps[0].cols();
        for (int l = 0; l < spec_.gru_layers; ++l) {
            GruWeights w{bind(gru_name(l, "w", "z")), bind(gru_name(l, "u", "z")), bind(gru_name(l, "b", "z")),
                         bind(gru_name(l, "w", "r")), bind(gru_name(l, "u", "r")), bind(gru_name(l, "b", "r")),
                         bind(gru_name(l, "w", "n")), bind(gru_name(l, "u", "n")), bind(gru_name(l, "b", "n"))};
            Var h = tape.constant(Matrix::Zero(spec_.hidden_dim, batch));
            std::vector<Var> layer_out;
            layer_out.reserve(layer_in.size());
            for (const Var& x : layer_in) {
                if (x.rows() != w.w_z.cols()) {
                    throw ShapeError("gru layer " + std::to_string(l) + ": step has " + std::to_string(x.rows()) +
                                     " rows, expected " + std::to_string(w.w_z.cols()));
                }
                h = gru_cell_forward(x, h, w);
                layer_out.push_back(h);
            }
            layer_in = std::move(layer_out);
        }
        pooled = masked_mean_pool(layer_in, in.mask);
    }
    return add_bias(matmul(bind("head.w"), pooled), bind("head.b"));
}

ad::Var Classifier::logits(ad::Tape& tape, const EmbeddedBatch& in) {
    return forward(tape, in, [&](const std::string& name) { return tape.parameter(params_.at(name)); });
}

ad::Var Classifier::frozen_logits(ad::Tape& tape, const EmbeddedBatch& in) const {
    return forward(tape, in, [&](const std::string& name) { return tape.constant(params_.at(name).value); });
}

ad::Var Classifier::alpha_from_logits(ad::Var logits) const {
    ad::Var evidence = spec_.activation == EvidenceActivation::softplus ? ad::softplus(logits) : ad::relu(logits);
    return ad::add_scalar(evidence, 1.0);
}

ad::Var Classifier::alpha(ad::Tape& tape, const EmbeddedBatch& in) {
    return alpha_from_logits(logits(tape, in));
}

ad::Matrix Classifier::predict_logits(const Batch& batch) const {
    ad::Tape tape;
    return frozen_logits(tape, bind(tape, embed_values(batch), false)).value();
}

ad::Matrix Classifier::predict_alpha(const Batch& batch) const {
    ad::Tape tape;
    return alpha_from_logits(frozen_logits(tape, bind(tape, embed_values(batch), false))).value();
}

} // namespace evid
