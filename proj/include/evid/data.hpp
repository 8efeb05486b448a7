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

// Corpus ingestion, tokenization and synthetic 2-D experiments.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evid/evidential.hpp"
#include "evid/example.hpp"

namespace evid {

struct Corpus {
    std::vector<LabeledExample> examples;
    /// Raw text per example (empty for feature corpora).
    std::vector<std::string> texts;
    std::vector<std::string> class_names;
    std::string source;

    std::size_t size() const { return examples.size(); }
    bool labeled() const;
};

/// JSONL line layout: {"text": string, "label": optional string} or, for
/// feature corpora, {"features": [numbers], "label": optional string}.
struct JsonlSchema {
    std::string text_field = "text";
    std::string label_field = "label";
    std::string features_field = "features";
    /// Known label set. Empty: discovered from the file and sorted.
    std::vector<std::string> class_names;
    /// Outlier corpora: labels are dropped even when present.
    bool ignore_labels = false;
};

Corpus read_jsonl_corpus(std::istream& is, const JsonlSchema& schema, std::string source = "<stream>");
Corpus load_jsonl_corpus(const std::filesystem::path& path, const JsonlSchema& schema);
void write_jsonl_corpus(std::ostream& os, const Corpus& corpus);

/// Lowercased tokens; runs of letters/digits form words and every other
/// non-space character is a token of its own.
std::vector<std::string> tokenize(std::string_view text);

class Vocab {
public:
    static constexpr const char* kPad = "<pad>";
    static constexpr const char* kUnk = "<unk>";

    Vocab();
    explicit Vocab(std::vector<std::string> tokens);

    /// Tokens with count >= min_freq, ordered by (count desc, token asc),
    /// at most `max_vocab` of them (0: unlimited), after <pad> and <unk>.
    static Vocab build(const std::vector<std::string>& texts, int min_freq, std::size_t max_vocab);

    int id(std::string_view token) const;
    const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    /// Token ids; the empty text encodes as a single <pad>.
    std::vector<int> encode(std::string_view text) const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

void encode_corpus(Corpus& corpus, const Vocab& vocab);
Vocab build_vocab_and_encode(Corpus& corpus, int min_freq, std::size_t max_vocab);

struct SyntheticSpec {
    std::vector<Eigen::Vector2d> means{Eigen::Vector2d(-2.0, 0.0), Eigen::Vector2d(2.0, 0.0)};
    std::vector<Eigen::Matrix2d> covariances{Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity()};
    int train_per_class = 500;
    int test_per_class = 250;
    int oe_count = 1000;
    int far_ood_count = 500;
    int probe_count = 100;
    double oe_inner = 6.0;
    double oe_outer = 8.0;
    double far_inner = 10.0;
    double far_outer = 12.0;
    /// Boundary probes lie on the segment between the first two means,
    /// within this distance of its midpoint.
    double boundary_halfwidth = 0.25;
    /// Core probes lie uniformly in a disc of this radius around each mean.
    double core_radius = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticData {
    Corpus id_train;
    Corpus id_test;
    Corpus oe;
    Corpus far_ood;
    Corpus boundary_probes;
    Corpus core_probes;
};

SyntheticData generate_synthetic_2d(const SyntheticSpec& spec);

struct GridSpec {
    double x_min = -12.0;
    double x_max = 12.0;
    double y_min = -12.0;
    double y_max = 12.0;
    int resolution = 101;
};

struct GridRow {
    double x = 0.0;
    double y = 0.0;
    double vacuity = 0.0;
    double dissonance = 0.0;
    double entropy = 0.0;
};

/// Reports over a resolution x resolution lattice, row-major in y (x varies
/// fastest).
std::vector<GridRow> uncertainty_grid(const Classifier& model, const GridSpec& grid);
/// Header: x,y,vacuity,dissonance,entropy
void write_grid_csv(std::ostream& os, const std::vector<GridRow>& rows);
std::vector<GridRow> read_grid_csv(std::istream& is);

} // namespace evid
