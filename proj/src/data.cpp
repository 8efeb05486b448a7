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

#include "evid/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evid/errors.hpp"
#include "evid/format.hpp"
#include "evid/random.hpp"

namespace evid {

bool Corpus::labeled() const {
    return !examples.empty() &&
           std::all_of(examples.begin(), examples.end(), [](const LabeledExample& e) { return e.label.has_value(); });
}

Corpus read_jsonl_corpus(std::istream& is, const JsonlSchema& schema, std::string source) {
    struct Raw {
        std::string text;
        Eigen::VectorXd features;
        std::optional<std::string> label;
        std::size_t line;
    };
    std::vector<Raw> raw;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
            continue;
        }
        const std::string where = source + ":" + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw IoError(where + ": malformed JSON (" + e.what() + ")");
        }
        if (!j.is_object()) {
            throw IoError(where + ": expected a JSON object");
        }
        Raw r;
        r.line = lineno;
        try {
            if (j.contains(schema.text_field)) {
                r.text = j.at(schema.text_field).get<std::string>();
            }
            if (j.contains(schema.features_field)) {
                const auto f = j.at(schema.features_field).get<std::vector<double>>();
                r.features = Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
            } else if (!j.contains(schema.text_field)) {
                throw IoError(where + ": missing '" + schema.text_field + "' or '" + schema.features_field + "'");
            }
            if (!schema.ignore_labels && j.contains(schema.label_field) && !j.at(schema.label_field).is_null()) {
                const auto& l = j.at(schema.label_field);
                r.label = l.is_string() ? l.get<std::string>() : l.dump();
            }
        } catch (const nlohmann::json::type_error& e) {
            throw IoError(where + ": wrong field type (" + e.what() + ")");
        }
        raw.push_back(std::move(r));
    }
    if (raw.empty()) {
        throw IoError(source + ": corpus is empty");
    }

    Corpus corpus;
    corpus.source = std::move(source);
    corpus.class_names = schema.class_names;
    if (corpus.class_names.empty()) {
        std::set<std::string> seen;
        for (const auto& r : raw) {
            if (r.label) {
                seen.insert(*r.label);
            }
        }
        corpus.class_names.assign(seen.begin(), seen.end());
    }
    std::map<std::string, int> label_ids;
    for (std::size_t i = 0; i < corpus.class_names.size(); ++i) {
        label_ids.emplace(corpus.class_names[i], static_cast<int>(i));
    }
    for (auto& r : raw) {
        LabeledExample ex;
        ex.features = std::move(r.features);
        if (r.label) {
            auto it = label_ids.find(*r.label);
            if (it == label_ids.end()) {
                throw IoError(corpus.source + ":" + std::to_string(r.line) + ": unknown label '" + *r.label + "'");
            }
            ex.label = it->second;
        }
        corpus.examples.push_back(std::move(ex));
        corpus.texts.push_back(std::move(r.text));
    }
    return corpus;
}

Corpus load_jsonl_corpus(const std::filesystem::path& path, const JsonlSchema& schema) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open corpus " + path.string());
    }
    return read_jsonl_corpus(is, schema, path.string());
}

void write_jsonl_corpus(std::ostream& os, const Corpus& corpus) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const LabeledExample& ex = corpus.examples[i];
        nlohmann::ordered_json j;
        if (i < corpus.texts.size() && (!corpus.texts[i].empty() || ex.features.size() == 0)) {
            j["text"] = corpus.texts[i];
        }
        if (ex.features.size() > 0) {
            j["features"] = std::vector<double>(ex.features.data(), ex.features.data() + ex.features.size());
        }
        if (ex.label) {
            j["label"] = corpus.class_names.at(static_cast<std::size_t>(*ex.label));
        }
        os << j.dump() << '\n';
    }
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) {
            out.push_back(std::move(word));
            word.clear();
        }
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else if (std::isspace(c)) {
            flush();
        } else {
            flush();
            out.emplace_back(1, ch);
        }
    }
    flush();
    return out;
}

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(std::vector<std::string> tokens) {
    if (tokens.size() < 2 || tokens[0] != kPad || tokens[1] != kUnk) {
        tokens.insert(tokens.begin(), {kPad, kUnk});
    }
    tokens_ = std::move(tokens);
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
            throw DomainError("Vocab: duplicate token '" + tokens_[i] + "'");
        }
    }
}

Vocab Vocab::build(const std::vector<std::string>& texts, int min_freq, std::size_t max_vocab) {
    std::map<std::string, long> counts;
    for (const auto& t : texts) {
        for (auto& tok : tokenize(t)) {
            ++counts[std::move(tok)];
        }
    }
    std::vector<std::pair<std::string, long>> kept;
    for (auto& [tok, n] : counts) {
        if (n >= min_freq && tok != kPad && tok != kUnk) {
            kept.emplace_back(tok, n);
        }
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (max_vocab > 0 && kept.size() > max_vocab) {
        kept.resize(max_vocab);
    }
    std::vector<std::string> tokens{kPad, kUnk};
    for (auto& [tok, n] : kept) {
        tokens.push_back(std::move(tok));
    }
    return Vocab(std::move(tokens));
}

int Vocab::id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnkId : it->second;
}

std::vector<int> Vocab::encode(std::string_view text) const {
    std::vector<int> ids;
    for (const auto& tok : tokenize(text)) {
        ids.push_back(id(tok));
    }
    if (ids.empty()) {
        ids.push_back(kPadId);
    }
    return ids;
}

void encode_corpus(Corpus& corpus, const Vocab& vocab) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        corpus.examples[i].tokens = vocab.encode(corpus.texts.at(i));
    }
}

Vocab build_vocab_and_encode(Corpus& corpus, int min_freq, std::size_t max_vocab) {
    if (corpus.size() == 0) {
        throw DomainError("build_vocab_and_encode: empty corpus");
    }
    Vocab vocab = Vocab::build(corpus.texts, min_freq, max_vocab);
    encode_corpus(corpus, vocab);
    return vocab;
}

// Synthetic data

void SyntheticSpec::validate() const {
    if (means.size() < 2 || means.size() != covariances.size()) {
        throw ConfigError("synthetic: need >= 2 classes with one covariance each");
    }
    if (train_per_class < 1 || test_per_class < 1 || oe_count < 1 || far_ood_count < 1 || probe_count < 1) {
        throw ConfigError("synthetic: counts must be positive");
    }
    if (!(0.0 <= oe_inner && oe_inner < oe_outer && oe_outer <= far_inner && far_inner < far_outer)) {
        throw ConfigError("synthetic: need 0 <= oe_inner < oe_outer <= far_inner < far_outer");
    }
}

namespace {

Corpus feature_corpus(std::string source, std::vector<std::string> class_names) {
    Corpus c;
    c.source = std::move(source);
    c.class_names = std::move(class_names);
    return c;
}

void push_point(Corpus& c, const Eigen::Vector2d& p, std::optional<int> label) {
    c.examples.push_back(LabeledExample{{}, p, label});
    c.texts.emplace_back();
}

Eigen::Vector2d annulus_point(Rng& rng, const Eigen::Vector2d& center, double inner, double outer) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = std::sqrt(inner * inner + u(rng) * (outer * outer - inner * inner));
    const double theta = 2.0 * std::numbers::pi * u(rng);
    return center + r * Eigen::Vector2d(std::cos(theta), std::sin(theta));
}

} // namespace

SyntheticData generate_synthetic_2d(const SyntheticSpec& spec) {
    spec.validate();
    std::vector<std::string> names;
    for (std::size_t k = 0; k < spec.means.size(); ++k) {
        names.push_back("class" + std::to_string(k));
    }
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    for (const auto& m : spec.means) {
        center += m;
    }
    center /= static_cast<double>(spec.means.size());

    SyntheticData d{feature_corpus("synthetic:id_train", names), feature_corpus("synthetic:id_test", names),
                    feature_corpus("synthetic:oe", names),       feature_corpus("synthetic:far_ood", names),
                    feature_corpus("synthetic:boundary", names), feature_corpus("synthetic:core", names)};
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    auto gaussian = [&](Corpus& out, int per_class, std::uint64_t stream) {
        Rng rng = make_rng(spec.seed, Stream::synthetic, {stream});
        for (std::size_t k = 0; k < spec.means.size(); ++k) {
            const Eigen::Matrix2d l = spec.covariances[k].llt().matrixL();
            for (int i = 0; i < per_class; ++i) {
                const Eigen::Vector2d z(normal(rng), normal(rng));
                push_point(out, spec.means[k] + l * z, static_cast<int>(k));
            }
        }
    };
    gaussian(d.id_train, spec.train_per_class, 0);
    gaussian(d.id_test, spec.test_per_class, 1);

    Rng oe_rng = make_rng(spec.seed, Stream::synthetic, {2});
    for (int i = 0; i < spec.oe_count; ++i) {
        push_point(d.oe, annulus_point(oe_rng, center, spec.oe_inner, spec.oe_outer), std::nullopt);
    }
    Rng far_rng = make_rng(spec.seed, Stream::synthetic, {3});
    for (int i = 0; i < spec.far_ood_count; ++i) {
        push_point(d.far_ood, annulus_point(far_rng, center, spec.far_inner, spec.far_outer), std::nullopt);
    }

    Rng probe_rng = make_rng(spec.seed, Stream::synthetic, {4});
    const Eigen::Vector2d a = spec.means[0], b = spec.means[1];
    const Eigen::Vector2d mid = 0.5 * (a + b);
    const Eigen::Vector2d dir = (b - a).normalized();
    for (int i = 0; i < spec.probe_count; ++i) {
        const double s = (2.0 * u(probe_rng) - 1.0) * spec.boundary_halfwidth;
        push_point(d.boundary_probes, mid + s * dir, std::nullopt);
    }
    for (std::size_t k = 0; k < spec.means.size(); ++k) {
        for (int i = 0; i < spec.probe_count; ++i) {
            const double r = spec.core_radius * std::sqrt(u(probe_rng));
            const double theta = 2.0 * std::numbers::pi * u(probe_rng);
            push_point(d.core_probes, spec.means[k] + r * Eigen::Vector2d(std::cos(theta), std::sin(theta)),
                       static_cast<int>(k));
        }
    }
    return d;
}

std::vector<GridRow> uncertainty_grid(const Classifier& model, const GridSpec& grid) {
    if (model.spec().kind != Architecture::mlp2d || model.spec().input_dim != 2) {
        throw ConfigError("uncertainty_grid: model must take 2-D feature inputs");
    }
    if (grid.resolution < 2) {
        throw ConfigError("uncertainty_grid: resolution must be >= 2");
    }
    const int n = grid.resolution;
    auto coord = [n](double lo, double hi, int i) { return lo + (hi - lo) * static_cast<double>(i) / (n - 1); };
    Batch batch;
    batch.features.resize(2, static_cast<Eigen::Index>(n) * n);
    batch.labels.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), -1);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            batch.features.col(static_cast<Eigen::Index>(iy) * n + ix) =
                Eigen::Vector2d(coord(grid.x_min, grid.x_max, ix), coord(grid.y_min, grid.y_max, iy));
        }
    }
    const auto reports = predict_reports(model, batch);
    std::vector<GridRow> rows;
    rows.reserve(reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto c = batch.features.col(static_cast<Eigen::Index>(i));
        rows.push_back({c(0), c(1), reports[i].vacuity, reports[i].dissonance, reports[i].entropy});
    }
    return rows;
}

void write_grid_csv(std::ostream& os, const std::vector<GridRow>& rows) {
    os << "x,y,vacuity,dissonance,entropy\n";
    for (const auto& r : rows) {
        os << format_number(r.x) << ',' << format_number(r.y) << ',' << format_number(r.vacuity) << ','
           << format_number(r.dissonance) << ',' << format_number(r.entropy) << '\n';
    }
}

std::vector<GridRow> read_grid_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "x,y,vacuity,dissonance,entropy") {
        throw IoError("grid csv: missing or unexpected header");
    }
    std::vector<GridRow> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        double v[5];
        std::size_t pos = 0;
        for (int k = 0; k < 5; ++k) {
            const std::size_t end = k < 4 ? line.find(',', pos) : line.size();
            if (end == std::string::npos) {
                throw IoError("grid csv line " + std::to_string(lineno) + ": expected 5 fields");
            }
            auto res = std::from_chars(line.data() + pos, line.data() + end, v[k]);
            if (res.ec != std::errc() || res.ptr != line.data() + end) {
                throw IoError("grid csv line " + std::to_string(lineno) + ": bad number");
            }
            pos = end + 1;
        }
        rows.push_back({v[0], v[1], v[2], v[3], v[4]});
    }
    return rows;
}

} // namespace evid
