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

#include "evid/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "evid/errors.hpp"

namespace evid {

namespace {

constexpr const char* kMagic = "evid-checkpoint";
constexpr int kVersion = 1;

std::string format_double(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, std::size_t line) {
    double x = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw IoError("checkpoint line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    }
    return x;
}

void check_token(const std::string& s, const char* what) {
    if (s.empty() || s.find_first_of(" \t\r\n") != std::string::npos) {
        throw IoError(std::string("checkpoint: ") + what + " '" + s + "' must be nonempty without whitespace");
    }
}

} // namespace

const ad::Matrix& Checkpoint::tensor(const std::string& name) const {
    for (const auto& [n, m] : tensors) {
        if (n == name) {
            return m;
        }
    }
    throw IoError("checkpoint: no tensor named '" + name + "'");
}

const std::string& Checkpoint::meta_value(const std::string& key) const {
    auto it = meta.find(key);
    if (it == meta.end()) {
        throw IoError("checkpoint: missing meta key '" + key + "'");
    }
    return it->second;
}

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
    os << kMagic << ' ' << kVersion << '\n';
    for (const auto& [k, v] : ckpt.meta) {
        check_token(k, "meta key");
        if (v.find('\n') != std::string::npos) {
            throw IoError("checkpoint: meta value for '" + k + "' contains a newline");
        }
        os << "meta " << k << ' ' << v << '\n';
    }
    for (const auto& [name, items] : ckpt.lists) {
        check_token(name, "list name");
        os << "list " << name << ' ' << items.size() << '\n';
        for (const auto& item : items) {
            if (item.find('\n') != std::string::npos) {
                throw IoError("checkpoint: item of list '" + name + "' contains a newline");
            }
            os << item << '\n';
        }
    }
    for (const auto& [name, m] : ckpt.tensors) {
        check_token(name, "tensor name");
        os << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (j > 0) {
                    os << ' ';
                }
                os << format_double(m(i, j));
            }
            os << '\n';
        }
    }
    os << "end\n";
}

Checkpoint read_checkpoint(std::istream& is) {
    Checkpoint ckpt;
    std::string line;
    std::size_t lineno = 0;
    auto next = [&](const char* expecting) -> std::string& {
        if (!std::getline(is, line)) {
            throw IoError("checkpoint: unexpected end of file, expecting " + std::string(expecting));
        }
        ++lineno;
        return line;
    };
    {
        std::istringstream header(next("header"));
        std::string magic;
        int version = 0;
        header >> magic >> version;
        if (magic != kMagic) {
            throw IoError("checkpoint: not an evid checkpoint");
        }
        if (version != kVersion) {
            throw IoError("checkpoint: unsupported version " + std::to_string(version));
        }
    }
    while (true) {
        std::string& l = next("'end'");
        if (l == "end") {
            break;
        }
        std::istringstream ls(l);
        std::string kind;
        ls >> kind;
        if (kind == "meta") {
            std::string key;
            ls >> key;
            std::string value;
            std::getline(ls, value);
            if (!value.empty() && value.front() == ' ') {
                value.erase(0, 1);
            }
            ckpt.meta[key] = value;
        } else if (kind == "list") {
            std::string name;
            std::size_t count = 0;
            if (!(ls >> name >> count)) {
                throw IoError("checkpoint line " + std::to_string(lineno) + ": malformed list header");
            }
            auto& items = ckpt.lists[name];
            items.reserve(count);
            for (std::size_t i = 0; i < count; ++i) {
                items.push_back(next("list item"));
            }
        } else if (kind == "tensor") {
            std::string name;
            Eigen::Index rows = 0, cols = 0;
            if (!(ls >> name >> rows >> cols) || rows < 0 || cols < 0) {
                throw IoError("checkpoint line " + std::to_string(lineno) + ": malformed tensor header");
            }
            ad::Matrix m(rows, cols);
            for (Eigen::Index i = 0; i < rows; ++i) {
                std::istringstream row(next("tensor row"));
                std::string tok;
                Eigen::Index j = 0;
                while (row >> tok) {
                    if (j >= cols) {
                        throw IoError("checkpoint line " + std::to_string(lineno) + ": too many values");
                    }
                    m(i, j++) = parse_double(tok, lineno);
                }
                if (j != cols) {
                    throw IoError("checkpoint line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(cols) + " values, got " + std::to_string(j));
                }
            }
            ckpt.tensors.emplace_back(std::move(name), std::move(m));
        } else {
            throw IoError("checkpoint line " + std::to_string(lineno) + ": unknown record '" + kind + "'");
        }
    }
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot write checkpoint " + path.string());
    }
    write_checkpoint(os, ckpt);
    if (!os) {
        throw IoError("failed writing checkpoint " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open checkpoint " + path.string());
    }
    return read_checkpoint(is);
}

void store_classifier(Checkpoint& ckpt, const std::string& prefix, const Classifier& model) {
    const ArchitectureSpec& s = model.spec();
    auto put = [&](const char* key, const std::string& v) { ckpt.meta[prefix + "." + key] = v; };
    put("arch", to_string(s.kind));
    put("activation", to_string(s.activation));
    put("num_classes", std::to_string(s.num_classes));
    put("input_dim", std::to_string(s.input_dim));
    put("mlp_hidden", std::to_string(s.mlp_hidden));
    put("vocab_size", std::to_string(s.vocab_size));
    put("embed_dim", std::to_string(s.embed_dim));
    put("hidden_dim", std::to_string(s.hidden_dim));
    put("gru_layers", std::to_string(s.gru_layers));
    put("max_length", std::to_string(s.max_length));
    put("seed", std::to_string(model.params().seed));
    for (const auto& p : model.params()) {
        ckpt.tensors.emplace_back(prefix + "/" + p.name, p.value);
    }
}

bool has_classifier(const Checkpoint& ckpt, const std::string& prefix) {
    return ckpt.meta.count(prefix + ".arch") != 0;
}

Classifier restore_classifier(const Checkpoint& ckpt, const std::string& prefix) {
    auto get = [&](const char* key) { return ckpt.meta_value(prefix + "." + key); };
    auto get_int = [&](const char* key) {
        try {
            return std::stoi(get(key));
        } catch (const std::logic_error&) {
            throw IoError("checkpoint: meta '" + prefix + "." + key + "' is not an integer");
        }
    };
    ArchitectureSpec s;
    s.kind = parse_architecture(get("arch"));
    s.activation = parse_activation(get("activation"));
    s.num_classes = get_int("num_classes");
    s.input_dim = get_int("input_dim");
    s.mlp_hidden = get_int("mlp_hidden");
    s.vocab_size = get_int("vocab_size");
    s.embed_dim = get_int("embed_dim");
    s.hidden_dim = get_int("hidden_dim");
    s.gru_layers = get_int("gru_layers");
    s.max_length = get_int("max_length");
    ad::ModelParams params;
    params.seed = std::stoull(get("seed"));
    const std::string tag = prefix + "/";
    for (const auto& [name, m] : ckpt.tensors) {
        if (name.rfind(tag, 0) == 0) {
            params.add(name.substr(tag.size()), m);
        }
    }
    return Classifier(s, std::move(params));
}

} // namespace evid
