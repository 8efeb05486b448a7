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

// Versioned text container of named tensors.
//
//   evid-checkpoint 1
//   meta <key> <value to end of line>
//   list <name> <count>
//   <one item per line>
//   tensor <name> <rows> <cols>
//   <one line per row, space-separated shortest round-trip decimals>
//   end
//
// Sections appear in the order meta, list, tensor; within a section entries
// are written in key order (meta, lists) or insertion order (tensors).
// Values round-trip bit-exactly.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "evid/autodiff.hpp"
#include "evid/network.hpp"

namespace evid {

struct Checkpoint {
    std::map<std::string, std::string> meta;
    std::map<std::string, std::vector<std::string>> lists;
    std::vector<std::pair<std::string, ad::Matrix>> tensors;

    const ad::Matrix& tensor(const std::string& name) const;
    const std::string& meta_value(const std::string& key) const;
};

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& is);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Stores architecture under meta "<prefix>.*" and tensors as "<prefix>/<name>".
void store_classifier(Checkpoint& ckpt, const std::string& prefix, const Classifier& model);
Classifier restore_classifier(const Checkpoint& ckpt, const std::string& prefix);
bool has_classifier(const Checkpoint& ckpt, const std::string& prefix);

} // namespace evid
