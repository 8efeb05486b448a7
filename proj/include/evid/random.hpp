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

// Seed derivation. Every random stream in the library is a std::mt19937_64
// seeded with derive_seed(root, tag, i...), so streams are independent of the
// order in which they are created.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace evid {

using Rng = std::mt19937_64;

/// Stream tags; values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
    init = 1,
    shuffle = 2,
    outlier_sampling = 3,
    off_manifold = 4,
    synthetic = 5,
    subsample = 6,
    selfcheck = 7,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, Stream tag, std::initializer_list<std::uint64_t> indices = {}) {
    std::uint64_t s = splitmix64(root ^ splitmix64(static_cast<std::uint64_t>(tag)));
    for (std::uint64_t i : indices) {
        s = splitmix64(s ^ splitmix64(i + 0x632be59bd9b4e019ULL));
    }
    return s;
}

inline Rng make_rng(std::uint64_t root, Stream tag, std::initializer_list<std::uint64_t> indices = {}) {
    return Rng(derive_seed(root, tag, indices));
}

} // namespace evid
