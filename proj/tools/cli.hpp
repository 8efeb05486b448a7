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

// Command-line front end. Every command is also callable in-process through
// run_cli, which is what the integration tests use.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace evid::cli {

enum ExitCode : int {
    kOk = 0,
    kValidationError = 2,
    kRuntimeError = 3,
    kCheckFailure = 4,
};

struct RunConfig {
    std::string command;
    std::uint64_t seed = 0;

    std::string preset;
    std::string id_train;
    std::string id_test;
    std::string oe;
    std::vector<std::string> ood;
    std::string checkpoint;
    std::string out = ".";

    // Unset values fall back to the recipe defaults of the chosen
    // architecture (see resolve_training_config).
    std::optional<double> beta_in;
    std::optional<double> beta_oe;
    std::optional<double> beta_ad;
    std::optional<double> delta_off;
    std::optional<double> lr;
    std::optional<int> batch_size;
    std::optional<int> epochs;
    std::string arch = "mlp2d";
    std::string activation = "softplus";
    int mlp_hidden = 32;
    int embed_dim = 64;
    int hidden_dim = 64;
    int max_length = 64;
    int min_freq = 1;
    int max_vocab = 0;
    bool fused = false;
    bool no_baseline = false;
    bool log_wall_time = false;

    std::string score = "all";
    std::string sweep_delta_off;

    int grid_resolution = 101;
    double grid_min = -12.0;
    double grid_max = 12.0;

    double perturb_loss = 0.0;
    int selfcheck_draws = 200000;
};

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace evid::cli
