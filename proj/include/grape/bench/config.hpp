/* Copyright 2026 The Newton-GRAPE Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "grape/grape.hpp"
#include "grape/optim/optimizer.hpp"
#include "grape/spin_model.hpp"

namespace grape::bench {

// Configuration problems (parse errors, unknown keys, bad values). The
// message names the offending field.
class config_error : public invalid_input {
 public:
  using invalid_input::invalid_input;
};

struct coupling_entry {
  std::size_t first = 0;
  std::size_t second = 0;
  double hz = 0.0;
};

struct penalty_entry {
  penalty_kind kind = penalty_kind::norm_square;
  double weight = 0.0;
  double upper_hz = 0.0;  // spillout
  double lower_hz = 0.0;  // spillout
  int diff_order = 1;     // derivative_norm_square
};

// Amplitudes are optimised in units of the nominal power: the control
// operators are scaled by 2 pi P_nom, so c = 1 is P_nom Hz.
struct bench_config {
  std::string name;

  std::vector<std::string> isotopes;
  double magnet_field = 0.0;
  std::vector<double> offsets_ppm;
  std::vector<coupling_entry> couplings;

  spin::state_spec initial;
  spin::state_spec target;

  std::vector<spin::control_channel> channels;
  std::size_t slices = 0;
  double duration = 0.0;
  double nominal_power_hz = 0.0;
  double guess_fraction = 0.05;
  std::vector<double> ensemble_scalings{1.0};

  std::vector<penalty_entry> penalties;

  optim::optimizer_settings optimizer;
  std::optional<double> target_fidelity;

  std::filesystem::path output_dir = "grape_out";
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double fidelity_norm = 1.0;  // J_max used for the normalised infidelity

  double dt() const { return duration / static_cast<double>(slices); }
  // Throws config_error.
  void validate() const;
};

std::vector<std::string> preset_names();
// Throws config_error for unknown names.
nlohmann::json preset_json(std::string_view name);

// Strict conversion: unknown keys and wrongly typed values are rejected.
bench_config parse_config(const nlohmann::json &doc);

// Reads `path` (if given) as a JSON merge patch on top of `preset` (if
// given). At least one of the two is required.
bench_config load_config(const std::optional<std::filesystem::path> &path,
                         const std::optional<std::string> &preset);

spin::spin_system build_spin_system(const bench_config &config);
control_problem build_problem(const bench_config &config);

// Uniform in +-guess_fraction of the nominal power (in nominal units),
// deterministic for a given seed.
vec initial_guess(const bench_config &config);

}  // namespace grape::bench
