// Copyright 2026 The mavg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mavg/core.hpp"
#include "mavg/harness.hpp"
#include "mavg/theory.hpp"

namespace mavg {

/// Every setting a subcommand can take. Unset fields fall back to the
/// subcommand defaults; file values are overridden by flags via merge().
///
/// Key set (JSON config files use the same names):
///   objective, noise_sigma2, p, b, k, eta, mu, n, seed, threads,
///   L, M, sigma2, deltaf, delta,
///   sweep {p, b, k, eta, mu}, seeds, loss_threshold, mu_list,
///   s, s_total, p0, lambdas, refine, output, record_time, dump_vectors
struct Config {
  std::optional<std::string> objective;
  std::optional<double> noise_sigma2;
  std::optional<std::size_t> p, b, k, n;
  std::optional<double> eta, mu;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;

  std::optional<double> L, M, sigma2, deltaf, delta;

  std::optional<std::vector<std::size_t>> sweep_p, sweep_b, sweep_k;
  std::optional<std::vector<double>> sweep_eta, sweep_mu;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<double> loss_threshold;
  std::optional<std::vector<double>> mu_list;

  std::optional<std::size_t> s, s_total, p0;
  std::optional<std::vector<std::size_t>> lambdas;
  std::optional<bool> refine;

  std::optional<std::string> output;
  std::optional<bool> record_time, dump_vectors;

  /// Fields set in `over` replace ours.
  void merge(const Config& over);

  /// Hyperparameters with defaults P=4, B=16, K=8, eta=0.01, mu=0, N=100,
  /// seed=1.
  HyperParams hyper() const;
  ObjectiveOverrides objective_overrides() const;
};

/// ArgumentError on unknown keys or wrong value types.
Config parse_config(const std::string& json_text);
Config load_config(const std::filesystem::path& path);
/// Set fields only, in a stable key order.
std::string config_json(const Config& config);

}  // namespace mavg
