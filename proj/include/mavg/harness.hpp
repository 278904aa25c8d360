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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mavg/core.hpp"
#include "mavg/objectives.hpp"
#include "mavg/theory.hpp"

namespace mavg {

/// Value lists for the swept hyperparameters; an empty list keeps the base
/// value.
struct SweepAxes {
  std::vector<std::size_t> P;
  std::vector<std::size_t> B;
  std::vector<std::size_t> K;
  std::vector<double> eta;
  std::vector<double> mu;
};

struct SweepSpec {
  std::string objective = "logcosh";
  ObjectiveOverrides overrides;
  HyperParams base;
  SweepAxes axes;
  std::vector<std::uint64_t> seeds;
  std::optional<double> loss_threshold;
  std::filesystem::path output_dir;  // empty: nothing written
  std::size_t threads = 1;

  void validate() const;
  /// Cartesian product in P, B, K, eta, mu nesting order.
  std::vector<HyperParams> tuples() const;
};

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for one value
};

Summary summarize(std::vector<double> values);

/// Median with +inf entries treated as larger than every finite value.
double median(std::vector<double> values);

struct CellResult {
  HyperParams hyper;  // master_seed set to the cell's seed
  bool diverged = false;
  std::string error;
  double final_f = 0.0;      // F(w_N)
  double avg_grad_sq = 0.0;  // (1/N) sum |grad F(w_n)|^2
  double iters_to_threshold = std::numeric_limits<double>::infinity();
};

struct AggregateRow {
  HyperParams hyper;  // master_seed is meaningless here
  std::size_t seed_count = 0;
  std::size_t diverged = 0;
  Summary final_f;
  Summary avg_grad_sq;
  /// NaN when no threshold was set, +inf when the median run never got there.
  double median_iters_to_threshold = std::numeric_limits<double>::quiet_NaN();
  double bound_total = 0.0;
  bool feasible = false;
};

struct AggregateResult {
  std::vector<AggregateRow> rows;
  std::vector<CellResult> cells;  // tuple-major, seeds in declared order
};

/// Bound inputs from an objective's certified constants:
/// delta_F = F(w_1) - F*, delta left to delta_max.
BoundInputs bound_inputs_for(const Objective& objective);

/// Runs every (tuple, seed) cell, attaches the bound per tuple and, when
/// output_dir is set, writes manifest.json, cells/*.csv and aggregate.csv.
AggregateResult run_sweep(const SweepSpec& spec);

inline constexpr const char* kAggregateHeader =
    "P,B,K,eta,mu,N,seed_count,mean_final_f,mean_avg_grad_sq,bound_total,"
    "feasible,median_iters_to_threshold";

std::string aggregate_csv(const AggregateResult& result);
std::string cell_trace_name(const HyperParams& hyper);
std::string manifest_json(const SweepSpec& spec);

struct BoundCheck {
  double empirical_mean = 0.0;
  double bound_total = 0.0;
  bool satisfied = false;
  FeasibilityReport feasibility;
  std::vector<double> per_seed;  // (1/N) sum |grad F(w_n)|^2 per seed
};

/// Seed-averaged (1/N) sum |grad F(w_n)|^2 against the bound.
/// InfeasibleError when the tuple violates the step-size conditions.
BoundCheck empirical_vs_bound(const Objective& objective,
                              const HyperParams& hyper,
                              const std::vector<std::uint64_t>& seeds,
                              std::size_t threads = 1);

struct RaceRow {
  double mu = 0.0;
  std::vector<double> hits;  // first n with F(w_n) <= threshold, +inf if none
  std::size_t finished = 0;
  double median_hit = 0.0;
  double ratio_vs_zero = 1.0;  // median_hit / median_hit(mu = 0)
};

struct RaceReport {
  double threshold = 0.0;
  std::vector<RaceRow> rows;  // mu = 0 first
  /// Seed-mean F(w_n) per mu, rows aligned with `rows`.
  std::vector<std::vector<double>> mean_curves;
};

/// Iterations-to-threshold for each momentum, all seeds. mu = 0 is always
/// run as the baseline.
RaceReport race(const Objective& objective, const HyperParams& base,
                const std::vector<std::uint64_t>& seeds, double threshold,
                const std::vector<double>& mu_list, std::size_t threads = 1);

std::string race_csv(const RaceReport& report);
std::string race_curves_csv(const RaceReport& report);

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception (by index) is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn);

}  // namespace mavg

#include "mavg/detail/parallel.hpp"
