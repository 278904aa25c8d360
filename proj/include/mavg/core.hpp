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
#include <span>
#include <string>
#include <vector>

#include "mavg/linalg.hpp"
#include "mavg/objectives.hpp"
#include "mavg/rng.hpp"

namespace mavg {

struct HyperParams {
  std::size_t num_learners = 1;  // P
  std::size_t batch_size = 1;    // B
  std::size_t local_steps = 1;   // K
  double step_size = 0.01;       // eta
  double momentum = 0.0;         // mu, in [0, 1)
  std::size_t meta_iters = 1;    // N
  std::uint64_t master_seed = 0;

  /// ArgumentError unless P, B, K, N >= 1, eta > 0 and 0 <= mu < 1.
  void validate() const;
};

/// Global weights, block momentum buffer and the number of meta steps taken.
struct MetaState {
  Vec weights;
  Vec momentum;
  std::size_t iteration = 0;

  static MetaState initial(Vec weights);
};

/// Stream for learner j (1-based) during meta iteration n (1-based).
StreamKey learner_stream_key(std::uint64_t master_seed, std::size_t learner,
                             std::size_t meta_iteration);

/// Optional per-step record of the summed mini-batch gradients.
struct LocalLog {
  std::vector<Vec> batch_sums;  // one entry per local step
};

/// K steps of w <- w - (eta/B) * sum_s g(w; xi_s), consuming exactly K*B
/// oracle draws. DivergenceError carries the 1-based local step.
Vec local_k_steps(std::span<const double> start, const Objective& objective,
                  const HyperParams& hyper, Stream& rng,
                  LocalLog* log = nullptr);

/// Average the endpoints in ascending learner order, then
///   d = a - w,  v' = mu v + d,  w' = w + v'.
/// w' is evaluated as a + mu v, which is the same update and gives w' = a
/// exactly when mu = 0. The displacement is written to *displacement if set.
MetaState meta_step(const MetaState& meta, std::span<const Vec> endpoints,
                    const HyperParams& hyper, Vec* displacement = nullptr);

struct IterationRecord {
  std::size_t n = 0;             // 1-based meta iteration
  double f_value = 0.0;          // F(w_n)
  double grad_sq_norm = 0.0;     // |grad F(w_n)|^2
  Vec weights;                   // w_n
  Vec displacement;              // d_n = a - w_n
  Vec momentum;                  // v_{n+1}
  double wallclock_s = 0.0;
  bool assumption_violated = false;  // w_n outside the certified domain
  std::vector<Vec> endpoints;        // per learner, when recorded
  std::vector<Vec> batch_sums;       // [learner * K + step], when recorded
};

struct RunTrace {
  std::string objective;
  HyperParams hyper;
  std::vector<IterationRecord> iterations;
  Vec final_weights;  // w_{N+1}
  bool assumption_violated = false;

  /// (1/N) sum_n |grad F(w_n)|^2
  double mean_grad_sq_norm() const;
  /// First n with F(w_n) <= threshold, or 0 when never reached.
  std::size_t first_hit(double threshold) const;
};

struct RunOptions {
  std::size_t threads = 1;
  bool record_endpoints = false;
  bool record_samples = false;
  /// Wall-clock timestamps make traces nondeterministic; off by default and
  /// recorded as 0.
  bool record_time = false;
};

/// Executes N meta iterations from the objective's init point.
RunTrace run(const Objective& objective, const HyperParams& hyper,
             const RunOptions& options = {});

/// G_n = -d_n / eta for the 1-based meta iteration n.
Vec reconstruct_G(const RunTrace& trace, std::size_t n,
                  const HyperParams& hyper);

/// z_n = w_n + mu/(1-mu) v_n for n = 1..N+1 (v_1 = 0).
std::vector<Vec> auxiliary_sequence(const RunTrace& trace,
                                    const HyperParams& hyper);

// Trace files.
inline constexpr const char* kTraceHeader =
    "n,f_value,grad_sq_norm,d_norm,v_norm,wallclock_s,assumption_violated";

struct TraceRow {
  std::size_t n = 0;
  double f_value = 0.0;
  double grad_sq_norm = 0.0;
  double d_norm = 0.0;
  double v_norm = 0.0;
  double wallclock_s = 0.0;
  bool assumption_violated = false;
};

std::string trace_csv(const RunTrace& trace);
void write_trace_csv(const RunTrace& trace, const std::filesystem::path& path);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

/// One line per iteration: n, then w_n, d_n, v_{n+1} with 17 significant
/// digits, space separated.
void write_trace_vectors(const RunTrace& trace,
                         const std::filesystem::path& path);

}  // namespace mavg
