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
#include <optional>
#include <string>
#include <vector>

namespace mavg {

/// Smallest gap kept between delta and 1.
inline constexpr double kDeltaEps = 1e-6;

/// Problem constants entering the convergence bound.
struct BoundInputs {
  double lipschitz_L = 1.0;
  double grad_bound_M = 0.0;
  double sigma2 = 0.0;
  double delta_F = 0.0;  // F(w_1) - F*
  /// Slack constant in (0, 1); when unset every evaluation uses
  /// delta_max(eta, mu, L).
  std::optional<double> delta;

  void validate() const;
};

/// The four summands of the bound, in order, and their sum.
struct BoundBreakdown {
  double term1 = 0.0;  // optimization error, decays as 1/N
  double term2 = 0.0;  // local drift
  double term3 = 0.0;  // averaged sampling noise
  double term4 = 0.0;  // momentum-induced variance
  double total = 0.0;
  double delta_used = 0.0;
  bool conditions_met = false;
};

struct FeasibilityReport {
  bool feasible = false;
  /// 1 - [L^2 eta^2 (K+1)(K-2) / (2(1-mu)^2) + 2 eta L K / (1-mu)]
  double step_margin = 0.0;
  /// (1 - delta) - L^2 eta^2 / (1-mu)^2
  double delta_margin = 0.0;
  double delta = 0.0;
};

struct ConditionReport {
  bool holds = false;
  double margin = 0.0;
  std::string branch;
};

/// min(1 - kDeltaEps, 1 - L^2 eta^2 / (1-mu)^2); InfeasibleError when the
/// result is not positive.
double delta_max(double eta, double mu, double L);

/// Both step-size conditions, first one in its "+" form.
FeasibilityReport stepsize_feasible(double eta, double mu, std::size_t K,
                                    double L, double delta);

/// The bound g(mu, N, eta; P, B, K). N is real so that rescaled horizons can
/// be evaluated without rounding.
BoundBreakdown theorem_bound(double mu, double N, double eta, std::size_t P,
                             std::size_t B, std::size_t K,
                             const BoundInputs& inputs);

/// Resolved delta: the override if present, else delta_max(eta, mu, L).
double resolve_delta(double eta, double mu, const BoundInputs& inputs);

struct MuSearchOptions {
  double grid_step = 0.01;  // grid {0, step, ..., < 1}
  bool refine = false;      // golden-section polish around the grid winner
};

struct MuProfileEntry {
  double mu = 0.0;
  bool feasible = false;
  double bound = 0.0;  // NaN when infeasible
};

struct OptimalMu {
  double mu = 0.0;
  double bound = 0.0;
  std::vector<MuProfileEntry> profile;
};

/// Minimizes the bound over the feasible part of the momentum grid; ties go
/// to the smaller mu. InfeasibleError when no grid point is feasible.
OptimalMu optimal_mu(std::size_t N, double eta, std::size_t P, std::size_t B,
                     std::size_t K, const BoundInputs& inputs,
                     const MuSearchOptions& options = {});

/// Sufficient condition for a strictly positive optimal momentum; branch is
/// "K<=5" or "K>5". margin > 0 iff the condition holds.
ConditionReport lemma_opt_mu_condition(std::size_t N, double eta,
                                       std::size_t P, std::size_t B,
                                       std::size_t K,
                                       const BoundInputs& inputs);

struct SpeedupReport {
  double c3 = 0.0;
  double eta_threshold = 0.0;
  bool eta_below_threshold = false;
  double scaled_N = 0.0;  // ceil(N / (1 - mu/2))
  double g_mavg = 0.0;
  double g_kavg_scaled = 0.0;
  double g_kavg_scaled_exact = 0.0;  // at N / (1 - mu/2) without rounding
  bool holds = false;                // g_mavg < g_kavg_scaled
  double delta_used = 0.0;
};

/// Compares M-AVG over N meta iterations with K-AVG over N/(1-mu/2), both at
/// the same delta (the one certified for mu).
SpeedupReport speedup_check(double mu, std::size_t N, double eta,
                            std::size_t P, std::size_t B, std::size_t K,
                            const BoundInputs& inputs);

struct KProfileEntry {
  std::size_t K = 0;
  std::size_t N = 0;
  bool feasible = false;
  double bound = 0.0;  // NaN when infeasible
};

struct OptimalK {
  std::size_t K = 0;
  double bound = 0.0;
  std::vector<KProfileEntry> profile;
};

/// Scans the divisors K of S with N = S / K; ties go to the smaller K.
OptimalK optimal_k(std::size_t S, double mu, double eta, std::size_t P,
                   std::size_t B, const BoundInputs& inputs);

/// The fixed-budget condition under which the optimal averaging period
/// exceeds 1. branch reads "delta<1/3" when the (3 delta - 1) factor is
/// negative, otherwise "delta>=1/3".
ConditionReport k_opt_condition(std::size_t S, double eta, double mu,
                                std::size_t P, std::size_t B,
                                const BoundInputs& inputs);

struct MuVsPEntry {
  std::size_t lambda = 0;
  std::size_t P = 0;
  std::size_t N = 0;
  double mu_star = 0.0;
  double bound = 0.0;
};

struct MuVsPReport {
  std::vector<MuVsPEntry> entries;
  bool nondecreasing = false;
};

/// Optimal momentum as the learner count grows with the total sample budget
/// S = N P B K held fixed.
MuVsPReport mu_star_vs_P(std::size_t S_total, double eta, std::size_t B,
                         std::size_t K, std::size_t P0,
                         const std::vector<std::size_t>& lambdas,
                         const BoundInputs& inputs,
                         const MuSearchOptions& options = {});

}  // namespace mavg
