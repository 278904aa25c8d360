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

#include "mavg/theory.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "mavg/errors.hpp"

namespace mavg {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_mu(double mu) {
  if (!(mu >= 0.0 && mu < 1.0)) throw ArgumentError("mu must lie in [0, 1)");
}

void require_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw ArgumentError("delta must lie in (0, 1)");
}

// Bound at mu with the delta certified for that mu; NaN when infeasible.
double feasible_bound(double mu, double N, double eta, std::size_t P,
                      std::size_t B, std::size_t K, const BoundInputs& inputs) {
  double delta = 0.0;
  try {
    delta = resolve_delta(eta, mu, inputs);
  } catch (const InfeasibleError&) {
    return kNaN;
  }
  if (!stepsize_feasible(eta, mu, K, inputs.lipschitz_L, delta).feasible)
    return kNaN;
  BoundInputs in = inputs;
  in.delta = delta;
  return theorem_bound(mu, N, eta, P, B, K, in).total;
}

}  // namespace

void BoundInputs::validate() const {
  if (!(lipschitz_L >= 0.0) || !(grad_bound_M >= 0.0) || !(sigma2 >= 0.0) ||
      !(delta_F >= 0.0))
    throw ArgumentError("L, M, sigma2 and F(w1) - F* must be >= 0");
  if (delta) require_delta(*delta);
}

double delta_max(double eta, double mu, double L) {
  if (!(eta > 0.0) || !(L > 0.0)) throw ArgumentError("eta and L must be > 0");
  require_mu(mu);
  const double om = 1.0 - mu;
  const double r2 = L * L * eta * eta / (om * om);
  double d = std::min(1.0 - kDeltaEps, 1.0 - r2);
  // Step down past rounding so the delta condition holds as evaluated.
  while (d > 0.0 && (1.0 - d) - r2 < 0.0) d = std::nextafter(d, 0.0);
  if (!(d > 0.0))
    throw InfeasibleError("no delta in (0, 1) satisfies 1 - delta >= "
                          "L^2 eta^2 / (1 - mu)^2");
  return d;
}

double resolve_delta(double eta, double mu, const BoundInputs& inputs) {
  if (inputs.delta) return *inputs.delta;
  return delta_max(eta, mu, inputs.lipschitz_L);
}

FeasibilityReport stepsize_feasible(double eta, double mu, std::size_t K,
                                    double L, double delta) {
  require_mu(mu);
  const double k = static_cast<double>(K);
  const double om = 1.0 - mu;
  FeasibilityReport r;
  r.delta = delta;
  r.step_margin = 1.0 - (L * L * eta * eta * (k + 1.0) * (k - 2.0) /
                             (2.0 * om * om) +
                         2.0 * eta * L * k / om);
  r.delta_margin = (1.0 - delta) - L * L * eta * eta / (om * om);
  r.feasible = r.step_margin >= 0.0 && r.delta_margin >= 0.0 &&
               delta > 0.0 && delta < 1.0;
  return r;
}

BoundBreakdown theorem_bound(double mu, double N, double eta, std::size_t P,
                             std::size_t B, std::size_t K,
                             const BoundInputs& inputs) {
  require_mu(mu);
  inputs.validate();
  if (!(N > 0.0) || !(eta > 0.0) || P == 0 || B == 0 || K == 0)
    throw ArgumentError("N, eta, P, B, K must be positive");

  BoundBreakdown b;
  bool delta_ok = true;
  try {
    b.delta_used = resolve_delta(eta, mu, inputs);
  } catch (const InfeasibleError&) {
    // Still report a number; conditions_met says whether it is certified.
    b.delta_used = kDeltaEps;
    delta_ok = false;
  }
  b.conditions_met =
      delta_ok &&
      stepsize_feasible(eta, mu, K, inputs.lipschitz_L, b.delta_used).feasible;

  const double L = inputs.lipschitz_L;
  const double M = inputs.grad_bound_M;
  const double s2 = inputs.sigma2;
  const double k = static_cast<double>(K);
  const double p = static_cast<double>(P);
  const double bs = static_cast<double>(B);
  const double om = 1.0 - mu;
  const double den = k - 1.0 + b.delta_used;

  b.term1 = 2.0 * om * inputs.delta_F / (N * den * eta);
  b.term2 = L * L * eta * eta * s2 * (2.0 * k - 1.0) * k * (k - 1.0) /
            (6.0 * den * bs * om * om);
  b.term3 = 2.0 * L * k * k * s2 * eta / (p * bs * den * om) *
            (1.0 + mu * mu / (2.0 * om * om));
  b.term4 = L * eta * mu * mu * k * k * M / (den * om * om * om);
  b.total = b.term1 + b.term2 + b.term3 + b.term4;
  return b;
}

OptimalMu optimal_mu(std::size_t N, double eta, std::size_t P, std::size_t B,
                     std::size_t K, const BoundInputs& inputs,
                     const MuSearchOptions& options) {
  inputs.validate();
  if (!(options.grid_step > 0.0 && options.grid_step <= 1.0))
    throw ArgumentError("grid step must lie in (0, 1]");
  const auto count =
      static_cast<std::size_t>(std::llround(1.0 / options.grid_step));
  const auto n = static_cast<double>(N);

  OptimalMu best;
  best.bound = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < count; ++i) {
    MuProfileEntry e;
    e.mu = static_cast<double>(i) / static_cast<double>(count);
    e.bound = feasible_bound(e.mu, n, eta, P, B, K, inputs);
    e.feasible = !std::isnan(e.bound);
    if (e.feasible && e.bound < best.bound) {
      best.mu = e.mu;
      best.bound = e.bound;
      found = true;
    }
    best.profile.push_back(e);
  }
  if (!found) throw InfeasibleError("no feasible momentum on the grid");

  if (options.refine) {
    auto g = [&](double mu) {
      const double v = feasible_bound(mu, n, eta, P, B, K, inputs);
      return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    double lo = std::max(0.0, best.mu - options.grid_step);
    double hi = std::min(1.0 - 1e-12, best.mu + options.grid_step);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = g(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = g(x2);
      }
    }
    const double x = 0.5 * (lo + hi);
    const double fx = g(x);
    if (fx < best.bound) {
      best.mu = x;
      best.bound = fx;
    }
  }
  return best;
}

ConditionReport lemma_opt_mu_condition(std::size_t N, double eta,
                                       std::size_t P, std::size_t B,
                                       std::size_t K,
                                       const BoundInputs& inputs) {
  const double L = inputs.lipschitz_L;
  const double s2 = inputs.sigma2;
  const double dF = inputs.delta_F;
  const double n = static_cast<double>(N);
  const double p = static_cast<double>(P);
  const double b = static_cast<double>(B);
  ConditionReport r;
  if (K <= 5) {
    r.branch = "K<=5";
    r.margin = b * dF / (5.0 * L * n * s2 * (5.0 / p + 6.0 * L)) - eta * eta;
  } else {
    r.branch = "K>5";
    r.margin =
        1.0 - n * s2 / (2.0 * b * dF) * (1.0 / (2.0 * L * p) + 1.0 / L);
  }
  r.holds = r.margin > 0.0;
  return r;
}

SpeedupReport speedup_check(double mu, std::size_t N, double eta,
                            std::size_t P, std::size_t B, std::size_t K,
                            const BoundInputs& inputs) {
  require_mu(mu);
  inputs.validate();
  const double L = inputs.lipschitz_L;
  const double M = inputs.grad_bound_M;
  const double s2 = inputs.sigma2;
  const double k = static_cast<double>(K);
  const double p = static_cast<double>(P);
  const double b = static_cast<double>(B);
  const double n = static_cast<double>(N);
  const double om = 1.0 - mu;

  SpeedupReport r;
  r.c3 = 2.0 * L * k * s2 + p * L * L * s2 * (2.0 * k - 1.0) * (k - 1.0) +
         L * k * M * p * b;
  r.eta_threshold =
      std::sqrt(p * b * inputs.delta_F * om * om * om / (2.0 * n * k * r.c3));
  r.eta_below_threshold = eta < r.eta_threshold;

  BoundInputs in = inputs;
  in.delta = resolve_delta(eta, mu, inputs);
  r.delta_used = *in.delta;
  const double exact = n / (1.0 - mu / 2.0);
  r.scaled_N = std::ceil(exact);
  r.g_mavg = theorem_bound(mu, n, eta, P, B, K, in).total;
  r.g_kavg_scaled = theorem_bound(0.0, r.scaled_N, eta, P, B, K, in).total;
  r.g_kavg_scaled_exact = theorem_bound(0.0, exact, eta, P, B, K, in).total;
  r.holds = r.g_mavg < r.g_kavg_scaled;
  return r;
}

OptimalK optimal_k(std::size_t S, double mu, double eta, std::size_t P,
                   std::size_t B, const BoundInputs& inputs) {
  if (S < 1) throw ArgumentError("S must be >= 1");
  inputs.validate();
  OptimalK best;
  best.bound = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t K = 1; K <= S; ++K) {
    if (S % K != 0) continue;
    KProfileEntry e;
    e.K = K;
    e.N = S / K;
    e.bound = feasible_bound(mu, static_cast<double>(e.N), eta, P, B, K,
                             inputs);
    e.feasible = !std::isnan(e.bound);
    if (e.feasible && e.bound < best.bound) {
      best.K = K;
      best.bound = e.bound;
      found = true;
    }
    best.profile.push_back(e);
  }
  if (!found) throw InfeasibleError("no feasible averaging period divides S");
  return best;
}

ConditionReport k_opt_condition(std::size_t S, double eta, double mu,
                                std::size_t P, std::size_t B,
                                const BoundInputs& inputs) {
  require_mu(mu);
  const double delta = resolve_delta(eta, mu, inputs);
  const double L = inputs.lipschitz_L;
  const double M = inputs.grad_bound_M;
  const double s2 = inputs.sigma2;
  const double s = static_cast<double>(S);
  const double p = static_cast<double>(P);
  const double b = static_cast<double>(B);
  const double om = 1.0 - mu;

  const double lhs = (1.0 - delta) / delta * inputs.delta_F / (s * eta);
  const double rhs =
      L * L * eta * eta * s2 / (2.0 * b) / (om * om * om) +
      (3.0 * delta - 1.0) / (2.0 * delta) / (om * om) *
          (mu * mu / (om * om) * (L * s2 * eta / (p * b) + L * eta * M) +
           2.0 * L * s2 * eta / (p * b));
  ConditionReport r;
  r.margin = lhs - rhs;
  r.holds = r.margin > 0.0;
  r.branch = delta < 1.0 / 3.0 ? "delta<1/3" : "delta>=1/3";
  return r;
}

MuVsPReport mu_star_vs_P(std::size_t S_total, double eta, std::size_t B,
                         std::size_t K, std::size_t P0,
                         const std::vector<std::size_t>& lambdas,
                         const BoundInputs& inputs,
                         const MuSearchOptions& options) {
  if (P0 == 0 || B == 0 || K == 0 || lambdas.empty())
    throw ArgumentError("P0, B, K must be positive and lambdas nonempty");
  MuVsPReport report;
  for (std::size_t lambda : lambdas) {
    if (lambda == 0) throw ArgumentError("lambda must be >= 1");
    MuVsPEntry e;
    e.lambda = lambda;
    e.P = lambda * P0;
    const std::size_t per_iter = e.P * B * K;
    if (S_total % per_iter != 0 || S_total / per_iter == 0)
      throw ArgumentError("S_total = " + std::to_string(S_total) +
                          " is not a positive multiple of P*B*K = " +
                          std::to_string(per_iter));
    e.N = S_total / per_iter;
    const auto opt = optimal_mu(e.N, eta, e.P, B, K, inputs, options);
    e.mu_star = opt.mu;
    e.bound = opt.bound;
    report.entries.push_back(e);
  }
  report.nondecreasing = true;
  for (std::size_t i = 1; i < report.entries.size(); ++i)
    if (report.entries[i].mu_star < report.entries[i - 1].mu_star)
      report.nondecreasing = false;
  return report;
}

}  // namespace mavg
