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

#include "mavg/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mavg/csv.hpp"

namespace mavg {

void SweepSpec::validate() const {
  if (seeds.empty()) throw ArgumentError("sweep needs at least one seed");
  base.validate();
  for (const auto& h : tuples()) h.validate();
}

std::vector<HyperParams> SweepSpec::tuples() const {
  auto or_base = [](const auto& list, auto value) {
    using T = typename std::decay_t<decltype(list)>::value_type;
    return list.empty() ? std::vector<T>{static_cast<T>(value)} : list;
  };
  const auto Ps = or_base(axes.P, base.num_learners);
  const auto Bs = or_base(axes.B, base.batch_size);
  const auto Ks = or_base(axes.K, base.local_steps);
  const auto etas = or_base(axes.eta, base.step_size);
  const auto mus = or_base(axes.mu, base.momentum);
  std::vector<HyperParams> out;
  for (auto p : Ps)
    for (auto b : Bs)
      for (auto k : Ks)
        for (auto eta : etas)
          for (auto mu : mus) {
            HyperParams h = base;
            h.num_learners = p;
            h.batch_size = b;
            h.local_steps = k;
            h.step_size = eta;
            h.momentum = mu;
            out.push_back(h);
          }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  const double lo = values[n / 2 - 1], hi = values[n / 2];
  if (std::isinf(hi)) return hi;
  return 0.5 * (lo + hi);
}

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  s.median = median(std::move(values));
  return s;
}

BoundInputs bound_inputs_for(const Objective& objective) {
  const auto& s = objective.spec();
  BoundInputs in;
  in.lipschitz_L = s.lipschitz_L;
  in.grad_bound_M = s.grad_bound_M;
  in.sigma2 = s.noise_sigma2;
  in.delta_F = std::max(0.0, objective.value(s.init_point) - s.f_star);
  return in;
}

namespace {

struct TupleBound {
  double total = 0.0;
  bool feasible = false;
};

TupleBound bound_for(const HyperParams& h, const BoundInputs& in) {
  TupleBound t;
  const auto b = theorem_bound(h.momentum, static_cast<double>(h.meta_iters),
                               h.step_size, h.num_learners, h.batch_size,
                               h.local_steps, in);
  t.total = b.total;
  t.feasible = b.conditions_met;
  return t;
}

CellResult run_cell(const Objective& objective, const HyperParams& hyper,
                    std::optional<double> threshold, RunTrace* keep) {
  CellResult c;
  c.hyper = hyper;
  try {
    RunTrace trace = run(objective, hyper);
    c.final_f = trace.iterations.back().f_value;
    c.avg_grad_sq = trace.mean_grad_sq_norm();
    if (threshold) {
      const std::size_t hit = trace.first_hit(*threshold);
      if (hit > 0) c.iters_to_threshold = static_cast<double>(hit);
    }
    if (keep) *keep = std::move(trace);
  } catch (const DivergenceError& e) {
    c.diverged = true;
    c.error = e.what();
    c.final_f = std::numeric_limits<double>::infinity();
    c.avg_grad_sq = std::numeric_limits<double>::infinity();
  }
  return c;
}

std::string num(double x) { return format_number(x); }

}  // namespace

std::string cell_trace_name(const HyperParams& h) {
  return "P" + std::to_string(h.num_learners) + "_B" +
         std::to_string(h.batch_size) + "_K" + std::to_string(h.local_steps) +
         "_eta" + num(h.step_size) + "_mu" + num(h.momentum) + "_seed" +
         std::to_string(h.master_seed) + ".csv";
}

std::string manifest_json(const SweepSpec& spec) {
  nlohmann::ordered_json j;
  j["objective"] = spec.objective;
  j["noise_sigma2"] = spec.overrides.noise_sigma2
                          ? nlohmann::ordered_json(*spec.overrides.noise_sigma2)
                          : nlohmann::ordered_json();
  j["p"] = spec.base.num_learners;
  j["b"] = spec.base.batch_size;
  j["k"] = spec.base.local_steps;
  j["eta"] = spec.base.step_size;
  j["mu"] = spec.base.momentum;
  j["n"] = spec.base.meta_iters;
  j["sweep"] = {{"p", spec.axes.P},
                {"b", spec.axes.B},
                {"k", spec.axes.K},
                {"eta", spec.axes.eta},
                {"mu", spec.axes.mu}};
  j["seeds"] = spec.seeds;
  j["loss_threshold"] = spec.loss_threshold
                            ? nlohmann::ordered_json(*spec.loss_threshold)
                            : nlohmann::ordered_json();
  return j.dump(2) + "\n";
}

AggregateResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  const auto objective = find_objective(spec.objective, spec.overrides);
  const BoundInputs in = bound_inputs_for(*objective);
  const auto tuples = spec.tuples();
  const std::size_t S = spec.seeds.size();
  const bool write = !spec.output_dir.empty();

  AggregateResult result;
  result.cells.resize(tuples.size() * S);
  std::vector<std::string> trace_text(write ? result.cells.size() : 0);
  parallel_for(result.cells.size(), spec.threads, [&](std::size_t i) {
    HyperParams h = tuples[i / S];
    h.master_seed = spec.seeds[i % S];
    RunTrace trace;
    result.cells[i] =
        run_cell(*objective, h, spec.loss_threshold, write ? &trace : nullptr);
    if (write && !result.cells[i].diverged) trace_text[i] = trace_csv(trace);
  });

  for (std::size_t t = 0; t < tuples.size(); ++t) {
    AggregateRow row;
    row.hyper = tuples[t];
    row.seed_count = S;
    std::vector<double> f, g, hits;
    for (std::size_t s = 0; s < S; ++s) {
      const auto& c = result.cells[t * S + s];
      if (c.diverged) ++row.diverged;
      f.push_back(c.final_f);
      g.push_back(c.avg_grad_sq);
      hits.push_back(c.iters_to_threshold);
    }
    row.final_f = summarize(std::move(f));
    row.avg_grad_sq = summarize(std::move(g));
    if (spec.loss_threshold) row.median_iters_to_threshold = median(hits);
    const auto b = bound_for(row.hyper, in);
    row.bound_total = b.total;
    row.feasible = b.feasible;
    result.rows.push_back(row);
  }

  if (write) {
    const auto& dir = spec.output_dir;
    write_file(dir / "manifest.json", manifest_json(spec));
    for (std::size_t i = 0; i < result.cells.size(); ++i)
      if (!result.cells[i].diverged)
        write_file(dir / "cells" / cell_trace_name(result.cells[i].hyper),
                   trace_text[i]);
    write_file(dir / "aggregate.csv", aggregate_csv(result));
  }
  return result;
}

std::string aggregate_csv(const AggregateResult& result) {
  std::ostringstream out;
  out << kAggregateHeader << '\n';
  for (const auto& r : result.rows) {
    const auto& h = r.hyper;
    out << h.num_learners << ',' << h.batch_size << ',' << h.local_steps << ','
        << num(h.step_size) << ',' << num(h.momentum) << ',' << h.meta_iters
        << ',' << r.seed_count << ',' << num(r.final_f.mean) << ','
        << num(r.avg_grad_sq.mean) << ',' << num(r.bound_total) << ','
        << (r.feasible ? 1 : 0) << ',' << num(r.median_iters_to_threshold)
        << '\n';
  }
  return out.str();
}

BoundCheck empirical_vs_bound(const Objective& objective,
                              const HyperParams& hyper,
                              const std::vector<std::uint64_t>& seeds,
                              std::size_t threads) {
  hyper.validate();
  if (seeds.empty()) throw ArgumentError("need at least one seed");
  const BoundInputs in = bound_inputs_for(objective);
  const double L = in.lipschitz_L;
  BoundCheck check;
  double delta = 0.0;
  try {
    delta = delta_max(hyper.step_size, hyper.momentum, L);
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(std::string("tuple infeasible: ") + e.what());
  }
  check.feasibility = stepsize_feasible(hyper.step_size, hyper.momentum,
                                        hyper.local_steps, L, delta);
  if (!check.feasibility.feasible)
    throw InfeasibleError(
        "tuple infeasible: step margin " +
        format_number(check.feasibility.step_margin) + ", delta margin " +
        format_number(check.feasibility.delta_margin));
  check.bound_total = bound_for(hyper, in).total;

  check.per_seed.resize(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t i) {
    HyperParams h = hyper;
    h.master_seed = seeds[i];
    check.per_seed[i] = run(objective, h).mean_grad_sq_norm();
  });
  double sum = 0.0;
  for (double v : check.per_seed) sum += v;
  check.empirical_mean = sum / static_cast<double>(seeds.size());
  check.satisfied = check.empirical_mean <= check.bound_total;
  return check;
}

RaceReport race(const Objective& objective, const HyperParams& base,
                const std::vector<std::uint64_t>& seeds, double threshold,
                const std::vector<double>& mu_list, std::size_t threads) {
  if (seeds.empty()) throw ArgumentError("need at least one seed");
  std::vector<double> mus{0.0};
  for (double mu : mu_list)
    if (std::find(mus.begin(), mus.end(), mu) == mus.end()) mus.push_back(mu);
  for (double mu : mus) {
    HyperParams h = base;
    h.momentum = mu;
    h.validate();
  }

  const std::size_t S = seeds.size();
  const std::size_t N = base.meta_iters;
  std::vector<double> hits(mus.size() * S);
  std::vector<std::vector<double>> curves(mus.size() * S);
  parallel_for(hits.size(), threads, [&](std::size_t i) {
    HyperParams h = base;
    h.momentum = mus[i / S];
    h.master_seed = seeds[i % S];
    std::vector<double> curve(N, std::numeric_limits<double>::infinity());
    double hit = std::numeric_limits<double>::infinity();
    try {
      const RunTrace trace = run(objective, h);
      for (std::size_t n = 0; n < N; ++n)
        curve[n] = trace.iterations[n].f_value;
      if (const auto first = trace.first_hit(threshold); first > 0)
        hit = static_cast<double>(first);
    } catch (const DivergenceError&) {
    }
    hits[i] = hit;
    curves[i] = std::move(curve);
  });

  RaceReport report;
  report.threshold = threshold;
  for (std::size_t m = 0; m < mus.size(); ++m) {
    RaceRow row;
    row.mu = mus[m];
    row.hits.assign(hits.begin() + static_cast<std::ptrdiff_t>(m * S),
                    hits.begin() + static_cast<std::ptrdiff_t>((m + 1) * S));
    row.finished = static_cast<std::size_t>(std::count_if(
        row.hits.begin(), row.hits.end(),
        [](double x) { return std::isfinite(x); }));
    row.median_hit = median(row.hits);
    std::vector<double> mean(N, 0.0);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t n = 0; n < N; ++n) mean[n] += curves[m * S + s][n];
    for (double& x : mean) x /= static_cast<double>(S);
    report.mean_curves.push_back(std::move(mean));
    report.rows.push_back(std::move(row));
  }
  const double base_median = report.rows.front().median_hit;
  for (auto& row : report.rows) {
    if (row.mu == 0.0)
      row.ratio_vs_zero = 1.0;
    else if (std::isfinite(base_median))
      row.ratio_vs_zero = row.median_hit / base_median;
    else
      row.ratio_vs_zero = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

std::string race_csv(const RaceReport& report) {
  std::ostringstream out;
  out << "mu,seed_count,finished,median_iters_to_threshold,ratio_vs_mu0\n";
  for (const auto& r : report.rows)
    out << num(r.mu) << ',' << r.hits.size() << ',' << r.finished << ','
        << num(r.median_hit) << ',' << num(r.ratio_vs_zero) << '\n';
  return out.str();
}

std::string race_curves_csv(const RaceReport& report) {
  std::ostringstream out;
  out << "mu,n,mean_f_value\n";
  for (std::size_t m = 0; m < report.rows.size(); ++m)
    for (std::size_t n = 0; n < report.mean_curves[m].size(); ++n)
      out << num(report.rows[m].mu) << ',' << n + 1 << ','
          << num(report.mean_curves[m][n]) << '\n';
  return out.str();
}

}  // namespace mavg
