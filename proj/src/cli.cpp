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

#include "mavg/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "mavg/config.hpp"
#include "mavg/csv.hpp"
#include "mavg/errors.hpp"
#include "mavg/harness.hpp"
#include "mavg/plot.hpp"
#include "mavg/theory.hpp"

namespace mavg {
namespace fs = std::filesystem;

namespace {

template <typename T>
void opt(CLI::App* app, const std::string& name, std::optional<T>& dst,
         const std::string& help) {
  auto* o = app->add_option_function<T>(
      name, [&dst](const T& v) { dst = v; }, help);
  if constexpr (requires { typename T::value_type; } &&
                !std::is_same_v<T, std::string>)
    o->delimiter(',');
}

void flag(CLI::App* app, const std::string& name, std::optional<bool>& dst,
          const std::string& help) {
  app->add_flag_function(
      name, [&dst](std::int64_t count) { dst = count > 0; }, help);
}

void hyper_flags(CLI::App* app, Config& c) {
  opt(app, "--p", c.p, "number of learners P");
  opt(app, "--b", c.b, "mini-batch size B");
  opt(app, "--k", c.k, "local steps per meta iteration K");
  opt(app, "--eta", c.eta, "step size");
  opt(app, "--mu", c.mu, "block momentum in [0, 1)");
  opt(app, "--n", c.n, "meta iterations N");
}

void objective_flags(CLI::App* app, Config& c) {
  opt(app, "--objective", c.objective, "quadratic | logcosh | logistic");
  opt(app, "--noise-sigma2", c.noise_sigma2,
      "override the additive noise variance of the objective");
}

void bound_flags(CLI::App* app, Config& c) {
  opt(app, "--L", c.L, "gradient Lipschitz constant");
  opt(app, "--M", c.M, "bound on |grad F|^2");
  opt(app, "--sigma2", c.sigma2, "per-sample gradient variance");
  opt(app, "--deltaf", c.deltaf, "F(w_1) - F*");
  opt(app, "--delta", c.delta, "slack delta in (0,1); default delta_max");
}

void output_flag(CLI::App* app, Config& c) {
  opt(app, "--output", c.output,
      "output directory (default $MAVG_OUTPUT_DIR/<command> or "
      "mavg_out/<command>)");
}

fs::path output_dir(const Config& c, const std::string& command) {
  if (c.output) return *c.output;
  if (const char* root = std::getenv("MAVG_OUTPUT_DIR"); root && *root)
    return fs::path(root) / command;
  return fs::path("mavg_out") / command;
}

std::vector<std::uint64_t> seeds_or(const Config& c, std::size_t count) {
  if (c.seeds) return *c.seeds;
  std::vector<std::uint64_t> s(count);
  std::iota(s.begin(), s.end(), 1);
  return s;
}

// Bound inputs: objective constants when --objective is given, then explicit
// values on top.
BoundInputs bound_inputs(const Config& c) {
  BoundInputs in;
  if (c.objective)
    in = bound_inputs_for(*find_objective(*c.objective,
                                          c.objective_overrides()));
  if (c.L) in.lipschitz_L = *c.L;
  if (c.M) in.grad_bound_M = *c.M;
  if (c.sigma2) in.sigma2 = *c.sigma2;
  if (c.deltaf) in.delta_F = *c.deltaf;
  if (c.delta) in.delta = *c.delta;
  in.validate();
  return in;
}

// Fill every field a run depends on so the echoed config reproduces it alone.
Config resolved(Config c) {
  const HyperParams h = c.hyper();
  c.p = h.num_learners;
  c.b = h.batch_size;
  c.k = h.local_steps;
  c.eta = h.step_size;
  c.mu = h.momentum;
  c.n = h.meta_iters;
  c.seed = h.master_seed;
  return c;
}

std::string bool01(bool b) { return b ? "true" : "false"; }

int cmd_run(const Config& c, std::ostream& out) {
  Config echo = resolved(c);
  echo.objective = c.objective.value_or("logcosh");
  const auto objective = find_objective(*echo.objective,
                                        c.objective_overrides());
  const HyperParams h = c.hyper();
  RunOptions options;
  options.threads = c.threads.value_or(1);
  options.record_time = c.record_time.value_or(false);
  const RunTrace trace = run(*objective, h, options);

  const fs::path dir = output_dir(c, "run");
  write_file(dir / "config.json", config_json(echo));
  write_objective_file(objective->spec(), dir / "objective.json");
  write_trace_csv(trace, dir / "trace.csv");
  if (c.dump_vectors.value_or(false))
    write_trace_vectors(trace, dir / "trace_vectors.txt");
  out << "final_f,mean_grad_sq,assumption_violated,trace\n"
      << format_number(trace.iterations.back().f_value) << ','
      << format_number(trace.mean_grad_sq_norm()) << ','
      << bool01(trace.assumption_violated) << ','
      << (dir / "trace.csv").string() << '\n';
  return kExitOk;
}

SweepSpec sweep_spec(const Config& c, const std::string& command,
                     std::size_t default_seeds) {
  SweepSpec spec;
  spec.objective = c.objective.value_or("logcosh");
  spec.overrides = c.objective_overrides();
  spec.base = c.hyper();
  spec.axes.P = c.sweep_p.value_or(std::vector<std::size_t>{});
  spec.axes.B = c.sweep_b.value_or(std::vector<std::size_t>{});
  spec.axes.K = c.sweep_k.value_or(std::vector<std::size_t>{});
  spec.axes.eta = c.sweep_eta.value_or(std::vector<double>{});
  spec.axes.mu = c.sweep_mu.value_or(std::vector<double>{});
  spec.seeds = seeds_or(c, default_seeds);
  spec.loss_threshold = c.loss_threshold;
  spec.output_dir = output_dir(c, command);
  spec.threads = c.threads.value_or(1);
  return spec;
}

int cmd_sweep(const Config& c, std::ostream& out) {
  const SweepSpec spec = sweep_spec(c, "sweep", 20);
  const auto result = run_sweep(spec);
  Config echo = resolved(c);
  echo.objective = spec.objective;
  echo.seeds = spec.seeds;
  write_file(spec.output_dir / "config.json", config_json(echo));
  out << aggregate_csv(result);
  return kExitOk;
}

int cmd_race(const Config& c, std::ostream& out) {
  const auto objective =
      find_objective(c.objective.value_or("logistic"), c.objective_overrides());
  double threshold = 0.0;
  if (c.loss_threshold)
    threshold = *c.loss_threshold;
  else if (objective->spec().race_threshold)
    threshold = *objective->spec().race_threshold;
  else
    throw ArgumentError("race needs --loss-threshold for this objective");
  const auto report =
      race(*objective, c.hyper(), seeds_or(c, 10), threshold,
           c.mu_list.value_or(std::vector<double>{0.3, 0.5, 0.7}),
           c.threads.value_or(1));
  const fs::path dir = output_dir(c, "race");
  Config echo = resolved(c);
  echo.objective = objective->spec().name;
  echo.loss_threshold = threshold;
  echo.seeds = seeds_or(c, 10);
  echo.mu_list = c.mu_list.value_or(std::vector<double>{0.3, 0.5, 0.7});
  write_file(dir / "config.json", config_json(echo));
  write_file(dir / "race.csv", race_csv(report));
  write_file(dir / "race_curves.csv", race_curves_csv(report));
  out << race_csv(report);
  return kExitOk;
}

int cmd_bound(const Config& c, std::ostream& out) {
  const BoundInputs in = bound_inputs(c);
  const HyperParams h = c.hyper();
  const auto b = theorem_bound(h.momentum, static_cast<double>(h.meta_iters),
                               h.step_size, h.num_learners, h.batch_size,
                               h.local_steps, in);
  out << "term1,term2,term3,term4,total,feasible,delta_used\n"
      << format_number(b.term1) << ',' << format_number(b.term2) << ','
      << format_number(b.term3) << ',' << format_number(b.term4) << ','
      << format_number(b.total) << ',' << bool01(b.conditions_met) << ','
      << format_number(b.delta_used) << '\n';
  return kExitOk;
}

int cmd_check(const Config& c, const std::string& condition,
              std::ostream& out) {
  const HyperParams h = c.hyper();
  ConditionReport r;
  if (condition == "stepsize") {
    const double L = c.L.value_or(1.0);
    double delta = kDeltaEps;
    if (c.delta) {
      delta = *c.delta;
    } else {
      try {
        delta = delta_max(h.step_size, h.momentum, L);
      } catch (const InfeasibleError&) {
        // Report margins at the most lenient admissible delta.
      }
    }
    const auto f = stepsize_feasible(h.step_size, h.momentum, h.local_steps,
                                     L, delta);
    r.holds = f.feasible;
    r.margin = std::min(f.step_margin, f.delta_margin);
    r.branch = f.step_margin <= f.delta_margin ? "step" : "delta";
  } else if (condition == "opt-mu") {
    r = lemma_opt_mu_condition(h.meta_iters, h.step_size, h.num_learners,
                               h.batch_size, h.local_steps, bound_inputs(c));
  } else if (condition == "k-opt") {
    if (!c.s) throw ArgumentError("check --condition k-opt needs --s");
    r = k_opt_condition(*c.s, h.step_size, h.momentum, h.num_learners,
                        h.batch_size, bound_inputs(c));
  } else {
    throw ArgumentError("unknown condition '" + condition +
                        "' (expected stepsize, opt-mu or k-opt)");
  }
  out << "holds,margin,branch\n"
      << bool01(r.holds) << ',' << format_number(r.margin) << ',' << r.branch
      << '\n';
  return r.holds ? kExitOk : kExitInfeasible;
}

int cmd_opt_mu(const Config& c, bool profile, std::ostream& out) {
  const HyperParams h = c.hyper();
  MuSearchOptions options;
  options.refine = c.refine.value_or(false);
  const auto r = optimal_mu(h.meta_iters, h.step_size, h.num_learners,
                            h.batch_size, h.local_steps, bound_inputs(c),
                            options);
  if (profile) {
    out << "mu,feasible,bound_total\n";
    for (const auto& e : r.profile)
      out << format_number(e.mu) << ',' << bool01(e.feasible) << ','
          << format_number(e.bound) << '\n';
  } else {
    out << "mu_star,bound_total\n"
        << format_number(r.mu) << ',' << format_number(r.bound) << '\n';
  }
  return kExitOk;
}

int cmd_opt_k(const Config& c, bool profile, std::ostream& out) {
  if (!c.s) throw ArgumentError("opt-k needs --s (S = N * K)");
  const HyperParams h = c.hyper();
  const auto r = optimal_k(*c.s, h.momentum, h.step_size, h.num_learners,
                           h.batch_size, bound_inputs(c));
  if (profile) {
    out << "K,N,feasible,bound_total\n";
    for (const auto& e : r.profile)
      out << e.K << ',' << e.N << ',' << bool01(e.feasible) << ','
          << format_number(e.bound) << '\n';
  } else {
    out << "k_opt,n,bound_total\n"
        << r.K << ',' << *c.s / r.K << ',' << format_number(r.bound) << '\n';
  }
  return kExitOk;
}

int cmd_mu_vs_p(const Config& c, std::ostream& out) {
  if (!c.s_total) throw ArgumentError("mu-vs-p needs --s-total");
  const HyperParams h = c.hyper();
  MuSearchOptions options;
  options.refine = c.refine.value_or(false);
  const auto r = mu_star_vs_P(
      *c.s_total, h.step_size, h.batch_size, h.local_steps, c.p0.value_or(4),
      c.lambdas.value_or(std::vector<std::size_t>{1, 2, 4}), bound_inputs(c),
      options);
  out << "lambda,P,N,mu_star,bound_total,nondecreasing\n";
  for (const auto& e : r.entries)
    out << e.lambda << ',' << e.P << ',' << e.N << ','
        << format_number(e.mu_star) << ',' << format_number(e.bound) << ','
        << bool01(r.nondecreasing) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Block-momentum K-step averaging SGD simulator and bound tools",
               "mavg"};
  app.require_subcommand(1, 1);
  app.fallthrough(false);

  Config flags;
  std::optional<std::string> config_path;
  auto add_config = [&](CLI::App* sub) {
    opt(sub, "--config", config_path, "JSON config file; flags override it");
  };

  auto* run_cmd = app.add_subcommand("run", "simulate one M-AVG run");
  add_config(run_cmd);
  objective_flags(run_cmd, flags);
  hyper_flags(run_cmd, flags);
  opt(run_cmd, "--seed", flags.seed, "master seed");
  opt(run_cmd, "--threads", flags.threads, "learner worker threads");
  output_flag(run_cmd, flags);
  flag(run_cmd, "--record-time", flags.record_time,
       "fill wallclock_s (makes traces nondeterministic)");
  flag(run_cmd, "--dump-vectors", flags.dump_vectors,
       "write trace_vectors.txt with w_n, d_n, v_{n+1}");

  auto* sweep_cmd = app.add_subcommand("sweep", "hyperparameter sweep");
  add_config(sweep_cmd);
  objective_flags(sweep_cmd, flags);
  hyper_flags(sweep_cmd, flags);
  opt(sweep_cmd, "--sweep-p", flags.sweep_p, "P values");
  opt(sweep_cmd, "--sweep-b", flags.sweep_b, "B values");
  opt(sweep_cmd, "--sweep-k", flags.sweep_k, "K values");
  opt(sweep_cmd, "--sweep-eta", flags.sweep_eta, "eta values");
  opt(sweep_cmd, "--sweep-mu", flags.sweep_mu, "mu values");
  opt(sweep_cmd, "--seeds", flags.seeds, "master seeds (default 1..20)");
  opt(sweep_cmd, "--loss-threshold", flags.loss_threshold,
      "record iterations to reach this loss");
  opt(sweep_cmd, "--threads", flags.threads, "cell worker threads");
  output_flag(sweep_cmd, flags);

  auto* race_cmd =
      app.add_subcommand("race", "iterations-to-threshold by momentum");
  add_config(race_cmd);
  objective_flags(race_cmd, flags);
  hyper_flags(race_cmd, flags);
  opt(race_cmd, "--mu-list", flags.mu_list, "momenta to race against 0");
  opt(race_cmd, "--seeds", flags.seeds, "master seeds (default 1..10)");
  opt(race_cmd, "--loss-threshold", flags.loss_threshold,
      "target loss (default: the objective's documented threshold)");
  opt(race_cmd, "--threads", flags.threads, "worker threads");
  output_flag(race_cmd, flags);

  auto* bound_cmd = app.add_subcommand("bound", "evaluate the bound terms");
  add_config(bound_cmd);
  hyper_flags(bound_cmd, flags);
  bound_flags(bound_cmd, flags);
  objective_flags(bound_cmd, flags);

  std::string condition = "stepsize";
  auto* check_cmd = app.add_subcommand("check", "feasibility conditions");
  add_config(check_cmd);
  hyper_flags(check_cmd, flags);
  bound_flags(check_cmd, flags);
  objective_flags(check_cmd, flags);
  opt(check_cmd, "--s", flags.s, "S = N * K for --condition k-opt");
  check_cmd->add_option("--condition", condition,
                        "stepsize | opt-mu | k-opt");

  bool profile = false;
  auto* opt_mu_cmd = app.add_subcommand("opt-mu", "bound-optimal momentum");
  add_config(opt_mu_cmd);
  hyper_flags(opt_mu_cmd, flags);
  bound_flags(opt_mu_cmd, flags);
  objective_flags(opt_mu_cmd, flags);
  flag(opt_mu_cmd, "--refine", flags.refine, "golden-section refinement");
  opt_mu_cmd->add_flag("--profile", profile, "print the full grid");

  auto* opt_k_cmd =
      app.add_subcommand("opt-k", "bound-optimal K at fixed S = N * K");
  add_config(opt_k_cmd);
  hyper_flags(opt_k_cmd, flags);
  bound_flags(opt_k_cmd, flags);
  objective_flags(opt_k_cmd, flags);
  opt(opt_k_cmd, "--s", flags.s, "S = N * K");
  opt_k_cmd->add_flag("--profile", profile, "print every divisor K");

  auto* mu_vs_p_cmd = app.add_subcommand(
      "mu-vs-p", "optimal momentum as P grows at fixed N * P * B * K");
  add_config(mu_vs_p_cmd);
  hyper_flags(mu_vs_p_cmd, flags);
  bound_flags(mu_vs_p_cmd, flags);
  objective_flags(mu_vs_p_cmd, flags);
  opt(mu_vs_p_cmd, "--s-total", flags.s_total, "S = N * P * B * K");
  opt(mu_vs_p_cmd, "--p0", flags.p0, "base learner count");
  opt(mu_vs_p_cmd, "--lambdas", flags.lambdas, "P multipliers");
  flag(mu_vs_p_cmd, "--refine", flags.refine, "golden-section refinement");

  std::vector<std::string> plot_inputs;
  std::string plot_out;
  PlotOptions plot_options;
  auto* plot_cmd = app.add_subcommand("plot", "render CSV output as SVG");
  plot_cmd->add_option("inputs", plot_inputs, "trace, race or aggregate CSVs")
      ->required();
  plot_cmd->add_option("--out", plot_out, "SVG path (default: <input>.svg)");
  plot_cmd->add_option("--x", plot_options.x, "x column");
  plot_cmd->add_option("--y", plot_options.y, "y column");
  plot_cmd->add_option("--group", plot_options.group, "series column");
  plot_cmd->add_option("--title", plot_options.title, "chart title");

  std::string objectives_out = "data";
  auto* objectives_cmd = app.add_subcommand(
      "objectives", "write objective constant files and the logistic dataset");
  objectives_cmd->add_option("--out", objectives_out, "directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << '\n' << app.help();
    return kExitArgument;
  }

  try {
    Config c;
    if (config_path) c = load_config(*config_path);
    c.merge(flags);

    if (*run_cmd) return cmd_run(c, out);
    if (*sweep_cmd) return cmd_sweep(c, out);
    if (*race_cmd) return cmd_race(c, out);
    if (*bound_cmd) return cmd_bound(c, out);
    if (*check_cmd) return cmd_check(c, condition, out);
    if (*opt_mu_cmd) return cmd_opt_mu(c, profile, out);
    if (*opt_k_cmd) return cmd_opt_k(c, profile, out);
    if (*mu_vs_p_cmd) return cmd_mu_vs_p(c, out);
    if (*plot_cmd) {
      std::vector<fs::path> files(plot_inputs.begin(), plot_inputs.end());
      const fs::path target =
          plot_out.empty() ? fs::path(files.front()).replace_extension(".svg")
                           : fs::path(plot_out);
      write_file(target, render_svg(chart_from_files(files, plot_options)));
      out << target.string() << '\n';
      return kExitOk;
    }
    if (*objectives_cmd) {
      export_registry(objectives_out);
      out << objectives_out << '\n';
      return kExitOk;
    }
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitArgument;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitArgument;
  }
  return kExitArgument;
}

}  // namespace mavg
