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

#include "mavg/core.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "mavg/csv.hpp"

namespace mavg {

void HyperParams::validate() const {
  if (num_learners < 1) throw ArgumentError("P must be >= 1");
  if (batch_size < 1) throw ArgumentError("B must be >= 1");
  if (local_steps < 1) throw ArgumentError("K must be >= 1");
  if (meta_iters < 1) throw ArgumentError("N must be >= 1");
  if (!(step_size > 0.0) || !std::isfinite(step_size))
    throw ArgumentError("eta must be a finite positive number");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw ArgumentError("mu must lie in [0, 1)");
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (num_learners > kMax || meta_iters > kMax)
    throw ArgumentError("P and N must fit the 32-bit stream counter");
}

MetaState MetaState::initial(Vec weights) {
  MetaState m;
  m.momentum.assign(weights.size(), 0.0);
  m.weights = std::move(weights);
  return m;
}

StreamKey learner_stream_key(std::uint64_t master_seed, std::size_t learner,
                             std::size_t meta_iteration) {
  return {master_seed, static_cast<std::uint32_t>(learner),
          static_cast<std::uint32_t>(meta_iteration)};
}

Vec local_k_steps(std::span<const double> start, const Objective& objective,
                  const HyperParams& hyper, Stream& rng, LocalLog* log) {
  require_dim(start, objective.dim(), "local_k_steps");
  if (!(hyper.step_size >= 0.0)) throw ArgumentError("eta must be >= 0");
  const std::size_t dim = objective.dim();
  const double scale = hyper.step_size / static_cast<double>(hyper.batch_size);
  Vec w(start.begin(), start.end());
  Vec sum(dim), g(dim);
  for (std::size_t step = 1; step <= hyper.local_steps; ++step) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t s = 0; s < hyper.batch_size; ++s) {
      objective.sample_gradient_into(w, rng, g);
      for (std::size_t i = 0; i < dim; ++i) sum[i] += g[i];
    }
    for (std::size_t i = 0; i < dim; ++i) w[i] -= scale * sum[i];
    if (log) log->batch_sums.push_back(sum);
    if (!all_finite(w))
      throw DivergenceError(
          "non-finite weights at local step " + std::to_string(step), 0, step);
  }
  return w;
}

MetaState meta_step(const MetaState& meta, std::span<const Vec> endpoints,
                    const HyperParams& hyper, Vec* displacement) {
  if (endpoints.size() != hyper.num_learners)
    throw ArgumentError("meta_step: expected " +
                        std::to_string(hyper.num_learners) +
                        " endpoints, got " + std::to_string(endpoints.size()));
  const std::size_t dim = meta.weights.size();
  for (const auto& e : endpoints) require_dim(e, dim, "meta_step endpoint");
  require_dim(meta.momentum, dim, "meta_step momentum");

  const auto p = static_cast<double>(endpoints.size());
  const double mu = hyper.momentum;
  MetaState next;
  next.iteration = meta.iteration + 1;
  next.weights.resize(dim);
  next.momentum.resize(dim);
  if (displacement) displacement->resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    double acc = 0.0;
    for (const auto& e : endpoints) acc += e[i];
    const double a = acc / p;
    const double d = a - meta.weights[i];
    next.momentum[i] = mu * meta.momentum[i] + d;
    next.weights[i] = a + mu * meta.momentum[i];
    if (displacement) (*displacement)[i] = d;
  }
  if (!all_finite(next.weights) || !all_finite(next.momentum))
    throw DivergenceError("non-finite weights after meta step " +
                              std::to_string(next.iteration),
                          next.iteration, 0);
  return next;
}

double RunTrace::mean_grad_sq_norm() const {
  if (iterations.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : iterations) s += r.grad_sq_norm;
  return s / static_cast<double>(iterations.size());
}

std::size_t RunTrace::first_hit(double threshold) const {
  for (const auto& r : iterations)
    if (r.f_value <= threshold) return r.n;
  return 0;
}

namespace {

struct LearnerResult {
  Vec endpoint;
  LocalLog log;
  std::exception_ptr error;
};

void run_learner(const Objective& objective, const HyperParams& hyper,
                 const Vec& start, std::size_t learner, std::size_t n,
                 bool record_samples, LearnerResult& out) {
  try {
    Stream rng(learner_stream_key(hyper.master_seed, learner, n));
    out.endpoint = local_k_steps(start, objective, hyper, rng,
                                 record_samples ? &out.log : nullptr);
  } catch (const DivergenceError& e) {
    out.error = std::make_exception_ptr(
        DivergenceError("meta iteration " + std::to_string(n) + ", learner " +
                            std::to_string(learner) + ": " + e.what(),
                        n, e.local_step()));
  } catch (...) {
    out.error = std::current_exception();
  }
}

}  // namespace

RunTrace run(const Objective& objective, const HyperParams& hyper,
             const RunOptions& options) {
  hyper.validate();
  const auto& spec = objective.spec();
  require_dim(spec.init_point, spec.dim, "init_point");

  RunTrace trace;
  trace.objective = spec.name;
  trace.hyper = hyper;
  trace.iterations.reserve(hyper.meta_iters);

  const std::size_t P = hyper.num_learners;
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(options.threads, P));
  const auto t0 = std::chrono::steady_clock::now();

  MetaState state = MetaState::initial(spec.init_point);
  std::vector<LearnerResult> results(P);
  std::vector<Vec> endpoints(P);
  Vec grad(spec.dim);

  for (std::size_t n = 1; n <= hyper.meta_iters; ++n) {
    IterationRecord rec;
    rec.n = n;
    rec.weights = state.weights;
    rec.f_value = objective.value(state.weights);
    objective.gradient_into(state.weights, grad);
    rec.grad_sq_norm = norm_sq(grad);
    rec.assumption_violated = !objective.in_domain(state.weights);
    if (rec.assumption_violated && !trace.assumption_violated) {
      spdlog::warn(
          "{}: iterate left the certified domain at meta iteration {}; "
          "bounded-gradient assumption violated",
          spec.name, n);
      trace.assumption_violated = true;
    }

    if (workers == 1) {
      for (std::size_t j = 1; j <= P; ++j)
        run_learner(objective, hyper, state.weights, j, n,
                    options.record_samples, results[j - 1]);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::size_t t = 0; t < workers; ++t)
        pool.emplace_back([&, t] {
          for (std::size_t j = t + 1; j <= P; j += workers)
            run_learner(objective, hyper, state.weights, j, n,
                        options.record_samples, results[j - 1]);
        });
    }
    for (std::size_t j = 0; j < P; ++j) {
      if (results[j].error) std::rethrow_exception(results[j].error);
      endpoints[j] = std::move(results[j].endpoint);
      if (options.record_samples)
        for (auto& s : results[j].log.batch_sums)
          rec.batch_sums.push_back(std::move(s));
      results[j] = {};
    }

    state = meta_step(state, endpoints, hyper, &rec.displacement);
    rec.momentum = state.momentum;
    if (options.record_endpoints) rec.endpoints = endpoints;
    if (options.record_time)
      rec.wallclock_s = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    trace.iterations.push_back(std::move(rec));
  }
  trace.final_weights = std::move(state.weights);
  return trace;
}

Vec reconstruct_G(const RunTrace& trace, std::size_t n,
                  const HyperParams& hyper) {
  if (n < 1 || n > trace.iterations.size())
    throw ArgumentError("reconstruct_G: iteration out of range");
  if (!(hyper.step_size > 0.0)) throw ArgumentError("eta must be > 0");
  Vec g = trace.iterations[n - 1].displacement;
  for (double& x : g) x = -x / hyper.step_size;
  return g;
}

std::vector<Vec> auxiliary_sequence(const RunTrace& trace,
                                    const HyperParams& hyper) {
  hyper.validate();
  const double c = hyper.momentum / (1.0 - hyper.momentum);
  std::vector<Vec> z;
  z.reserve(trace.iterations.size() + 1);
  const Vec* v_prev = nullptr;
  auto make = [&](const Vec& w) {
    Vec out = w;
    if (v_prev)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * (*v_prev)[i];
    return out;
  };
  for (const auto& rec : trace.iterations) {
    z.push_back(make(rec.weights));
    v_prev = &rec.momentum;
  }
  if (!trace.iterations.empty()) z.push_back(make(trace.final_weights));
  return z;
}

std::string trace_csv(const RunTrace& trace) {
  std::ostringstream out;
  out << kTraceHeader << '\n';
  for (const auto& r : trace.iterations) {
    out << r.n << ',' << format_number(r.f_value) << ','
        << format_number(r.grad_sq_norm) << ','
        << format_number(norm(r.displacement)) << ','
        << format_number(norm(r.momentum)) << ','
        << format_number(r.wallclock_s) << ','
        << (r.assumption_violated ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_trace_csv(const RunTrace& trace, const std::filesystem::path& path) {
  write_file(path, trace_csv(trace));
}

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const auto header = split(kTraceHeader, ',');
  if (t.header != header)
    throw ParseError(path.string() + ": not a trace file (header mismatch)", 1);
  std::vector<TraceRow> rows;
  rows.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    TraceRow r;
    const double n = t.number(i, 0);
    if (n < 1 || n != std::floor(n))
      throw ParseError("bad iteration index", t.row_lines[i]);
    r.n = static_cast<std::size_t>(n);
    r.f_value = t.number(i, 1);
    r.grad_sq_norm = t.number(i, 2);
    r.d_norm = t.number(i, 3);
    r.v_norm = t.number(i, 4);
    r.wallclock_s = t.number(i, 5);
    r.assumption_violated = t.number(i, 6) != 0.0;
    rows.push_back(r);
  }
  return rows;
}

void write_trace_vectors(const RunTrace& trace,
                         const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& r : trace.iterations) {
    out << r.n;
    for (const Vec* v : {&r.weights, &r.displacement, &r.momentum})
      for (double x : *v) out << ' ' << format_17g(x);
    out << '\n';
  }
  write_file(path, out.str());
}

}  // namespace mavg
