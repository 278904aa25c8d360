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

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "mavg/csv.hpp"
#include "mavg/errors.hpp"
#include "mavg/objectives.hpp"

using namespace mavg;
namespace fs = std::filesystem;

namespace {

Vec random_point(Stream& rng, std::size_t d, double scale) {
  Vec w(d);
  for (double& x : w) x = scale * (2.0 * rng.uniform() - 1.0);
  return w;
}

// Random point inside the ball of the given radius.
Vec random_in_ball(Stream& rng, std::size_t d, double radius) {
  Vec w(d);
  for (double& x : w) x = rng.normal();
  const double r = radius * std::pow(rng.uniform(), 1.0 / d) / norm(w);
  for (double& x : w) x *= r;
  return w;
}

double naive_logistic_loss(const LogisticDataset& data, const Vec& w) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.rows; ++i) {
    double z = 0.0;
    for (std::size_t k = 0; k < data.cols; ++k)
      z += data.features[i * data.cols + k] * w[k];
    const double sign = data.labels[i] == 1.0 ? 1.0 : -1.0;
    total += std::log(1.0 + std::exp(-sign * z));
  }
  return total / static_cast<double>(data.rows);
}

fs::path source_dir() { return MAVG_SOURCE_DIR; }

}  // namespace

TEST_CASE("values and gradients at known points") {
  const auto lc = make_logcosh();
  CHECK(lc->value(Vec(20, 0.0)) == 0.0);
  CHECK(lc->gradient(Vec(20, 0.0)) == Vec(20, 0.0));

  const auto q = make_quadratic(2, 10.0, 0.0);
  CHECK(q->value(Vec{3, 4}) == doctest::Approx(12.5).epsilon(1e-15));
  CHECK(q->gradient(Vec{3, 4}) == Vec{3, 4});

  CHECK_THROWS_AS(q->value(Vec{1, 2, 3}), ArgumentError);
  CHECK_THROWS_AS(lc->gradient(Vec{1.0}), ArgumentError);
}

TEST_CASE("logistic value matches a straight-line loss evaluation") {
  const auto data = generate_logistic_dataset();
  const auto f = make_logistic();
  CHECK(f->value(data.truth) ==
        doctest::Approx(naive_logistic_loss(data, data.truth)).epsilon(1e-12));
  CHECK(f->value(Vec(20, 0.0)) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("gradients match central finite differences") {
  Stream rng({77, 0, 0});
  const double h = 1e-5;
  for (const auto& f : registry()) {
    CAPTURE(f->spec().name);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec w = random_point(rng, f->dim(), 2.0);
      const Vec g = f->gradient(w);
      Vec fd(f->dim());
      for (std::size_t i = 0; i < w.size(); ++i) {
        Vec a = w, b = w;
        a[i] += h;
        b[i] -= h;
        fd[i] = (f->value(a) - f->value(b)) / (2.0 * h);
      }
      Vec diff(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) diff[i] = g[i] - fd[i];
      REQUIRE(norm(diff) <= 1e-5 * std::max(1.0, norm(g)));
    }
  }
}

TEST_CASE("gradient Lipschitz constants hold on random pairs") {
  Stream rng({78, 0, 0});
  for (const auto& f : registry()) {
    CAPTURE(f->spec().name);
    const double L = f->spec().lipschitz_L;
    const double r = f->spec().domain_radius.value_or(5.0);
    for (int trial = 0; trial < 1000; ++trial) {
      const Vec x = random_in_ball(rng, f->dim(), r);
      const Vec y = random_in_ball(rng, f->dim(), r);
      const Vec gx = f->gradient(x), gy = f->gradient(y);
      Vec dg(x.size()), dx(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        dg[i] = gx[i] - gy[i];
        dx[i] = x[i] - y[i];
      }
      REQUIRE(norm(dg) <= L * norm(dx) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("squared gradient norm stays under M in the domain") {
  Stream rng({79, 0, 0});
  for (const auto& f : registry()) {
    CAPTURE(f->spec().name);
    const double r = f->spec().domain_radius.value_or(50.0);
    for (int trial = 0; trial < 1000; ++trial) {
      const Vec x = random_in_ball(rng, f->dim(), r);
      REQUIRE(norm_sq(f->gradient(x)) <= f->spec().grad_bound_M);
    }
  }
}

TEST_CASE("noiseless oracle returns the exact gradient") {
  const auto f = make_logcosh(20, 0.0);
  Stream rng({1, 1, 1});
  const Vec w(20, 0.7);
  CHECK(f->sample_gradient(w, rng) == f->gradient(w));
  CHECK(rng.blocks_used() == 0);
}

TEST_CASE("stochastic oracles are unbiased with variance at most sigma^2") {
  const int draws = 100000;
  Stream pick({80, 0, 0});
  for (const auto& f : registry()) {
    CAPTURE(f->spec().name);
    const std::size_t d = f->dim();
    const Vec w = random_point(pick, d, 1.0);
    const Vec g = f->gradient(w);
    Stream rng({81, 2, 3});
    Vec mean(d, 0.0);
    double second = 0.0;
    for (int i = 0; i < draws; ++i) {
      const Vec s = f->sample_gradient(w, rng);
      for (std::size_t k = 0; k < d; ++k) mean[k] += s[k];
      second += norm_sq(s);
    }
    for (double& m : mean) m /= draws;
    second /= draws;
    const double sigma2 = f->spec().noise_sigma2;
    Vec diff(d);
    for (std::size_t k = 0; k < d; ++k) diff[k] = mean[k] - g[k];
    CHECK(norm(diff) <= 3.0 * std::sqrt(sigma2 / draws) * std::sqrt(d));
    // Unbiased estimate of E|g(w; xi)|^2 - |grad F(w)|^2.
    const double variance = second - norm_sq(mean);
    CHECK(variance <= sigma2 * (1.0 + 5.0 * std::sqrt(2.0 / draws)));
  }
}

TEST_CASE("registry lists the three objectives with their constants") {
  const auto lc = find_objective("logcosh");
  CHECK(lc->spec().grad_bound_M == 20.0);
  CHECK(lc->spec().lipschitz_L == 1.0);
  const auto q = find_objective("quadratic");
  CHECK(q->spec().lipschitz_L == 1.0);
  CHECK(q->spec().grad_bound_M == 100.0);
  CHECK(find_objective("logistic")->spec().noise_model ==
        NoiseModel::kDataSample);
  CHECK_THROWS_AS(find_objective("rosenbrock"), ArgumentError);
  CHECK(find_objective("logcosh", {.noise_sigma2 = 0.5})->spec().noise_sigma2 ==
        0.5);
  CHECK_THROWS_AS(find_objective("logistic", {.noise_sigma2 = 0.5}),
                  ArgumentError);
}

TEST_CASE("logistic constants agree with sampling estimates") {
  const auto data = generate_logistic_dataset();
  const auto f = make_logistic();
  const auto& spec = f->spec();

  // Power iteration on X^T X / (4n), independent of the eigen solver.
  Vec v(data.cols, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    Vec xv(data.rows, 0.0), next(data.cols, 0.0);
    for (std::size_t i = 0; i < data.rows; ++i) xv[i] = dot(data.row(i), v);
    for (std::size_t i = 0; i < data.rows; ++i)
      for (std::size_t k = 0; k < data.cols; ++k)
        next[k] += data.features[i * data.cols + k] * xv[i];
    lambda = norm(next) / norm(v);
    const double s = norm(next);
    for (std::size_t k = 0; k < data.cols; ++k) v[k] = next[k] / s;
  }
  CHECK(spec.lipschitz_L ==
        doctest::Approx(lambda / (4.0 * data.rows)).epsilon(1e-8));

  // Per-sample gradient variance at random points never exceeds sigma^2.
  Stream rng({82, 0, 0});
  for (int trial = 0; trial < 20; ++trial) {
    const Vec w = random_point(rng, data.cols, 3.0);
    const Vec g = f->gradient(w);
    double second = 0.0;
    for (std::size_t i = 0; i < data.rows; ++i) {
      const double z = dot(data.row(i), w);
      const double r = 1.0 / (1.0 + std::exp(-z)) - data.labels[i];
      second += r * r * norm_sq(data.row(i));
    }
    second /= data.rows;
    CHECK(second - norm_sq(g) <= spec.noise_sigma2);
  }
  CHECK(spec.race_threshold.has_value());
  CHECK(*spec.race_threshold < f->value(spec.init_point));
}

TEST_CASE("objective files round-trip and reject unknown keys") {
  const auto dir = fs::temp_directory_path() / "mavg_test_objectives";
  fs::remove_all(dir);
  export_registry(dir);
  for (const auto& f : registry()) {
    const auto back = read_objective_file(dir / (f->spec().name + ".json"));
    CHECK(back.name == f->spec().name);
    CHECK(back.lipschitz_L == f->spec().lipschitz_L);
    CHECK(back.grad_bound_M == f->spec().grad_bound_M);
    CHECK(back.noise_sigma2 == f->spec().noise_sigma2);
    CHECK(back.init_point == f->spec().init_point);
    CHECK(back.race_threshold == f->spec().race_threshold);
  }
  const auto data = read_dataset_csv(dir / "logistic.csv");
  const auto gen = generate_logistic_dataset();
  CHECK(data.features == gen.features);
  CHECK(data.labels == gen.labels);

  write_file(dir / "bad.json",
             R"({"format":"mavg-objective","version":1,"name":"x","typo":1})");
  CHECK_THROWS_AS(read_objective_file(dir / "bad.json"), ParseError);
  fs::remove_all(dir);
}

TEST_CASE("committed data files match regeneration") {
  const auto data_dir = source_dir() / "data";
  REQUIRE(fs::exists(data_dir / "logistic.csv"));
  const auto dir = fs::temp_directory_path() / "mavg_test_regen";
  fs::remove_all(dir);
  export_registry(dir);
  for (const char* name :
       {"quadratic.json", "logcosh.json", "logistic.json", "logistic.csv"}) {
    CAPTURE(name);
    CHECK(read_file(data_dir / name) == read_file(dir / name));
  }
  fs::remove_all(dir);
}
