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

#include "mavg/objectives.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace mavg {

double Objective::value(std::span<const double> w) const {
  require_dim(w, spec_.dim, "value");
  return do_value(w);
}

Vec Objective::gradient(std::span<const double> w) const {
  Vec g(spec_.dim);
  gradient_into(w, g);
  return g;
}

void Objective::gradient_into(std::span<const double> w,
                              std::span<double> out) const {
  require_dim(w, spec_.dim, "gradient");
  require_dim(out, spec_.dim, "gradient output");
  do_gradient(w, out);
}

Vec Objective::sample_gradient(std::span<const double> w, Stream& rng) const {
  Vec g(spec_.dim);
  sample_gradient_into(w, rng, g);
  return g;
}

void Objective::sample_gradient_into(std::span<const double> w, Stream& rng,
                                     std::span<double> out) const {
  require_dim(w, spec_.dim, "sample_gradient");
  require_dim(out, spec_.dim, "sample_gradient output");
  do_sample(w, rng, out);
}

void Objective::do_sample(std::span<const double> w, Stream& rng,
                          std::span<double> out) const {
  do_gradient(w, out);
  if (spec_.noise_sigma2 == 0.0) return;
  const double scale =
      std::sqrt(spec_.noise_sigma2 / static_cast<double>(spec_.dim));
  for (double& g : out) g += scale * rng.normal();
}

bool Objective::in_domain(std::span<const double> w) const {
  if (!spec_.domain_radius) return true;
  return norm_sq(w) <= *spec_.domain_radius * *spec_.domain_radius;
}

namespace {

class Quadratic final : public Objective {
 public:
  using Objective::Objective;

  ObjectivePtr with_noise(double sigma2) const override {
    ObjectiveSpec s = spec_;
    s.noise_sigma2 = sigma2;
    return std::make_shared<Quadratic>(std::move(s));
  }

 protected:
  double do_value(std::span<const double> w) const override {
    return 0.5 * norm_sq(w);
  }
  void do_gradient(std::span<const double> w,
                   std::span<double> out) const override {
    std::copy(w.begin(), w.end(), out.begin());
  }
};

// log cosh(x) = |x| + log1p(exp(-2|x|)) - log 2, stable for large |x|.
inline double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

class LogCosh final : public Objective {
 public:
  using Objective::Objective;

  ObjectivePtr with_noise(double sigma2) const override {
    ObjectiveSpec s = spec_;
    s.noise_sigma2 = sigma2;
    return std::make_shared<LogCosh>(std::move(s));
  }

 protected:
  double do_value(std::span<const double> w) const override {
    double f = 0.0;
    for (double x : w) f += log_cosh(x);
    return f;
  }
  void do_gradient(std::span<const double> w,
                   std::span<double> out) const override {
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = std::tanh(w[i]);
  }
};

inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

class Logistic final : public Objective {
 public:
  Logistic(ObjectiveSpec spec, std::shared_ptr<const LogisticDataset> data)
      : Objective(std::move(spec)), data_(std::move(data)) {}

  ObjectivePtr with_noise(double) const override {
    throw ArgumentError(
        "logistic: noise is set by the dataset and cannot be overridden");
  }

 protected:
  double do_value(std::span<const double> w) const override {
    double f = 0.0;
    for (std::size_t i = 0; i < data_->rows; ++i) {
      const double z = dot(data_->row(i), w);
      f += softplus(z) - data_->labels[i] * z;
    }
    return f / static_cast<double>(data_->rows);
  }

  void do_gradient(std::span<const double> w,
                   std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < data_->rows; ++i) {
      const auto x = data_->row(i);
      const double r = sigmoid(dot(x, w)) - data_->labels[i];
      for (std::size_t k = 0; k < x.size(); ++k) out[k] += r * x[k];
    }
    const double inv = 1.0 / static_cast<double>(data_->rows);
    for (double& g : out) g *= inv;
  }

  void do_sample(std::span<const double> w, Stream& rng,
                 std::span<double> out) const override {
    const auto i = static_cast<std::size_t>(rng.below(data_->rows));
    const auto x = data_->row(i);
    const double r = sigmoid(dot(x, w)) - data_->labels[i];
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = r * x[k];
  }

 private:
  std::shared_ptr<const LogisticDataset> data_;
};

}  // namespace

ObjectivePtr make_quadratic(std::size_t dim, double radius, double sigma2) {
  if (dim == 0 || !(radius > 0.0) || sigma2 < 0.0)
    throw ArgumentError("quadratic: need dim >= 1, radius > 0, sigma2 >= 0");
  ObjectiveSpec s;
  s.name = "quadratic";
  s.dim = dim;
  s.lipschitz_L = 1.0;
  s.grad_bound_M = radius * radius;
  s.domain_radius = radius;
  s.noise_sigma2 = sigma2;
  s.f_star = 0.0;
  // Start halfway to the domain boundary along the diagonal.
  s.init_point.assign(dim, 0.5 * radius / std::sqrt(static_cast<double>(dim)));
  s.race_threshold = 1e-2;
  return std::make_shared<Quadratic>(std::move(s));
}

ObjectivePtr make_logcosh(std::size_t dim, double sigma2, double init_coord) {
  if (dim == 0 || sigma2 < 0.0)
    throw ArgumentError("logcosh: need dim >= 1, sigma2 >= 0");
  ObjectiveSpec s;
  s.name = "logcosh";
  s.dim = dim;
  s.lipschitz_L = 1.0;
  s.grad_bound_M = static_cast<double>(dim);
  s.noise_sigma2 = sigma2;
  s.f_star = 0.0;
  s.init_point.assign(dim, init_coord);
  s.race_threshold = 1e-2;
  return std::make_shared<LogCosh>(std::move(s));
}

LogisticDataset generate_logistic_dataset(std::uint64_t seed, std::size_t rows,
                                          std::size_t cols,
                                          double flip_fraction) {
  if (rows == 0 || cols == 0)
    throw ArgumentError("logistic dataset: empty shape");
  LogisticDataset data;
  data.rows = rows;
  data.cols = cols;
  Stream rng({seed, 0xFFFFFFFFu, 0});
  data.truth.resize(cols);
  const double truth_scale = 2.0 / std::sqrt(static_cast<double>(cols));
  for (double& t : data.truth) t = truth_scale * rng.normal();
  data.features.resize(rows * cols);
  for (double& x : data.features) x = rng.normal();
  data.labels.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const bool positive = dot(data.row(i), data.truth) > 0.0;
    const bool flip = rng.uniform() < flip_fraction;
    data.labels[i] = (positive != flip) ? 1.0 : 0.0;
  }
  return data;
}

namespace {

// Full-batch gradient descent at step 1/L; the loss is convex, so this
// settles on the empirical minimum used to place the race threshold.
double estimate_min_value(const Objective& f) {
  Vec w(f.dim(), 0.0), g(f.dim());
  const double step = 1.0 / f.spec().lipschitz_L;
  for (int it = 0; it < 20000; ++it) {
    f.gradient_into(w, g);
    if (norm_sq(g) < 1e-20) break;
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= step * g[k];
  }
  return f.value(w);
}

}  // namespace

ObjectivePtr make_logistic(LogisticDataset data) {
  for (double y : data.labels)
    if (y != 0.0 && y != 1.0)
      throw ArgumentError("logistic dataset: labels must be 0 or 1");
  const auto n = static_cast<double>(data.rows);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      x(data.features.data(), static_cast<Eigen::Index>(data.rows),
        static_cast<Eigen::Index>(data.cols));
  const Eigen::MatrixXd gram = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram,
                                                     Eigen::EigenvaluesOnly);
  double mean_norm = 0.0, mean_norm_sq = 0.0;
  for (std::size_t i = 0; i < data.rows; ++i) {
    const double s = norm_sq(data.row(i));
    mean_norm += std::sqrt(s);
    mean_norm_sq += s;
  }
  mean_norm /= n;
  mean_norm_sq /= n;

  ObjectiveSpec s;
  s.name = "logistic";
  s.dim = data.cols;
  // sigma'(z) <= 1/4 bounds the Hessian by X^T X / (4n).
  s.lipschitz_L = eig.eigenvalues().maxCoeff() / (4.0 * n);
  // |sigma(z) - y| <= 1, so |grad| <= mean |x_i| and E|grad_i|^2 <= mean |x_i|^2.
  s.grad_bound_M = mean_norm * mean_norm;
  s.noise_model = NoiseModel::kDataSample;
  s.noise_sigma2 = mean_norm_sq;
  s.f_star = 0.0;
  s.init_point.assign(data.cols, 0.0);

  auto shared = std::make_shared<const LogisticDataset>(std::move(data));
  auto obj = std::make_shared<Logistic>(s, shared);
  const double f_min = estimate_min_value(*obj);
  const double f_init = obj->value(s.init_point);
  s.race_threshold = f_min + 0.05 * (f_init - f_min);
  return std::make_shared<Logistic>(std::move(s), std::move(shared));
}

ObjectivePtr make_logistic() {
  static const ObjectivePtr cached = make_logistic(generate_logistic_dataset());
  return cached;
}

std::vector<ObjectivePtr> registry() {
  return {make_quadratic(), make_logcosh(), make_logistic()};
}

ObjectivePtr find_objective(const std::string& name,
                            const ObjectiveOverrides& overrides) {
  ObjectivePtr obj;
  if (name == "quadratic")
    obj = make_quadratic();
  else if (name == "logcosh")
    obj = make_logcosh();
  else if (name == "logistic")
    obj = make_logistic();
  else
    throw ArgumentError("unknown objective '" + name +
                        "' (expected quadratic, logcosh or logistic)");
  if (overrides.noise_sigma2) {
    if (*overrides.noise_sigma2 < 0.0)
      throw ArgumentError("noise sigma2 must be >= 0");
    obj = obj->with_noise(*overrides.noise_sigma2);
  }
  return obj;
}

std::string to_string(NoiseModel m) {
  return m == NoiseModel::kAdditiveGaussian ? "additive-gaussian"
                                            : "data-sample";
}

NoiseModel noise_model_from_string(const std::string& s) {
  if (s == "additive-gaussian") return NoiseModel::kAdditiveGaussian;
  if (s == "data-sample") return NoiseModel::kDataSample;
  throw ArgumentError("unknown noise model '" + s + "'");
}

}  // namespace mavg
