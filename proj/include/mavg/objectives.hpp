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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mavg/linalg.hpp"
#include "mavg/rng.hpp"

namespace mavg {

/// How sample_gradient perturbs the exact gradient.
enum class NoiseModel {
  kAdditiveGaussian,  // grad + z, z ~ N(0, (sigma2/d) I)
  kDataSample,        // gradient of the loss on one uniformly drawn data point
};

/// An objective together with the constants that certify it: gradient
/// Lipschitz constant, squared-gradient bound, per-sample noise variance and
/// a lower bound on the value.
struct ObjectiveSpec {
  std::string name;
  std::size_t dim = 0;
  double lipschitz_L = 0.0;
  double grad_bound_M = 0.0;
  /// When set, grad_bound_M is certified only on the ball of this radius
  /// around the origin.
  std::optional<double> domain_radius;
  NoiseModel noise_model = NoiseModel::kAdditiveGaussian;
  double noise_sigma2 = 0.0;
  double f_star = 0.0;
  Vec init_point;
  /// Loss level used by iterations-to-threshold races; sits above the
  /// stochastic noise floor for the reference configurations.
  std::optional<double> race_threshold;
};

class Objective {
 public:
  explicit Objective(ObjectiveSpec spec) : spec_(std::move(spec)) {}
  virtual ~Objective() = default;

  const ObjectiveSpec& spec() const { return spec_; }
  std::size_t dim() const { return spec_.dim; }

  double value(std::span<const double> w) const;
  Vec gradient(std::span<const double> w) const;
  void gradient_into(std::span<const double> w, std::span<double> out) const;

  /// One stochastic gradient draw; deterministic given the stream state.
  Vec sample_gradient(std::span<const double> w, Stream& rng) const;
  void sample_gradient_into(std::span<const double> w, Stream& rng,
                            std::span<double> out) const;

  /// False once w leaves the ball on which grad_bound_M is certified.
  bool in_domain(std::span<const double> w) const;

  /// Copy with a different noise level; only additive-noise objectives allow
  /// this.
  virtual std::shared_ptr<const Objective> with_noise(double sigma2) const = 0;

 protected:
  virtual double do_value(std::span<const double> w) const = 0;
  virtual void do_gradient(std::span<const double> w,
                           std::span<double> out) const = 0;
  virtual void do_sample(std::span<const double> w, Stream& rng,
                         std::span<double> out) const;

  ObjectiveSpec spec_;
};

using ObjectivePtr = std::shared_ptr<const Objective>;

/// F(w) = 0.5 |w|^2 with L = 1, certified on |w| <= radius with M = radius^2.
ObjectivePtr make_quadratic(std::size_t dim = 20, double radius = 10.0,
                            double sigma2 = 0.01);

/// F(w) = sum_i log cosh(w_i) with L = 1 and M = d.
ObjectivePtr make_logcosh(std::size_t dim = 20, double sigma2 = 0.01,
                          double init_coord = 2.0);

struct LogisticDataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> features;  // row-major rows x cols
  std::vector<double> labels;    // 0 or 1
  Vec truth;                     // generator weights; empty when loaded

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * cols, cols};
  }
};

inline constexpr std::uint64_t kLogisticSeed = 20190917;

/// Standard normal features, labels from a fixed Gaussian weight vector with
/// a fraction of labels flipped.
LogisticDataset generate_logistic_dataset(std::uint64_t seed = kLogisticSeed,
                                          std::size_t rows = 1000,
                                          std::size_t cols = 20,
                                          double flip_fraction = 0.1);

/// Mean logistic loss over a fixed dataset. Constants are computed exactly
/// from the data: L = lambda_max(X^T X) / (4 n), M = (mean |x_i|)^2,
/// sigma2 = mean |x_i|^2, F* = 0.
ObjectivePtr make_logistic(LogisticDataset data);
ObjectivePtr make_logistic();

/// quadratic, logcosh, logistic with default constants.
std::vector<ObjectivePtr> registry();

struct ObjectiveOverrides {
  std::optional<double> noise_sigma2;
};

/// Looks up a registry objective by name; ArgumentError when unknown.
ObjectivePtr find_objective(const std::string& name,
                            const ObjectiveOverrides& overrides = {});

std::string to_string(NoiseModel m);
NoiseModel noise_model_from_string(const std::string& s);

// Versioned flat-file persistence.
inline constexpr int kObjectiveFileVersion = 1;

void write_objective_file(const ObjectiveSpec& spec,
                          const std::filesystem::path& path,
                          const std::string& dataset_file = {});
ObjectiveSpec read_objective_file(const std::filesystem::path& path);

/// CSV with header feature_0..feature_{d-1},label.
void write_dataset_csv(const LogisticDataset& data,
                       const std::filesystem::path& path);
LogisticDataset read_dataset_csv(const std::filesystem::path& path);

/// Writes <name>.json for every registry objective plus logistic.csv.
void export_registry(const std::filesystem::path& dir);

}  // namespace mavg
