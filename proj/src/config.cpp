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

#include "mavg/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <type_traits>

#include "mavg/csv.hpp"
#include "mavg/errors.hpp"

namespace mavg {

using nlohmann::ordered_json;

namespace {

template <typename T>
void take(std::optional<T>& dst, const std::optional<T>& src) {
  if (src) dst = src;
}

// nlohmann converts -1 to a huge size_t without complaint.
template <typename T>
bool unsigned_ok(const ordered_json& v) {
  if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> &&
                !std::is_same_v<T, bool>) {
    return v.is_number_unsigned();
  } else if constexpr (requires { typename T::value_type; } &&
                       !std::is_same_v<T, std::string>) {
    if (!v.is_array()) return false;
    for (const auto& e : v)
      if (!unsigned_ok<typename T::value_type>(e)) return false;
    return true;
  } else {
    return true;
  }
}

template <typename T>
void read_key(const ordered_json& j, const char* key, std::optional<T>& dst) {
  if (!j.contains(key)) return;
  if (!unsigned_ok<T>(j.at(key)))
    throw ArgumentError(std::string("config key '") + key +
                        "' needs nonnegative integers");
  try {
    dst = j.at(key).get<T>();
  } catch (const ordered_json::exception&) {
    throw ArgumentError(std::string("config key '") + key +
                        "' has the wrong type");
  }
}

template <typename T>
void write_key(ordered_json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace

void Config::merge(const Config& o) {
  take(objective, o.objective);
  take(noise_sigma2, o.noise_sigma2);
  take(p, o.p);
  take(b, o.b);
  take(k, o.k);
  take(n, o.n);
  take(eta, o.eta);
  take(mu, o.mu);
  take(seed, o.seed);
  take(threads, o.threads);
  take(L, o.L);
  take(M, o.M);
  take(sigma2, o.sigma2);
  take(deltaf, o.deltaf);
  take(delta, o.delta);
  take(sweep_p, o.sweep_p);
  take(sweep_b, o.sweep_b);
  take(sweep_k, o.sweep_k);
  take(sweep_eta, o.sweep_eta);
  take(sweep_mu, o.sweep_mu);
  take(seeds, o.seeds);
  take(loss_threshold, o.loss_threshold);
  take(mu_list, o.mu_list);
  take(s, o.s);
  take(s_total, o.s_total);
  take(p0, o.p0);
  take(lambdas, o.lambdas);
  take(refine, o.refine);
  take(output, o.output);
  take(record_time, o.record_time);
  take(dump_vectors, o.dump_vectors);
}

HyperParams Config::hyper() const {
  HyperParams h;
  h.num_learners = p.value_or(4);
  h.batch_size = b.value_or(16);
  h.local_steps = k.value_or(8);
  h.step_size = eta.value_or(0.01);
  h.momentum = mu.value_or(0.0);
  h.meta_iters = n.value_or(100);
  h.master_seed = seed.value_or(1);
  return h;
}

ObjectiveOverrides Config::objective_overrides() const {
  return {noise_sigma2};
}

Config parse_config(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ArgumentError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ArgumentError("config must be a JSON object");
  static const char* kKeys[] = {
      "objective", "noise_sigma2", "p",       "b",        "k",
      "n",         "eta",          "mu",      "seed",     "threads",
      "L",         "M",            "sigma2",  "deltaf",   "delta",
      "sweep",     "seeds",        "loss_threshold",      "mu_list",
      "s",         "s_total",      "p0",      "lambdas",  "refine",
      "output",    "record_time",  "dump_vectors"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys))
      throw ArgumentError("unknown config key '" + key + "'");
  }
  Config c;
  read_key(j, "objective", c.objective);
  read_key(j, "noise_sigma2", c.noise_sigma2);
  read_key(j, "p", c.p);
  read_key(j, "b", c.b);
  read_key(j, "k", c.k);
  read_key(j, "n", c.n);
  read_key(j, "eta", c.eta);
  read_key(j, "mu", c.mu);
  read_key(j, "seed", c.seed);
  read_key(j, "threads", c.threads);
  read_key(j, "L", c.L);
  read_key(j, "M", c.M);
  read_key(j, "sigma2", c.sigma2);
  read_key(j, "deltaf", c.deltaf);
  read_key(j, "delta", c.delta);
  if (j.contains("sweep")) {
    const auto& sw = j.at("sweep");
    if (!sw.is_object()) throw ArgumentError("config 'sweep' must be an object");
    for (const auto& [key, value] : sw.items())
      if (key != "p" && key != "b" && key != "k" && key != "eta" && key != "mu")
        throw ArgumentError("unknown sweep axis '" + key + "'");
    read_key(sw, "p", c.sweep_p);
    read_key(sw, "b", c.sweep_b);
    read_key(sw, "k", c.sweep_k);
    read_key(sw, "eta", c.sweep_eta);
    read_key(sw, "mu", c.sweep_mu);
  }
  read_key(j, "seeds", c.seeds);
  read_key(j, "loss_threshold", c.loss_threshold);
  read_key(j, "mu_list", c.mu_list);
  read_key(j, "s", c.s);
  read_key(j, "s_total", c.s_total);
  read_key(j, "p0", c.p0);
  read_key(j, "lambdas", c.lambdas);
  read_key(j, "refine", c.refine);
  read_key(j, "output", c.output);
  read_key(j, "record_time", c.record_time);
  read_key(j, "dump_vectors", c.dump_vectors);
  return c;
}

Config load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

std::string config_json(const Config& c) {
  ordered_json j = ordered_json::object();
  write_key(j, "objective", c.objective);
  write_key(j, "noise_sigma2", c.noise_sigma2);
  write_key(j, "p", c.p);
  write_key(j, "b", c.b);
  write_key(j, "k", c.k);
  write_key(j, "n", c.n);
  write_key(j, "eta", c.eta);
  write_key(j, "mu", c.mu);
  write_key(j, "seed", c.seed);
  write_key(j, "threads", c.threads);
  write_key(j, "L", c.L);
  write_key(j, "M", c.M);
  write_key(j, "sigma2", c.sigma2);
  write_key(j, "deltaf", c.deltaf);
  write_key(j, "delta", c.delta);
  if (c.sweep_p || c.sweep_b || c.sweep_k || c.sweep_eta || c.sweep_mu) {
    ordered_json sw = ordered_json::object();
    write_key(sw, "p", c.sweep_p);
    write_key(sw, "b", c.sweep_b);
    write_key(sw, "k", c.sweep_k);
    write_key(sw, "eta", c.sweep_eta);
    write_key(sw, "mu", c.sweep_mu);
    j["sweep"] = sw;
  }
  write_key(j, "seeds", c.seeds);
  write_key(j, "loss_threshold", c.loss_threshold);
  write_key(j, "mu_list", c.mu_list);
  write_key(j, "s", c.s);
  write_key(j, "s_total", c.s_total);
  write_key(j, "p0", c.p0);
  write_key(j, "lambdas", c.lambdas);
  write_key(j, "refine", c.refine);
  write_key(j, "output", c.output);
  write_key(j, "record_time", c.record_time);
  write_key(j, "dump_vectors", c.dump_vectors);
  return j.dump(2) + "\n";
}

}  // namespace mavg
