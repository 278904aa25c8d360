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

#include <json.hpp>

#include <set>
#include <sstream>

#include "mavg/csv.hpp"
#include "mavg/objectives.hpp"

namespace mavg {

using nlohmann::ordered_json;

void write_objective_file(const ObjectiveSpec& spec,
                          const std::filesystem::path& path,
                          const std::string& dataset_file) {
  ordered_json j;
  j["format"] = "mavg-objective";
  j["version"] = kObjectiveFileVersion;
  j["name"] = spec.name;
  j["dim"] = spec.dim;
  j["lipschitz_L"] = spec.lipschitz_L;
  j["grad_bound_M"] = spec.grad_bound_M;
  j["domain_radius"] =
      spec.domain_radius ? ordered_json(*spec.domain_radius) : ordered_json();
  j["noise_model"] = to_string(spec.noise_model);
  j["noise_sigma2"] = spec.noise_sigma2;
  j["f_star"] = spec.f_star;
  j["init_point"] = spec.init_point;
  j["race_threshold"] =
      spec.race_threshold ? ordered_json(*spec.race_threshold) : ordered_json();
  if (!dataset_file.empty()) j["dataset"] = dataset_file;
  write_file(path, j.dump(2) + "\n");
}

ObjectiveSpec read_objective_file(const std::filesystem::path& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  static const std::set<std::string> known = {
      "format",       "version",     "name",         "dim",
      "lipschitz_L",  "grad_bound_M", "domain_radius", "noise_model",
      "noise_sigma2", "f_star",      "init_point",   "race_threshold",
      "dataset"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key))
      throw ParseError(path.string() + ": unknown key '" + key + "'", 0);
  if (j.value("format", "") != "mavg-objective")
    throw ParseError(path.string() + ": not an objective file", 0);
  if (j.value("version", 0) != kObjectiveFileVersion)
    throw ParseError(path.string() + ": unsupported version", 0);
  try {
    ObjectiveSpec s;
    s.name = j.at("name").get<std::string>();
    s.dim = j.at("dim").get<std::size_t>();
    s.lipschitz_L = j.at("lipschitz_L").get<double>();
    s.grad_bound_M = j.at("grad_bound_M").get<double>();
    if (!j.at("domain_radius").is_null())
      s.domain_radius = j.at("domain_radius").get<double>();
    s.noise_model = noise_model_from_string(j.at("noise_model"));
    s.noise_sigma2 = j.at("noise_sigma2").get<double>();
    s.f_star = j.at("f_star").get<double>();
    s.init_point = j.at("init_point").get<Vec>();
    if (!j.at("race_threshold").is_null())
      s.race_threshold = j.at("race_threshold").get<double>();
    if (s.init_point.size() != s.dim)
      throw ParseError(path.string() + ": init_point has wrong dimension", 0);
    return s;
  } catch (const ordered_json::exception& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void write_dataset_csv(const LogisticDataset& data,
                       const std::filesystem::path& path) {
  std::ostringstream out;
  for (std::size_t k = 0; k < data.cols; ++k) out << "feature_" << k << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.rows; ++i) {
    for (double x : data.row(i)) out << format_number(x) << ',';
    out << (data.labels[i] != 0.0 ? 1 : 0) << '\n';
  }
  write_file(path, out.str());
}

LogisticDataset read_dataset_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.size() < 2 || t.header.back() != "label")
    throw ParseError(path.string() + ": last column must be 'label'", 1);
  LogisticDataset data;
  data.cols = t.header.size() - 1;
  for (std::size_t k = 0; k < data.cols; ++k)
    if (t.header[k] != "feature_" + std::to_string(k))
      throw ParseError(path.string() + ": bad header '" + t.header[k] + "'", 1);
  data.rows = t.rows.size();
  data.features.reserve(data.rows * data.cols);
  for (std::size_t i = 0; i < data.rows; ++i) {
    for (std::size_t k = 0; k < data.cols; ++k)
      data.features.push_back(t.number(i, k));
    data.labels.push_back(t.number(i, data.cols));
  }
  return data;
}

void export_registry(const std::filesystem::path& dir) {
  for (const auto& obj : registry()) {
    const auto& s = obj->spec();
    if (s.name == "logistic") {
      write_dataset_csv(generate_logistic_dataset(), dir / "logistic.csv");
      write_objective_file(s, dir / "logistic.json", "logistic.csv");
    } else {
      write_objective_file(s, dir / (s.name + ".json"));
    }
  }
}

}  // namespace mavg
