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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mavg {

// Shortest decimal that round-trips to the same double.
std::string format_number(double x);
// Fixed 17 significant digits.
std::string format_17g(double x);

/// Minimal CSV: comma separated, no quoting, first line is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;  // 1-based source line of each row

  /// Column index or ParseError naming the missing column.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  double number(std::size_t row, std::size_t col) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

double parse_double(std::string_view field, std::size_t line);
std::vector<std::string> split(std::string_view s, char sep);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace mavg
