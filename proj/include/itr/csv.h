// Copyright 2026 The ITR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ITR_CSV_H_
#define ITR_CSV_H_

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace itr::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of `name` in the header, or nullopt.
  std::optional<std::size_t> Column(std::string_view name) const;
};

// Parses RFC-4180-style CSV (double-quoted fields, "" escapes). Blank lines
// are skipped. Throws InputError on an empty document and ValueError when a
// row has a different field count than the header.
Table Read(std::istream& in);
Table ReadFile(const std::string& path);

std::vector<std::string> SplitLine(std::string_view line);

// Quotes a field only when it contains a separator, quote or newline.
std::string Escape(std::string_view field);

// Shortest decimal representation that parses back to the same double.
std::string FormatDouble(double v);

// Fixed-point formatting with `digits` decimals.
std::string FormatFixed(double v, int digits);

// Strict parse: the whole field must be a finite number. Empty, "NA" and
// "nan" fields yield nullopt.
std::optional<double> ParseDouble(std::string_view field);

bool IsMissing(std::string_view field);

std::string_view Trim(std::string_view s);

}  // namespace itr::csv

#endif  // ITR_CSV_H_
