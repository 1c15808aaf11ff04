//
// Copyright 2026 The privdep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "privdep/csv.hpp"

#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace privdep {

void DataMatrix::validate() const {
  if (n() < 2) throw DataError("DataMatrix: need at least 2 rows");
  if (!values.allFinite()) {
    throw DataError("DataMatrix: non-finite entry");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_double(std::string_view field, double* out) {
  field = trim(field);
  if (field.empty()) return false;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, *out);
  return ec == std::errc() && ptr == last;
}

bool parse_row(const std::string& line, std::vector<double>* row) {
  row->clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view field(line.data() + start,
                                 (comma == std::string::npos ? line.size()
                                                             : comma) -
                                     start);
    double value = 0.0;
    if (!parse_double(field, &value)) return false;
    row->push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return true;
}

bool blank(const std::string& line) {
  return trim(line).empty();
}

}  // namespace

DataMatrix parse_csv(std::istream& in, const std::string& origin) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first_content_line = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    std::vector<double> row;
    if (!parse_row(line, &row)) {
      if (first_content_line) {
        // Single header row allowed.
        first_content_line = false;
        continue;
      }
      throw DataError(origin + ":" + std::to_string(lineno) +
                      ": non-numeric field");
    }
    first_content_line = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError(origin + ":" + std::to_string(lineno) +
                      ": ragged row (expected " +
                      std::to_string(rows.front().size()) + " fields, got " +
                      std::to_string(row.size()) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(origin + ": no data rows");
  DataMatrix data;
  data.values.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.front().size(); ++j) {
      data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  data.validate();
  return data;
}

DataMatrix read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return parse_csv(in, path);
}

}  // namespace privdep
