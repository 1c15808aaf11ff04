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

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace privdep {

// Thrown when a mechanism would overrun the declared privacy budget. The
// check happens before any noise is sampled or any value released.
class BudgetExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown on malformed or unreadable input data (CSV ingestion, dimension
// mismatches between data and kernel).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The sensitive input: n individuals (rows) by d coordinates (columns).
struct DataMatrix {
  Eigen::MatrixXd values;

  DataMatrix() = default;
  explicit DataMatrix(Eigen::MatrixXd v) : values(std::move(v)) {}

  int n() const { return static_cast<int>(values.rows()); }
  int d() const { return static_cast<int>(values.cols()); }

  // Enforces n >= 2 and finiteness of every entry.
  void validate() const;
};

}  // namespace privdep
