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

#include <istream>
#include <string>

#include "privdep/types.hpp"

namespace privdep {

// Comma-separated numeric matrix, row-major, optional single header row
// (detected by a non-numeric field in the first line). Throws DataError on
// missing files, ragged rows, or non-finite entries.
DataMatrix read_csv(const std::string& path);
DataMatrix parse_csv(std::istream& in, const std::string& origin = "<stream>");

}  // namespace privdep
