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

namespace privdep {

// Standard normal quantile (inverse CDF), Wichura's AS 241 (PPND16),
// accurate to full double precision. Requires p in (0, 1).
double normal_quantile(double p);

// Standard normal CDF.
double normal_cdf(double x);

// log C(n, k) for real-valued arguments via lgamma. Requires
// n + 1 > 0, k + 1 > 0 and n - k + 1 > 0.
double log_binomial(double n, double k);

// Exact binomial coefficient as a double (integer arguments, multiplicative
// evaluation). Exact whenever the result is below 2^53.
double binomial(int n, int k);

}  // namespace privdep
