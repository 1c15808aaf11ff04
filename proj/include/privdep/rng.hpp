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
#include <cstdint>
#include <random>

namespace privdep {

// Seeded random stream with cheap substream derivation. Substreams are
// derived from the construction seed, not from the consumption state, so a
// pipeline stage sees the same draws no matter how much an earlier stage
// consumed. Gaussian and Gumbel variates are generated from raw uniforms
// (Box-Muller / inverse CDF) so that output depends only on the seed and the
// platform's libm, not on the standard library's distribution objects.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream keyed by (construction seed, stream id).
  Rng substream(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform();

  // Standard normal via Box-Muller (two uniforms per call, no caching).
  double normal();

  Eigen::VectorXd normal_vector(int k);

  // Gumbel(0, scale) via inverse CDF on a single uniform.
  double gumbel(double scale);

  // Uniform integer on {0, ..., bound-1} by rejection sampling.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace privdep
