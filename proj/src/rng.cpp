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

#include "privdep/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace privdep {

namespace {

// splitmix64 finalizer; decorrelates the (seed, stream) pairs used for
// substream derivation.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

Rng Rng::substream(std::uint64_t stream) const {
  return Rng(mix64(seed_ + 0x9E3779B97F4A7C15ull * (stream + 1)));
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  // 53-bit mantissa, offset by half an ulp: strictly inside (0, 1).
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::VectorXd Rng::normal_vector(int k) {
  Eigen::VectorXd v(k);
  for (int i = 0; i < k; ++i) v[i] = normal();
  return v;
}

double Rng::gumbel(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("gumbel: scale must be > 0");
  return -scale * std::log(-std::log(uniform()));
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("below: bound must be > 0");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

}  // namespace privdep
