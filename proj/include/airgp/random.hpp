/*
 * Copyright 2026 The airgp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace airgp {

// splitmix64; used to derive independent sub-stream seeds from one base seed
// so that adding a consumer never shifts the draws of another.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x51ed2701a9b5e02dull));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return unif_(gen_); }  // [0, 1)

  double uniform(double lo, double hi) { return lo + (hi - lo) * unif_(gen_); }

  double gaussian() { return norm_(gen_); }  // N(0, 1)

  // CN(0, 1): real and imaginary parts are independent N(0, 1/2).
  std::complex<double> complex_gaussian() {
    const double re = norm_(gen_);
    const double im = norm_(gen_);
    return {re * kInvSqrt2, im * kInvSqrt2};
  }

  std::uint64_t integer() { return gen_(); }

  std::mt19937_64& engine() { return gen_; }

 private:
  static constexpr double kInvSqrt2 = 0.7071067811865475244;
  std::mt19937_64 gen_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace airgp
