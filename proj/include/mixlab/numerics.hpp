// Copyright 2026 The mixlab Authors
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

// Small numerical helpers shared by the modules: Gauss-Legendre rules,
// least-squares line fits, seeded random streams and a deterministic
// parallel loop.

#ifndef MIXLAB_NUMERICS_HPP_
#define MIXLAB_NUMERICS_HPP_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace mixlab {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kGoldenRatio = 1.61803398874989484820458683436563812;

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree
// 2n - 1.
GaussRule gauss_legendre(int n);

// Integrates f over [a, b] with an n-point Gauss-Legendre rule.
template <typename F>
auto gauss_integrate(const GaussRule& rule, double a, double b, F&& f) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  using R = decltype(f(mid));
  R acc{};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return acc * half;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

// Ordinary least squares y = intercept + slope * x.  A perfect fit (zero
// residual) reports r2 = 1 even when y has zero variance.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// SplitMix64 finalizer, used to derive independent per-task seeds from a
// master seed: seed_i = splitmix64(master + i).
std::uint64_t splitmix64(std::uint64_t x);

// Seeded random stream with platform-independent uniform/normal draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::uint64_t next() { return engine_(); }
  // Box-Muller; the spare value is discarded to keep the stream simple.
  double normal();
  Complex complex_normal() { return {normal(), normal()}; }

 private:
  std::mt19937_64 engine_;
};

// Runs body(i) for i in [0, count) on up to `threads` workers.  Work is
// statically partitioned, so results written into per-index slots are
// identical for every thread count.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body);

// Thread count from MIXLAB_THREADS, or 1 when unset or malformed.
int default_threads();

}  // namespace mixlab

#endif  // MIXLAB_NUMERICS_HPP_
