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

// Group extensions of a subshift: Birkhoff sums and products, stable and
// unstable displacement and twist, the symbolic Brin set and Diophantine
// certification of finite subsets of the group.

#ifndef MIXLAB_COCYCLE_HPP_
#define MIXLAB_COCYCLE_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "mixlab/grp.hpp"
#include "mixlab/sft.hpp"
#include "mixlab/thermo.hpp"

namespace mixlab::cocycle {

using GroupFn = thermo::LocallyConstantFn<grp::GroupElement>;

struct SkewSystem {
  SkewSystem(sft::Shift shift, sft::MetricConstant lam, thermo::RealFn roof, GroupFn cocycle,
             grp::Group group);

  sft::Shift shift;
  sft::MetricConstant lam;
  thermo::RealFn roof;
  GroupFn cocycle;
  grp::Group group;

  double min_roof() const;
  double max_roof() const;
};

// Theta taking the same value everywhere.
GroupFn constant_cocycle(const sft::Shift& shift, const grp::Group& group,
                         const grp::GroupElement& value);

double lipschitz_seminorm(const GroupFn& f, const grp::Group& group,
                          const sft::MetricConstant& lam);

struct Birkhoff {
  double r_n = 0.0;
  grp::GroupElement theta_n;
};

// r_n(x) = sum_{i<n} r(sigma^i x), Theta_n(x) = Theta(sigma^{n-1} x) ... Theta(x).
Birkhoff birkhoff(const SkewSystem& sys, const sft::TwoSidedPoint& x, long n);
// The same sums starting from sigma^{-n} x:  r_n(sigma^{-n} x) and
// Theta_n(sigma^{-n} x) = Theta(sigma^{-1} x) ... Theta(sigma^{-n} x).
Birkhoff birkhoff_past(const SkewSystem& sys, const sft::TwoSidedPoint& x, long n);

enum class Side { kStable, kUnstable };
char side_char(Side s);

// True when y_i = x_i for all i >= n (stable) or all i <= -n (unstable).
bool on_local_leaf(const sft::TwoSidedPoint& x, const sft::TwoSidedPoint& y, Side side, long n);

// Exact Delta^s(x, y) = lim r_n(y) - r_n(x) and Delta^u(x, y) =
// lim r_n(sigma^{-n} x) - r_n(sigma^{-n} y).  Throws kNotOnSameLeaf.
double displacement(const SkewSystem& sys, const sft::TwoSidedPoint& x,
                    const sft::TwoSidedPoint& y, Side side);
// Theta^s(x, y) = lim Theta_n(y)^{-1} Theta_n(x) and
// Theta^u(x, y) = lim Theta_n(sigma^{-n} y) Theta_n(sigma^{-n} x)^{-1}.
grp::GroupElement twist(const SkewSystem& sys, const sft::TwoSidedPoint& x,
                        const sft::TwoSidedPoint& y, Side side);

// Partial quantities at a fixed k, for tail-bound checks.
double displacement_partial(const SkewSystem& sys, const sft::TwoSidedPoint& x,
                            const sft::TwoSidedPoint& y, Side side, long k);
grp::GroupElement twist_partial(const SkewSystem& sys, const sft::TwoSidedPoint& x,
                                const sft::TwoSidedPoint& y, Side side, long k);

// |r|_Lip / (1 - lambda) and |Theta|_Lip / (1 - lambda).
double displacement_tail_constant(const SkewSystem& sys);
double twist_tail_constant(const SkewSystem& sys);

struct ChainLink {
  sft::TwoSidedPoint point;
  Side side;  // leg from this point to the next one
};

struct BrinTwist {
  std::vector<ChainLink> chain;  // x_0, ..., x_{p-1}; x_p = x_0 is implied
  grp::GroupElement twist;
  double displacement_sum = 0.0;
};

struct BrinSearch {
  long n0 = 1;
  int p0 = 4;
  double tol = 1e-10;
  // Chain points are built from x by replacing the past (s-leg) or the
  // future (u-leg) beyond n0 with a periodic word of length <= max_word.
  int max_word = 3;
  std::size_t budget = 2000000;
};

// All closed chains over the search family with vanishing displacement
// sum, in depth-first order.  The first entry is the trivial loop.
// Throws kSearchBudgetExceeded when more than `budget` chain nodes are
// visited.
std::vector<BrinTwist> brin_set(const SkewSystem& sys, const sft::TwoSidedPoint& x,
                                const BrinSearch& params);

// Distinct twists (up to tolerance in d_G).
std::vector<grp::GroupElement> distinct_twists(const grp::Group& group,
                                               const std::vector<BrinTwist>& twists,
                                               double tol = 1e-9);

struct DiophantineEntry {
  grp::Irrep pi;
  double weight_norm = 0.0;
  // sqrt of the smallest eigenvalue of Q = mean (I - pi(g))^*(I - pi(g)).
  double lower_bound = 0.0;
  // max_g |h - pi(g) h| at the best unit h found by descent.
  double minimax = 0.0;
};

struct DiophantineReport {
  std::vector<grp::GroupElement> gamma;
  double weight_cutoff = 0.0;
  std::vector<DiophantineEntry> entries;
  // delta_pi >= delta / |lambda_pi|^C for every entry (certified up to the
  // cutoff from the lower bounds).
  double fitted_c = 0.0;
  double delta = 0.0;
  double fit_r2 = 0.0;
};

DiophantineReport diophantine_certify(const grp::Group& group,
                                      const std::vector<grp::GroupElement>& gamma,
                                      double weight_cutoff, int restarts = 64,
                                      std::uint64_t seed = 0, int threads = 1);

struct BadApproximation {
  double delta = 0.0;
  double c5 = 1.0;
  double fitted_exponent = 1.0;
  std::vector<std::int64_t> convergent_denominators;
};

// Throws kRationalAlpha when alpha is within 1e-15 of p/q with q <= q_max.
BadApproximation badly_approximable(double alpha, std::int64_t q_max);

}  // namespace mixlab::cocycle

#endif  // MIXLAB_COCYCLE_HPP_
