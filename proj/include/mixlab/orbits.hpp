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

// Periodic orbits of the suspension flow and the sums built on them.
//
// Counting conventions.  Phi sums over prime orbits only.  Psi and N add
// every power tau^m of a prime tau with weight Lambda = l(tau) (the
// von Mangoldt convention) unless OrbitSum::kPrimesOnly is requested.
// N_{pi,k} admits the threshold e^{h l} <= x with weight (x - e^{h l})^k
// (Threshold::kScaled, the default) or e^{l} <= x with (x - e^{l})^k.

#ifndef MIXLAB_ORBITS_HPP_
#define MIXLAB_ORBITS_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mixlab/cocycle.hpp"
#include "mixlab/grp.hpp"
#include "mixlab/sft.hpp"

namespace mixlab::orbits {

// Unique h with P(-h r) = 0.  Throws kSolverFailure if the root cannot be
// pinned to |P| <= 1e-12.
double flow_entropy(const cocycle::SkewSystem& sys);

struct OrbitLedger {
  grp::Group group = grp::Group::torus(1);
  std::vector<sft::OrbitRecord> records;  // sorted by r_period
  double h_top = 0.0;
  double t_max = 0.0;
  int n_max = 0;
  // Every prime orbit of symbolic period <= n_complete is present.
  int n_complete = 0;
};

// Throws kBudgetExceeded when the expected number of prime necklaces up to
// length ceil(T_max / min r) exceeds the budget.
OrbitLedger build_ledger(const cocycle::SkewSystem& sys, double t_max,
                         std::size_t budget = 5000000, int threads = 1);

// l and holonomy invariant of the prime orbit through the periodic point w^inf.
sft::OrbitRecord orbit_record(const cocycle::SkewSystem& sys, const sft::Word& necklace);

struct ClassFunction {
  std::function<Complex(const std::vector<double>&)> f;
  Complex haar_mean = 0.0;
};

ClassFunction character_fn(const grp::Group& g, const grp::Irrep& pi);

// (1/#V(T)) sum over l <= T of F(holonomy) minus the Haar mean.  Throws
// kEmptyWindow when no orbit has l <= T.
Complex equi_average(const OrbitLedger& ledger, const ClassFunction& f, double t);

// Sum over all x with sigma^n x = x of xi_pi(Theta_n(x)) e^{-s h r_n(x)}.
Complex z_function(const cocycle::SkewSystem& sys, const grp::Irrep& pi, int n, Complex s,
                   double h_top);
// The same number as Tr(M^n) for the twisted matrix with zero potential
// and parameter s h.
Complex z_function_trace(const cocycle::SkewSystem& sys, const grp::Irrep& pi, int n, Complex s,
                         double h_top);

struct LValue {
  Complex value = 1.0;
  Complex log_value = 0.0;  // sum of principal logs of the factors
  std::size_t factors = 0;
};

// Product over prime orbits with l <= T of det(I - pi([tau]) e^{-s h l})^{-1}.
// Throws kPoleEncountered when a determinant is within 1e-14 of zero.
LValue l_function_partial(const OrbitLedger& ledger, const grp::Irrep& pi, Complex s, double t);

// Sum over n of Z_{pi,n}(s) / n restricted to the prime orbits with l <= T,
// i.e. sum over those tau and m >= 1 of xi_pi([tau]^m) e^{-m s h l} / m.
Complex log_l_series(const OrbitLedger& ledger, const grp::Irrep& pi, Complex s, double t);

enum class OrbitSum { kVonMangoldt, kPrimesOnly };
enum class Threshold { kScaled, kUnscaled };

class CountingFns {
 public:
  CountingFns(const OrbitLedger& ledger, grp::Irrep pi, int k);

  Complex psi(double t, OrbitSum sum = OrbitSum::kVonMangoldt) const;
  Complex phi(double t) const;
  Complex n_k(double x, Threshold threshold = Threshold::kScaled,
              OrbitSum sum = OrbitSum::kVonMangoldt) const;
  // x^{s+k} / prod_{j=0..k} (s + j).
  Complex m_xk(double x, Complex s) const;
  int k() const { return k_; }

 private:
  const OrbitLedger* ledger_;
  grp::Irrep pi_;
  int k_;
};

struct EquiFitEntry {
  grp::Irrep pi;
  std::vector<double> t_grid;
  std::vector<double> abs_average;
  double order = 0.0;
  double constant = 0.0;
  double r2 = 0.0;
};

struct EquiFit {
  std::vector<EquiFitEntry> entries;
  // Slope of log constant against log |lambda_pi| (NaN with < 2 entries).
  double c37 = 0.0;
  double c37_r2 = 0.0;
};

// Throws kInsufficientData with fewer than 4 grid points.
EquiFit equi_error_fit(const OrbitLedger& ledger, const std::vector<grp::Irrep>& pis,
                       const std::vector<double>& t_grid);

}  // namespace mixlab::orbits

#endif  // MIXLAB_ORBITS_HPP_
