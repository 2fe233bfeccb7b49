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

// Twisted transfer operators L_{s,pi} h(x) = sum over sigma(y) = x of
//   e^{phi(y) - s r(y)} pi(Theta(y)) h(y)
// on functions of D-words with values in C^{dim pi}.  The matrix has one
// dim x dim block per state pair: block (v, u) is nonzero when the
// (D+1)-word w = u + last(v) is admissible.

#ifndef MIXLAB_TWISTED_HPP_
#define MIXLAB_TWISTED_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixlab/cocycle.hpp"
#include "mixlab/grp.hpp"
#include "mixlab/thermo.hpp"

namespace mixlab::twisted {

// Locally constant C^dim-valued function of D-words, stored word-major.
struct HFunction {
  std::shared_ptr<const sft::WordIndex> words;
  int dim = 1;
  Eigen::VectorXcd data;

  Eigen::VectorXcd value(std::size_t i) const { return data.segment(i * dim, dim); }
  double sup_norm() const;
  double lipschitz(const sft::MetricConstant& lam) const;
};

class TwistedOperator {
 public:
  // General form with an arbitrary real potential.  state_depth 0 picks
  // the smallest admissible depth (max depth of phi, r, Theta minus one,
  // at least one).
  static TwistedOperator build(const cocycle::SkewSystem& sys, const grp::Irrep& pi, Complex s,
                               const thermo::RealFn& potential, int state_depth = 0);

  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  const grp::Irrep& irrep() const { return pi_; }
  Complex s() const { return s_; }
  int state_depth() const { return words_->depth(); }
  const sft::WordIndex& states() const { return *words_; }
  std::shared_ptr<const sft::WordIndex> states_ptr() const { return words_; }
  int block_dim() const { return pi_.dim(); }

  HFunction apply(const HFunction& h) const;
  // The defining sum evaluated pointwise, without the assembled matrix.
  HFunction apply_direct(const HFunction& h) const;

  HFunction zeros() const;

 private:
  TwistedOperator() = default;

  std::shared_ptr<const cocycle::SkewSystem> sys_;
  grp::Irrep pi_;
  Complex s_;
  std::shared_ptr<const thermo::RealFn> potential_;
  std::shared_ptr<const sft::WordIndex> words_;
  Eigen::MatrixXcd matrix_;
};

// L_{s,pi} with the normalized potential of the Gibbs data.
TwistedOperator build_twisted(const cocycle::SkewSystem& sys, const grp::Irrep& pi, Complex s,
                              const thermo::GibbsData& gibbs, int state_depth = 0);

struct BpiParams {
  double c15 = 10.0;
  double c18 = 1.0;
};

// Defaults: C15 chosen so that min over pi != 1 of b_pi >= 10, and C18
// from max(1, 2 C16 / (1 - lambda)) when a C16 estimate is supplied.
BpiParams default_bpi_params(const grp::Group& group, double c16 = 0.0, double lambda = 0.5);

double bpi(double b, const grp::Irrep& pi, const BpiParams& params, const grp::Group& group);
double bpi_norm(const HFunction& h, double b, const grp::Irrep& pi, const BpiParams& params,
                const grp::Group& group, const sft::MetricConstant& lam);

// Random witness for the probes.  Kinds cycle through constant, unit
// modulus, Gaussian and slowly varying vectors; trial 0 is the constant
// unit vector.
HFunction random_witness(const std::shared_ptr<const sft::WordIndex>& words, int dim,
                         std::size_t trial, Rng& rng);

struct LasotaYorkeResult {
  double c16 = 0.0;
  // Best ratio over the random draws alone, before hill climbing.  With a
  // fixed seed this is nondecreasing in the number of trials.
  double random_c16 = 0.0;
  int witness_n = 0;
  HFunction witness;
  std::size_t trials = 0;
};

// Smallest C with |L^n h|_Lip <= C b_pi |h|_inf + lambda^n |h|_Lip over the
// witnesses, for s = ib.  The random draws and, for each n, the exact
// maximizer over constant witnesses seed a multi-start hill climb.
LasotaYorkeResult lasota_yorke_probe(const cocycle::SkewSystem& sys,
                                     const thermo::GibbsData& gibbs, const grp::Irrep& pi,
                                     double b, const std::vector<int>& n_list, std::size_t trials,
                                     std::uint64_t seed, const BpiParams& params,
                                     int state_depth = 0);

// Lipschitz defect of one witness: |L^n h|_Lip - lambda^n |h|_Lip, in units
// of b_pi |h|_inf.
double lasota_yorke_ratio(const TwistedOperator& op, const HFunction& h, int n, double b_pi,
                          const sft::MetricConstant& lam);

struct ContractionRecord {
  std::string group;
  grp::Irrep pi;
  double weight_norm = 0.0;
  double b = 0.0;
  double b_pi = 0.0;
  int n = 0;
  double kappa = 0.0;
  double matrix_norm_proxy = 0.0;
  double fitted_c = 0.0;
};

struct DolgopyatScan {
  std::vector<ContractionRecord> records;
  // Smallest C with kappa <= 1 - b_pi^{-C} over all cells (inf when some
  // cell has kappa >= 1).
  double fitted_c = 0.0;
};

DolgopyatScan dolgopyat_scan(const cocycle::SkewSystem& sys, const thermo::GibbsData& gibbs,
                             const std::vector<grp::Irrep>& pis, const std::vector<double>& b_grid,
                             const BpiParams& params, double c25, std::size_t trials,
                             std::uint64_t seed, int threads = 1, int state_depth = 0);

// Max over block rows of the sum of block operator norms.
double block_inf_norm(const Eigen::MatrixXcd& m, int dim);

struct CancellationResult {
  bool holds = false;
  double slack = 0.0;
  double epsilon = 0.0;
};

// |v1 + v2| <= (1 - eps^2 / 4) |v1| + |v2|.  Throws kPreconditionViolated
// unless v1, v2 != 0, |v1| <= |v2| and the directions differ by >= eps.
CancellationResult cancellation_check(const Eigen::VectorXcd& v1, const Eigen::VectorXcd& v2,
                                      double eps);

}  // namespace mixlab::twisted

#endif  // MIXLAB_TWISTED_HPP_
