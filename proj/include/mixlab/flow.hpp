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

// Suspension flow of a group extension.  Points are (x, g, u) with
// 0 <= u < r(x) and (x, g, r(x)) ~ (sigma x, Theta(x) g, 0); the flow moves
// u at unit speed.  The invariant measure is mu x Haar x du / integral(r).
//
// Test functions depend on the first d symbols of x, are band-limited in g
// and polynomial in u:
//     E(x, g, u) = sum over bands pi, powers p of u^p Tr(C_{pi,p}(x) pi(g)).

#ifndef MIXLAB_FLOW_HPP_
#define MIXLAB_FLOW_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixlab/cocycle.hpp"
#include "mixlab/grp.hpp"
#include "mixlab/thermo.hpp"

namespace mixlab::flow {

struct Band {
  grp::Irrep pi;
  // coeffs[word * (degree + 1) + p] is the dim x dim matrix of u^p.
  std::vector<Eigen::MatrixXcd> coeffs;
};

class TestFn {
 public:
  TestFn(grp::Group group, std::shared_ptr<const sft::WordIndex> words, int degree);

  // xi_pi(g) * poly(u) on every word; poly lists coefficients of 1, u, u^2...
  static TestFn character(const sft::Shift& shift, const grp::Group& group,
                          const grp::Irrep& pi, const std::vector<Complex>& poly, int depth = 1);
  static TestFn constant(const sft::Shift& shift, const grp::Group& group, Complex c);

  const grp::Group& group() const { return group_; }
  const sft::WordIndex& words() const { return *words_; }
  std::shared_ptr<const sft::WordIndex> words_ptr() const { return words_; }
  int x_depth() const { return words_->depth(); }
  int degree() const { return degree_; }
  const std::vector<Band>& bands() const { return bands_; }
  double band_limit() const;

  // Adds pi if absent and returns its band.
  Band& band(const grp::Irrep& pi);
  void set(const grp::Irrep& pi, std::size_t word, int power, const Eigen::MatrixXcd& c);

  Complex operator()(std::span<const int> x, const grp::GroupElement& g, double u) const;
  Complex eval(std::size_t word, const grp::GroupElement& g, double u) const;

  // The single band pi (empty function when pi is absent).
  TestFn component(const grp::Irrep& pi) const;
  // Upper bound for sup |E| over u in [0, u_max] from trace norms.
  double sup_bound(double u_max) const;

 private:
  grp::Group group_;
  std::shared_ptr<const sft::WordIndex> words_;
  int degree_;
  std::vector<Band> bands_;
};

enum class Estimator { kQuadrature, kMonteCarlo };
std::string estimator_name(Estimator e);

struct CorrelationSeries {
  std::vector<double> t_grid;
  std::vector<Complex> rho;
  Estimator estimator = Estimator::kQuadrature;
  std::vector<double> error_bars;  // Monte Carlo only
};

// Integral of r against mu, exact from cylinder measures.
double roof_mean(const cocycle::SkewSystem& sys, const thermo::GibbsData& gibbs);

Complex suspension_integral(const cocycle::SkewSystem& sys, const thermo::GibbsData& gibbs,
                            const TestFn& f);

enum class FiberMethod {
  kSchur,       // Tr(C_E pi(Theta_n) C_F^*) / dim, band by band
  kQuadrature,  // Haar quadrature of E(Theta_n g) conj(F(g)), all band pairs
};

struct QuadratureOptions {
  int depth_budget = 20;
  FiberMethod fiber = FiberMethod::kSchur;
  int threads = 1;
};

// rho(t) = integral of E(phi_t p) conj(F(p)) minus the product of means.
// Negative times use rho_{E,F}(-t) = conj(rho_{F,E}(t)).  Throws
// kDepthBudgetExceeded when a cylinder longer than the budget is needed.
CorrelationSeries correlation_quadrature(const cocycle::SkewSystem& sys,
                                         const thermo::GibbsData& gibbs, const TestFn& e,
                                         const TestFn& f, const std::vector<double>& t_grid,
                                         const QuadratureOptions& options = {});

// Ensemble estimate from Gibbs-sampled x, Haar g and u = U r(x), weighted by
// r(x) / integral(r).  Samples are drawn in blocks of kMcBlock; block b uses
// the stream splitmix64(seed + 0x9e3779b97f4a7c15 * (b + 1)).
inline constexpr std::size_t kMcBlock = 1024;
CorrelationSeries correlation_mc(const cocycle::SkewSystem& sys, const thermo::GibbsData& gibbs,
                                 const TestFn& e, const TestFn& f,
                                 const std::vector<double>& t_grid, std::size_t n_samples,
                                 std::uint64_t seed, int threads = 1);

// Correlation of the banded components, one entry per irrep present in
// both inputs with weight norm <= cutoff (the trivial band always counts).
std::map<grp::Irrep, CorrelationSeries> decompose_correlation(
    const cocycle::SkewSystem& sys, const thermo::GibbsData& gibbs, const TestFn& e,
    const TestFn& f, const std::vector<double>& t_grid, double weight_cutoff,
    const QuadratureOptions& options = {});

struct ChiSeries {
  std::vector<double> t_grid;
  std::vector<Complex> chi;
  int k2 = 0;
  // Join p(tau) = sum_i coeffs[i] tau^i with tau = 2 (t - 1/2) in [0, 1].
  std::vector<Complex> coeffs;
  // Estimated rho^{(j)}(1), j = 0..k2.
  std::vector<Complex> rho_derivs;
  double sup_join = 0.0;
  double bound = 0.0;
  std::vector<double> derivative_sup;  // sup over [1/2, 1] of |chi^{(j)}|

  // chi^{(j)} on [0, 1]; the join polynomial is used on [1/2, 1].
  Complex join_derivative(double t, int j) const;
};

// chi = 0 on [0, 1/2], chi = rho on [1, inf), minimal-degree Hermite join in
// between.  bound <= 0 means max |rho| over the grid.  Throws
// kJoinOvershoot when sup |chi| on the join exceeds the bound.
ChiSeries chi_modify(const CorrelationSeries& series, int k2, double bound = 0.0);

struct LaplaceValue {
  Complex s;
  Complex value;
  double tail_bound = 0.0;
};

// Integral of e^{-st} chi(t) over the grid span with piecewise quintic
// interpolation; the tail beyond the last point is bounded by
// sup|chi| e^{-a T} / a.  Throws kNonpositiveRealPart for Re(s) <= 0.
std::vector<LaplaceValue> laplace_numeric(const std::vector<double>& t_grid,
                                          const std::vector<Complex>& values,
                                          const std::vector<Complex>& s_grid);
std::vector<LaplaceValue> laplace_numeric(const CorrelationSeries& series,
                                          const std::vector<Complex>& s_grid);

struct DecayFit {
  std::string model;  // "power" or "exponential"
  double order_or_rate = 0.0;
  double constant = 0.0;
  double r2 = 0.0;
  double t_min = 0.0;
  LineFit power;
  LineFit exponential;
};

// Throws kInsufficientData with fewer than 8 usable points.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<Complex>& rho, double t_min);
DecayFit fit_decay(const CorrelationSeries& series, double t_min);

}  // namespace mixlab::flow

#endif  // MIXLAB_FLOW_HPP_
