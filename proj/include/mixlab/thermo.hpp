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

// Locally constant functions, the Ruelle transfer operator, pressure and
// Gibbs measures.
//
// Higher-block convention.  A potential of depth k is promoted to depth
// K = max(k, 2) and acts on the state space of (K-1)-words.  A K-word w
// is a transition from the state u = w[0..K-2] to the state v = w[1..K-1].
// The Ruelle matrix has L[v][u] = exp(phi(w)), so (L h)(v) sums over the
// one-symbol preimages of v.  With L h = e^P h, nu L = e^P nu and
// <nu, h> = 1, the Gibbs measure of a word w with |w| >= K-1 is
//
//   mu[w] = h(w[0..K-2]) * exp(phi_j(w) - j P) * nu(w[|w|-K+1..|w|-1]),
//
// where j = |w| - K + 1 and phi_j(w) sums phi over the j K-subwords of w.

#ifndef MIXLAB_THERMO_HPP_
#define MIXLAB_THERMO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "mixlab/error.hpp"
#include "mixlab/numerics.hpp"
#include "mixlab/sft.hpp"

namespace mixlab::thermo {

template <typename T>
class LocallyConstantFn {
 public:
  LocallyConstantFn(std::shared_ptr<const sft::WordIndex> index, std::vector<T> table)
      : index_(std::move(index)), table_(std::move(table)) {
    if (table_.size() != index_->size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "table size does not match the number of admissible words");
    }
  }

  static LocallyConstantFn constant(const sft::Shift& shift, int depth, const T& value) {
    auto idx = sft::word_index(shift, depth);
    return LocallyConstantFn(idx, std::vector<T>(idx->size(), value));
  }

  // Every admissible word must be present; the first missing one is named.
  static LocallyConstantFn from_map(const sft::Shift& shift, int depth,
                                    const std::map<sft::Word, T>& values) {
    auto idx = sft::word_index(shift, depth);
    std::vector<T> table;
    table.reserve(idx->size());
    for (const auto& w : idx->all()) {
      auto it = values.find(w);
      if (it == values.end()) {
        throw Error(ErrorCode::kConfigInvalid,
                    "missing value for admissible word '" + sft::word_to_string(w) + "'");
      }
      table.push_back(it->second);
    }
    return LocallyConstantFn(idx, std::move(table));
  }

  template <typename F>
  static LocallyConstantFn generate(const sft::Shift& shift, int depth, F&& f) {
    auto idx = sft::word_index(shift, depth);
    std::vector<T> table;
    table.reserve(idx->size());
    for (const auto& w : idx->all()) table.push_back(f(w));
    return LocallyConstantFn(idx, std::move(table));
  }

  int depth() const { return index_->depth(); }
  const sft::Shift& shift() const { return index_->shift(); }
  const sft::WordIndex& index() const { return *index_; }
  std::shared_ptr<const sft::WordIndex> index_ptr() const { return index_; }
  const std::vector<T>& table() const { return table_; }

  // Value at any point whose first depth() symbols are w[0..depth-1].
  const T& operator()(std::span<const int> w) const { return table_[index_->index(w)]; }
  const T& at_index(std::size_t i) const { return table_[i]; }

  // f(sigma^i x).
  const T& at_point(const sft::TwoSidedPoint& x, long i) const {
    return (*this)(x.window(i, i + depth()));
  }

  // Same function, tabulated on longer words.
  LocallyConstantFn promoted(int new_depth) const {
    if (new_depth < depth())
      throw Error(ErrorCode::kIncompatibleDepths, "cannot lower the depth of a function");
    if (new_depth == depth()) return *this;
    return generate(shift(), new_depth, [&](const sft::Word& w) { return (*this)(w); });
  }

  template <typename F>
  auto map(F&& f) const {
    using R = std::decay_t<decltype(f(table_.front()))>;
    std::vector<R> out;
    out.reserve(table_.size());
    for (const auto& v : table_) out.push_back(f(v));
    return LocallyConstantFn<R>(index_, std::move(out));
  }

 private:
  std::shared_ptr<const sft::WordIndex> index_;
  std::vector<T> table_;
};

using RealFn = LocallyConstantFn<double>;

// Exact Lipschitz seminorm for a locally constant function:
//   max over 0 <= i < k of osc_i / lambda^i,
// where osc_i is the largest distance between values on words that share
// their first i symbols.  dist(a, b) must be symmetric.
template <typename T, typename Dist>
double lipschitz_seminorm(const LocallyConstantFn<T>& f, const sft::MetricConstant& lam,
                          Dist&& dist) {
  const auto& idx = f.index();
  const int k = f.depth();
  double best = 0.0;
  for (int i = 0; i < k; ++i) {
    double osc = 0.0;
    std::size_t start = 0;
    while (start < idx.size()) {
      std::size_t end = start + 1;
      while (end < idx.size() &&
             std::equal(idx.word(start).begin(), idx.word(start).begin() + i,
                        idx.word(end).begin()))
        ++end;
      for (std::size_t a = start; a < end; ++a)
        for (std::size_t b = a + 1; b < end; ++b)
          osc = std::max(osc, dist(f.at_index(a), f.at_index(b)));
      start = end;
    }
    best = std::max(best, osc / std::pow(lam.value(), i));
  }
  return best;
}

double lipschitz_seminorm(const RealFn& f, const sft::MetricConstant& lam);
double lipschitz_seminorm(const LocallyConstantFn<Complex>& f, const sft::MetricConstant& lam);

class GibbsData {
 public:
  const RealFn& potential() const { return potential_; }
  const RealFn& normalized_potential() const { return normalized_; }
  double pressure() const { return pressure_; }
  const std::vector<double>& right_eigvec() const { return h_; }
  const std::vector<double>& left_eigvec() const { return nu_; }
  const sft::WordIndex& states() const { return *states_; }
  std::shared_ptr<const sft::WordIndex> states_ptr() const { return states_; }
  int depth() const { return potential_.depth(); }
  const sft::Shift& shift() const { return potential_.shift(); }
  int iterations() const { return iterations_; }

  // Exact mu[w] for any admissible word; shorter words than the state
  // depth are summed over their extensions.
  double cylinder_measure(std::span<const int> w) const;

  // Transition probabilities of the Markov chain realizing mu, indexed by
  // K-word: P(u -> v) for w = (u, v).
  const std::vector<double>& forward_probabilities() const { return forward_; }
  // Stationary state distribution h * nu.
  const std::vector<double>& stationary() const { return stationary_; }

 private:
  friend GibbsData gibbs(const sft::Shift&, const RealFn&, const sft::MetricConstant&);
  GibbsData(RealFn potential, RealFn normalized) :
      potential_(std::move(potential)), normalized_(std::move(normalized)) {}

  RealFn potential_;
  RealFn normalized_;
  double pressure_ = 0.0;
  std::vector<double> h_;
  std::vector<double> nu_;
  std::shared_ptr<const sft::WordIndex> states_;
  std::vector<double> forward_;
  std::vector<double> stationary_;
  // Sampler tables.  K-words leaving a state are contiguous in
  // lexicographic order, so out_offsets_ is a CSR row pointer.
  std::vector<std::size_t> out_offsets_;
  std::vector<std::size_t> target_state_;
  std::vector<double> forward_cdf_;
  std::vector<double> stationary_cdf_;
  int iterations_ = 0;

  friend std::vector<int> sample_path(const GibbsData&, std::size_t, Rng&);
};

double pressure(const sft::Shift& shift, const RealFn& phi, const sft::MetricConstant& lam);
GibbsData gibbs(const sft::Shift& shift, const RealFn& phi, const sft::MetricConstant& lam);

double cylinder_measure(const GibbsData& g, std::span<const int> w);

// phi_n at a point beginning with `symbols`; needs n + depth - 1 symbols.
double birkhoff_sum(const RealFn& phi, std::span<const int> symbols, int n);

struct RatioBounds {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

// Extremal mu[w] / exp(phi_n(x_w) - n P) over n-words.  x_w is the periodic
// extension of w when w is cyclically admissible; otherwise w followed by
// the lexicographically smallest admissible continuation.
RatioBounds gibbs_property_ratio(const GibbsData& g, int n);

// Stationary Markov chain sample of mu: the first K-1 symbols are drawn
// from the stationary state distribution, then one symbol per step.
std::vector<int> sample_path(const GibbsData& g, std::size_t length, std::uint64_t seed);

// Draws a path from an existing stream (used by the Monte Carlo estimator).
std::vector<int> sample_path(const GibbsData& g, std::size_t length, Rng& rng);

// Integral of a depth-k function against mu.
double integrate(const GibbsData& g, const RealFn& f);

}  // namespace mixlab::thermo

#endif  // MIXLAB_THERMO_HPP_
