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

#include "mixlab/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mixlab::thermo {

namespace {

constexpr double kPowerTolerance = 1e-13;
constexpr int kPowerCap = 100000;

struct TransitionGraph {
  std::shared_ptr<const sft::WordIndex> states;
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
};

TransitionGraph transition_graph(const RealFn& phi_k) {
  const int k = phi_k.depth();
  TransitionGraph g;
  g.states = sft::word_index(phi_k.shift(), k - 1);
  const auto& words = phi_k.index();
  g.src.resize(words.size());
  g.dst.resize(words.size());
  for (std::size_t t = 0; t < words.size(); ++t) {
    const auto& w = words.word(t);
    g.src[t] = g.states->index(std::span<const int>(w).first(k - 1));
    g.dst[t] = g.states->index(std::span<const int>(w).subspan(1));
  }
  return g;
}

// Positive Perron vector by power iteration.  `forward` selects L h
// (mass flows src -> dst) versus nu L (dst -> src).
std::vector<double> perron_vector(const TransitionGraph& g, const std::vector<double>& weight,
                                  bool forward, int& iterations) {
  const std::size_t n = g.states->size();
  std::vector<double> v(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (int it = 1; it <= kPowerCap; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t t = 0; t < weight.size(); ++t) {
      if (forward) {
        next[g.dst[t]] += weight[t] * v[g.src[t]];
      } else {
        next[g.src[t]] += weight[t] * v[g.dst[t]];
      }
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    if (!(total > 0.0) || !std::isfinite(total))
      throw Error(ErrorCode::kSolverFailure, "power iteration lost positivity");
    double change = 0.0;
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= total;
      change = std::max(change, std::abs(next[i] - v[i]));
      peak = std::max(peak, next[i]);
    }
    v.swap(next);
    if (change <= kPowerTolerance * peak) {
      iterations = std::max(iterations, it);
      return v;
    }
  }
  throw Error(ErrorCode::kSolverFailure,
              "power iteration did not reach tolerance 1e-13 within 1e5 iterations");
}

}  // namespace

double lipschitz_seminorm(const RealFn& f, const sft::MetricConstant& lam) {
  const auto& idx = f.index();
  double best = 0.0;
  for (int i = 0; i < f.depth(); ++i) {
    double osc = 0.0;
    std::size_t start = 0;
    while (start < idx.size()) {
      double lo = f.at_index(start);
      double hi = lo;
      std::size_t end = start + 1;
      while (end < idx.size() &&
             std::equal(idx.word(start).begin(), idx.word(start).begin() + i,
                        idx.word(end).begin())) {
        lo = std::min(lo, f.at_index(end));
        hi = std::max(hi, f.at_index(end));
        ++end;
      }
      osc = std::max(osc, hi - lo);
      start = end;
    }
    best = std::max(best, osc / std::pow(lam.value(), i));
  }
  return best;
}

double lipschitz_seminorm(const LocallyConstantFn<Complex>& f, const sft::MetricConstant& lam) {
  return lipschitz_seminorm(f, lam, [](Complex a, Complex b) { return std::abs(a - b); });
}

double pressure(const sft::Shift& shift, const RealFn& phi, const sft::MetricConstant& lam) {
  return gibbs(shift, phi, lam).pressure();
}

GibbsData gibbs(const sft::Shift& shift, const RealFn& phi, const sft::MetricConstant& lam) {
  (void)lam;
  if (!(phi.shift() == shift))
    throw Error(ErrorCode::kInvalidArgument, "potential is defined on a different shift");
  const int depth = std::max(phi.depth(), 2);
  RealFn phi_k = phi.promoted(depth);
  const TransitionGraph graph = transition_graph(phi_k);

  // Factor out the largest weight so that exp() stays in range.
  const auto& table = phi_k.table();
  const double top = *std::max_element(table.begin(), table.end());
  std::vector<double> weight(table.size());
  for (std::size_t t = 0; t < table.size(); ++t) weight[t] = std::exp(table[t] - top);

  int iterations = 0;
  std::vector<double> h = perron_vector(graph, weight, true, iterations);
  std::vector<double> nu = perron_vector(graph, weight, false, iterations);

  // Rayleigh quotient <nu, L h> / <nu, h>.
  const std::size_t n = graph.states->size();
  std::vector<double> lh(n, 0.0);
  for (std::size_t t = 0; t < weight.size(); ++t) lh[graph.dst[t]] += weight[t] * h[graph.src[t]];
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += nu[i] * lh[i];
    den += nu[i] * h[i];
  }
  const double eigenvalue = num / den;
  const double p = std::log(eigenvalue) + top;
  for (double& v : nu) v /= den;

  std::vector<double> normalized(table.size());
  std::vector<double> forward(table.size());
  for (std::size_t t = 0; t < table.size(); ++t) {
    normalized[t] = table[t] + std::log(h[graph.src[t]]) - std::log(h[graph.dst[t]]) - p;
    forward[t] = weight[t] / eigenvalue * nu[graph.dst[t]] / nu[graph.src[t]];
  }

  GibbsData g(phi_k, RealFn(phi_k.index_ptr(), std::move(normalized)));
  g.pressure_ = p;
  g.h_ = std::move(h);
  g.nu_ = std::move(nu);
  g.states_ = graph.states;
  g.iterations_ = iterations;

  g.stationary_.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.stationary_[i] = g.h_[i] * g.nu_[i];
  g.stationary_cdf_.resize(n);
  std::partial_sum(g.stationary_.begin(), g.stationary_.end(), g.stationary_cdf_.begin());

  g.out_offsets_.assign(n + 1, 0);
  for (std::size_t t = 0; t < table.size(); ++t) ++g.out_offsets_[graph.src[t] + 1];
  std::partial_sum(g.out_offsets_.begin(), g.out_offsets_.end(), g.out_offsets_.begin());
  g.forward_cdf_.resize(table.size());
  for (std::size_t s = 0; s < n; ++s) {
    double acc = 0.0;
    for (std::size_t t = g.out_offsets_[s]; t < g.out_offsets_[s + 1]; ++t) {
      acc += forward[t];
      g.forward_cdf_[t] = acc;
    }
  }
  g.target_state_ = graph.dst;
  g.forward_ = std::move(forward);
  return g;
}

double GibbsData::cylinder_measure(std::span<const int> w) const {
  const sft::Shift& sh = shift();
  if (!sh.is_admissible(w)) {
    throw Error(ErrorCode::kInadmissibleWord, "word '" + sft::word_to_string(w) + "'");
  }
  const int k = depth();
  const int state_len = k - 1;
  const int len = static_cast<int>(w.size());
  if (len < state_len) {
    // Sum over admissible extensions up to the state length.
    double total = 0.0;
    std::vector<int> ext(w.begin(), w.end());
    for (int c = 0; c < sh.n_symbols(); ++c) {
      if (!ext.empty() && !sh.allowed(ext.back(), c)) continue;
      ext.push_back(c);
      total += cylinder_measure(ext);
      ext.pop_back();
    }
    return total;
  }
  double log_weight = 0.0;
  for (int i = 0; i + k <= len; ++i) log_weight += potential_(w.subspan(i, k)) - pressure_;
  const double h = h_[states_->index(w.first(state_len))];
  const double nu = nu_[states_->index(w.subspan(len - state_len))];
  return h * std::exp(log_weight) * nu;
}

double cylinder_measure(const GibbsData& g, std::span<const int> w) {
  return g.cylinder_measure(w);
}

double birkhoff_sum(const RealFn& phi, std::span<const int> symbols, int n) {
  const int k = phi.depth();
  if (static_cast<int>(symbols.size()) < n + k - 1)
    throw Error(ErrorCode::kInvalidArgument, "not enough symbols for the Birkhoff sum");
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += phi(symbols.subspan(i, k));
  return s;
}

RatioBounds gibbs_property_ratio(const GibbsData& g, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  const auto& sh = g.shift();
  const RealFn& phi = g.potential();
  const int k = phi.depth();
  RatioBounds out{INFINITY, 0.0};
  for (const auto& w : sft::words(sh, n)) {
    std::vector<int> x(w);
    if (sh.is_cyclically_admissible(w)) {
      while (static_cast<int>(x.size()) < n + k - 1) x.push_back(w[x.size() % w.size()]);
    } else {
      while (static_cast<int>(x.size()) < n + k - 1) {
        int c = 0;
        while (!sh.allowed(x.back(), c)) ++c;
        x.push_back(c);
      }
    }
    const double weight = std::exp(birkhoff_sum(phi, x, n) - n * g.pressure());
    const double ratio = g.cylinder_measure(w) / weight;
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
  }
  return out;
}

namespace {

std::size_t draw(std::span<const double> cdf, double u) {
  // Scale by the last entry so roundoff in the total never strands u.
  const double target = u * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.end()) --it;
  return static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace

std::vector<int> sample_path(const GibbsData& g, std::size_t length, Rng& rng) {
  if (length < 1) throw Error(ErrorCode::kInvalidArgument, "length must be >= 1");
  std::vector<int> out;
  out.reserve(length);
  std::size_t state = draw(g.stationary_cdf_, rng.uniform());
  for (int s : g.states().word(state)) {
    if (out.size() == length) return out;
    out.push_back(s);
  }
  const auto& words = g.potential().index();
  while (out.size() < length) {
    const std::size_t lo = g.out_offsets_[state];
    const std::size_t hi = g.out_offsets_[state + 1];
    const std::size_t t =
        lo + draw(std::span<const double>(g.forward_cdf_).subspan(lo, hi - lo), rng.uniform());
    out.push_back(words.word(t).back());
    state = g.target_state_[t];
  }
  return out;
}

std::vector<int> sample_path(const GibbsData& g, std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  return sample_path(g, length, rng);
}

double integrate(const GibbsData& g, const RealFn& f) {
  const int d = std::max(f.depth(), g.depth() - 1);
  double total = 0.0;
  for (const auto& w : sft::words(g.shift(), d)) total += g.cylinder_measure(w) * f(w);
  return total;
}

}  // namespace mixlab::thermo
