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

// Shared systems and brute-force oracles for the tests.  The oracles never
// call into the eigen-solvers or the operator code they are checking.

#ifndef MIXLAB_TESTS_FIXTURES_HPP_
#define MIXLAB_TESTS_FIXTURES_HPP_

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "mixlab/cocycle.hpp"
#include "mixlab/grp.hpp"
#include "mixlab/sft.hpp"
#include "mixlab/thermo.hpp"

namespace fixtures {

using mixlab::Complex;
using mixlab::kTwoPi;
namespace sft = mixlab::sft;
namespace thermo = mixlab::thermo;
namespace grp = mixlab::grp;
namespace cocycle = mixlab::cocycle;

inline const double kGamma = (std::sqrt(5.0) - 1.0) / 2.0;  // golden section

inline sft::Shift full2() { return sft::Shift::build({{1, 1}, {1, 1}}); }
inline sft::Shift golden() { return sft::Shift::build({{0, 1}, {1, 1}}); }
inline sft::Shift full3() { return sft::Shift::build({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}); }
inline sft::Shift cyclic3() { return sft::Shift::build({{1, 1, 0}, {0, 1, 1}, {1, 0, 1}}); }
inline sft::Shift sparse3() { return sft::Shift::build({{0, 1, 1}, {1, 0, 1}, {1, 1, 1}}); }

inline thermo::RealFn depth1(const sft::Shift& s, std::vector<double> v) {
  return thermo::RealFn(sft::word_index(s, 1), std::move(v));
}

inline cocycle::SkewSystem torus_system(const sft::Shift& s, std::vector<double> roof,
                                        std::vector<double> angles, double lam = 0.5) {
  const auto g = grp::Group::torus(1);
  const auto idx = sft::word_index(s, 1);
  std::vector<grp::GroupElement> th;
  for (double a : angles) th.push_back(grp::GroupElement::torus({a}));
  return cocycle::SkewSystem(s, sft::MetricConstant(lam), depth1(s, std::move(roof)),
                             cocycle::GroupFn(idx, th), g);
}

// Full 2-shift, roof {1, golden ratio}, trivial T^1 cocycle.
inline cocycle::SkewSystem golden_roof() {
  return torus_system(full2(), {1.0, mixlab::kGoldenRatio}, {0.0, 0.0});
}

// Full 2-shift, r = 1, cocycle angles {0, 2 pi gamma}.
inline cocycle::SkewSystem golden_angle() {
  return torus_system(full2(), {1.0, 1.0}, {0.0, kTwoPi * kGamma});
}

// All admissible words of length n, by direct recursion on the matrix.
inline void each_word(const sft::Shift& s, int n, const std::function<void(const sft::Word&)>& f) {
  sft::Word w;
  std::function<void()> rec = [&] {
    if (static_cast<int>(w.size()) == n) {
      f(w);
      return;
    }
    for (int a = 0; a < s.n_symbols(); ++a) {
      if (!w.empty() && !s.transition()[w.back()][a]) continue;
      w.push_back(a);
      rec();
      w.pop_back();
    }
  };
  rec();
}

// Sum of phi over all complete windows of a finite word.
inline double window_sum(const thermo::RealFn& phi, const sft::Word& w) {
  double acc = 0.0;
  const int k = phi.depth();
  for (std::size_t i = 0; i + k <= w.size(); ++i)
    acc += phi(std::span<const int>(w).subspan(i, k));
  return acc;
}

// mu[w] as the limit of the Boltzmann weight of words u w v with |u| =
// |v| = pad, normalized by all words of the same length, evaluated by a
// direct forward recursion over the last depth-1 symbols (no eigenvectors).
inline double boltzmann_cylinder(const sft::Shift& s, const thermo::RealFn& phi,
                                 const sft::Word& w, int pad) {
  const int k = std::max(phi.depth(), 2);
  const auto promoted = phi.promoted(k);
  const auto states = sft::word_index(s, k - 1);
  const std::size_t m = states->size();
  const int total = 2 * pad + static_cast<int>(w.size());
  // f[state] = weighted count of prefixes of the current length ending in state.
  auto run = [&](bool constrained) {
    const int len0 = k - 1;
    std::vector<double> f(m, 0.0);
    double scale_log = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      bool ok = true;
      if (constrained)
        for (int j = 0; j < len0; ++j)
          if (j >= pad && j < pad + static_cast<int>(w.size()) &&
              states->word(i)[j] != w[j - pad])
            ok = false;
      f[i] = ok ? 1.0 : 0.0;
    }
    for (int len = len0; len < total; ++len) {
      std::vector<double> g(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        if (f[i] == 0.0) continue;
        const auto& st = states->word(i);
        for (int a = 0; a < s.n_symbols(); ++a) {
          if (!s.transition()[st.back()][a]) continue;
          if (constrained && len >= pad && len < pad + static_cast<int>(w.size()) &&
              a != w[len - pad])
            continue;
          sft::Word kw = st;
          kw.push_back(a);
          sft::Word next(kw.begin() + 1, kw.end());
          g[states->index(next)] += f[i] * std::exp(promoted(kw));
        }
      }
      double mx = 0.0;
      for (double v : g) mx = std::max(mx, v);
      for (double& v : g) v /= mx;
      scale_log += std::log(mx);
      f = std::move(g);
    }
    double acc = 0.0;
    for (double v : f) acc += v;
    return scale_log + std::log(acc);
  };
  return std::exp(run(true) - run(false));
}

// Sum over the fixed points of sigma^n of weight(Theta_n) e^{phi_n - s r_n},
// Theta_n multiplied in the order Theta(sigma^{n-1} x) ... Theta(x).
inline Complex periodic_sum(const cocycle::SkewSystem& sys, const thermo::RealFn& phi, int n,
                            Complex s, const std::function<Complex(const grp::GroupElement&)>& f) {
  Complex acc = 0.0;
  each_word(sys.shift, n, [&](const sft::Word& w) {
    if (!sys.shift.transition()[w.back()][w.front()]) return;
    auto cyc = [&](std::size_t i, int len) {
      sft::Word out;
      for (int j = 0; j < len; ++j) out.push_back(w[(i + j) % w.size()]);
      return out;
    };
    grp::GroupElement th = grp::identity(sys.group);
    double r = 0.0;
    double p = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      r += sys.roof(cyc(i, sys.roof.depth()));
      p += phi(cyc(i, phi.depth()));
      th = grp::multiply(sys.cocycle(cyc(i, sys.cocycle.depth())), th);
    }
    acc += f(th) * std::exp(p - s * r);
  });
  return acc;
}

// Random eventually periodic point with short cycles and core.
inline sft::TwoSidedPoint random_point(const sft::Shift& s, mixlab::Rng& rng) {
  auto random_cycle = [&](int len) {
    for (;;) {
      sft::Word w;
      for (int i = 0; i < len; ++i) w.push_back(static_cast<int>(rng.next() % s.n_symbols()));
      if (s.is_cyclically_admissible(w)) return w;
    }
  };
  for (;;) {
    sft::Word left = random_cycle(1 + static_cast<int>(rng.next() % 3));
    sft::Word right = random_cycle(1 + static_cast<int>(rng.next() % 3));
    sft::Word core;
    const int len = static_cast<int>(rng.next() % 5);
    for (int i = 0; i < len; ++i) core.push_back(static_cast<int>(rng.next() % s.n_symbols()));
    try {
      return sft::TwoSidedPoint(s, left, core, right, static_cast<long>(rng.next() % 7) - 3);
    } catch (const mixlab::Error&) {
    }
  }
}

}  // namespace fixtures

#endif  // MIXLAB_TESTS_FIXTURES_HPP_
