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

#include "mixlab/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixlab/error.hpp"
#include "mixlab/thermo.hpp"
#include "mixlab/twisted.hpp"

namespace mixlab::orbits {

namespace {

double pressure_at(const cocycle::SkewSystem& sys, double h) {
  return thermo::pressure(sys.shift, sys.roof.map([h](double r) { return -h * r; }), sys.lam);
}

// Symbols of the periodic point w^inf starting at position i.
std::vector<int> cyclic_window(const sft::Word& w, std::size_t i, int len) {
  std::vector<int> out(len);
  for (int j = 0; j < len; ++j) out[j] = w[(i + j) % w.size()];
  return out;
}

auto first_after(const OrbitLedger& ledger, double t) {
  return std::upper_bound(ledger.records.begin(), ledger.records.end(), t,
                          [](double v, const sft::OrbitRecord& r) { return v < r.r_period; });
}

void check_window(const OrbitLedger& ledger, double t) {
  if (t > ledger.t_max * (1.0 + 1e-12)) {
    throw Error(ErrorCode::kInvalidArgument,
                "T = " + std::to_string(t) + " exceeds the ledger coverage " +
                    std::to_string(ledger.t_max));
  }
}

}  // namespace

double flow_entropy(const cocycle::SkewSystem& sys) {
  if (!(sys.min_roof() > 0.0)) throw Error(ErrorCode::kInvalidArgument, "roof must be positive");
  double lo = 0.0;
  double hi = std::log(static_cast<double>(sys.shift.n_symbols())) / sys.min_roof();
  if (pressure_at(sys, hi) > 0.0) hi *= 2.0;
  for (int i = 0; i < 60 && hi - lo > 1e-10 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (pressure_at(sys, mid) > 0.0 ? lo : hi) = mid;
  }
  double h = 0.5 * (lo + hi);
  double p = pressure_at(sys, h);
  for (int it = 0; it < 30 && std::abs(p) > 1e-12; ++it) {
    const auto neg = sys.roof.map([h](double r) { return -h * r; });
    const auto g = thermo::gibbs(sys.shift, neg, sys.lam);
    const double slope = -thermo::integrate(g, sys.roof);
    h -= p / slope;
    p = pressure_at(sys, h);
  }
  if (!(std::abs(p) <= 1e-12)) {
    throw Error(ErrorCode::kSolverFailure,
                "entropy root not resolved: P(-h r) = " + std::to_string(p));
  }
  return h;
}

sft::OrbitRecord orbit_record(const cocycle::SkewSystem& sys, const sft::Word& necklace) {
  if (necklace.empty() || !sys.shift.is_cyclically_admissible(necklace))
    throw Error(ErrorCode::kInadmissibleWord, "necklace is not cyclically admissible");
  sft::OrbitRecord rec;
  rec.necklace = necklace;
  rec.n = static_cast<int>(necklace.size());
  grp::GroupElement theta = grp::identity(sys.group);
  double r = 0.0;
  for (std::size_t i = 0; i < necklace.size(); ++i) {
    r += sys.roof(cyclic_window(necklace, i, sys.roof.depth()));
    theta = grp::multiply(sys.cocycle(cyclic_window(necklace, i, sys.cocycle.depth())), theta);
  }
  rec.r_period = r;
  rec.holonomy = grp::conjugacy_invariant(sys.group, theta);
  return rec;
}

OrbitLedger build_ledger(const cocycle::SkewSystem& sys, double t_max, std::size_t budget,
                         int threads) {
  if (!(t_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "T_max must be positive");
  const int n_max = static_cast<int>(std::ceil(t_max / sys.min_roof() - 1e-12));
  // Number of prime necklaces of length n is about tr(A^n) / n.
  double expected = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    expected += static_cast<double>(sys.shift.trace_power(n)) / n;
    if (expected > static_cast<double>(budget)) {
      throw Error(ErrorCode::kBudgetExceeded,
                  "T_max = " + std::to_string(t_max) + " needs necklaces up to length " +
                      std::to_string(n_max) + ", more than " + std::to_string(budget) +
                      " orbits");
    }
  }
  OrbitLedger ledger;
  ledger.group = sys.group;
  ledger.t_max = t_max;
  ledger.n_max = n_max;
  ledger.n_complete = static_cast<int>(std::floor(t_max / sys.max_roof() + 1e-12));
  ledger.h_top = flow_entropy(sys);
  if (n_max < 1) return ledger;
  auto recs = sft::enumerate_prime_orbits(sys.shift, n_max, threads);
  parallel_for(recs.size(), threads, [&](std::size_t i) {
    recs[i] = orbit_record(sys, recs[i].necklace);
  });
  std::erase_if(recs, [&](const sft::OrbitRecord& r) { return r.r_period > t_max; });
  std::stable_sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
    return a.r_period < b.r_period;
  });
  ledger.records = std::move(recs);
  return ledger;
}

ClassFunction character_fn(const grp::Group& g, const grp::Irrep& pi) {
  grp::check_irrep(g, pi);
  ClassFunction cf;
  cf.f = [g, pi](const std::vector<double>& inv) {
    return grp::character_from_invariant(g, pi, inv);
  };
  cf.haar_mean = pi.is_trivial() ? 1.0 : 0.0;
  return cf;
}

Complex equi_average(const OrbitLedger& ledger, const ClassFunction& f, double t) {
  check_window(ledger, t);
  const auto end = first_after(ledger, t);
  const auto count = static_cast<std::size_t>(end - ledger.records.begin());
  if (count == 0) {
    throw Error(ErrorCode::kEmptyWindow, "no prime orbit with l <= " + std::to_string(t));
  }
  Complex acc = 0.0;
  for (auto it = ledger.records.begin(); it != end; ++it) acc += f.f(it->holonomy);
  return acc / static_cast<double>(count) - f.haar_mean;
}

Complex z_function(const cocycle::SkewSystem& sys, const grp::Irrep& pi, int n, Complex s,
                   double h_top) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  grp::check_irrep(sys.group, pi);
  Complex acc = 0.0;
  // Fixed points of sigma^n are the cyclically admissible n-words.
  for (const auto& w : sft::words(sys.shift, n)) {
    if (!sys.shift.is_cyclically_admissible(w)) continue;
    const sft::OrbitRecord rec = orbit_record(sys, w);
    acc += grp::character_from_invariant(sys.group, pi, rec.holonomy) *
           std::exp(-s * h_top * rec.r_period);
  }
  return acc;
}

Complex z_function_trace(const cocycle::SkewSystem& sys, const grp::Irrep& pi, int n, Complex s,
                         double h_top) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  const auto zero = thermo::RealFn::constant(sys.shift, 1, 0.0);
  const auto op = twisted::TwistedOperator::build(sys, pi, s * h_top, zero);
  Eigen::MatrixXcd p = op.matrix();
  for (int i = 1; i < n; ++i) p = p * op.matrix();
  return p.trace();
}

LValue l_function_partial(const OrbitLedger& ledger, const grp::Irrep& pi, Complex s, double t) {
  check_window(ledger, t);
  grp::check_irrep(ledger.group, pi);
  LValue out;
  const auto end = first_after(ledger, t);
  for (auto it = ledger.records.begin(); it != end; ++it) {
    const Complex z = std::exp(-s * ledger.h_top * it->r_period);
    Complex det = 1.0;
    for (double th : grp::eigen_phases(ledger.group, pi, it->holonomy)) {
      const Complex factor = 1.0 - std::polar(1.0, th) * z;
      det *= factor;
      out.log_value -= std::log(factor);
    }
    if (std::abs(det) < 1e-14) {
      throw Error(ErrorCode::kPoleEncountered,
                  "factor of necklace " + sft::word_to_string(it->necklace) + " vanishes");
    }
    out.value /= det;
    ++out.factors;
  }
  return out;
}

Complex log_l_series(const OrbitLedger& ledger, const grp::Irrep& pi, Complex s, double t) {
  check_window(ledger, t);
  grp::check_irrep(ledger.group, pi);
  Complex acc = 0.0;
  const auto end = first_after(ledger, t);
  for (auto it = ledger.records.begin(); it != end; ++it) {
    const Complex z = std::exp(-s * ledger.h_top * it->r_period);
    if (!(std::abs(z) < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "series diverges: |e^{-s h l}| >= 1");
    }
    Complex zm = z;
    for (int m = 1; m < 100000; ++m) {
      const auto inv = grp::invariant_power(ledger.group, it->holonomy, m);
      acc += grp::character_from_invariant(ledger.group, pi, inv) * zm / static_cast<double>(m);
      zm *= z;
      if (std::abs(zm) * pi.dim() < 1e-20) break;
    }
  }
  return acc;
}

CountingFns::CountingFns(const OrbitLedger& ledger, grp::Irrep pi, int k)
    : ledger_(&ledger), pi_(pi), k_(k) {
  if (k < 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 0");
  grp::check_irrep(ledger.group, pi);
}

Complex CountingFns::psi(double t, OrbitSum sum) const {
  check_window(*ledger_, t);
  Complex acc = 0.0;
  const auto end = first_after(*ledger_, t);
  for (auto it = ledger_->records.begin(); it != end; ++it) {
    const double l = it->r_period;
    const int m_max = sum == OrbitSum::kPrimesOnly ? 1 : static_cast<int>(std::floor(t / l + 1e-12));
    for (int m = 1; m <= m_max; ++m) {
      const auto inv = grp::invariant_power(ledger_->group, it->holonomy, m);
      acc += grp::character_from_invariant(ledger_->group, pi_, inv) * l;
    }
  }
  return acc;
}

Complex CountingFns::phi(double t) const {
  check_window(*ledger_, t);
  Complex acc = 0.0;
  const auto end = first_after(*ledger_, t);
  for (auto it = ledger_->records.begin(); it != end; ++it)
    acc += grp::character_from_invariant(ledger_->group, pi_, it->holonomy);
  return acc;
}

Complex CountingFns::n_k(double x, Threshold threshold, OrbitSum sum) const {
  if (!(x > 0.0)) throw Error(ErrorCode::kInvalidArgument, "x must be positive");
  const double scale = threshold == Threshold::kScaled ? ledger_->h_top : 1.0;
  const double l_cap = std::log(x) / scale;
  check_window(*ledger_, l_cap);
  Complex acc = 0.0;
  const auto end = first_after(*ledger_, l_cap);
  for (auto it = ledger_->records.begin(); it != end; ++it) {
    const double l = it->r_period;
    const int m_max =
        sum == OrbitSum::kPrimesOnly ? 1 : static_cast<int>(std::floor(l_cap / l + 1e-12));
    for (int m = 1; m <= m_max; ++m) {
      const auto inv = grp::invariant_power(ledger_->group, it->holonomy, m);
      const double gap = std::max(0.0, x - std::exp(scale * m * l));
      acc += grp::character_from_invariant(ledger_->group, pi_, inv) * l * std::pow(gap, k_);
    }
  }
  return acc;
}

Complex CountingFns::m_xk(double x, Complex s) const {
  Complex den = 1.0;
  for (int j = 0; j <= k_; ++j) den *= s + static_cast<double>(j);
  return std::pow(Complex(x, 0.0), s + static_cast<double>(k_)) / den;
}

EquiFit equi_error_fit(const OrbitLedger& ledger, const std::vector<grp::Irrep>& pis,
                       const std::vector<double>& t_grid) {
  if (t_grid.size() < 4) {
    throw Error(ErrorCode::kInsufficientData, "equidistribution fit needs >= 4 grid points");
  }
  EquiFit out;
  std::vector<double> log_w;
  std::vector<double> log_c;
  for (const auto& pi : pis) {
    const ClassFunction cf = character_fn(ledger.group, pi);
    EquiFitEntry e;
    e.pi = pi;
    std::vector<double> lx;
    std::vector<double> ly;
    for (double t : t_grid) {
      const double a = std::abs(equi_average(ledger, cf, t));
      e.t_grid.push_back(t);
      e.abs_average.push_back(a);
      if (a > 0.0 && t > 0.0) {
        lx.push_back(std::log(t));
        ly.push_back(std::log(a));
      }
    }
    if (lx.size() < 2) {
      throw Error(ErrorCode::kInsufficientData,
                  "fewer than two nonzero averages for " + pi.label());
    }
    const LineFit fit = fit_line(lx, ly);
    e.order = -fit.slope;
    e.constant = std::exp(fit.intercept);
    e.r2 = fit.r2;
    if (!pi.is_trivial()) {
      log_w.push_back(std::log(pi.weight_norm()));
      log_c.push_back(fit.intercept);
    }
    out.entries.push_back(std::move(e));
  }
  if (log_w.size() >= 2) {
    const LineFit cross = fit_line(log_w, log_c);
    out.c37 = cross.slope;
    out.c37_r2 = cross.r2;
  } else {
    out.c37 = std::numeric_limits<double>::quiet_NaN();
    out.c37_r2 = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace mixlab::orbits
