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

#include "mixlab/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "mixlab/error.hpp"
#include "mixlab/numerics.hpp"

namespace mixlab::cocycle {

using grp::GroupElement;
using sft::TwoSidedPoint;

SkewSystem::SkewSystem(sft::Shift shift_in, sft::MetricConstant lam_in, thermo::RealFn roof_in,
                       GroupFn cocycle_in, grp::Group group_in)
    : shift(std::move(shift_in)),
      lam(lam_in),
      roof(std::move(roof_in)),
      cocycle(std::move(cocycle_in)),
      group(group_in) {
  if (!(roof.shift() == shift) || !(cocycle.shift() == shift))
    throw Error(ErrorCode::kInvalidArgument, "roof and cocycle must live on the system's shift");
  for (double v : roof.table())
    if (!(v > 0.0)) throw Error(ErrorCode::kInvalidArgument, "roof values must be positive");
  for (const auto& g : cocycle.table()) grp::check_member(group, g);
}

double SkewSystem::min_roof() const {
  return *std::min_element(roof.table().begin(), roof.table().end());
}

double SkewSystem::max_roof() const {
  return *std::max_element(roof.table().begin(), roof.table().end());
}

GroupFn constant_cocycle(const sft::Shift& shift, const grp::Group& group,
                         const GroupElement& value) {
  grp::check_member(group, value);
  return GroupFn::constant(shift, 1, value);
}

double lipschitz_seminorm(const GroupFn& f, const grp::Group& group,
                          const sft::MetricConstant& lam) {
  return thermo::lipschitz_seminorm(f, lam, [&](const GroupElement& a, const GroupElement& b) {
    return grp::distance(group, a, b);
  });
}

Birkhoff birkhoff(const SkewSystem& sys, const TwoSidedPoint& x, long n) {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "n must be >= 0");
  Birkhoff b{0.0, grp::identity(sys.group)};
  for (long i = 0; i < n; ++i) {
    b.r_n += sys.roof.at_point(x, i);
    b.theta_n = grp::multiply(sys.cocycle.at_point(x, i), b.theta_n);
  }
  return b;
}

Birkhoff birkhoff_past(const SkewSystem& sys, const TwoSidedPoint& x, long n) {
  return birkhoff(sys, x.shifted(-n), n);
}

char side_char(Side s) { return s == Side::kStable ? 's' : 'u'; }

bool on_local_leaf(const TwoSidedPoint& x, const TwoSidedPoint& y, Side side, long n) {
  const auto d = sft::compare_points(x, y);
  if (d.equal) return true;
  if (side == Side::kStable) return d.right_tails_agree && *d.highest < n;
  return d.left_tails_agree && *d.lowest > -n;
}

namespace {

// Number of terms after which the stable (resp. unstable) limits freeze
// for a function of the given depth.
long stable_terms(const TwoSidedPoint& x, const TwoSidedPoint& y) {
  const auto d = sft::compare_points(x, y);
  if (d.equal) return 0;
  if (!d.right_tails_agree) throw Error(ErrorCode::kNotOnSameLeaf, "right tails differ");
  return std::max(*d.highest + 1, 0L);
}

long unstable_terms(const TwoSidedPoint& x, const TwoSidedPoint& y, int depth) {
  const auto d = sft::compare_points(x, y);
  if (d.equal) return 0;
  if (!d.left_tails_agree) throw Error(ErrorCode::kNotOnSameLeaf, "left tails differ");
  return std::max(static_cast<long>(depth) - 1 - *d.lowest, 0L);
}

}  // namespace

double displacement_partial(const SkewSystem& sys, const TwoSidedPoint& x,
                            const TwoSidedPoint& y, Side side, long k) {
  if (side == Side::kStable) return birkhoff(sys, y, k).r_n - birkhoff(sys, x, k).r_n;
  return birkhoff_past(sys, x, k).r_n - birkhoff_past(sys, y, k).r_n;
}

GroupElement twist_partial(const SkewSystem& sys, const TwoSidedPoint& x, const TwoSidedPoint& y,
                           Side side, long k) {
  if (side == Side::kStable) {
    return grp::multiply(grp::inverse(birkhoff(sys, y, k).theta_n), birkhoff(sys, x, k).theta_n);
  }
  return grp::multiply(birkhoff_past(sys, y, k).theta_n,
                       grp::inverse(birkhoff_past(sys, x, k).theta_n));
}

double displacement(const SkewSystem& sys, const TwoSidedPoint& x, const TwoSidedPoint& y,
                    Side side) {
  const long n = side == Side::kStable ? stable_terms(x, y)
                                       : unstable_terms(x, y, sys.roof.depth());
  return displacement_partial(sys, x, y, side, n);
}

GroupElement twist(const SkewSystem& sys, const TwoSidedPoint& x, const TwoSidedPoint& y,
                   Side side) {
  const long n = side == Side::kStable ? stable_terms(x, y)
                                       : unstable_terms(x, y, sys.cocycle.depth());
  return twist_partial(sys, x, y, side, n);
}

double displacement_tail_constant(const SkewSystem& sys) {
  return thermo::lipschitz_seminorm(sys.roof, sys.lam) / (1.0 - sys.lam.value());
}

double twist_tail_constant(const SkewSystem& sys) {
  return lipschitz_seminorm(sys.cocycle, sys.group, sys.lam) / (1.0 - sys.lam.value());
}

namespace {

std::vector<sft::Word> cyclic_words(const sft::Shift& shift, int max_len) {
  std::vector<sft::Word> out;
  for (int len = 1; len <= max_len; ++len)
    for (auto& w : sft::words(shift, len))
      if (shift.is_cyclically_admissible(w)) out.push_back(std::move(w));
  return out;
}

// Points agreeing with z on the side of the leaf and periodic beyond it.
std::vector<TwoSidedPoint> leaf_family(const sft::Shift& shift, const TwoSidedPoint& z, Side side,
                                       long n0, const std::vector<sft::Word>& cycles) {
  std::vector<TwoSidedPoint> out;
  auto push_unique = [&](TwoSidedPoint p) {
    if (sft::compare_points(p, z).equal) return;
    for (const auto& q : out)
      if (sft::compare_points(p, q).equal) return;
    out.push_back(std::move(p));
  };
  if (side == Side::kStable) {
    const long end = std::max(n0, z.right_start());
    const long rlen = static_cast<long>(z.right_cycle().size());
    sft::Word core = z.window(n0, end);
    sft::Word right = z.window(end, end + rlen);
    const int first = z.at(n0);
    for (const auto& v : cycles) {
      if (!shift.allowed(v.back(), first)) continue;
      push_unique(TwoSidedPoint(shift, v, core, right, n0));
    }
  } else {
    const long begin = std::min(-n0 + 1, z.left_end());
    const long llen = static_cast<long>(z.left_cycle().size());
    sft::Word left = z.window(begin - llen, begin);
    sft::Word core = z.window(begin, -n0 + 1);
    const int last = z.at(-n0);
    for (const auto& v : cycles) {
      if (!shift.allowed(last, v.front())) continue;
      push_unique(TwoSidedPoint(shift, left, core, v, begin));
    }
  }
  return out;
}

struct ChainSearch {
  const SkewSystem& sys;
  const TwoSidedPoint& x;
  const BrinSearch& params;
  std::vector<sft::Word> cycles;
  std::vector<BrinTwist> found;
  std::vector<ChainLink> links;
  std::size_t visited = 0;

  void visit(const TwoSidedPoint& z, double disp, const GroupElement& tw) {
    if (++visited > params.budget) {
      throw Error(ErrorCode::kSearchBudgetExceeded,
                  "chain search visited more than " + std::to_string(params.budget) + " nodes");
    }
    const int legs = static_cast<int>(links.size());
    if (legs >= 1) {
      for (Side side : {Side::kStable, Side::kUnstable}) {
        if (!on_local_leaf(z, x, side, params.n0)) continue;
        const double total = disp + displacement(sys, z, x, side);
        if (std::abs(total) > params.tol) continue;
        BrinTwist b;
        b.chain = links;
        b.chain.push_back(ChainLink{z, side});
        b.twist = grp::multiply(twist(sys, z, x, side), tw);
        b.displacement_sum = total;
        found.push_back(std::move(b));
      }
    }
    if (legs + 1 >= params.p0) return;
    for (Side side : {Side::kStable, Side::kUnstable}) {
      for (const auto& y : leaf_family(sys.shift, z, side, params.n0, cycles)) {
        links.push_back(ChainLink{z, side});
        visit(y, disp + displacement(sys, z, y, side), grp::multiply(twist(sys, z, y, side), tw));
        links.pop_back();
      }
    }
  }
};

}  // namespace

std::vector<BrinTwist> brin_set(const SkewSystem& sys, const TwoSidedPoint& x,
                                const BrinSearch& params) {
  if (params.p0 < 2) throw Error(ErrorCode::kInvalidArgument, "p0 must be >= 2");
  if (params.max_word < 1) throw Error(ErrorCode::kInvalidArgument, "max_word must be >= 1");
  ChainSearch search{sys, x, params, cyclic_words(sys.shift, params.max_word), {}, {}, 0};
  BrinTwist trivial;
  trivial.chain.push_back(ChainLink{x, Side::kStable});
  trivial.twist = grp::identity(sys.group);
  search.found.push_back(trivial);
  search.visit(x, 0.0, grp::identity(sys.group));
  return std::move(search.found);
}

std::vector<GroupElement> distinct_twists(const grp::Group& group,
                                          const std::vector<BrinTwist>& twists, double tol) {
  std::vector<GroupElement> out;
  for (const auto& t : twists) {
    bool seen = false;
    for (const auto& g : out) seen = seen || grp::distance(group, g, t.twist) <= tol;
    if (!seen) out.push_back(t.twist);
  }
  return out;
}

namespace {

double max_displacement(const std::vector<Eigen::MatrixXcd>& a, const Eigen::VectorXcd& h) {
  double m = 0.0;
  for (const auto& ag : a) m = std::max(m, (ag * h).norm());
  return m;
}

// Projected subgradient descent of max_g |A_g h| on the unit sphere.
double minimax_descent(const std::vector<Eigen::MatrixXcd>& a, Eigen::VectorXcd h, int steps) {
  h.normalize();
  double best = max_displacement(a, h);
  double step = 0.25;
  for (int t = 0; t < steps; ++t) {
    std::size_t arg = 0;
    double top = -1.0;
    for (std::size_t g = 0; g < a.size(); ++g) {
      const double v = (a[g] * h).squaredNorm();
      if (v > top) {
        top = v;
        arg = g;
      }
    }
    Eigen::VectorXcd grad = a[arg].adjoint() * (a[arg] * h);
    // Remove the radial component before stepping.
    grad -= h * h.dot(grad);
    if (grad.norm() < 1e-15) break;
    Eigen::VectorXcd trial = (h - step * grad).normalized();
    const double val = max_displacement(a, trial);
    if (val < best) {
      best = val;
      h = trial;
    } else {
      step *= 0.5;
      if (step < 1e-10) break;
    }
  }
  return best;
}

DiophantineEntry certify_one(const grp::Group& group, const std::vector<GroupElement>& gamma,
                             const grp::Irrep& pi, int restarts, std::uint64_t seed) {
  DiophantineEntry e;
  e.pi = pi;
  e.weight_norm = pi.weight_norm();
  const int d = pi.dim();
  std::vector<Eigen::MatrixXcd> a;
  a.reserve(gamma.size());
  for (const auto& g : gamma)
    a.push_back(Eigen::MatrixXcd::Identity(d, d) - grp::rep_matrix(group, pi, g));
  if (d == 1) {
    double q = 0.0;
    double top = 0.0;
    for (const auto& ag : a) {
      const double v = std::abs(ag(0, 0));
      q += v * v;
      top = std::max(top, v);
    }
    e.lower_bound = std::sqrt(q / static_cast<double>(a.size()));
    e.minimax = top;
    return e;
  }
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& ag : a) q += ag.adjoint() * ag;
  q /= static_cast<double>(a.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(q);
  e.lower_bound = std::sqrt(std::max(solver.eigenvalues()(0), 0.0));
  Rng rng(seed);
  double best = minimax_descent(a, solver.eigenvectors().col(0), 200);
  for (int r = 1; r < restarts; ++r) {
    Eigen::VectorXcd h(d);
    for (int i = 0; i < d; ++i) h(i) = rng.complex_normal();
    best = std::min(best, minimax_descent(a, h, 200));
  }
  // The descent value is attained at a unit vector, so it can never fall
  // below sqrt(h^* Q h) >= lower_bound; the max guards roundoff only.
  e.minimax = std::max(best, e.lower_bound);
  return e;
}

}  // namespace

DiophantineReport diophantine_certify(const grp::Group& group,
                                      const std::vector<GroupElement>& gamma,
                                      double weight_cutoff, int restarts, std::uint64_t seed,
                                      int threads) {
  if (gamma.empty()) throw Error(ErrorCode::kInvalidArgument, "Gamma must be nonempty");
  if (restarts < 1) throw Error(ErrorCode::kInvalidArgument, "restarts must be >= 1");
  for (const auto& g : gamma) grp::check_member(group, g);
  DiophantineReport report;
  report.gamma = gamma;
  report.weight_cutoff = weight_cutoff;

  if (group.kind() == grp::GroupKind::kTorus && group.torus_dim() == 1) {
    // Circle fast path: delta_m is a scalar computation per mode.
    const long top = static_cast<long>(std::floor(weight_cutoff + 1e-12));
    report.entries.reserve(2 * static_cast<std::size_t>(std::max(top, 0L)));
    for (long m = 1; m <= top; ++m) {
      for (long s : {-m, m}) {
        grp::Irrep pi = grp::Irrep::torus_mode({static_cast<int>(s)});
        DiophantineEntry e;
        e.pi = pi;
        e.weight_norm = static_cast<double>(m);
        double q = 0.0;
        double mx = 0.0;
        for (const auto& g : gamma) {
          const double v = std::abs(Complex(1.0, 0.0) - std::polar(1.0, s * g.angles()[0]));
          q += v * v;
          mx = std::max(mx, v);
        }
        e.lower_bound = std::sqrt(q / static_cast<double>(gamma.size()));
        e.minimax = mx;
        report.entries.push_back(e);
      }
    }
  } else {
    std::vector<grp::Irrep> irreps = grp::irreps_up_to(group, weight_cutoff);
    irreps.erase(irreps.begin());  // trivial
    report.entries.resize(irreps.size());
    parallel_for(irreps.size(), threads, [&](std::size_t i) {
      report.entries[i] = certify_one(group, gamma, irreps[i], restarts, splitmix64(seed + i));
    });
  }
  if (report.entries.empty()) return report;

  // Regress on the record lows of the certified lower bounds.
  std::vector<double> lx;
  std::vector<double> ly;
  double running = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  while (i < report.entries.size()) {
    std::size_t j = i;
    double group_min = std::numeric_limits<double>::infinity();
    while (j < report.entries.size() && report.entries[j].weight_norm == report.entries[i].weight_norm) {
      group_min = std::min(group_min, report.entries[j].lower_bound);
      ++j;
    }
    if (group_min < running && group_min > 0.0) {
      running = group_min;
      lx.push_back(std::log(report.entries[i].weight_norm));
      ly.push_back(std::log(group_min));
    }
    i = j;
  }
  report.fitted_c = 0.0;
  if (lx.size() >= 2) {
    const LineFit fit = fit_line(lx, ly);
    report.fitted_c = std::max(0.0, -fit.slope);
    report.fit_r2 = fit.r2;
  }
  double delta = std::numeric_limits<double>::infinity();
  for (const auto& e : report.entries)
    delta = std::min(delta, e.lower_bound * std::pow(e.weight_norm, report.fitted_c));
  report.delta = delta;
  return report;
}

BadApproximation badly_approximable(double alpha, std::int64_t q_max) {
  if (q_max < 2) throw Error(ErrorCode::kInvalidArgument, "q_max must be >= 2");
  if (!std::isfinite(alpha)) throw Error(ErrorCode::kInvalidArgument, "alpha must be finite");
  const long double a = alpha;
  auto dist = [&](std::int64_t q) {
    const long double v = static_cast<long double>(q) * a;
    return static_cast<double>(std::fabs(v - std::nearbyint(v)));
  };
  BadApproximation out;
  // Convergent denominators by the continued-fraction recurrence; the
  // distances themselves are recomputed directly, so drift in late partial
  // quotients cannot corrupt them.
  long double x = a;
  std::int64_t q_prev = 0;
  std::int64_t q = 1;
  for (int iter = 0; iter < 200; ++iter) {
    if (q > q_max) break;
    if (out.convergent_denominators.empty() || out.convergent_denominators.back() != q)
      out.convergent_denominators.push_back(q);
    if (dist(q) < 1e-15) {
      throw Error(ErrorCode::kRationalAlpha,
                  "alpha is within 1e-15 of a rational with denominator " + std::to_string(q));
    }
    const long double ai = std::floor(x);
    const long double frac = x - ai;
    if (frac <= 0.0L) break;
    x = 1.0L / frac;
    const long double next_a = std::floor(x);
    if (next_a > static_cast<long double>(q_max)) break;
    const std::int64_t q_next = static_cast<std::int64_t>(next_a) * q + q_prev;
    q_prev = q;
    q = q_next;
  }
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::int64_t d : out.convergent_denominators) {
    if (d < 2) continue;
    lx.push_back(std::log(static_cast<double>(d)));
    ly.push_back(std::log(dist(d)));
  }
  out.fitted_exponent = 1.0;
  if (lx.size() >= 2) out.fitted_exponent = -fit_line(lx, ly).slope;
  out.c5 = out.fitted_exponent <= 1.05 ? 1.0 : out.fitted_exponent;
  out.delta = std::numeric_limits<double>::infinity();
  for (std::int64_t d : out.convergent_denominators)
    out.delta = std::min(out.delta, std::pow(static_cast<double>(d), out.c5) * dist(d));
  return out;
}

}  // namespace mixlab::cocycle
