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

#include <doctest.h>

#include <cmath>
#include <optional>

#include "fixtures.hpp"
#include "mixlab/cocycle.hpp"

using namespace mixlab;
using cocycle::Side;
using fixtures::full2;

namespace {

double wrap(double a) { return std::remainder(a, kTwoPi); }

cocycle::SkewSystem su2_system(std::uint64_t seed, int depth = 1) {
  Rng rng(seed);
  const auto s = fixtures::sparse3();
  const auto g = grp::Group::su2();
  auto roof = thermo::RealFn::generate(s, depth, [&](const sft::Word&) { return 0.5 + rng.uniform(); });
  auto th = cocycle::GroupFn::generate(s, depth, [&](const sft::Word&) { return grp::random_element(g, rng); });
  return cocycle::SkewSystem(s, sft::MetricConstant(0.5), roof, th, g);
}

// Depth-1 roof sums of x_a..x_{b-1}, read straight off the symbols.
double roof_sum(const std::vector<double>& r, const sft::TwoSidedPoint& x, long a, long b) {
  double acc = 0.0;
  for (long i = a; i < b; ++i) acc += r[x.at(i)];
  return acc;
}

// A point equal to x on the leaf side (i >= n stable, i <= -n unstable)
// and to z elsewhere; cycle phases are kept aligned.  Empty when the
// junction is inadmissible.
std::optional<sft::TwoSidedPoint> leaf_point(const sft::Shift& shift, const sft::TwoSidedPoint& x,
                                             const sft::TwoSidedPoint& z, Side side, long n) {
  try {
    if (side == Side::kStable) {
      const long rl = static_cast<long>(x.right_cycle().size());
      long start = x.right_start();
      while (start < n) start += rl;
      const long ll = static_cast<long>(z.left_cycle().size());
      long a = z.left_end();
      while (a > n) a -= ll;
      sft::Word core = z.window(a, n);
      const auto tail = x.window(n, start);
      core.insert(core.end(), tail.begin(), tail.end());
      return sft::TwoSidedPoint(shift, z.left_cycle(), core, x.right_cycle(), a);
    }
    const long ll = static_cast<long>(x.left_cycle().size());
    long e = x.left_end();
    while (e > -n + 1) e -= ll;
    const long rl = static_cast<long>(z.right_cycle().size());
    long b = z.right_start();
    while (b < -n + 1) b += rl;
    sft::Word core = x.window(e, -n + 1);
    const auto head = z.window(-n + 1, b);
    core.insert(core.end(), head.begin(), head.end());
    return sft::TwoSidedPoint(shift, x.left_cycle(), core, z.right_cycle(), e);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

TEST_CASE("birkhoff basics") {
  const auto sys = su2_system(1);
  const auto x = sft::TwoSidedPoint::periodic(sys.shift, {0, 1, 2});
  const auto b0 = cocycle::birkhoff(sys, x, 0);
  CHECK(b0.r_n == 0.0);
  CHECK(grp::distance(sys.group, b0.theta_n, grp::identity(sys.group)) == 0.0);

  const auto ones = fixtures::torus_system(full2(), {1.0, 1.0}, {0.3, 0.9});
  const auto y = sft::TwoSidedPoint(full2(), {0}, {1, 1, 0, 1}, {1, 0}, 0);
  for (long n = 0; n < 12; ++n) CHECK(cocycle::birkhoff(ones, y, n).r_n == double(n));
  // Abelian product is the angle sum.
  double ang = 0.0;
  for (long i = 0; i < 9; ++i) ang += y.at(i) ? 0.9 : 0.3;
  CHECK(std::abs(wrap(cocycle::birkhoff(ones, y, 9).theta_n.angles()[0] - ang)) < 1e-12);
}

TEST_CASE("cocycle identity on random cases") {
  Rng rng(99);
  for (int depth : {1, 2}) {
    const auto sys = su2_system(10 + depth, depth);
    for (int t = 0; t < 500; ++t) {
      const auto x = fixtures::random_point(sys.shift, rng);
      const long m = static_cast<long>(rng.next() % 9);
      const long n = static_cast<long>(rng.next() % 9);
      const auto lhs = cocycle::birkhoff(sys, x, m + n);
      const auto a = cocycle::birkhoff(sys, x.shifted(n), m);
      const auto b = cocycle::birkhoff(sys, x, n);
      CHECK(grp::distance(sys.group, lhs.theta_n, grp::multiply(a.theta_n, b.theta_n)) < 1e-12);
      CHECK(lhs.r_n == doctest::Approx(a.r_n + b.r_n).epsilon(1e-14));
      // Product order: Theta(sigma^{n-1} x) ... Theta(x), built here by hand.
      auto hand = grp::identity(sys.group);
      for (long i = 0; i < m + n; ++i)
        hand = grp::multiply(sys.cocycle(x.window(i, i + depth)), hand);
      CHECK(grp::distance(sys.group, hand, lhs.theta_n) < 1e-12);
    }
  }
}

TEST_CASE("displacement examples") {
  const std::vector<double> r{1.0, 2.5};
  const auto sys = fixtures::torus_system(full2(), r, {0.2, 1.1});
  const auto x = sft::TwoSidedPoint::periodic(full2(), {0, 1});
  CHECK(cocycle::displacement(sys, x, x, Side::kStable) == 0.0);
  CHECK(cocycle::displacement(sys, x, x, Side::kUnstable) == 0.0);
  // Flip index 0 only.
  const sft::TwoSidedPoint y(full2(), {0, 1}, {1}, {1, 0}, 0);
  CHECK(x.at(0) == 0);
  CHECK(cocycle::displacement(sys, x, y, Side::kStable) == doctest::Approx(r[1] - r[0]));
  CHECK(cocycle::on_local_leaf(x, y, Side::kStable, 1));
  // x and y differ at 0 so they are not on a common unstable leaf beyond index 0.
  CHECK_FALSE(cocycle::on_local_leaf(x, y, Side::kUnstable, 0));
  const auto far = sft::TwoSidedPoint::periodic(full2(), {1});
  CHECK_THROWS_AS(cocycle::displacement(sys, x, far, Side::kStable), Error);
}

TEST_CASE("displacement and twist match symbol sums") {
  const std::vector<double> r{0.7, 1.9};
  const std::vector<double> a{0.4, 2.2};
  const auto sys = fixtures::torus_system(full2(), r, a);
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto x = fixtures::random_point(full2(), rng);
    const auto z = fixtures::random_point(full2(), rng);
    const auto yo = leaf_point(full2(), x, z, Side::kStable, 2);
    if (!yo) continue;
    const auto& y = *yo;
    const double ds = roof_sum(r, y, 0, 2) - roof_sum(r, x, 0, 2);
    CHECK(cocycle::displacement(sys, x, y, Side::kStable) == doctest::Approx(ds).epsilon(1e-13));
    double angle = 0.0;
    for (long i = 0; i < 2; ++i) angle += a[x.at(i)] - a[y.at(i)];
    CHECK(std::abs(wrap(cocycle::twist(sys, x, y, Side::kStable).angles()[0] - angle)) < 1e-12);

    const auto uo = leaf_point(full2(), x, z, Side::kUnstable, 2);
    if (!uo) continue;
    const auto& u = *uo;
    REQUIRE(cocycle::on_local_leaf(x, u, Side::kUnstable, 2));
    const double du = roof_sum(r, x, -1, 0) - roof_sum(r, u, -1, 0);
    CHECK(cocycle::displacement(sys, x, u, Side::kUnstable) == doctest::Approx(du).epsilon(1e-13));
    double uangle = a[u.at(-1)] - a[x.at(-1)];
    CHECK(std::abs(wrap(cocycle::twist(sys, x, u, Side::kUnstable).angles()[0] - uangle)) < 1e-12);
  }
}

TEST_CASE("twist single-index s difference on SU2") {
  const auto sys = su2_system(3);
  const auto x = sft::TwoSidedPoint::periodic(sys.shift, {2});
  const sft::TwoSidedPoint y(sys.shift, {2}, {0}, {2}, 0);
  const auto expect = grp::multiply(grp::inverse(sys.cocycle(sft::Word{0})), sys.cocycle(sft::Word{2}));
  CHECK(grp::distance(sys.group, cocycle::twist(sys, x, y, Side::kStable), expect) < 1e-12);
  CHECK(grp::distance(sys.group, cocycle::twist(sys, x, x, Side::kStable), grp::identity(sys.group)) ==
        0.0);
}

TEST_CASE("tail bounds with the explicit constants") {
  Rng rng(12);
  for (int depth : {1, 2, 3}) {
    const auto sys = su2_system(40 + depth, depth);
    const double c10 = cocycle::displacement_tail_constant(sys);
    const double c12 = cocycle::twist_tail_constant(sys);
    CHECK(std::isfinite(c10));
    CHECK(std::isfinite(c12));
    for (int t = 0; t < 60; ++t) {
      const auto x = fixtures::random_point(sys.shift, rng);
      const long n = 1 + static_cast<long>(rng.next() % 3);
      for (Side side : {Side::kStable, Side::kUnstable}) {
        const auto y = leaf_point(sys.shift, x, fixtures::random_point(sys.shift, rng), side, n);
        if (!y) continue;
        REQUIRE(cocycle::on_local_leaf(x, *y, side, n));
        const double d = cocycle::displacement(sys, x, *y, side);
        const auto tw = cocycle::twist(sys, x, *y, side);
        for (long k = n; k <= n + 8; ++k) {
          const double bound = std::pow(sys.lam.value(), double(k - n));
          CHECK(std::abs(d - cocycle::displacement_partial(sys, x, *y, side, k)) <=
                c10 * bound + 1e-12);
          CHECK(grp::distance(sys.group, tw, cocycle::twist_partial(sys, x, *y, side, k)) <=
                c12 * bound + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("brin set trivial loop and negative control") {
  const auto sys = fixtures::torus_system(full2(), {1.0, 1.0}, {0.9, 0.9});
  const auto x = sft::TwoSidedPoint::periodic(full2(), {0, 1});
  cocycle::BrinSearch params;
  params.p0 = 4;
  params.max_word = 2;
  const auto set = cocycle::brin_set(sys, x, params);
  REQUIRE(!set.empty());
  CHECK(grp::distance(sys.group, set.front().twist, grp::identity(sys.group)) == 0.0);
  CHECK(set.front().displacement_sum == 0.0);
  CHECK(set.size() > 1);
  // Constant rotation: every closed chain has trivial twist.
  for (const auto& b : set) {
    CHECK(std::abs(b.displacement_sum) <= params.tol);
    CHECK(grp::distance(sys.group, b.twist, grp::identity(sys.group)) < 1e-12);
  }
  CHECK(cocycle::distinct_twists(sys.group, set).size() == 1);
}

TEST_CASE("brin set chains recomputed leg by leg") {
  const std::vector<double> a{0.0, kTwoPi * fixtures::kGamma};
  const auto sys = fixtures::torus_system(full2(), {1.0, 1.0}, a);
  const auto x = sft::TwoSidedPoint::periodic(full2(), {0, 1});
  cocycle::BrinSearch params;
  params.p0 = 4;
  params.max_word = 2;
  const auto set = cocycle::brin_set(sys, x, params);
  std::size_t alternating = 0;
  bool nontrivial = false;
  for (const auto& b : set) {
    if (b.chain.size() < 2) continue;
    // Legs (x_i -> x_{i+1}) with x_p = x_0; sum the abelian twists.
    double angle = 0.0;
    for (std::size_t i = 0; i < b.chain.size(); ++i) {
      const auto& p = b.chain[i].point;
      const auto& q = i + 1 < b.chain.size() ? b.chain[i + 1].point : b.chain[0].point;
      CHECK(cocycle::on_local_leaf(p, q, b.chain[i].side, params.n0));
      if (b.chain[i].side == Side::kStable) {
        for (long j = 0; j < 40; ++j) angle += a[p.at(j)] - a[q.at(j)];
      } else {
        for (long j = 1; j <= 40; ++j) angle += a[q.at(-j)] - a[p.at(-j)];
      }
    }
    CHECK(std::abs(wrap(b.twist.angles()[0] - angle)) < 1e-9);
    CHECK(std::abs(b.displacement_sum) <= params.tol);
    bool alt = b.chain.size() == 4;
    for (std::size_t i = 0; alt && i + 1 < b.chain.size(); ++i)
      alt = b.chain[i].side != b.chain[i + 1].side;
    if (alt) ++alternating;
    nontrivial = nontrivial || std::abs(wrap(b.twist.angles()[0])) > 1e-6;
  }
  // Constant roof: alternating 4-chains close with zero displacement automatically.
  CHECK(alternating > 0);
  CHECK(nontrivial);

  params.budget = 10;
  CHECK_THROWS_AS(cocycle::brin_set(sys, x, params), Error);
}

TEST_CASE("diophantine certification") {
  const auto t = grp::Group::torus(1);
  const double theta = fixtures::kGamma;
  const auto rep = cocycle::diophantine_certify(t, {grp::GroupElement::torus({kTwoPi * theta})}, 2000);
  REQUIRE(rep.entries.size() == 4000);
  double brute_min = 1e300;
  for (long m = 1; m <= 1000000; ++m)
    brute_min = std::min(brute_min, m * 2 * std::abs(std::sin(kPi * m * theta)));
  for (const auto& e : rep.entries) {
    const double m = e.weight_norm;
    CHECK(e.lower_bound == doctest::Approx(2 * std::abs(std::sin(kPi * m * theta))).epsilon(1e-9));
    CHECK(e.lower_bound <= e.minimax + 1e-12);
    CHECK(e.lower_bound >= rep.delta / std::pow(m, rep.fitted_c) * (1 - 1e-9));
  }
  CHECK(rep.delta > 0);
  // m = 1 is the worst case; along Fibonacci m the product m delta_m tends to 2 pi / sqrt 5.
  CHECK(brute_min == doctest::Approx(2 * std::sin(kPi * theta)).epsilon(1e-12));
  CHECK(832040 * 2 * std::abs(std::sin(kPi * 832040 * theta)) ==
        doctest::Approx(2 * kPi / std::sqrt(5.0)).epsilon(1e-4));
  CHECK(rep.delta <= brute_min + 1e-12);

  const auto s = grp::Group::su2();
  Rng rng(77);
  const std::vector<grp::GroupElement> gamma{grp::random_element(s, rng), grp::random_element(s, rng)};
  const auto rs = cocycle::diophantine_certify(s, gamma, 20, 32, 3);
  CHECK(std::isfinite(rs.fitted_c));
  CHECK(rs.delta > 0);
  for (const auto& e : rs.entries) {
    CHECK(e.lower_bound > 0);
    CHECK(e.lower_bound <= e.minimax + 1e-12);
    CHECK(e.minimax <= 2.0 + 1e-12);
  }
  // Conjugating Gamma changes nothing.
  const auto g0 = grp::random_element(s, rng);
  std::vector<grp::GroupElement> conj;
  for (const auto& g : gamma) conj.push_back(grp::multiply(grp::multiply(g0, g), grp::inverse(g0)));
  const auto rc = cocycle::diophantine_certify(s, conj, 20, 32, 3);
  REQUIRE(rc.entries.size() == rs.entries.size());
  for (std::size_t i = 0; i < rs.entries.size(); ++i)
    CHECK(std::abs(rc.entries[i].lower_bound - rs.entries[i].lower_bound) < 1e-9);
  // Threads do not change the report.
  const auto rt = cocycle::diophantine_certify(s, gamma, 20, 32, 3, 4);
  for (std::size_t i = 0; i < rs.entries.size(); ++i)
    CHECK(rt.entries[i].minimax == rs.entries[i].minimax);
}

TEST_CASE("badly approximable numbers") {
  auto brute = [](double alpha, long q_max) {
    double best = 1e300;
    for (long q = 1; q <= q_max; ++q) {
      const double x = q * alpha;
      best = std::min(best, q * std::abs(x - std::round(x)));
    }
    return best;
  };
  const auto g = cocycle::badly_approximable(kGoldenRatio, 100000);
  CHECK(g.c5 == 1.0);
  CHECK(g.delta >= 0.38);
  CHECK(g.delta == doctest::Approx(brute(kGoldenRatio, 100000)).epsilon(1e-9));

  // sqrt 2: the minimum sits at q = 2 and equals 6 - 4 sqrt 2.
  const auto r2 = cocycle::badly_approximable(std::sqrt(2.0), 100000);
  CHECK(r2.c5 == 1.0);
  CHECK(r2.delta == doctest::Approx(6 - 4 * std::sqrt(2.0)).epsilon(1e-9));
  CHECK(r2.delta == doctest::Approx(brute(std::sqrt(2.0), 100000)).epsilon(1e-9));

  CHECK_THROWS_AS(cocycle::badly_approximable(0.5, 100), Error);
}
