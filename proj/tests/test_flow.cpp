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

#include "fixtures.hpp"
#include "mixlab/flow.hpp"

using namespace mixlab;
using fixtures::full2;

namespace {

const sft::MetricConstant kHalf(0.5);

thermo::GibbsData mme(const sft::Shift& s) {
  return thermo::gibbs(s, thermo::RealFn::constant(s, 1, 0.0), kHalf);
}

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) {
        x[i] = z;
        w[i] = 2 / ((1 - z * z) * dp * dp);
        break;
      }
    }
  }
}

// The correlation integral by explicit orbit walking: enumerate words long
// enough to cover every return before time t, split u at the return times,
// integrate each polynomial piece with Gauss-Legendre and the fiber with a
// Haar rule.  Only used for t >= 0.
Complex brute_correlation(const cocycle::SkewSystem& sys, const thermo::GibbsData& g,
                          const flow::TestFn& e, const flow::TestFn& f, double t, int haar_order) {
  const auto rule = grp::haar_quadrature(sys.group, haar_order);
  std::vector<double> gx;
  std::vector<double> gw;
  gauss_legendre(12, gx, gw);
  const int need = static_cast<int>(std::ceil(t / sys.min_roof())) + 2 +
                   std::max({e.x_depth(), f.x_depth(), sys.roof.depth(), sys.cocycle.depth()});
  const double rbar = flow::roof_mean(sys, g);
  Complex acc = 0.0;
  Complex mean_e = 0.0;
  Complex mean_f = 0.0;
  for (const auto& w : sft::words(sys.shift, need)) {
    const double mu = g.cylinder_measure(w);
    auto window = [&](int i, int len) { return std::span<const int>(w).subspan(i, len); };
    std::vector<double> ret{0.0};
    std::vector<grp::GroupElement> hol{grp::identity(sys.group)};
    while (ret.back() < sys.max_roof() + t) {
      const int i = static_cast<int>(ret.size()) - 1;
      if (i + std::max(sys.roof.depth(), sys.cocycle.depth()) > need) break;
      ret.push_back(ret.back() + sys.roof(window(i, sys.roof.depth())));
      hol.push_back(grp::multiply(sys.cocycle(window(i, sys.cocycle.depth())), hol.back()));
    }
    const double r0 = ret[1];
    std::vector<double> cuts{0.0, r0};
    for (double R : ret)
      if (R - t > 0 && R - t < r0) cuts.push_back(R - t);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double a = cuts[c];
      const double b = cuts[c + 1];
      if (b - a < 1e-15) continue;
      for (std::size_t q = 0; q < gx.size(); ++q) {
        const double u = 0.5 * (a + b) + 0.5 * (b - a) * gx[q];
        const double wq = 0.5 * (b - a) * gw[q] * mu / rbar;
        std::size_t k = 0;
        while (k + 1 < ret.size() && ret[k + 1] <= u + t) ++k;
        REQUIRE(k + e.x_depth() <= w.size());
        const double up = u + t - ret[k];
        for (std::size_t n = 0; n < rule.size(); ++n) {
          const auto& gg = rule.nodes()[n];
          const Complex ev = e(window(static_cast<int>(k), e.x_depth()), grp::multiply(hol[k], gg), up);
          const Complex fv = f(window(0, f.x_depth()), gg, u);
          acc += wq * rule.weights()[n] * ev * std::conj(fv);
          mean_e += wq * rule.weights()[n] * e(window(0, e.x_depth()), gg, u);
          mean_f += wq * rule.weights()[n] * fv;
        }
      }
    }
  }
  return acc - mean_e * std::conj(mean_f);
}

std::vector<double> smoothstep_coeffs(int k) {
  // S_k(tau) = tau^{k+1} sum_{n=0}^{k} C(k+n, n) C(2k+1, k-n) (-tau)^n.
  auto binom = [](int n, int r) {
    double v = 1.0;
    for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
    return v;
  };
  std::vector<double> c(2 * k + 2, 0.0);
  for (int n = 0; n <= k; ++n) c[k + 1 + n] = binom(k + n, n) * binom(2 * k + 1, k - n) * (n % 2 ? -1 : 1);
  return c;
}

flow::TestFn two_band(const sft::Shift& s, const grp::Group& g, const grp::Irrep& a,
                      const grp::Irrep& b, std::uint64_t seed) {
  Rng rng(seed);
  flow::TestFn f(g, sft::word_index(s, 1), 1);
  for (const auto& pi : {a, b}) {
    for (std::size_t w = 0; w < f.words().size(); ++w)
      for (int p = 0; p <= 1; ++p) {
        Eigen::MatrixXcd c(pi.dim(), pi.dim());
        for (int i = 0; i < pi.dim(); ++i)
          for (int j = 0; j < pi.dim(); ++j) c(i, j) = rng.complex_normal() * 0.5;
        f.set(pi, w, p, c);
      }
  }
  return f;
}

}  // namespace

TEST_CASE("suspension integrals") {
  const auto sys = fixtures::golden_roof();
  const auto g = mme(full2());
  CHECK(flow::roof_mean(sys, g) == doctest::Approx((1 + kGoldenRatio) / 2).epsilon(1e-14));
  CHECK(std::abs(flow::suspension_integral(sys, g, flow::TestFn::constant(full2(), sys.group, 1.0)) - 1.0) <
        1e-13);
  const auto chi = flow::TestFn::character(full2(), sys.group, grp::Irrep::torus_mode({2}), {1.0, 0.5});
  CHECK(std::abs(flow::suspension_integral(sys, g, chi)) < 1e-12);

  const double c = 1.75;
  const auto flat = fixtures::torus_system(full2(), {c, c}, {0.3, 0.1});
  const auto u = flow::TestFn::character(full2(), flat.group, grp::Irrep::trivial(flat.group), {0.0, 1.0});
  CHECK(std::abs(flow::suspension_integral(flat, g, u) - c / 2) < 1e-13);

  // SU(2) with a spin-1 band and a u^2 factor.
  const auto su = grp::Group::su2();
  const auto s2 = cocycle::SkewSystem(full2(), kHalf, fixtures::depth1(full2(), {0.5, 2.0}),
                                      cocycle::constant_cocycle(full2(), su, grp::identity(su)), su);
  const auto sq = flow::TestFn::character(full2(), su, grp::Irrep::trivial(su), {0.0, 0.0, 1.0});
  // (1 / mean r) sum mu_a r_a^3 / 3.
  const double expect = (0.5 * std::pow(0.5, 3) / 3 + 0.5 * std::pow(2.0, 3) / 3) / 1.25;
  CHECK(std::abs(flow::suspension_integral(s2, g, sq) - expect) < 1e-13);
}

TEST_CASE("correlation at t = 0 is the covariance") {
  const auto sys = fixtures::torus_system(full2(), {0.8, 1.3}, {0.4, 1.9});
  const auto g = thermo::gibbs(full2(), fixtures::depth1(full2(), {std::log(0.3), std::log(0.7)}), kHalf);
  const auto e = two_band(full2(), sys.group, grp::Irrep::trivial(sys.group), grp::Irrep::torus_mode({1}), 3);
  const auto f = two_band(full2(), sys.group, grp::Irrep::trivial(sys.group), grp::Irrep::torus_mode({1}), 4);
  const auto rho = flow::correlation_quadrature(sys, g, e, f, {0.0});
  // Direct covariance by quadrature in u and g.
  std::vector<double> gx;
  std::vector<double> gw;
  gauss_legendre(10, gx, gw);
  const auto rule = grp::haar_quadrature(sys.group, 8);
  const double rbar = 0.3 * 0.8 + 0.7 * 1.3;
  Complex ef = 0.0;
  Complex me = 0.0;
  Complex mf = 0.0;
  for (int a = 0; a < 2; ++a) {
    const double ra = a ? 1.3 : 0.8;
    const double pa = a ? 0.7 : 0.3;
    for (std::size_t q = 0; q < gx.size(); ++q) {
      const double u = 0.5 * ra * (1 + gx[q]);
      for (std::size_t n = 0; n < rule.size(); ++n) {
        const double wt = pa * 0.5 * ra * gw[q] * rule.weights()[n] / rbar;
        const sft::Word w{a};
        const Complex ev = e(w, rule.nodes()[n], u);
        const Complex fv = f(w, rule.nodes()[n], u);
        ef += wt * ev * std::conj(fv);
        me += wt * ev;
        mf += wt * fv;
      }
    }
  }
  CHECK(std::abs(rho.rho[0] - (ef - me * std::conj(mf))) < 1e-10);
  // Swapping roles conjugates the value at t = 0.
  const auto swapped = flow::correlation_quadrature(sys, g, f, e, {0.0});
  CHECK(std::abs(swapped.rho[0] - std::conj(rho.rho[0])) < 1e-12);
}

TEST_CASE("correlations agree with explicit orbit walking") {
  const auto g2 = mme(full2());
  const auto sys = fixtures::torus_system(full2(), {1.0, kGoldenRatio}, {0.7, 2.3});
  const auto e = two_band(full2(), sys.group, grp::Irrep::trivial(sys.group), grp::Irrep::torus_mode({1}), 8);
  const auto f = two_band(full2(), sys.group, grp::Irrep::trivial(sys.group), grp::Irrep::torus_mode({1}), 9);
  const std::vector<double> ts{0.0, 0.35, 1.0, 1.7, 2.5, 4.2};
  for (auto fiber : {flow::FiberMethod::kSchur, flow::FiberMethod::kQuadrature}) {
    flow::QuadratureOptions opt;
    opt.fiber = fiber;
    const auto rho = flow::correlation_quadrature(sys, g2, e, f, ts, opt);
    for (std::size_t i = 0; i < ts.size(); ++i)
      CHECK(std::abs(rho.rho[i] - brute_correlation(sys, g2, e, f, ts[i], 6)) < 1e-11);
  }

  // SU(2) cocycle, depth-2 roof, non-uniform Gibbs measure.
  Rng rng(6);
  const auto su = grp::Group::su2();
  const auto s = fixtures::golden();
  auto roof = thermo::RealFn::generate(s, 2, [&](const sft::Word&) { return 0.7 + rng.uniform(); });
  auto th = cocycle::GroupFn::generate(s, 1, [&](const sft::Word&) { return grp::random_element(su, rng); });
  const cocycle::SkewSystem ss(s, kHalf, roof, th, su);
  const auto gs = thermo::gibbs(s, thermo::RealFn::generate(s, 2, [&](const sft::Word&) { return rng.uniform(); }),
                                kHalf);
  const auto es = two_band(s, su, grp::Irrep::trivial(su), grp::Irrep::spin(su, 1), 1);
  const auto fs = two_band(s, su, grp::Irrep::trivial(su), grp::Irrep::spin(su, 1), 2);
  const auto rs = flow::correlation_quadrature(ss, gs, es, fs, {0.0, 0.9, 2.2, 3.1});
  for (std::size_t i = 0; i < rs.t_grid.size(); ++i)
    CHECK(std::abs(rs.rho[i] - brute_correlation(ss, gs, es, fs, rs.t_grid[i], 3)) < 1e-11);
}

TEST_CASE("fiber orthogonality") {
  const auto g2 = mme(full2());
  const auto sys = fixtures::golden_roof();
  const std::vector<double> ts{0.0, 0.5, 1.5, 3.0};
  // Different bands never correlate; a band against the constant neither.
  const auto e = flow::TestFn::character(full2(), sys.group, grp::Irrep::torus_mode({1}), {1.0, 0.3});
  const auto f = flow::TestFn::character(full2(), sys.group, grp::Irrep::torus_mode({2}), {0.2, 1.0});
  const auto one = flow::TestFn::constant(full2(), sys.group, 1.0);
  flow::QuadratureOptions opt;
  opt.fiber = flow::FiberMethod::kQuadrature;
  for (const auto& series : {flow::correlation_quadrature(sys, g2, e, f, ts, opt),
                             flow::correlation_quadrature(sys, g2, e, one, ts, opt)})
    for (const auto& v : series.rho) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("depth budget is enforced") {
  const auto sys = fixtures::golden_roof();
  const auto e = flow::TestFn::character(full2(), sys.group, grp::Irrep::torus_mode({1}), {1.0});
  flow::QuadratureOptions opt;
  opt.depth_budget = 6;
  CHECK_THROWS_AS(flow::correlation_quadrature(sys, mme(full2()), e, e, {12.0}, opt), Error);
}

TEST_CASE("Monte Carlo estimator") {
  const auto sys = fixtures::golden_roof();
  const auto g2 = mme(full2());
  const auto one = flow::TestFn::constant(full2(), sys.group, 1.0);
  const auto z = flow::correlation_mc(sys, g2, one, one, {0.0, 1.0, 3.0}, 2000, 4);
  for (std::size_t i = 0; i < z.rho.size(); ++i) CHECK(std::abs(z.rho[i]) <= 3 * z.error_bars[i] + 1e-14);
  CHECK_THROWS_AS(flow::correlation_mc(sys, g2, one, one, {0.0}, 999, 1), Error);

  const auto e = flow::TestFn::character(full2(), sys.group, grp::Irrep::torus_mode({1}), {0.5, 1.0});
  const std::vector<double> ts{1.0, 2.0, 4.0, 8.0};
  const auto q = flow::correlation_quadrature(sys, g2, e, e, ts);
  const auto m = flow::correlation_mc(sys, g2, e, e, ts, 40000, 17);
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(std::abs(m.rho[i] - q.rho[i]) <= 3 * m.error_bars[i]);

  // Error bars follow the CLT.
  const auto a = flow::correlation_mc(sys, g2, e, e, ts, 20000, 5);
  const auto b = flow::correlation_mc(sys, g2, e, e, ts, 40000, 5);
  double ea = 0.0;
  double eb = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    ea += a.error_bars[i];
    eb += b.error_bars[i];
  }
  CHECK(eb / ea == doctest::Approx(1 / std::sqrt(2.0)).epsilon(0.1));

  // Same seed, same bits, any thread count.
  const auto c = flow::correlation_mc(sys, g2, e, e, ts, 5000, 21, 1);
  const auto d = flow::correlation_mc(sys, g2, e, e, ts, 5000, 21, 3);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK(c.rho[i] == d.rho[i]);
    CHECK(c.error_bars[i] == d.error_bars[i]);
  }
}

TEST_CASE("band decomposition") {
  const auto sys = fixtures::torus_system(full2(), {1.0, kGoldenRatio}, {0.9, 2.0});
  const auto g2 = mme(full2());
  const auto p1 = grp::Irrep::torus_mode({1});
  const auto p2 = grp::Irrep::torus_mode({-2});
  const auto e = two_band(full2(), sys.group, p1, p2, 31);
  const auto f = two_band(full2(), sys.group, p1, p2, 32);
  const std::vector<double> ts{0.0, 0.6, 1.3, 2.9, 4.4};
  flow::QuadratureOptions opt;
  opt.fiber = flow::FiberMethod::kQuadrature;
  const auto total = flow::correlation_quadrature(sys, g2, e, f, ts, opt);
  const auto parts = flow::decompose_correlation(sys, g2, e, f, ts, 5.0, opt);
  CHECK(parts.size() == 2);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    Complex sum = 0.0;
    for (const auto& [pi, s] : parts) sum += s.rho[i];
    CHECK(std::abs(sum - total.rho[i]) < 1e-9);
  }
  const auto cross = flow::correlation_quadrature(sys, g2, e.component(p1), f.component(p2), ts, opt);
  for (const auto& v : cross.rho) CHECK(std::abs(v) < 1e-10);

  // Single band: one entry equal to the total.
  const auto single = flow::decompose_correlation(sys, g2, e.component(p1), f.component(p1), ts, 5.0);
  const auto st = flow::correlation_quadrature(sys, g2, e.component(p1), f.component(p1), ts);
  REQUIRE(single.size() == 1);
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(std::abs(single.begin()->second.rho[i] - st.rho[i]) < 1e-13);
}

TEST_CASE("negative times through the Hermitian identity") {
  const auto sys = fixtures::torus_system(full2(), {1.0, 1.4}, {0.9, 2.0});
  const auto g2 = mme(full2());
  const auto e = two_band(full2(), sys.group, grp::Irrep::trivial(sys.group), grp::Irrep::torus_mode({1}), 41);
  const auto f = two_band(full2(), sys.group, grp::Irrep::trivial(sys.group), grp::Irrep::torus_mode({1}), 42);
  const auto neg = flow::correlation_quadrature(sys, g2, e, f, {-2.3, -0.4});
  CHECK(std::abs(neg.rho[0] - std::conj(brute_correlation(sys, g2, f, e, 2.3, 6))) < 1e-11);
  CHECK(std::abs(neg.rho[1] - std::conj(brute_correlation(sys, g2, f, e, 0.4, 6))) < 1e-11);
}

TEST_CASE("chi modification") {
  std::vector<double> t;
  for (int i = 0; i <= 80; ++i) t.push_back(i * 0.05);
  flow::CorrelationSeries zero{t, std::vector<Complex>(t.size(), 0.0), flow::Estimator::kQuadrature, {}};
  const auto cz = flow::chi_modify(zero, 2);
  for (const auto& v : cz.chi) CHECK(std::abs(v) == 0.0);

  const double c = 0.8;
  flow::CorrelationSeries flat{t, std::vector<Complex>(t.size(), c), flow::Estimator::kQuadrature, {}};
  for (int k2 = 0; k2 <= 3; ++k2) {
    const auto ch = flow::chi_modify(flat, k2);
    const auto ref = smoothstep_coeffs(k2);
    REQUIRE(ch.coeffs.size() >= ref.size());
    for (std::size_t i = 0; i < ch.coeffs.size(); ++i) {
      const double want = i < ref.size() ? c * ref[i] : 0.0;
      CHECK(std::abs(ch.coeffs[i] - want) < 1e-9);
    }
    for (int j = 0; j <= k2; ++j) CHECK(std::abs(ch.join_derivative(0.5, j)) < 1e-9);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] <= 0.5) CHECK(ch.chi[i] == Complex(0.0));
      if (t[i] >= 1.0) CHECK(ch.chi[i] == Complex(c));
    }
    // Derivative sups: 2^j c sup|S^(j)| from the closed form.
    for (int j = 0; j <= k2; ++j) {
      double sup = 0.0;
      for (int s = 0; s <= 4000; ++s) {
        const double tau = s / 4000.0;
        double acc = 0.0;
        for (std::size_t i = j; i < ref.size(); ++i) {
          double fall = 1.0;
          for (int k = 0; k < j; ++k) fall *= double(i - k);
          acc += ref[i] * fall * std::pow(tau, double(i - j));
        }
        sup = std::max(sup, std::abs(acc));
      }
      CHECK(ch.derivative_sup[j] == doctest::Approx(std::pow(2.0, j) * c * sup).epsilon(2e-3));
    }
  }

  // A join forced above the bound is reported.
  std::vector<Complex> wiggle;
  for (double x : t) wiggle.push_back(std::sin(9 * x));
  flow::CorrelationSeries w{t, wiggle, flow::Estimator::kQuadrature, {}};
  CHECK_THROWS_AS(flow::chi_modify(w, 3, 0.05), Error);
}

TEST_CASE("Laplace transform") {
  std::vector<double> t;
  for (int i = 0; i <= 4000; ++i) t.push_back(i * 0.01);
  std::vector<Complex> ex;
  std::vector<Complex> tex;
  for (double x : t) {
    ex.push_back(std::exp(-x));
    tex.push_back(x * std::exp(-x));
  }
  const std::vector<Complex> sg{0.5, {0.5, 3.0}, {1.0, -2.0}, {2.5, 10.0}};
  const auto a = flow::laplace_numeric(t, ex, sg);
  const auto b = flow::laplace_numeric(t, tex, sg);
  for (std::size_t i = 0; i < sg.size(); ++i) {
    CHECK(std::abs(a[i].value - 1.0 / (sg[i] + 1.0)) < 1e-8);
    CHECK(std::abs(b[i].value - 1.0 / ((sg[i] + 1.0) * (sg[i] + 1.0))) < 1e-8);
    CHECK(a[i].tail_bound >= 0.0);
  }
  // Linearity.
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Complex p = rng.complex_normal();
    const Complex q = rng.complex_normal();
    std::vector<Complex> mix;
    for (std::size_t i = 0; i < t.size(); ++i) mix.push_back(p * ex[i] + q * std::cos(t[i]) * tex[i]);
    std::vector<Complex> other;
    for (std::size_t i = 0; i < t.size(); ++i) other.push_back(std::cos(t[i]) * tex[i]);
    const auto m = flow::laplace_numeric(t, mix, sg);
    const auto o = flow::laplace_numeric(t, other, sg);
    for (std::size_t i = 0; i < sg.size(); ++i)
      CHECK(std::abs(m[i].value - (p * a[i].value + q * o[i].value)) < 1e-12);
  }
  CHECK_THROWS_AS(flow::laplace_numeric(t, ex, {Complex(0.0, 1.0)}), Error);
}

TEST_CASE("decay fits") {
  std::vector<double> t;
  std::vector<Complex> pw;
  std::vector<Complex> ex;
  for (int i = 0; i < 60; ++i) {
    const double x = 1.0 + 0.5 * i;
    t.push_back(x);
    pw.push_back(std::pow(x, -3.0));
    ex.push_back(std::exp(-x / 2));
  }
  const auto a = flow::fit_decay(t, pw, 1.0);
  CHECK(a.model == "power");
  CHECK(a.order_or_rate == doctest::Approx(3.0).epsilon(0.01 / 3));
  const auto b = flow::fit_decay(t, ex, 1.0);
  CHECK(b.model == "exponential");
  CHECK(std::abs(b.order_or_rate - 0.5) <= 0.01);
  CHECK_THROWS_AS(flow::fit_decay(std::vector<double>(t.begin(), t.begin() + 7),
                                  std::vector<Complex>(pw.begin(), pw.begin() + 7), 0.0),
                  Error);

  // Constant roof, trivial cocycle: the u-dependence is exactly periodic in t.
  const auto sys = fixtures::torus_system(full2(), {1.0, 1.0}, {0.0, 0.0});
  const auto e = flow::TestFn::character(full2(), sys.group, grp::Irrep::trivial(sys.group), {-0.5, 1.0});
  std::vector<double> grid;
  for (int i = 4; i <= 36; ++i) grid.push_back(0.5 * i);
  const auto rho = flow::correlation_quadrature(sys, mme(full2()), e, e, grid);
  const auto fit = flow::fit_decay(rho, 2.0);
  CHECK(std::abs(fit.power.slope) < 0.1);
}
