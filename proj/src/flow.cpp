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

#include "mixlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>

#include "mixlab/error.hpp"

namespace mixlab::flow {

namespace {

double max_abs_mode(const grp::Irrep& pi) {
  if (pi.kind != grp::GroupKind::kTorus) return pi.two_j;
  int m = 0;
  for (int i = 0; i < pi.torus_dim; ++i) m = std::max(m, std::abs(pi.mode[i]));
  return m;
}

// Binomial-free integral of sum_pq s_pq (u + shift)^p u^q over [a, b].
Complex poly_pair_integral(const Eigen::MatrixXcd& s, double shift, double a, double b) {
  const int deg = static_cast<int>(s.rows() + s.cols()) - 2;
  const GaussRule& rule = gauss_legendre(deg / 2 + 1);
  return gauss_integrate(rule, a, b, [&](double u) {
    Complex acc = 0.0;
    double up = 1.0;
    for (Eigen::Index p = 0; p < s.rows(); ++p) {
      double uq = 1.0;
      for (Eigen::Index q = 0; q < s.cols(); ++q) {
        acc += s(p, q) * (up * uq);
        uq *= u;
      }
      up *= u + shift;
    }
    return acc;
  });
}

}  // namespace

TestFn::TestFn(grp::Group group, std::shared_ptr<const sft::WordIndex> words, int degree)
    : group_(group), words_(std::move(words)), degree_(degree) {
  if (degree < 0) throw Error(ErrorCode::kInvalidArgument, "degree must be >= 0");
}

TestFn TestFn::character(const sft::Shift& shift, const grp::Group& group, const grp::Irrep& pi,
                         const std::vector<Complex>& poly, int depth) {
  if (poly.empty()) throw Error(ErrorCode::kInvalidArgument, "empty u-polynomial");
  TestFn f(group, sft::word_index(shift, depth), static_cast<int>(poly.size()) - 1);
  const int d = pi.dim();
  for (std::size_t w = 0; w < f.words_->size(); ++w)
    for (std::size_t p = 0; p < poly.size(); ++p)
      f.set(pi, w, static_cast<int>(p),
            poly[p] * Eigen::MatrixXcd::Identity(d, d));
  return f;
}

TestFn TestFn::constant(const sft::Shift& shift, const grp::Group& group, Complex c) {
  return character(shift, group, grp::Irrep::trivial(group), {c}, 1);
}

double TestFn::band_limit() const {
  double m = 0.0;
  for (const auto& b : bands_)
    if (!b.pi.is_trivial()) m = std::max(m, b.pi.weight_norm());
  return m;
}

Band& TestFn::band(const grp::Irrep& pi) {
  grp::check_irrep(group_, pi);
  for (auto& b : bands_)
    if (b.pi == pi) return b;
  Band b;
  b.pi = pi;
  b.coeffs.assign(words_->size() * (degree_ + 1), Eigen::MatrixXcd::Zero(pi.dim(), pi.dim()));
  bands_.push_back(std::move(b));
  return bands_.back();
}

void TestFn::set(const grp::Irrep& pi, std::size_t word, int power, const Eigen::MatrixXcd& c) {
  if (power < 0 || power > degree_)
    throw Error(ErrorCode::kInvalidArgument, "power outside the declared degree");
  if (c.rows() != pi.dim() || c.cols() != pi.dim())
    throw Error(ErrorCode::kInvalidArgument, "coefficient has the wrong size");
  band(pi).coeffs.at(word * (degree_ + 1) + power) = c;
}

Complex TestFn::eval(std::size_t word, const grp::GroupElement& g, double u) const {
  Complex acc = 0.0;
  for (const auto& b : bands_) {
    const Eigen::MatrixXcd rep = grp::rep_matrix(group_, b.pi, g);
    double up = 1.0;
    for (int p = 0; p <= degree_; ++p) {
      acc += up * (b.coeffs[word * (degree_ + 1) + p] * rep).trace();
      up *= u;
    }
  }
  return acc;
}

Complex TestFn::operator()(std::span<const int> x, const grp::GroupElement& g, double u) const {
  return eval(words_->index(x.first(x_depth())), g, u);
}

TestFn TestFn::component(const grp::Irrep& pi) const {
  TestFn out(group_, words_, degree_);
  for (const auto& b : bands_)
    if (b.pi == pi) out.bands_.push_back(b);
  return out;
}

double TestFn::sup_bound(double u_max) const {
  double best = 0.0;
  for (std::size_t w = 0; w < words_->size(); ++w) {
    double acc = 0.0;
    for (const auto& b : bands_) {
      double up = 1.0;
      for (int p = 0; p <= degree_; ++p) {
        const auto& c = b.coeffs[w * (degree_ + 1) + p];
        acc += up * Eigen::JacobiSVD<Eigen::MatrixXcd>(c).singularValues().sum();
        up *= u_max;
      }
    }
    best = std::max(best, acc);
  }
  return best;
}

std::string estimator_name(Estimator e) {
  return e == Estimator::kQuadrature ? "quadrature" : "monte_carlo";
}

double roof_mean(const cocycle::SkewSystem& sys, const thermo::GibbsData& gibbs) {
  const auto& idx = sys.roof.index();
  double acc = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i)
    acc += gibbs.cylinder_measure(idx.word(i)) * sys.roof.at_index(i);
  return acc;
}

Complex suspension_integral(const cocycle::SkewSystem& sys, const thermo::GibbsData& gibbs,
                            const TestFn& f) {
  const grp::Irrep one = grp::Irrep::trivial(sys.group);
  const Band* triv = nullptr;
  for (const auto& b : f.bands())
    if (b.pi == one) triv = &b;
  if (triv == nullptr) return 0.0;
  const int depth = std::max(f.x_depth(), sys.roof.depth());
  const int deg = f.degree();
  Complex acc = 0.0;
  for (const auto& w : sft::word_index(sys.shift, depth)->all()) {
    const std::span<const int> ws(w);
    const double r = sys.roof(ws.first(sys.roof.depth()));
    const std::size_t fi = f.words().index(ws.first(f.x_depth()));
    // Haar average of Tr(C pi(g)) keeps only the trivial band; u-integral
    // of the polynomial in closed form.
    Complex inner = 0.0;
    double rp = r;
    for (int p = 0; p <= deg; ++p) {
      inner += triv->coeffs[fi * (deg + 1) + p](0, 0) * (rp / (p + 1));
      rp *= r;
    }
    acc += gibbs.cylinder_measure(ws) * inner;
  }
  return acc / roof_mean(sys, gibbs);
}

namespace {

// Raw integral of E(phi_t p) conj(F(p)) for t >= 0 by cylinder expansion.
class CorrelationKernel {
 public:
  CorrelationKernel(const cocycle::SkewSystem& sys, const thermo::GibbsData& gibbs,
                    const TestFn& e, const TestFn& f, const QuadratureOptions& opt)
      : sys_(sys), gibbs_(gibbs), e_(e), f_(f), opt_(opt) {
    if (!(e.group() == sys.group) || !(f.group() == sys.group))
      throw Error(ErrorCode::kIncompatibleGroup, "test function group differs from the system");
    kr_ = sys.roof.depth();
    kt_ = sys.cocycle.depth();
    base_ = std::max({e.x_depth(), f.x_depth(), kr_, kt_});
    if (opt.fiber == FiberMethod::kQuadrature) {
      int order = 0;
      if (sys.group.kind() == grp::GroupKind::kTorus) {
        double me = 0.0;
        double mf = 0.0;
        for (const auto& b : e.bands()) me = std::max(me, max_abs_mode(b.pi));
        for (const auto& b : f.bands()) mf = std::max(mf, max_abs_mode(b.pi));
        order = static_cast<int>(me + mf) + 1;
      } else {
        double je = 0.0;
        double jf = 0.0;
        for (const auto& b : e.bands()) je = std::max(je, max_abs_mode(b.pi));
        for (const auto& b : f.bands()) jf = std::max(jf, max_abs_mode(b.pi));
        order = std::max(0, static_cast<int>(std::ceil((je + jf - 2.0) / 4.0)));
      }
      rule_ = std::make_unique<grp::QuadratureRule>(grp::haar_quadrature(sys.group, order));
    }
  }

  Complex raw(double t) {
    t_ = t;
    Complex acc = 0.0;
    for (const auto& w : sft::word_index(sys_.shift, base_)->all()) {
      sft::Word word = w;
      acc += expand(word);
    }
    return acc / roof_mean(sys_, gibbs_);
  }

 private:
  Complex expand(sft::Word& w) {
    const int len = static_cast<int>(w.size());
    std::vector<double> cum{0.0};
    for (int j = 0; j + kr_ <= len; ++j)
      cum.push_back(cum.back() + sys_.roof(std::span<const int>(w).subspan(j, kr_)));
    const double r1 = cum[1];
    int big_j = -1;
    for (std::size_t j = 1; j < cum.size(); ++j) {
      if (cum[j] >= r1 + t_) {
        big_j = static_cast<int>(j);
        break;
      }
    }
    const bool resolved = big_j > 0 && big_j - 1 + e_.x_depth() <= len &&
                          big_j - 1 + kt_ - 1 <= len;
    if (!resolved) {
      if (len >= opt_.depth_budget) {
        throw Error(ErrorCode::kDepthBudgetExceeded,
                    "t = " + std::to_string(t_) + " needs cylinders longer than " +
                        std::to_string(opt_.depth_budget) + "; use the Monte Carlo estimator");
      }
      Complex acc = 0.0;
      for (int a = 0; a < sys_.shift.n_symbols(); ++a) {
        if (!sys_.shift.allowed(w.back(), a)) continue;
        w.push_back(a);
        acc += expand(w);
        w.pop_back();
      }
      return acc;
    }
    return gibbs_.cylinder_measure(w) * cylinder_term(w, cum, big_j);
  }

  Complex cylinder_term(const sft::Word& w, const std::vector<double>& cum, int big_j) {
    const std::span<const int> ws(w);
    const double r1 = cum[1];
    const std::size_t fi = f_.words().index(ws.first(f_.x_depth()));
    grp::GroupElement theta = grp::identity(sys_.group);
    Complex acc = 0.0;
    const int pe = e_.degree() + 1;
    const int pf = f_.degree() + 1;
    for (int n = 0; n < big_j; ++n) {
      if (n > 0) theta = grp::multiply(sys_.cocycle(ws.subspan(n - 1, kt_)), theta);
      const double a = std::max(0.0, cum[n] - t_);
      const double b = std::min(r1, cum[n + 1] - t_);
      if (!(b > a)) continue;
      const std::size_t ei = e_.words().index(ws.subspan(n, e_.x_depth()));
      Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(pe, pf);
      if (opt_.fiber == FiberMethod::kSchur) {
        for (const auto& be : e_.bands()) {
          for (const auto& bf : f_.bands()) {
            if (!(be.pi == bf.pi)) continue;
            const Eigen::MatrixXcd rep = grp::rep_matrix(sys_.group, be.pi, theta);
            const double inv_dim = 1.0 / be.pi.dim();
            for (int p = 0; p < pe; ++p) {
              const Eigen::MatrixXcd left = be.coeffs[ei * pe + p] * rep;
              for (int q = 0; q < pf; ++q)
                s(p, q) += (left * bf.coeffs[fi * pf + q].adjoint()).trace() * inv_dim;
            }
          }
        }
      } else {
        const auto& nodes = rule_->nodes();
        for (std::size_t k = 0; k < nodes.size(); ++k) {
          const grp::GroupElement moved = grp::multiply(theta, nodes[k]);
          std::vector<Complex> ev(pe, 0.0);
          std::vector<Complex> fv(pf, 0.0);
          for (const auto& be : e_.bands()) {
            const Eigen::MatrixXcd rep = grp::rep_matrix(sys_.group, be.pi, moved);
            for (int p = 0; p < pe; ++p) ev[p] += (be.coeffs[ei * pe + p] * rep).trace();
          }
          for (const auto& bf : f_.bands()) {
            const Eigen::MatrixXcd rep = grp::rep_matrix(sys_.group, bf.pi, nodes[k]);
            for (int q = 0; q < pf; ++q) fv[q] += (bf.coeffs[fi * pf + q] * rep).trace();
          }
          for (int p = 0; p < pe; ++p)
            for (int q = 0; q < pf; ++q) s(p, q) += rule_->weights()[k] * ev[p] * std::conj(fv[q]);
        }
      }
      acc += poly_pair_integral(s, t_ - cum[n], a, b);
    }
    return acc;
  }

  const cocycle::SkewSystem& sys_;
  const thermo::GibbsData& gibbs_;
  const TestFn& e_;
  const TestFn& f_;
  QuadratureOptions opt_;
  int kr_ = 1;
  int kt_ = 1;
  int base_ = 1;
  double t_ = 0.0;
  std::unique_ptr<grp::QuadratureRule> rule_;
};

}  // namespace

CorrelationSeries correlation_quadrature(const cocycle::SkewSystem& sys,
                                         const thermo::GibbsData& gibbs, const TestFn& e,
                                         const TestFn& f, const std::vector<double>& t_grid,
                                         const QuadratureOptions& options) {
  const Complex mean = suspension_integral(sys, gibbs, e) * std::conj(suspension_integral(sys, gibbs, f));
  CorrelationSeries out;
  out.t_grid = t_grid;
  out.rho.assign(t_grid.size(), 0.0);
  out.estimator = Estimator::kQuadrature;
  std::vector<std::exception_ptr> failures(t_grid.size());
  parallel_for(t_grid.size(), options.threads, [&](std::size_t i) {
    try {
      const double t = t_grid[i];
      if (t >= 0.0) {
        CorrelationKernel k(sys, gibbs, e, f, options);
        out.rho[i] = k.raw(t) - mean;
      } else {
        CorrelationKernel k(sys, gibbs, f, e, options);
        out.rho[i] = std::conj(k.raw(-t) - std::conj(mean));
      }
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });
  for (const auto& err : failures)
    if (err) std::rethrow_exception(err);
  return out;
}

CorrelationSeries correlation_mc(const cocycle::SkewSystem& sys, const thermo::GibbsData& gibbs,
                                 const TestFn& e, const TestFn& f,
                                 const std::vector<double>& t_grid, std::size_t n_samples,
                                 std::uint64_t seed, int threads) {
  if (n_samples < 1000) throw Error(ErrorCode::kInvalidArgument, "n_samples must be >= 1000");
  const Complex mean_e = suspension_integral(sys, gibbs, e);
  const Complex mean_f = suspension_integral(sys, gibbs, f);
  const double rbar = roof_mean(sys, gibbs);
  double t_max = 0.0;
  for (double t : t_grid) {
    if (t < 0.0) throw Error(ErrorCode::kInvalidArgument, "Monte Carlo needs t >= 0");
    t_max = std::max(t_max, t);
  }
  const int kr = sys.roof.depth();
  const int kt = sys.cocycle.depth();
  const int extra = std::max({kr, kt, e.x_depth(), f.x_depth()});
  const auto path_len = static_cast<std::size_t>(
      std::ceil((t_max + sys.max_roof()) / sys.min_roof()) + extra + 2);
  const std::size_t nt = t_grid.size();
  const std::size_t blocks = (n_samples + kMcBlock - 1) / kMcBlock;
  std::vector<std::vector<Complex>> sums(blocks, std::vector<Complex>(nt, 0.0));
  std::vector<std::vector<double>> sq(blocks, std::vector<double>(nt, 0.0));
  parallel_for(blocks, threads, [&](std::size_t blk) {
    Rng rng(splitmix64(seed + 0x9e3779b97f4a7c15ULL * (blk + 1)));
    const std::size_t count = std::min(kMcBlock, n_samples - blk * kMcBlock);
    for (std::size_t s = 0; s < count; ++s) {
      const std::vector<int> x = thermo::sample_path(gibbs, path_len, rng);
      const std::span<const int> xs(x);
      const grp::GroupElement g = grp::random_element(sys.group, rng);
      const double r0 = sys.roof(xs.first(kr));
      const double u = rng.uniform() * r0;
      const Complex fbar = std::conj(f(xs, g, u) - mean_f);
      const double weight = r0 / rbar;
      for (std::size_t i = 0; i < nt; ++i) {
        double local = u + t_grid[i];
        std::size_t pos = 0;
        grp::GroupElement h = g;
        double r = r0;
        while (local >= r) {
          local -= r;
          h = grp::multiply(sys.cocycle(xs.subspan(pos, kt)), h);
          ++pos;
          r = sys.roof(xs.subspan(pos, kr));
        }
        const Complex v = weight * (e(xs.subspan(pos), h, local) - mean_e) * fbar;
        sums[blk][i] += v;
        sq[blk][i] += std::norm(v);
      }
    }
  });
  CorrelationSeries out;
  out.t_grid = t_grid;
  out.estimator = Estimator::kMonteCarlo;
  out.rho.assign(nt, 0.0);
  out.error_bars.assign(nt, 0.0);
  const auto n = static_cast<double>(n_samples);
  for (std::size_t i = 0; i < nt; ++i) {
    Complex s = 0.0;
    double q = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      s += sums[b][i];
      q += sq[b][i];
    }
    const Complex m = s / n;
    const double var = std::max(0.0, (q / n - std::norm(m)) * n / (n - 1.0));
    out.rho[i] = m;
    out.error_bars[i] = std::sqrt(var / n);
  }
  return out;
}

std::map<grp::Irrep, CorrelationSeries> decompose_correlation(
    const cocycle::SkewSystem& sys, const thermo::GibbsData& gibbs, const TestFn& e,
    const TestFn& f, const std::vector<double>& t_grid, double weight_cutoff,
    const QuadratureOptions& options) {
  std::map<grp::Irrep, CorrelationSeries> out;
  for (const auto& be : e.bands()) {
    if (!be.pi.is_trivial() && be.pi.weight_norm() > weight_cutoff) continue;
    bool in_f = false;
    for (const auto& bf : f.bands()) in_f = in_f || bf.pi == be.pi;
    if (!in_f) continue;
    out.emplace(be.pi, correlation_quadrature(sys, gibbs, e.component(be.pi),
                                              f.component(be.pi), t_grid, options));
  }
  return out;
}

Complex ChiSeries::join_derivative(double t, int j) const {
  if (t < 0.5) return 0.0;
  const double tau = 2.0 * (t - 0.5);
  Complex acc = 0.0;
  for (std::size_t i = static_cast<std::size_t>(j); i < coeffs.size(); ++i) {
    double falling = 1.0;
    for (int k = 0; k < j; ++k) falling *= static_cast<double>(i - k);
    acc += coeffs[i] * falling * std::pow(tau, static_cast<double>(i - j));
  }
  return acc * std::pow(2.0, j);
}

ChiSeries chi_modify(const CorrelationSeries& series, int k2, double bound) {
  if (k2 < 0) throw Error(ErrorCode::kInvalidArgument, "k2 must be >= 0");
  const auto& t = series.t_grid;
  std::vector<double> xs;
  std::vector<Complex> ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= 0.5 && t[i] <= 1.5) {
      xs.push_back(t[i] - 1.0);
      ys.push_back(series.rho[i]);
    }
  }
  if (xs.size() < static_cast<std::size_t>(k2 + 1)) {
    throw Error(ErrorCode::kInsufficientData,
                "need at least " + std::to_string(k2 + 1) + " grid points in [0.5, 1.5]");
  }
  const int fit_deg = std::min<int>(k2 + 3, static_cast<int>(xs.size()) - 1);
  Eigen::MatrixXd v(xs.size(), fit_deg + 1);
  Eigen::VectorXcd rhs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double p = 1.0;
    for (int j = 0; j <= fit_deg; ++j) {
      v(i, j) = p;
      p *= xs[i];
    }
    rhs(i) = ys[i];
  }
  const Eigen::VectorXcd poly =
      v.cast<Complex>().colPivHouseholderQr().solve(rhs);

  ChiSeries out;
  out.k2 = k2;
  out.t_grid = t;
  out.rho_derivs.resize(k2 + 1);
  double fact = 1.0;
  for (int j = 0; j <= k2; ++j) {
    if (j > 0) fact *= j;
    out.rho_derivs[j] = j <= fit_deg ? poly(j) * fact : Complex(0.0);
  }

  // Unknowns c_{k2+1..2k2+1}; p^{(j)}(1) = rho^{(j)}(1) / 2^j.
  const int m = k2 + 1;
  Eigen::MatrixXd a(m, m);
  Eigen::VectorXcd b(m);
  for (int j = 0; j < m; ++j) {
    for (int c = 0; c < m; ++c) {
      const int i = k2 + 1 + c;
      double falling = 1.0;
      for (int k = 0; k < j; ++k) falling *= i - k;
      a(j, c) = falling;
    }
    b(j) = out.rho_derivs[j] / std::pow(2.0, j);
  }
  const Eigen::VectorXcd sol = a.cast<Complex>().fullPivLu().solve(b);
  out.coeffs.assign(2 * k2 + 2, 0.0);
  for (int c = 0; c < m; ++c) out.coeffs[k2 + 1 + c] = sol(c);

  out.chi.resize(t.size());
  double max_rho = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    max_rho = std::max(max_rho, std::abs(series.rho[i]));
    if (t[i] < 0.5) out.chi[i] = 0.0;
    else if (t[i] < 1.0) out.chi[i] = out.join_derivative(t[i], 0);
    else out.chi[i] = series.rho[i];
  }
  out.bound = bound > 0.0 ? bound : max_rho;
  out.derivative_sup.assign(k2 + 1, 0.0);
  constexpr int kSamples = 2000;
  for (int s = 0; s <= kSamples; ++s) {
    const double tt = 0.5 + 0.5 * s / kSamples;
    for (int j = 0; j <= k2; ++j)
      out.derivative_sup[j] = std::max(out.derivative_sup[j], std::abs(out.join_derivative(tt, j)));
  }
  out.sup_join = out.derivative_sup[0];
  if (out.sup_join > out.bound * (1.0 + 1e-9) + 1e-300) {
    throw Error(ErrorCode::kJoinOvershoot,
                "join reaches " + std::to_string(out.sup_join) + " above the bound " +
                    std::to_string(out.bound));
  }
  return out;
}

std::vector<LaplaceValue> laplace_numeric(const std::vector<double>& t_grid,
                                          const std::vector<Complex>& values,
                                          const std::vector<Complex>& s_grid) {
  const std::size_t n = t_grid.size();
  if (n < 2 || values.size() != n)
    throw Error(ErrorCode::kInvalidArgument, "need at least two matching samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw Error(ErrorCode::kInvalidArgument, "t grid must be strictly increasing");
  double sup = 0.0;
  for (const auto& v : values) sup = std::max(sup, std::abs(v));
  const std::size_t stencil = std::min<std::size_t>(6, n);
  const GaussRule& rule = gauss_legendre(16);
  std::vector<LaplaceValue> out;
  for (const Complex& s : s_grid) {
    if (!(s.real() > 0.0)) {
      throw Error(ErrorCode::kNonpositiveRealPart,
                  "Re(s) = " + std::to_string(s.real()) + " must be positive");
    }
    Complex acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t lo =
          std::min(n - stencil, i >= (stencil - 1) / 2 ? i - (stencil - 1) / 2 : std::size_t{0});
      acc += gauss_integrate(rule, t_grid[i], t_grid[i + 1], [&](double t) {
        Complex interp = 0.0;
        for (std::size_t a = lo; a < lo + stencil; ++a) {
          double basis = 1.0;
          for (std::size_t b = lo; b < lo + stencil; ++b)
            if (b != a) basis *= (t - t_grid[b]) / (t_grid[a] - t_grid[b]);
          interp += basis * values[a];
        }
        return std::exp(-s * t) * interp;
      });
    }
    LaplaceValue lv;
    lv.s = s;
    lv.value = acc;
    lv.tail_bound = sup * std::exp(-s.real() * t_grid.back()) / s.real();
    out.push_back(lv);
  }
  return out;
}

std::vector<LaplaceValue> laplace_numeric(const CorrelationSeries& series,
                                          const std::vector<Complex>& s_grid) {
  return laplace_numeric(series.t_grid, series.rho, s_grid);
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<Complex>& rho, double t_min) {
  std::vector<double> lt;
  std::vector<double> tt;
  std::vector<double> lr;
  for (std::size_t i = 0; i < t.size() && i < rho.size(); ++i) {
    if (t[i] < t_min || !(t[i] > 0.0) || !(std::abs(rho[i]) > 0.0)) continue;
    lt.push_back(std::log(t[i]));
    tt.push_back(t[i]);
    lr.push_back(std::log(std::abs(rho[i])));
  }
  if (lr.size() < 8) {
    throw Error(ErrorCode::kInsufficientData,
                "decay fit needs 8 points with t >= t_min and rho != 0, got " +
                    std::to_string(lr.size()));
  }
  DecayFit fit;
  fit.t_min = t_min;
  fit.power = fit_line(lt, lr);
  fit.exponential = fit_line(tt, lr);
  if (fit.exponential.r2 > fit.power.r2) {
    fit.model = "exponential";
    fit.order_or_rate = -fit.exponential.slope;
    fit.constant = std::exp(fit.exponential.intercept);
    fit.r2 = fit.exponential.r2;
  } else {
    fit.model = "power";
    fit.order_or_rate = -fit.power.slope;
    fit.constant = std::exp(fit.power.intercept);
    fit.r2 = fit.power.r2;
  }
  return fit;
}

DecayFit fit_decay(const CorrelationSeries& series, double t_min) {
  return fit_decay(series.t_grid, series.rho, t_min);
}

}  // namespace mixlab::flow
