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

#include "mixlab/grp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "mixlab/error.hpp"

namespace mixlab::grp {

namespace {

double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

// Reduces an angle to [0, pi] under a -> -a and a -> a + 2 pi.
double fold_angle(double a) {
  const double r = wrap_angle(a);
  return r > kPi ? kTwoPi - r : r;
}

double vector_norm(const Quaternion& q) { return std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z); }

}  // namespace

Group Group::torus(int d) {
  if (d < 1 || d > kMaxTorusDim)
    throw Error(ErrorCode::kInvalidArgument,
                "torus dimension must be in [1, " + std::to_string(kMaxTorusDim) + "]");
  return Group(GroupKind::kTorus, d);
}

int Group::dim() const { return kind_ == GroupKind::kTorus ? d_ : 3; }
int Group::rank() const { return kind_ == GroupKind::kTorus ? d_ : 1; }

std::string Group::name() const {
  switch (kind_) {
    case GroupKind::kTorus: return "T" + std::to_string(d_);
    case GroupKind::kSU2: return "SU2";
    case GroupKind::kSO3: return "SO3";
  }
  return "?";
}

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quaternion Quaternion::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) throw Error(ErrorCode::kInvalidArgument, "zero quaternion");
  return {w / n, x / n, y / n, z / n};
}

Quaternion Quaternion::axis_angle(double ax, double ay, double az, double angle) {
  const double n = std::sqrt(ax * ax + ay * ay + az * az);
  if (!(n > 0.0)) throw Error(ErrorCode::kInvalidArgument, "zero rotation axis");
  const double s = std::sin(0.5 * angle) / n;
  return {std::cos(0.5 * angle), ax * s, ay * s, az * s};
}

Quaternion Quaternion::euler_zyz(double alpha, double beta, double gamma) {
  const Quaternion a{std::cos(0.5 * alpha), 0.0, 0.0, std::sin(0.5 * alpha)};
  const Quaternion b{std::cos(0.5 * beta), 0.0, std::sin(0.5 * beta), 0.0};
  const Quaternion c{std::cos(0.5 * gamma), 0.0, 0.0, std::sin(0.5 * gamma)};
  return a * b * c;
}

GroupElement GroupElement::torus(std::vector<double> angles) {
  GroupElement e;
  e.torus_ = true;
  for (double& a : angles) a = wrap_angle(a);
  e.angles_ = std::move(angles);
  return e;
}

GroupElement GroupElement::quaternion(const Quaternion& q) {
  GroupElement e;
  e.torus_ = false;
  e.q_ = q.normalized();
  return e;
}

GroupElement identity(const Group& g) {
  if (g.kind() == GroupKind::kTorus) return GroupElement::torus(std::vector<double>(g.torus_dim(), 0.0));
  return GroupElement::quaternion(Quaternion{});
}

GroupElement multiply(const GroupElement& a, const GroupElement& b) {
  if (a.is_torus() != b.is_torus())
    throw Error(ErrorCode::kIncompatibleGroup, "multiplying elements of different groups");
  if (a.is_torus()) {
    if (a.angles().size() != b.angles().size())
      throw Error(ErrorCode::kIncompatibleGroup, "torus dimensions differ");
    std::vector<double> s(a.angles().size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = a.angles()[i] + b.angles()[i];
    return GroupElement::torus(std::move(s));
  }
  return GroupElement::quaternion(a.quat() * b.quat());
}

GroupElement inverse(const GroupElement& a) {
  if (a.is_torus()) {
    std::vector<double> s(a.angles());
    for (double& v : s) v = -v;
    return GroupElement::torus(std::move(s));
  }
  return GroupElement::quaternion(a.quat().conj());
}

void check_member(const Group& g, const GroupElement& e) {
  const bool ok = g.kind() == GroupKind::kTorus
                      ? e.is_torus() && static_cast<int>(e.angles().size()) == g.torus_dim()
                      : !e.is_torus();
  if (!ok) throw Error(ErrorCode::kIncompatibleGroup, "element is not in " + g.name());
}

double distance(const Group& g, const GroupElement& a, const GroupElement& b) {
  check_member(g, a);
  check_member(g, b);
  if (g.kind() == GroupKind::kTorus) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.angles().size(); ++i) {
      const double d = fold_angle(a.angles()[i] - b.angles()[i]);
      s += d * d;
    }
    return std::sqrt(s);
  }
  const Quaternion& p = a.quat();
  const Quaternion& q = b.quat();
  const double minus = Quaternion{p.w - q.w, p.x - q.x, p.y - q.y, p.z - q.z}.norm();
  const double plus = Quaternion{p.w + q.w, p.x + q.x, p.y + q.y, p.z + q.z}.norm();
  if (g.kind() == GroupKind::kSU2) return 2.0 * std::atan2(minus, plus);
  return 2.0 * std::atan2(std::min(minus, plus), std::max(minus, plus));
}

GroupElement random_element(const Group& g, Rng& rng) {
  if (g.kind() == GroupKind::kTorus) {
    std::vector<double> a(g.torus_dim());
    for (double& v : a) v = rng.uniform(0.0, kTwoPi);
    return GroupElement::torus(std::move(a));
  }
  Quaternion q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
  return GroupElement::quaternion(q);
}

std::vector<double> conjugacy_invariant(const Group& g, const GroupElement& e) {
  check_member(g, e);
  switch (g.kind()) {
    case GroupKind::kTorus: return e.angles();
    case GroupKind::kSU2: return {std::atan2(vector_norm(e.quat()), e.quat().w)};
    case GroupKind::kSO3:
      return {2.0 * std::atan2(vector_norm(e.quat()), std::abs(e.quat().w))};
  }
  return {};
}

GroupElement element_from_invariant(const Group& g, const std::vector<double>& inv) {
  if (g.kind() == GroupKind::kTorus) return GroupElement::torus(inv);
  const double half = g.kind() == GroupKind::kSU2 ? inv.at(0) : 0.5 * inv.at(0);
  return GroupElement::quaternion(Quaternion{std::cos(half), 0.0, 0.0, std::sin(half)});
}

std::vector<double> invariant_power(const Group& g, const std::vector<double>& inv, int k) {
  if (g.kind() == GroupKind::kTorus) {
    std::vector<double> out(inv.size());
    for (std::size_t i = 0; i < inv.size(); ++i) out[i] = wrap_angle(k * inv[i]);
    return out;
  }
  return {fold_angle(k * inv.at(0))};
}

Irrep Irrep::trivial(const Group& g) {
  Irrep pi;
  pi.kind = g.kind();
  pi.torus_dim = g.kind() == GroupKind::kTorus ? g.torus_dim() : 1;
  return pi;
}

Irrep Irrep::torus_mode(std::vector<int> m) {
  if (m.empty() || static_cast<int>(m.size()) > kMaxTorusDim)
    throw Error(ErrorCode::kInvalidArgument, "torus mode dimension out of range");
  Irrep pi;
  pi.kind = GroupKind::kTorus;
  pi.torus_dim = static_cast<int>(m.size());
  std::copy(m.begin(), m.end(), pi.mode.begin());
  return pi;
}

Irrep Irrep::spin(const Group& g, int two_j) {
  if (g.kind() == GroupKind::kTorus)
    throw Error(ErrorCode::kIncompatibleGroup, "spin labels need SU2 or SO3");
  if (two_j < 0) throw Error(ErrorCode::kInvalidArgument, "negative spin");
  if (g.kind() == GroupKind::kSO3 && two_j % 2 != 0)
    throw Error(ErrorCode::kIncompatibleGroup, "SO3 irreps have integer spin");
  Irrep pi;
  pi.kind = g.kind();
  pi.two_j = two_j;
  return pi;
}

bool Irrep::is_trivial() const {
  if (kind != GroupKind::kTorus) return two_j == 0;
  for (int i = 0; i < torus_dim; ++i)
    if (mode[i] != 0) return false;
  return true;
}

double Irrep::weight_norm() const {
  if (is_trivial()) throw Error(ErrorCode::kTrivialRep, "the trivial representation has no weight");
  if (kind != GroupKind::kTorus) return static_cast<double>(two_j);
  double s = 0.0;
  for (int i = 0; i < torus_dim; ++i) s += static_cast<double>(mode[i]) * mode[i];
  return std::sqrt(s);
}

std::string Irrep::label() const {
  std::ostringstream out;
  if (kind == GroupKind::kTorus) {
    out << "m=";
    if (torus_dim == 1) {
      out << mode[0];
    } else {
      out << '(';
      for (int i = 0; i < torus_dim; ++i) out << (i ? "," : "") << mode[i];
      out << ')';
    }
  } else {
    out << "j=";
    if (two_j % 2 == 0) {
      out << two_j / 2;
    } else {
      out << two_j << "/2";
    }
  }
  return out.str();
}

bool Irrep::operator==(const Irrep& o) const {
  return kind == o.kind && torus_dim == o.torus_dim && mode == o.mode && two_j == o.two_j;
}

bool Irrep::operator<(const Irrep& o) const {
  auto key = [](const Irrep& p) {
    int sq = p.two_j * p.two_j;
    for (int i = 0; i < p.torus_dim; ++i) sq += p.mode[i] * p.mode[i];
    return std::make_tuple(static_cast<int>(p.kind), p.torus_dim, sq, p.mode, p.two_j);
  };
  return key(*this) < key(o);
}

void check_irrep(const Group& g, const Irrep& pi) {
  const bool ok = pi.kind == g.kind() &&
                  (g.kind() != GroupKind::kTorus || pi.torus_dim == g.torus_dim()) &&
                  (g.kind() != GroupKind::kSO3 || pi.two_j % 2 == 0);
  if (!ok) throw Error(ErrorCode::kIncompatibleGroup, pi.label() + " is not an irrep of " + g.name());
}

std::vector<Irrep> irreps_up_to(const Group& g, double weight_cutoff) {
  if (!(weight_cutoff > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cutoff must be > 0");
  std::vector<Irrep> out{Irrep::trivial(g)};
  if (g.kind() == GroupKind::kTorus) {
    const int d = g.torus_dim();
    const int r = static_cast<int>(std::floor(weight_cutoff + 1e-12));
    const double c2 = weight_cutoff * weight_cutoff * (1.0 + 1e-12);
    std::vector<int> m(d, -r);
    std::vector<Irrep> rest;
    while (true) {
      double sq = 0.0;
      bool zero = true;
      for (int v : m) {
        sq += static_cast<double>(v) * v;
        zero = zero && v == 0;
      }
      if (!zero && sq <= c2) rest.push_back(Irrep::torus_mode(m));
      int i = d - 1;
      while (i >= 0 && m[i] == r) m[i--] = -r;
      if (i < 0) break;
      ++m[i];
    }
    std::sort(rest.begin(), rest.end());
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
  }
  const int step = g.kind() == GroupKind::kSO3 ? 2 : 1;
  for (int tj = step; tj <= weight_cutoff + 1e-12; tj += step) out.push_back(Irrep::spin(g, tj));
  return out;
}

namespace {

struct SpinBasis {
  Eigen::MatrixXcd vectors;
  Eigen::VectorXd values;
};

// Eigendecomposition of J_y in the |j, m> basis ordered m = j .. -j.
const SpinBasis& spin_basis(int two_j) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<SpinBasis>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(two_j);
  if (it != cache.end()) return *it->second;
  const int n = two_j + 1;
  const double j = 0.5 * two_j;
  Eigen::MatrixXcd jplus = Eigen::MatrixXcd::Zero(n, n);
  for (int r = 1; r < n; ++r) {
    const double m = j - r;
    jplus(r - 1, r) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  const Eigen::MatrixXcd jy = (jplus - jplus.adjoint()) / Complex(0.0, 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(jy);
  auto basis = std::make_unique<SpinBasis>();
  basis->vectors = solver.eigenvectors();
  basis->values = solver.eigenvalues();
  auto& ref = *basis;
  cache.emplace(two_j, std::move(basis));
  return ref;
}

Eigen::MatrixXcd wigner(int two_j, const Quaternion& q) {
  // ZYZ Euler angles reproducing q exactly (not -q), see euler_zyz().
  const double half_beta = std::atan2(std::hypot(q.x, q.y), std::hypot(q.w, q.z));
  const double half_sum = std::atan2(q.z, q.w);
  const double half_diff = std::atan2(-q.x, q.y);
  const double alpha = half_sum + half_diff;
  const double gamma = half_sum - half_diff;
  const double beta = 2.0 * half_beta;
  const int n = two_j + 1;
  const SpinBasis& basis = spin_basis(two_j);
  Eigen::VectorXcd phases(n);
  for (int i = 0; i < n; ++i) phases(i) = std::polar(1.0, -beta * basis.values(i));
  Eigen::MatrixXcd d = basis.vectors * phases.asDiagonal() * basis.vectors.adjoint();
  const double j = 0.5 * two_j;
  for (int r = 0; r < n; ++r) {
    const double mr = j - r;
    for (int c = 0; c < n; ++c) {
      const double mc = j - c;
      d(r, c) *= std::polar(1.0, -(mr * alpha + mc * gamma));
    }
  }
  return d;
}

// U_n(x) by the three-term recurrence.
double chebyshev_u(int n, double x) {
  if (n == 0) return 1.0;
  double u0 = 1.0;
  double u1 = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double u2 = 2.0 * x * u1 - u0;
    u0 = u1;
    u1 = u2;
  }
  return u1;
}

}  // namespace

Eigen::MatrixXcd rep_matrix(const Group& g, const Irrep& pi, const GroupElement& e) {
  check_irrep(g, pi);
  check_member(g, e);
  if (g.kind() == GroupKind::kTorus) {
    double phase = 0.0;
    for (int i = 0; i < pi.torus_dim; ++i) phase += pi.mode[i] * e.angles()[i];
    Eigen::MatrixXcd m(1, 1);
    m(0, 0) = std::polar(1.0, phase);
    return m;
  }
  if (pi.two_j == 0) return Eigen::MatrixXcd::Identity(1, 1);
  return wigner(pi.two_j, e.quat());
}

Complex character_from_invariant(const Group& g, const Irrep& pi, const std::vector<double>& inv) {
  check_irrep(g, pi);
  if (g.kind() == GroupKind::kTorus) {
    double phase = 0.0;
    for (int i = 0; i < pi.torus_dim; ++i) phase += pi.mode[i] * inv.at(i);
    return std::polar(1.0, phase);
  }
  const double half = g.kind() == GroupKind::kSU2 ? inv.at(0) : 0.5 * inv.at(0);
  return chebyshev_u(pi.two_j, std::cos(half));
}

Complex character(const Group& g, const Irrep& pi, const GroupElement& e) {
  return character_from_invariant(g, pi, conjugacy_invariant(g, e));
}

std::vector<double> eigen_phases(const Group& g, const Irrep& pi, const std::vector<double>& inv) {
  check_irrep(g, pi);
  if (g.kind() == GroupKind::kTorus) {
    double phase = 0.0;
    for (int i = 0; i < pi.torus_dim; ++i) phase += pi.mode[i] * inv.at(i);
    return {phase};
  }
  // Rotation angle: 2 theta for SU(2), the invariant itself for SO(3).
  const double angle = g.kind() == GroupKind::kSU2 ? 2.0 * inv.at(0) : inv.at(0);
  std::vector<double> out;
  for (int r = 0; r <= pi.two_j; ++r) out.push_back((0.5 * pi.two_j - r) * angle);
  return out;
}

bool QuadratureRule::exact_for(const Irrep& pi) const {
  check_irrep(group_, pi);
  if (group_.kind() == GroupKind::kTorus) {
    for (int i = 0; i < pi.torus_dim; ++i)
      if (std::abs(pi.mode[i]) >= order_) return false;
    return true;
  }
  return pi.two_j <= spin_cutoff();
}

bool QuadratureRule::exact_for_pair(const Irrep& pi, const Irrep& pi2) const {
  check_irrep(group_, pi);
  check_irrep(group_, pi2);
  if (group_.kind() == GroupKind::kTorus) {
    for (int i = 0; i < pi.torus_dim; ++i)
      if (std::abs(pi.mode[i] - pi2.mode[i]) >= order_) return false;
    return true;
  }
  return pi.two_j + pi2.two_j <= spin_cutoff();
}

int QuadratureRule::spin_cutoff() const {
  if (group_.kind() == GroupKind::kTorus) return 0;
  return 4 * order_ + 2;
}

QuadratureRule haar_quadrature(const Group& g, int order) {
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "quadrature order must be >= 1");
  QuadratureRule rule(g);
  rule.order_ = order;
  if (g.kind() == GroupKind::kTorus) {
    const int d = g.torus_dim();
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(order);
    const double w = 1.0 / static_cast<double>(total);
    std::vector<int> idx(d, 0);
    for (std::size_t n = 0; n < total; ++n) {
      std::vector<double> a(d);
      for (int i = 0; i < d; ++i) a[i] = kTwoPi * idx[i] / order;
      rule.nodes_.push_back(GroupElement::torus(std::move(a)));
      rule.weights_.push_back(w);
      for (int i = d - 1; i >= 0; --i) {
        if (++idx[i] < order) break;
        idx[i] = 0;
      }
    }
    return rule;
  }
  const int n_beta = order + 1;
  const int n_alpha = 2 * order + 2;
  const bool su2 = g.kind() == GroupKind::kSU2;
  const int n_gamma = su2 ? 4 * order + 3 : 2 * order + 2;
  const double gamma_span = su2 ? 2.0 * kTwoPi : kTwoPi;
  const GaussRule gl = gauss_legendre(n_beta);
  for (int a = 0; a < n_alpha; ++a) {
    const double alpha = kTwoPi * a / n_alpha;
    for (int b = 0; b < n_beta; ++b) {
      const double beta = std::acos(gl.nodes[b]);
      for (int c = 0; c < n_gamma; ++c) {
        const double gamma = gamma_span * c / n_gamma;
        rule.nodes_.push_back(GroupElement::quaternion(Quaternion::euler_zyz(alpha, beta, gamma)));
        rule.weights_.push_back(0.5 * gl.weights[b] / (static_cast<double>(n_alpha) * n_gamma));
      }
    }
  }
  return rule;
}

Eigen::MatrixXcd fourier_coeff(const QuadratureRule& rule, const std::vector<Complex>& f_values,
                               const Irrep& pi, Strictness strictness) {
  if (f_values.size() != rule.size())
    throw Error(ErrorCode::kInvalidArgument, "function samples do not match the rule");
  if (!rule.exact_for(pi)) {
    const std::string msg = pi.label() + " is above the quadrature exactness cutoff";
    if (strictness == Strictness::kStrict) throw Error(ErrorCode::kQuadratureCutoff, msg);
    std::cerr << "warning: " << msg << '\n';
  }
  const Group& g = rule.group();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(pi.dim(), pi.dim());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    if (f_values[i] == Complex(0.0, 0.0)) continue;
    acc += (rule.weights()[i] * f_values[i]) * rep_matrix(g, pi, rule.nodes()[i]).adjoint();
  }
  return acc;
}

std::vector<Complex> peter_weyl_truncate(const QuadratureRule& rule,
                                         const std::vector<Complex>& f_values, double cutoff,
                                         const std::vector<GroupElement>& points,
                                         Strictness strictness) {
  const Group& g = rule.group();
  std::vector<Complex> out(points.size(), Complex(0.0, 0.0));
  for (const Irrep& pi : irreps_up_to(g, cutoff)) {
    const Eigen::MatrixXcd coeff = fourier_coeff(rule, f_values, pi, strictness);
    for (std::size_t i = 0; i < points.size(); ++i) {
      out[i] += static_cast<double>(pi.dim()) * (coeff * rep_matrix(g, pi, points[i])).trace();
    }
  }
  return out;
}

namespace {

template <typename F>
Complex composite_gauss(double a, double b, int panels, F&& f) {
  const GaussRule& rule = gauss_legendre(16);
  Complex total(0.0, 0.0);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    total += gauss_integrate(rule, a + p * h, a + (p + 1) * h, f);
  }
  return total;
}

}  // namespace

Complex class_coefficient(const Group& g, const std::function<Complex(const std::vector<double>&)>& f,
                          const Irrep& pi, int panels) {
  check_irrep(g, pi);
  if (panels < 1) throw Error(ErrorCode::kInvalidArgument, "panels must be >= 1");
  if (g.kind() == GroupKind::kTorus) {
    const int d = g.torus_dim();
    std::vector<int> idx(d, 0);
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(panels);
    Complex acc(0.0, 0.0);
    std::vector<double> a(d);
    for (std::size_t n = 0; n < total; ++n) {
      for (int i = 0; i < d; ++i) a[i] = kTwoPi * idx[i] / panels;
      acc += f(a) * std::conj(character_from_invariant(g, pi, a));
      for (int i = d - 1; i >= 0; --i) {
        if (++idx[i] < panels) break;
        idx[i] = 0;
      }
    }
    return acc / static_cast<double>(total);
  }
  if (g.kind() == GroupKind::kSU2) {
    // Class density (2/pi) sin^2(theta) on the half-angle.
    return composite_gauss(0.0, kPi, panels, [&](double t) {
      const std::vector<double> inv{t};
      const double s = std::sin(t);
      return f(inv) * std::conj(character_from_invariant(g, pi, inv)) * (2.0 / kPi * s * s);
    });
  }
  // SO(3): density (1 - cos a) / pi on the rotation angle.
  return composite_gauss(0.0, kPi, panels, [&](double a) {
    const std::vector<double> inv{a};
    return f(inv) * std::conj(character_from_invariant(g, pi, inv)) * ((1.0 - std::cos(a)) / kPi);
  });
}

Complex class_integral(const Group& g, const std::function<Complex(const std::vector<double>&)>& f,
                       int panels) {
  return class_coefficient(g, f, Irrep::trivial(g), panels);
}

double operator_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace mixlab::grp
