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

// Compact group kit for T^d, SU(2) and SO(3): elements, bi-invariant
// distances, Haar quadrature, irreducible unitary representations and
// Peter-Weyl expansions.
//
// Conventions
//   * SU(2) elements are unit quaternions q = (w, x, y, z), represented by
//       U(q) = [[w - iz, -y - ix], [y - ix, w + iz]].
//     SO(3) uses the same quaternions modulo sign.
//   * Spin-j matrices use the basis m = j, j-1, ..., -j and the standard
//     Wigner form D(alpha, beta, gamma) = e^{-i alpha Jz} e^{-i beta Jy}
//     e^{-i gamma Jz}, so spin 1/2 reproduces U(q).
//   * |lambda_pi| is |m|_2 on tori and 2j on SU(2) and SO(3).  The trivial
//     representation has no weight norm; operations that need one reject it.
//   * The conjugacy invariant of an SU(2) element is the half-angle
//     theta = arccos(w) in [0, pi]; for SO(3) it is the rotation angle
//     2 arccos|w| in [0, pi]; for tori it is the angle vector itself.

#ifndef MIXLAB_GRP_HPP_
#define MIXLAB_GRP_HPP_

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixlab/numerics.hpp"

namespace mixlab::grp {

enum class GroupKind { kTorus, kSU2, kSO3 };

inline constexpr int kMaxTorusDim = 4;

class Group {
 public:
  static Group torus(int d);
  static Group su2() { return Group(GroupKind::kSU2, 0); }
  static Group so3() { return Group(GroupKind::kSO3, 0); }

  GroupKind kind() const { return kind_; }
  int torus_dim() const { return d_; }
  int dim() const;
  int rank() const;
  // (dim - rank) / 2.
  int m_g() const { return (dim() - rank()) / 2; }
  std::string name() const;
  bool operator==(const Group& o) const { return kind_ == o.kind_ && d_ == o.d_; }

 private:
  Group(GroupKind k, int d) : kind_(k), d_(d) {}
  GroupKind kind_;
  int d_;
};

struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Quaternion operator*(const Quaternion& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }
  Quaternion conj() const { return {w, -x, -y, -z}; }
  double norm() const;
  Quaternion normalized() const;

  // Rotation by `angle` about the unit axis (ax, ay, az).
  static Quaternion axis_angle(double ax, double ay, double az, double angle);
  static Quaternion euler_zyz(double alpha, double beta, double gamma);
};

class GroupElement {
 public:
  GroupElement() = default;
  static GroupElement torus(std::vector<double> angles);
  static GroupElement quaternion(const Quaternion& q);

  bool is_torus() const { return torus_; }
  const std::vector<double>& angles() const { return angles_; }
  const Quaternion& quat() const { return q_; }

 private:
  bool torus_ = false;
  std::vector<double> angles_;
  Quaternion q_;
};

GroupElement identity(const Group& g);
GroupElement multiply(const GroupElement& a, const GroupElement& b);
GroupElement inverse(const GroupElement& a);
// Throws kIncompatibleGroup when the element does not belong to the group.
void check_member(const Group& g, const GroupElement& e);
double distance(const Group& g, const GroupElement& a, const GroupElement& b);
// Haar-random element.
GroupElement random_element(const Group& g, Rng& rng);

std::vector<double> conjugacy_invariant(const Group& g, const GroupElement& e);
// Representative element with the given invariant.
GroupElement element_from_invariant(const Group& g, const std::vector<double>& inv);
// Invariant of e^k given the invariant of e.
std::vector<double> invariant_power(const Group& g, const std::vector<double>& inv, int k);

struct Irrep {
  GroupKind kind = GroupKind::kTorus;
  int torus_dim = 1;
  std::array<int, kMaxTorusDim> mode{};
  // Twice the spin for SU(2); always even for SO(3).
  int two_j = 0;

  static Irrep trivial(const Group& g);
  static Irrep torus_mode(std::vector<int> m);
  static Irrep spin(const Group& g, int two_j);

  int dim() const { return kind == GroupKind::kTorus ? 1 : two_j + 1; }
  bool is_trivial() const;
  // Throws kTrivialRep for the trivial representation.
  double weight_norm() const;
  // "m=2", "m=(1,-1)", "j=1/2", "j=3".
  std::string label() const;
  bool operator==(const Irrep& o) const;
  bool operator<(const Irrep& o) const;
};

// Trivial first, then nontrivial irreps by (weight norm, label order).
std::vector<Irrep> irreps_up_to(const Group& g, double weight_cutoff);
void check_irrep(const Group& g, const Irrep& pi);

Eigen::MatrixXcd rep_matrix(const Group& g, const Irrep& pi, const GroupElement& e);
Complex character(const Group& g, const Irrep& pi, const GroupElement& e);
Complex character_from_invariant(const Group& g, const Irrep& pi, const std::vector<double>& inv);
// Eigenvalue phases of pi at an element with the given invariant.
std::vector<double> eigen_phases(const Group& g, const Irrep& pi, const std::vector<double>& inv);

class QuadratureRule {
 public:
  const Group& group() const { return group_; }
  int order() const { return order_; }
  const std::vector<GroupElement>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return nodes_.size(); }

  // Integrates every matrix coefficient of pi exactly.
  bool exact_for(const Irrep& pi) const;
  // Integrates products of matrix coefficients of pi and conj(pi2) exactly.
  bool exact_for_pair(const Irrep& pi, const Irrep& pi2) const;
  // Largest 2j with exact single-irrep integration (SU(2)/SO(3)).
  int spin_cutoff() const;

 private:
  friend QuadratureRule haar_quadrature(const Group& g, int order);
  explicit QuadratureRule(Group g) : group_(g) {}
  Group group_;
  int order_ = 0;
  std::vector<GroupElement> nodes_;
  std::vector<double> weights_;
};

// Torus: product trapezoid with `order` points per angle, exact for modes
// with every |m_i| < order.  SU(2)/SO(3): ZYZ Euler product rule with
// L + 1 Gauss-Legendre nodes in cos(beta), 2L + 2 equispaced alpha and
// 4L + 3 (SU(2), over [0, 4pi)) or 2L + 2 (SO(3)) equispaced gamma, for
// L = order.  It integrates matrix coefficients exactly for 2j <= 4L + 2
// and products of pi, pi' coefficients for 2j + 2j' <= 4L + 2.
QuadratureRule haar_quadrature(const Group& g, int order);

enum class Strictness { kStrict, kWarn };

// F^(pi) = sum_i w_i pi(g_i)^* F(g_i), F sampled on the rule's nodes.
// Above the rule's exactness cutoff: throws kQuadratureCutoff in strict
// mode, otherwise prints a warning to stderr and proceeds.
Eigen::MatrixXcd fourier_coeff(const QuadratureRule& rule, const std::vector<Complex>& f_values,
                               const Irrep& pi, Strictness strictness = Strictness::kStrict);

// sum over |lambda_pi| <= cutoff of dim_pi Tr(F^(pi) pi(g)) at each point.
std::vector<Complex> peter_weyl_truncate(const QuadratureRule& rule,
                                         const std::vector<Complex>& f_values, double cutoff,
                                         const std::vector<GroupElement>& points,
                                         Strictness strictness = Strictness::kStrict);

// f_pi = integral of F conj(xi_pi) for a class function F given on the
// invariant, by the Weyl integration formula with composite Gauss rules.
// Tori are integrated with the product trapezoid rule of `panels` points
// per angle.
Complex class_coefficient(const Group& g, const std::function<Complex(const std::vector<double>&)>& f,
                          const Irrep& pi, int panels = 64);

// Haar integral of a class function.
Complex class_integral(const Group& g, const std::function<Complex(const std::vector<double>&)>& f,
                       int panels = 64);

double operator_norm(const Eigen::MatrixXcd& m);

}  // namespace mixlab::grp

#endif  // MIXLAB_GRP_HPP_
