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

#include "mixlab/twisted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixlab/error.hpp"

namespace mixlab::twisted {

double HFunction::sup_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < words->size(); ++i) m = std::max(m, value(i).norm());
  return m;
}

double HFunction::lipschitz(const sft::MetricConstant& lam) const {
  const auto& idx = *words;
  double best = 0.0;
  for (int i = 0; i < idx.depth(); ++i) {
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
          osc = std::max(osc, (value(a) - value(b)).norm());
      start = end;
    }
    best = std::max(best, osc / std::pow(lam.value(), i));
  }
  return best;
}

TwistedOperator TwistedOperator::build(const cocycle::SkewSystem& sys, const grp::Irrep& pi,
                                       Complex s, const thermo::RealFn& potential,
                                       int state_depth) {
  grp::check_irrep(sys.group, pi);
  if (!(potential.shift() == sys.shift))
    throw Error(ErrorCode::kInvalidArgument, "potential lives on a different shift");
  const int needed =
      std::max({potential.depth(), sys.roof.depth(), sys.cocycle.depth(), 2}) - 1;
  const int depth = state_depth == 0 ? needed : state_depth;
  if (depth < needed) {
    throw Error(ErrorCode::kIncompatibleDepths,
                "state depth " + std::to_string(depth) + " is below the required " +
                    std::to_string(needed));
  }
  TwistedOperator op;
  op.sys_ = std::make_shared<const cocycle::SkewSystem>(sys);
  op.pi_ = pi;
  op.s_ = s;
  op.potential_ = std::make_shared<const thermo::RealFn>(potential);
  op.words_ = sft::word_index(sys.shift, depth);
  const auto trans = sft::word_index(sys.shift, depth + 1);
  const int d = pi.dim();
  const auto n = static_cast<Eigen::Index>(op.words_->size() * d);
  op.matrix_ = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& w : trans->all()) {
    const std::span<const int> ws(w);
    const std::size_t u = op.words_->index(ws.first(depth));
    const std::size_t v = op.words_->index(ws.subspan(1));
    const Complex weight = std::exp(Complex(potential(ws), 0.0) - s * sys.roof(ws));
    op.matrix_.block(v * d, u * d, d, d) = weight * grp::rep_matrix(sys.group, pi, sys.cocycle(ws));
  }
  return op;
}

HFunction TwistedOperator::zeros() const {
  HFunction h;
  h.words = words_;
  h.dim = pi_.dim();
  h.data = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(words_->size() * h.dim));
  return h;
}

HFunction TwistedOperator::apply(const HFunction& h) const {
  HFunction out = zeros();
  out.data = matrix_ * h.data;
  return out;
}

HFunction TwistedOperator::apply_direct(const HFunction& h) const {
  HFunction out = zeros();
  const auto& sh = sys_->shift;
  const int d = pi_.dim();
  for (std::size_t vi = 0; vi < words_->size(); ++vi) {
    const auto& v = words_->word(vi);
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(d);
    for (int a = 0; a < sh.n_symbols(); ++a) {
      if (!sh.allowed(a, v.front())) continue;
      sft::Word y{a};
      y.insert(y.end(), v.begin(), v.end());
      const Complex weight = std::exp(Complex((*potential_)(y), 0.0) - s_ * sys_->roof(y));
      acc += weight * (grp::rep_matrix(sys_->group, pi_, sys_->cocycle(y)) *
                       h.value(words_->index(y)));
    }
    out.data.segment(vi * d, d) = acc;
  }
  return out;
}

TwistedOperator build_twisted(const cocycle::SkewSystem& sys, const grp::Irrep& pi, Complex s,
                              const thermo::GibbsData& gibbs, int state_depth) {
  return TwistedOperator::build(sys, pi, s, gibbs.normalized_potential(), state_depth);
}

BpiParams default_bpi_params(const grp::Group& group, double c16, double lambda) {
  BpiParams p;
  // Smallest nontrivial weight is 1 except on SO(3), where it is 2.
  const double min_weight = group.kind() == grp::GroupKind::kSO3 ? 2.0 : 1.0;
  p.c15 = 10.0 / std::pow(min_weight, 1.0 + 0.5 * group.m_g());
  p.c18 = std::max(1.0, 2.0 * c16 / (1.0 - lambda));
  return p;
}

double bpi(double b, const grp::Irrep& pi, const BpiParams& params, const grp::Group& group) {
  if (pi.is_trivial()) throw Error(ErrorCode::kTrivialRep, "b_pi needs a nontrivial irrep");
  return std::abs(b) + params.c15 * std::pow(pi.weight_norm(), 1.0 + 0.5 * group.m_g());
}

double bpi_norm(const HFunction& h, double b, const grp::Irrep& pi, const BpiParams& params,
                const grp::Group& group, const sft::MetricConstant& lam) {
  const double bp = bpi(b, pi, params, group);
  return std::max(h.sup_norm(), h.lipschitz(lam) / (params.c18 * bp));
}

HFunction random_witness(const std::shared_ptr<const sft::WordIndex>& words, int dim,
                         std::size_t trial, Rng& rng) {
  HFunction h;
  h.words = words;
  h.dim = dim;
  const std::size_t n = words->size();
  h.data = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n * dim));
  auto random_unit = [&] {
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = rng.complex_normal();
    return Eigen::VectorXcd(v.normalized());
  };
  if (trial == 0) {
    for (std::size_t i = 0; i < n; ++i) h.data(static_cast<Eigen::Index>(i * dim)) = 1.0;
    return h;
  }
  switch (trial % 4) {
    case 0: {
      const Eigen::VectorXcd c = random_unit();
      for (std::size_t i = 0; i < n; ++i) h.data.segment(i * dim, dim) = c;
      break;
    }
    case 1:
      for (std::size_t i = 0; i < n; ++i) h.data.segment(i * dim, dim) = random_unit();
      break;
    case 2:
      for (Eigen::Index i = 0; i < h.data.size(); ++i) h.data(i) = rng.complex_normal();
      break;
    default: {
      const Eigen::VectorXcd c = random_unit();
      const double scale = rng.uniform(0.01, 0.5);
      for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXcd v(dim);
        for (int j = 0; j < dim; ++j) v(j) = rng.complex_normal();
        h.data.segment(i * dim, dim) = c + scale * v;
      }
    }
  }
  return h;
}

namespace {

HFunction power_apply(const TwistedOperator& op, HFunction h, int n) {
  for (int i = 0; i < n; ++i) h = op.apply(h);
  return h;
}

// On constant witnesses h = c the defect is max over state pairs of
// |(M_a - M_b) c| / lambda^{i(a,b)}, M_a the block-row sums of the n-th
// power and i(a,b) the common prefix length.  The sup over unit c is a top
// singular vector of the heaviest pair; random draws rarely land on it.
HFunction best_constant_witness(const TwistedOperator& op, int n, double lambda) {
  const auto& idx = *op.states_ptr();
  const int d = op.block_dim();
  Eigen::MatrixXcd pw = Eigen::MatrixXcd::Identity(op.matrix().rows(), op.matrix().cols());
  for (int i = 0; i < n; ++i) pw = op.matrix() * pw;
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXcd rows = Eigen::MatrixXcd::Zero(m * d, d);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) rows.block(a * d, 0, d, d) += pw.block(a * d, b * d, d, d);
  double best = -1.0;
  Eigen::VectorXcd arg = Eigen::VectorXcd::Zero(d);
  arg(0) = 1.0;
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a + 1; b < m; ++b) {
      const auto& wa = idx.word(static_cast<std::size_t>(a));
      const auto& wb = idx.word(static_cast<std::size_t>(b));
      int common = 0;
      while (common < idx.depth() - 1 && wa[common] == wb[common]) ++common;
      const Eigen::MatrixXcd diff = rows.block(a * d, 0, d, d) - rows.block(b * d, 0, d, d);
      const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(diff, Eigen::ComputeFullV);
      const double v = svd.singularValues()(0) / std::pow(lambda, common);
      if (v > best) {
        best = v;
        arg = svd.matrixV().col(0);
      }
    }
  }
  HFunction h = op.zeros();
  for (Eigen::Index a = 0; a < m; ++a) h.data.segment(a * d, d) = arg;
  return h;
}

}  // namespace

double lasota_yorke_ratio(const TwistedOperator& op, const HFunction& h, int n, double b_pi,
                          const sft::MetricConstant& lam) {
  const double sup = h.sup_norm();
  if (!(sup > 0.0)) return 0.0;
  const HFunction lh = power_apply(op, h, n);
  return (lh.lipschitz(lam) - std::pow(lam.value(), n) * h.lipschitz(lam)) / (b_pi * sup);
}

LasotaYorkeResult lasota_yorke_probe(const cocycle::SkewSystem& sys,
                                     const thermo::GibbsData& gibbs, const grp::Irrep& pi,
                                     double b, const std::vector<int>& n_list, std::size_t trials,
                                     std::uint64_t seed, const BpiParams& params,
                                     int state_depth) {
  if (n_list.empty()) throw Error(ErrorCode::kInvalidArgument, "n_list is empty");
  const double bp = bpi(b, pi, params, sys.group);
  const TwistedOperator op = build_twisted(sys, pi, Complex(0.0, b), gibbs, state_depth);
  Rng rng(seed);
  LasotaYorkeResult res;
  res.trials = trials;
  res.c16 = 0.0;
  auto score = [&](const HFunction& h, int& arg_n) {
    double best = -std::numeric_limits<double>::infinity();
    for (int n : n_list) {
      const double r = lasota_yorke_ratio(op, h, n, bp, sys.lam);
      if (r > best) {
        best = r;
        arg_n = n;
      }
    }
    return best;
  };
  struct Seed {
    double score;
    int n;
    HFunction h;
  };
  std::vector<Seed> top;
  constexpr std::size_t kStarts = 4;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    HFunction h = random_witness(op.states_ptr(), pi.dim(), t, rng);
    int n_at = n_list.front();
    const double s = score(h, n_at);
    if (s > best) {
      best = s;
      res.witness = h;
      res.witness_n = n_at;
    }
    top.push_back({s, n_at, std::move(h)});
    std::stable_sort(top.begin(), top.end(), [](const Seed& a, const Seed& b) { return a.score > b.score; });
    if (top.size() > kStarts) top.pop_back();
  }
  res.random_c16 = std::max(0.0, best);
  for (int n : n_list) {
    Seed cand{0.0, n, best_constant_witness(op, n, sys.lam.value())};
    cand.score = score(cand.h, cand.n);
    if (cand.score > best) {
      best = cand.score;
      res.witness = cand.h;
      res.witness_n = cand.n;
    }
    top.push_back(std::move(cand));
  }
  // Hill-climb from the best few draws: the sup over all h is the quantity
  // being estimated, and random draws approach it slowly.  The defect is a
  // max over state pairs, so single-state moves alternate with dense ones.
  const std::size_t climb_steps = 4 * trials;
  for (auto& start : top) {
    HFunction cur = start.h;
    double cur_score = start.score;
    const double scale = std::max(cur.sup_norm(), 1e-300);
    double sigma = 0.5;
    const auto states = static_cast<std::size_t>(cur.data.size() / pi.dim());
    for (std::size_t step = 0; step < climb_steps && sigma > 1e-9; ++step) {
      HFunction trial = cur;
      if (step % 2 == 0) {
        for (Eigen::Index i = 0; i < trial.data.size(); ++i) trial.data(i) += sigma * scale * rng.complex_normal();
      } else {
        const auto st = static_cast<Eigen::Index>(rng.next() % states);
        for (int c = 0; c < pi.dim(); ++c) trial.data(st * pi.dim() + c) += sigma * scale * rng.complex_normal();
      }
      int n_at = n_list.front();
      const double s = score(trial, n_at);
      if (s > cur_score) {
        cur_score = s;
        cur = std::move(trial);
        sigma *= 1.5;
        if (s > best) {
          best = s;
          res.witness = cur;
          res.witness_n = n_at;
        }
      } else {
        sigma *= 0.97;
      }
    }
  }
  res.c16 = std::max(0.0, best);
  return res;
}

double block_inf_norm(const Eigen::MatrixXcd& m, int dim) {
  const Eigen::Index blocks = m.rows() / dim;
  double best = 0.0;
  for (Eigen::Index r = 0; r < blocks; ++r) {
    double row = 0.0;
    for (Eigen::Index c = 0; c < blocks; ++c) {
      const auto blk = m.block(r * dim, c * dim, dim, dim);
      if (blk.cwiseAbs().maxCoeff() == 0.0) continue;
      row += grp::operator_norm(blk);
    }
    best = std::max(best, row);
  }
  return best;
}

DolgopyatScan dolgopyat_scan(const cocycle::SkewSystem& sys, const thermo::GibbsData& gibbs,
                             const std::vector<grp::Irrep>& pis, const std::vector<double>& b_grid,
                             const BpiParams& params, double c25, std::size_t trials,
                             std::uint64_t seed, int threads, int state_depth) {
  for (const auto& pi : pis)
    if (pi.is_trivial()) throw Error(ErrorCode::kTrivialRep, "dolgopyat_scan needs pi != 1");
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  DolgopyatScan scan;
  const std::size_t cells = pis.size() * b_grid.size();
  scan.records.resize(cells);
  parallel_for(cells, threads, [&](std::size_t cell) {
    const grp::Irrep& pi = pis[cell / b_grid.size()];
    const double b = b_grid[cell % b_grid.size()];
    ContractionRecord rec;
    rec.group = sys.group.name();
    rec.pi = pi;
    rec.weight_norm = pi.weight_norm();
    rec.b = b;
    rec.b_pi = bpi(b, pi, params, sys.group);
    rec.n = std::max(1, static_cast<int>(std::ceil(c25 * std::log(rec.b_pi))));
    const TwistedOperator op = build_twisted(sys, pi, Complex(0.0, b), gibbs, state_depth);
    Rng rng(splitmix64(seed + cell));
    double kappa = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      HFunction h = random_witness(op.states_ptr(), pi.dim(), t, rng);
      const double norm = bpi_norm(h, b, pi, params, sys.group, sys.lam);
      if (!(norm > 0.0)) continue;
      h.data /= norm;
      const HFunction lh = power_apply(op, h, rec.n);
      kappa = std::max(kappa, bpi_norm(lh, b, pi, params, sys.group, sys.lam));
    }
    rec.kappa = kappa;
    Eigen::MatrixXcd power = op.matrix();
    for (int i = 1; i < rec.n; ++i) power = op.matrix() * power;
    rec.matrix_norm_proxy = block_inf_norm(power, pi.dim());
    rec.fitted_c = kappa < 1.0 ? -std::log1p(-kappa) / std::log(rec.b_pi)
                               : std::numeric_limits<double>::infinity();
    scan.records[cell] = rec;
  });
  scan.fitted_c = 0.0;
  for (const auto& r : scan.records) scan.fitted_c = std::max(scan.fitted_c, r.fitted_c);
  return scan;
}

CancellationResult cancellation_check(const Eigen::VectorXcd& v1, const Eigen::VectorXcd& v2,
                                      double eps) {
  const double n1 = v1.norm();
  const double n2 = v2.norm();
  if (v1.size() != v2.size())
    throw Error(ErrorCode::kPreconditionViolated, "vectors have different dimensions");
  if (!(n1 > 0.0) || !(n2 > 0.0))
    throw Error(ErrorCode::kPreconditionViolated, "vectors must be nonzero");
  if (n1 > n2 * (1.0 + 1e-15))
    throw Error(ErrorCode::kPreconditionViolated, "need |v1| <= |v2|");
  const double gap = (v1 / n1 - v2 / n2).norm();
  if (gap < eps - 1e-12)
    throw Error(ErrorCode::kPreconditionViolated, "directions are closer than eps");
  CancellationResult r;
  r.epsilon = eps;
  r.slack = (1.0 - 0.25 * eps * eps) * n1 + n2 - (v1 + v2).norm();
  r.holds = r.slack >= -1e-12 * (n1 + n2);
  return r;
}

}  // namespace mixlab::twisted
