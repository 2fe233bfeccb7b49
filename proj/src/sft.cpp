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

#include "mixlab/sft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <tuple>

#include "mixlab/error.hpp"
#include "mixlab/numerics.hpp"

namespace mixlab::sft {

std::string word_to_string(std::span<const int> w) {
  bool wide = false;
  for (int s : w) wide = wide || s > 9;
  std::ostringstream out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (wide && i > 0) out << ',';
    out << w[i];
  }
  return out.str();
}

namespace {

CountMatrix multiply(const CountMatrix& a, const CountMatrix& b) {
  const std::size_t n = a.size();
  CountMatrix c(n, std::vector<std::int64_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    }
  return c;
}

CountMatrix identity(std::size_t n) {
  CountMatrix m(n, std::vector<std::int64_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

}  // namespace

Shift Shift::build(const Matrix01& transition) {
  const std::size_t n = transition.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty transition matrix");
  for (const auto& row : transition) {
    if (row.size() != n)
      throw Error(ErrorCode::kInvalidArgument, "transition matrix is not square");
    for (int v : row)
      if (v != 0 && v != 1)
        throw Error(ErrorCode::kInvalidArgument, "transition entries must be 0 or 1");
  }
  for (std::size_t i = 0; i < n; ++i) {
    bool row_ok = false;
    bool col_ok = false;
    for (std::size_t j = 0; j < n; ++j) {
      row_ok = row_ok || transition[i][j] != 0;
      col_ok = col_ok || transition[j][i] != 0;
    }
    if (!row_ok || !col_ok) {
      throw Error(ErrorCode::kZeroRowOrColumn,
                  "symbol " + std::to_string(i) + " has an all-zero row or column");
    }
  }
  // Boolean powers suffice for positivity, and avoid overflow.
  const std::size_t bound = n * n - 2 * n + 2;
  std::vector<std::vector<char>> a(n, std::vector<char>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = static_cast<char>(transition[i][j]);
  auto p = a;
  for (std::size_t m = 1; m <= bound; ++m) {
    bool positive = true;
    for (const auto& row : p)
      for (char v : row) positive = positive && v != 0;
    if (positive) return Shift(transition, static_cast<int>(m));
    std::vector<std::vector<char>> next(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        if (!p[i][k]) continue;
        for (std::size_t j = 0; j < n; ++j) next[i][j] |= a[k][j];
      }
    p = std::move(next);
  }
  throw Error(ErrorCode::kNotAperiodic,
              "no power <= " + std::to_string(bound) + " is strictly positive");
}

bool Shift::is_admissible(std::span<const int> w) const {
  for (int s : w)
    if (s < 0 || s >= n_) return false;
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (!allowed(w[i], w[i + 1])) return false;
  return true;
}

bool Shift::is_cyclically_admissible(std::span<const int> w) const {
  if (w.empty() || !is_admissible(w)) return false;
  return allowed(w.back(), w.front());
}

CountMatrix Shift::power(int n) const {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "negative matrix power");
  CountMatrix base(n_, std::vector<std::int64_t>(n_));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) base[i][j] = transition_[i][j];
  CountMatrix result = identity(n_);
  while (n > 0) {
    if (n & 1) result = multiply(result, base);
    n >>= 1;
    if (n > 0) base = multiply(base, base);
  }
  return result;
}

std::int64_t Shift::trace_power(int n) const {
  const auto p = power(n);
  std::int64_t t = 0;
  for (int i = 0; i < n_; ++i) t += p[i][i];
  return t;
}

std::int64_t Shift::word_count(int k) const {
  if (k < 1) return 0;
  const auto p = power(k - 1);
  std::int64_t total = 0;
  for (const auto& row : p)
    for (auto v : row) total += v;
  return total;
}

std::vector<Word> words(const Shift& shift, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "word length must be >= 1");
  std::vector<Word> out;
  Word w;
  w.reserve(k);
  // Iterative DFS in lexicographic order.
  std::vector<int> next_symbol(k, 0);
  int pos = 0;
  const int n = shift.n_symbols();
  while (pos >= 0) {
    if (next_symbol[pos] >= n) {
      next_symbol[pos] = 0;
      --pos;
      if (pos >= 0) w.pop_back();
      continue;
    }
    const int s = next_symbol[pos]++;
    if (pos > 0 && !shift.allowed(w.back(), s)) continue;
    w.push_back(s);
    if (pos + 1 == k) {
      out.push_back(w);
      w.pop_back();
    } else {
      ++pos;
    }
  }
  return out;
}

WordIndex::WordIndex(const Shift& shift, int depth)
    : shift_(shift), depth_(depth), words_(words(shift, depth)) {
  const double table = std::pow(static_cast<double>(shift.n_symbols()), depth);
  use_dense_ = table <= static_cast<double>(1 << 22);
  if (use_dense_) {
    dense_.assign(static_cast<std::size_t>(table), -1);
    for (std::size_t i = 0; i < words_.size(); ++i)
      dense_[code(words_[i])] = static_cast<std::int32_t>(i);
  } else {
    sparse_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) sparse_.emplace(code(words_[i]), i);
  }
}

std::uint64_t WordIndex::code(std::span<const int> w) const {
  std::uint64_t c = 0;
  const auto n = static_cast<std::uint64_t>(shift_.n_symbols());
  for (int i = 0; i < depth_; ++i) c = c * n + static_cast<std::uint64_t>(w[i]);
  return c;
}

std::optional<std::size_t> WordIndex::find(std::span<const int> w) const {
  if (static_cast<int>(w.size()) < depth_) return std::nullopt;
  for (int i = 0; i < depth_; ++i)
    if (w[i] < 0 || w[i] >= shift_.n_symbols()) return std::nullopt;
  const std::uint64_t c = code(w);
  if (use_dense_) {
    const std::int32_t v = dense_[c];
    if (v < 0) return std::nullopt;
    return static_cast<std::size_t>(v);
  }
  auto it = sparse_.find(c);
  if (it == sparse_.end()) return std::nullopt;
  return it->second;
}

std::size_t WordIndex::index(std::span<const int> w) const {
  auto i = find(w);
  if (!i) {
    throw Error(ErrorCode::kInadmissibleWord,
                "word '" + word_to_string(w.subspan(0, std::min<std::size_t>(w.size(), depth_))) +
                    "' is not an admissible " + std::to_string(depth_) + "-word");
  }
  return *i;
}

std::shared_ptr<const WordIndex> word_index(const Shift& shift, int depth) {
  static std::mutex mutex;
  static std::map<std::pair<Matrix01, int>, std::shared_ptr<const WordIndex>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_pair(shift.transition(), depth);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto idx = std::make_shared<const WordIndex>(shift, depth);
  cache.emplace(std::move(key), idx);
  return idx;
}

MetricConstant::MetricConstant(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "lambda must lie in (0, 1)");
}

TwoSidedPoint::TwoSidedPoint(const Shift& shift, Word left_cycle, Word core,
                             Word right_cycle, long offset)
    : left_(std::move(left_cycle)),
      core_(std::move(core)),
      right_(std::move(right_cycle)),
      offset_(offset) {
  if (left_.empty() || right_.empty())
    throw Error(ErrorCode::kInvalidArgument, "point cycles must be nonempty");
  if (!shift.is_cyclically_admissible(left_))
    throw Error(ErrorCode::kInadmissibleWord, "left cycle '" + word_to_string(left_) + "'");
  if (!shift.is_cyclically_admissible(right_))
    throw Error(ErrorCode::kInadmissibleWord, "right cycle '" + word_to_string(right_) + "'");
  if (!shift.is_admissible(core_))
    throw Error(ErrorCode::kInadmissibleWord, "core '" + word_to_string(core_) + "'");
  const int first = core_.empty() ? right_.front() : core_.front();
  const int last = core_.empty() ? left_.back() : core_.back();
  if (!shift.allowed(left_.back(), first) || !shift.allowed(last, right_.front()))
    throw Error(ErrorCode::kInadmissibleWord, "point junctions are not admissible");
}

TwoSidedPoint TwoSidedPoint::periodic(const Shift& shift, const Word& w) {
  return TwoSidedPoint(shift, w, {}, w, 0);
}

int TwoSidedPoint::at(long i) const {
  const long j = i - offset_;
  const long c = static_cast<long>(core_.size());
  if (j >= 0 && j < c) return core_[j];
  if (j >= c) {
    const long r = static_cast<long>(right_.size());
    return right_[(j - c) % r];
  }
  const long l = static_cast<long>(left_.size());
  // j = -1 is left_.back().
  const long back = (-j - 1) % l;
  return left_[l - 1 - back];
}

TwoSidedPoint TwoSidedPoint::shifted(long n) const {
  TwoSidedPoint p = *this;
  p.offset_ -= n;
  return p;
}

Word TwoSidedPoint::window(long a, long b) const {
  Word w;
  if (b > a) w.reserve(b - a);
  for (long i = a; i < b; ++i) w.push_back(at(i));
  return w;
}

Disagreements compare_points(const TwoSidedPoint& x, const TwoSidedPoint& y) {
  // Outside [lo, hi) both sequences are periodic with period dividing the
  // lcm of their cycle lengths, so one lcm-window on each side settles
  // every question about the tails.
  const long r_lcm = std::lcm(static_cast<long>(x.right_cycle().size()),
                              static_cast<long>(y.right_cycle().size()));
  const long l_lcm = std::lcm(static_cast<long>(x.left_cycle().size()),
                              static_cast<long>(y.left_cycle().size()));
  const long hi = std::max(x.right_start(), y.right_start());
  const long lo = std::min(x.left_end(), y.left_end());
  Disagreements d;
  d.right_tails_agree = true;
  for (long i = hi; i < hi + r_lcm; ++i)
    if (x.at(i) != y.at(i)) {
      d.right_tails_agree = false;
      break;
    }
  d.left_tails_agree = true;
  for (long i = lo - l_lcm; i < lo; ++i)
    if (x.at(i) != y.at(i)) {
      d.left_tails_agree = false;
      break;
    }
  std::optional<long> lowest;
  std::optional<long> highest;
  std::optional<long> min_abs;
  // Stretch the scan over index 0 so that min |i| is seen even when the
  // periodic regions start far from the origin.
  const long scan_lo = std::min(lo, 0L) - l_lcm;
  const long scan_hi = std::max(hi, 0L) + r_lcm;
  for (long i = scan_lo; i < scan_hi; ++i) {
    if (x.at(i) == y.at(i)) continue;
    if (!lowest) lowest = i;
    highest = i;
    if (!min_abs || std::labs(i) < *min_abs) min_abs = std::labs(i);
  }
  d.equal = !lowest.has_value();
  d.min_abs = min_abs;
  if (d.left_tails_agree) d.lowest = lowest;
  if (d.right_tails_agree) d.highest = highest;
  return d;
}

double d_lambda(const TwoSidedPoint& x, const TwoSidedPoint& y,
                const MetricConstant& lam) {
  const auto d = compare_points(x, y);
  if (d.equal) return 0.0;
  // Disagreements outside the scanned window repeat ones inside it at
  // larger |i|, so the scanned minimum is the true minimum.
  return std::pow(lam.value(), static_cast<double>(*d.min_abs));
}

namespace {

// Generates prenecklaces with a fixed first symbol (Fredricksen-Kessler-
// Maiorana order), keeping only admissible extensions.  A prenecklace of
// length n whose period p equals n is a Lyndon word.
void lyndon_dfs(const Shift& shift, int n_max, Word& w, int period,
                std::vector<OrbitRecord>& out) {
  const int len = static_cast<int>(w.size());
  if (period == len && shift.allowed(w.back(), w.front())) {
    out.push_back(OrbitRecord{w, len, 0.0, {}});
  }
  if (len == n_max) return;
  const int compare_with = w[len - period];
  for (int c = compare_with; c < shift.n_symbols(); ++c) {
    if (!shift.allowed(w.back(), c)) continue;
    w.push_back(c);
    lyndon_dfs(shift, n_max, w, c == compare_with ? period : len + 1, out);
    w.pop_back();
  }
}

}  // namespace

std::vector<OrbitRecord> enumerate_prime_orbits(const Shift& shift, int n_max,
                                                int threads) {
  if (n_max < 1) throw Error(ErrorCode::kInvalidArgument, "n_max must be >= 1");
  const int n = shift.n_symbols();
  std::vector<std::vector<OrbitRecord>> parts(n);
  parallel_for(n, threads, [&](std::size_t a) {
    Word w{static_cast<int>(a)};
    lyndon_dfs(shift, n_max, w, 1, parts[a]);
  });
  std::vector<OrbitRecord> all;
  for (auto& p : parts)
    for (auto& r : p) all.push_back(std::move(r));
  std::sort(all.begin(), all.end(), [](const OrbitRecord& a, const OrbitRecord& b) {
    return std::tie(a.n, a.necklace) < std::tie(b.n, b.necklace);
  });
  return all;
}

}  // namespace mixlab::sft
