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

// Subshifts of finite type: transition matrices, admissible words, the
// d_lambda metric on eventually periodic two-sided points, and prime
// periodic orbit enumeration.

#ifndef MIXLAB_SFT_HPP_
#define MIXLAB_SFT_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mixlab::sft {

using Word = std::vector<int>;
using Matrix01 = std::vector<std::vector<int>>;
using CountMatrix = std::vector<std::vector<std::int64_t>>;

std::string word_to_string(std::span<const int> w);

class Shift {
 public:
  // Validates a square 0/1 matrix.  Throws kZeroRowOrColumn or kNotAperiodic.
  static Shift build(const Matrix01& transition);

  int n_symbols() const { return n_; }
  int aperiodicity_power() const { return aperiodicity_power_; }
  const Matrix01& transition() const { return transition_; }
  bool allowed(int a, int b) const { return transition_[a][b] != 0; }

  bool is_admissible(std::span<const int> w) const;
  // Admissible and the wrap-around pair (w.back(), w.front()) is allowed.
  bool is_cyclically_admissible(std::span<const int> w) const;

  CountMatrix power(int n) const;
  std::int64_t trace_power(int n) const;
  // Entrywise sum of transition^(k-1): the number of admissible k-words.
  std::int64_t word_count(int k) const;

  bool operator==(const Shift& other) const {
    return transition_ == other.transition_;
  }

 private:
  Shift(Matrix01 t, int power) : n_(static_cast<int>(t.size())),
                                 aperiodicity_power_(power),
                                 transition_(std::move(t)) {}
  int n_;
  int aperiodicity_power_;
  Matrix01 transition_;
};

// All admissible words of length k in lexicographic order.
std::vector<Word> words(const Shift& shift, int k);

// Dense lookup table for the admissible k-words of a shift.  Word order is
// lexicographic, so words sharing a prefix are contiguous.
class WordIndex {
 public:
  WordIndex(const Shift& shift, int depth);

  const Shift& shift() const { return shift_; }
  int depth() const { return depth_; }
  std::size_t size() const { return words_.size(); }
  const Word& word(std::size_t i) const { return words_[i]; }
  const std::vector<Word>& all() const { return words_; }

  // Index of the word formed by the first `depth` symbols of w.
  std::optional<std::size_t> find(std::span<const int> w) const;
  // As find(), throwing kInadmissibleWord when absent.
  std::size_t index(std::span<const int> w) const;

 private:
  std::uint64_t code(std::span<const int> w) const;

  Shift shift_;
  int depth_;
  std::vector<Word> words_;
  std::vector<std::int32_t> dense_;
  std::unordered_map<std::uint64_t, std::size_t> sparse_;
  bool use_dense_ = true;
};

// Shared index cache so that functions of the same depth share one table.
std::shared_ptr<const WordIndex> word_index(const Shift& shift, int depth);

class MetricConstant {
 public:
  explicit MetricConstant(double lambda);
  double value() const { return lambda_; }

 private:
  double lambda_;
};

// Eventually periodic bi-infinite sequence
//   ... left_cycle left_cycle | core | right_cycle right_cycle ...
// with core[0] sitting at index `offset`.  The last symbol of left_cycle is
// at index offset - 1.  offset = 0 is the canonical placement; shifting the
// point moves the offset.
class TwoSidedPoint {
 public:
  TwoSidedPoint(const Shift& shift, Word left_cycle, Word core,
                Word right_cycle, long offset = 0);

  // The periodic point ...www... with w[0] at index 0.
  static TwoSidedPoint periodic(const Shift& shift, const Word& w);

  int at(long i) const;
  // sigma^n applied to the point: (sigma^n x)_i = x_{i+n}.
  TwoSidedPoint shifted(long n) const;

  const Word& left_cycle() const { return left_; }
  const Word& core() const { return core_; }
  const Word& right_cycle() const { return right_; }
  long offset() const { return offset_; }
  // Indices >= this are in the right periodic region.
  long right_start() const { return offset_ + static_cast<long>(core_.size()); }
  // Indices < this are in the left periodic region.
  long left_end() const { return offset_; }

  // Symbols x_a .. x_{b-1}.
  Word window(long a, long b) const;

 private:
  Word left_;
  Word core_;
  Word right_;
  long offset_;
};

struct Disagreements {
  // Smallest |i| with x_i != y_i.
  std::optional<long> min_abs;
  // Smallest and largest disagreement indices; nullopt on the side where the
  // sequences disagree infinitely often.
  std::optional<long> lowest;
  std::optional<long> highest;
  bool equal = false;
  bool left_tails_agree = false;
  bool right_tails_agree = false;
};

Disagreements compare_points(const TwoSidedPoint& x, const TwoSidedPoint& y);

double d_lambda(const TwoSidedPoint& x, const TwoSidedPoint& y,
                const MetricConstant& lam);

// Prime periodic orbit: necklace is the lexicographically minimal rotation
// of a primitive cyclically admissible word.  r_period and holonomy are
// filled in by the orbit ledger.
struct OrbitRecord {
  Word necklace;
  int n = 0;
  double r_period = 0.0;
  std::vector<double> holonomy;
};

// Every primitive admissible necklace of length <= n_max exactly once,
// sorted by (length, lexicographic).
std::vector<OrbitRecord> enumerate_prime_orbits(const Shift& shift, int n_max,
                                                int threads = 1);

}  // namespace mixlab::sft

#endif  // MIXLAB_SFT_HPP_
