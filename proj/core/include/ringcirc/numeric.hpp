#pragma once

// Skeleton tuples read as base-n numbers, the BIT predicate, unary encodings,
// the depth-encoding sequence d(n, c, i) and the digit-halving countdown.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ringcirc/algebra.hpp"

namespace ringcirc {

/// Digits over a universe of size `base`, most significant digit first.
class IndexTuple {
 public:
  IndexTuple(std::vector<std::size_t> digits, std::size_t base);

  const std::vector<std::size_t>& digits() const noexcept { return digits_; }
  std::size_t base() const noexcept { return base_; }
  std::size_t size() const noexcept { return digits_.size(); }

 private:
  std::vector<std::size_t> digits_;
  std::size_t base_;
};

/// Positional valuation; throws on 64-bit overflow.
std::uint64_t numval(const IndexTuple& t);
std::uint64_t numval(const std::vector<std::size_t>& digits, std::size_t base);

/// 1 iff bit number numval(i) of numval(j) is set, bits counted from the most
/// significant one starting at 1. Index 0 or past the bit length gives 0.
int bit(const IndexTuple& i, const IndexTuple& j);
int bit_of(std::uint64_t index, std::uint64_t value);

/// 2*numval(x) <= numval(y), evaluated through digit-wise addition x + x with
/// carries; a carry out of the top digit means the doubled tuple does not fit
/// and the answer is false.
bool fo_half_leq(const IndexTuple& x, const IndexTuple& y);

/// Word of the shape 0^(l-m) 1^m.
class UnaryWord {
 public:
  explicit UnaryWord(std::string bits);

  const std::string& bits() const noexcept { return bits_; }
  std::size_t length() const noexcept { return bits_.size(); }

  friend bool operator==(const UnaryWord&, const UnaryWord&) = default;

 private:
  std::string bits_;
};

UnaryWord unary_enc(std::size_t length, std::size_t m);
std::size_t uval(const UnaryWord& w);

/// One element of d(n, c, i): `i` unary blocks of equal length.
struct DSequenceElement {
  std::vector<UnaryWord> blocks;

  friend bool operator==(const DSequenceElement&, const DSequenceElement&) = default;
};

/// Block length used by d(n, c, i): c * floor(log2 n) - 1.
std::size_t seq_d_block_length(std::size_t n, std::size_t c);

/// Counts down from all-ones to all-zeros; length c^i * floor(log2 n)^i.
std::vector<DSequenceElement> seq_d(std::size_t n, std::size_t c, std::size_t i);

/// Table: header "l\i<TAB>1<TAB>2..." then one row per element.
std::string format_seq_d(const std::vector<DSequenceElement>& seq);

struct CountdownTrace {
  std::size_t base = 0;
  /// Every visited state including the start and the final all-zero state.
  std::vector<std::vector<std::size_t>> states;

  std::size_t steps() const noexcept { return states.empty() ? 0 : states.size() - 1; }
};

/// Halve the least significant non-zero digit, resetting the zero digits to
/// its right to base-1, until every digit is zero.
CountdownTrace digit_halving_countdown(std::size_t base, std::vector<std::size_t> digits);

/// Upper bound (floor(log2(base-1)) + 2)^len - 1 on the countdown length.
std::uint64_t countdown_bound(std::size_t base, std::size_t length);

/// Columns group the states by leading digit, read top-to-bottom then
/// left-to-right; cells are separated by a single space.
std::string format_countdown(const CountdownTrace& trace);

/// 2^exponent with an exact rational exponent.
struct PowerOfTwo {
  Rational exponent;

  friend PowerOfTwo operator*(const PowerOfTwo& a, const PowerOfTwo& b) {
    return PowerOfTwo{Rational(a.exponent + b.exponent)};
  }
  bool is_one() const { return sgn(exponent) == 0; }
};

struct ShrinkResult {
  std::uint64_t steps = 0;
  /// The factor 2^(-log2 n / (log2 n)^i).
  PowerOfTwo factor;
};

/// Multiplies n by the shrink factor until the product reaches 1 and returns
/// the number of multiplications, which is (log2 n)^i. `n` must be a power of
/// two so that log2 n is an integer.
ShrinkResult shrink_steps(std::uint64_t n, std::size_t i);

std::size_t floor_log2(std::uint64_t n);

}  // namespace ringcirc
