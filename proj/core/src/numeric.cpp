#include "ringcirc/numeric.hpp"

#include <algorithm>
#include <limits>

namespace ringcirc {

std::size_t floor_log2(std::uint64_t n) {
  if (n == 0) throw Error("invalid_argument", "log2 of zero");
  std::size_t r = 0;
  while (n >>= 1) ++r;
  return r;
}

IndexTuple::IndexTuple(std::vector<std::size_t> digits, std::size_t base)
    : digits_(std::move(digits)), base_(base) {
  if (base_ < 2) throw Error("invalid_argument", "tuple base must be at least 2");
  for (auto d : digits_)
    if (d >= base_)
      throw Error("invalid_argument", "digit " + std::to_string(d) + " out of range for base " + std::to_string(base_));
}

std::uint64_t numval(const std::vector<std::size_t>& digits, std::size_t base) {
  std::uint64_t v = 0;
  for (auto d : digits) {
    if (v > (std::numeric_limits<std::uint64_t>::max() - d) / base)
      throw Error("overflow", "tuple value exceeds 64 bits");
    v = v * base + d;
  }
  return v;
}

std::uint64_t numval(const IndexTuple& t) { return numval(t.digits(), t.base()); }

int bit_of(std::uint64_t index, std::uint64_t value) {
  if (index == 0 || value == 0) return 0;
  const std::uint64_t len = floor_log2(value) + 1;
  if (index > len) return 0;
  return static_cast<int>((value >> (len - index)) & 1u);
}

int bit(const IndexTuple& i, const IndexTuple& j) { return bit_of(numval(i), numval(j)); }

bool fo_half_leq(const IndexTuple& x, const IndexTuple& y) {
  if (x.base() != y.base() || x.size() != y.size())
    throw Error("invalid_argument", "half comparison needs tuples of equal base and length");
  const std::size_t n = x.base();
  std::vector<std::size_t> z(x.size());
  std::size_t carry = 0;
  for (std::size_t k = x.size(); k-- > 0;) {
    std::size_t s = 2 * x.digits()[k] + carry;
    z[k] = s % n;
    carry = s / n;
  }
  if (carry != 0) return false;
  return !std::lexicographical_compare(y.digits().begin(), y.digits().end(), z.begin(), z.end());
}

UnaryWord::UnaryWord(std::string bits) : bits_(std::move(bits)) {
  bool seen_one = false;
  for (char ch : bits_) {
    if (ch == '1') {
      seen_one = true;
    } else if (ch == '0') {
      if (seen_one) throw Error("invalid_argument", "malformed unary word '" + bits_ + "'");
    } else {
      throw Error("invalid_argument", "malformed unary word '" + bits_ + "'");
    }
  }
}

UnaryWord unary_enc(std::size_t length, std::size_t m) {
  if (m > length)
    throw Error("invalid_argument", "cannot encode " + std::to_string(m) + " in " + std::to_string(length) + " bits");
  return UnaryWord(std::string(length - m, '0') + std::string(m, '1'));
}

std::size_t uval(const UnaryWord& w) {
  return static_cast<std::size_t>(std::count(w.bits().begin(), w.bits().end(), '1'));
}

std::size_t seq_d_block_length(std::size_t n, std::size_t c) {
  if (n < 2 || c < 1) throw Error("invalid_argument", "seq_d needs n >= 2 and c >= 1");
  const std::size_t width = c * floor_log2(n);
  if (width < 2) throw Error("invalid_argument", "seq_d needs c * floor(log2 n) >= 2");
  return width - 1;
}

std::vector<DSequenceElement> seq_d(std::size_t n, std::size_t c, std::size_t i) {
  if (i < 1) throw Error("invalid_argument", "seq_d needs i >= 1");
  const std::size_t len = seq_d_block_length(n, c);
  std::vector<std::size_t> values(i, len);
  std::vector<DSequenceElement> out;
  while (true) {
    DSequenceElement e;
    for (auto v : values) e.blocks.push_back(unary_enc(len, v));
    out.push_back(std::move(e));
    if (std::all_of(values.begin(), values.end(), [](auto v) { return v == 0; })) break;
    // subtract one in base len+1: zero blocks on the right wrap to the maximum
    std::size_t k = i;
    while (values[k - 1] == 0) values[--k] = len;
    --values[k - 1];
  }
  return out;
}

std::string format_seq_d(const std::vector<DSequenceElement>& seq) {
  std::string out = "l\\i";
  const std::size_t blocks = seq.empty() ? 0 : seq.front().blocks.size();
  for (std::size_t j = 1; j <= blocks; ++j) out += "\t" + std::to_string(j);
  out += "\n";
  for (std::size_t l = 0; l < seq.size(); ++l) {
    out += std::to_string(l + 1);
    for (const auto& b : seq[l].blocks) out += "\t" + b.bits();
    out += "\n";
  }
  return out;
}

CountdownTrace digit_halving_countdown(std::size_t base, std::vector<std::size_t> digits) {
  if (base < 2) throw Error("invalid_argument", "countdown base must be at least 2");
  for (auto d : digits)
    if (d >= base) throw Error("invalid_argument", "digit " + std::to_string(d) + " out of range for base " + std::to_string(base));
  CountdownTrace trace;
  trace.base = base;
  trace.states.push_back(digits);
  while (std::any_of(digits.begin(), digits.end(), [](auto d) { return d != 0; })) {
    std::size_t k = digits.size();
    while (digits[k - 1] == 0) digits[--k] = base - 1;
    digits[k - 1] /= 2;
    trace.states.push_back(digits);
  }
  return trace;
}

std::uint64_t countdown_bound(std::size_t base, std::size_t length) {
  if (base < 2) throw Error("invalid_argument", "countdown base must be at least 2");
  const std::uint64_t per_digit = floor_log2(base - 1) + 2;
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < length; ++k) total *= per_digit;
  return total - 1;
}

std::string format_countdown(const CountdownTrace& trace) {
  std::vector<std::vector<std::string>> columns;
  std::size_t lead = std::numeric_limits<std::size_t>::max();
  for (const auto& s : trace.states) {
    std::string cell;
    for (auto d : s) cell += std::to_string(d);
    std::size_t first = s.empty() ? 0 : s.front();
    if (columns.empty() || first != lead) {
      columns.emplace_back();
      lead = first;
    }
    columns.back().push_back(std::move(cell));
  }
  std::size_t rows = 0;
  for (const auto& col : columns) rows = std::max(rows, col.size());
  std::string out;
  for (std::size_t r = 0; r < rows; ++r) {
    std::string line;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) line += " ";
      if (r < columns[c].size()) {
        line += columns[c][r];
      } else {
        line += std::string(columns[c].front().size(), ' ');
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

ShrinkResult shrink_steps(std::uint64_t n, std::size_t i) {
  if (n < 2 || (n & (n - 1)) != 0) throw Error("invalid_argument", "shrink_steps needs n a power of two >= 2");
  const std::size_t lg = floor_log2(n);
  Integer expected = 1;
  for (std::size_t k = 0; k < i; ++k) expected *= static_cast<unsigned long>(lg);
  ShrinkResult result;
  result.factor.exponent = -Rational(Integer(static_cast<unsigned long>(lg)), expected);
  result.factor.exponent.canonicalize();
  PowerOfTwo current{Rational(static_cast<unsigned long>(lg))};
  while (!current.is_one()) {
    if (sgn(current.exponent) < 0) throw Error("internal", "shrink iteration overshot 1");
    current = current * result.factor;
    ++result.steps;
  }
  if (Integer(static_cast<unsigned long>(result.steps)) != expected)
    throw Error("internal", "shrink iteration count disagrees with (log2 n)^i");
  return result;
}

}  // namespace ringcirc
