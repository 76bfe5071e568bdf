#pragma once

// Exact ordered integral domains: Z, Q, prime fields F_p and adjoined-root
// extensions R[j_k] (j_k^k = -1) stored as length-k coefficient tuples.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <gmpxx.h>

#include "ringcirc/error.hpp"

namespace ringcirc {

using Integer = mpz_class;
using Rational = mpq_class;

enum class DomainKind { integer, rational, finite_field, adjoined };

/// How `less` is decided. Natural for Z/Q, lexicographic on coefficient tuples
/// for adjoined kinds, residue listing 0 < 1 < ... < p-1 for finite fields.
enum class OrderSpec { natural, lexicographic, listed };

class Value;

class Domain {
 public:
  static Domain integers();
  static Domain rationals();
  /// `p` must be prime.
  static Domain finite_field(std::uint64_t p);
  /// `base` is integer or rational, `k >= 2`.
  static Domain adjoined(DomainKind base, unsigned k);

  /// Parses "Z", "Q", "F3" (or "Z3"), "Z[j2]", "Q[j3]".
  static Domain parse(std::string_view text);

  DomainKind kind() const noexcept { return kind_; }
  OrderSpec order() const noexcept { return order_; }
  std::uint64_t modulus() const noexcept { return modulus_; }
  /// Number of coefficients for adjoined kinds, 1 otherwise.
  unsigned degree() const noexcept { return degree_; }
  DomainKind base_kind() const noexcept { return base_; }
  Domain base() const;

  bool is_finite() const noexcept { return kind_ == DomainKind::finite_field; }
  bool is_field() const noexcept {
    return kind_ == DomainKind::rational || kind_ == DomainKind::finite_field;
  }
  /// False for R[j_k] with k not a power of two, where x^k + 1 factors and
  /// the tuple ring has zero divisors.
  bool is_integral_domain() const noexcept;

  std::string name() const;

  Value zero() const;
  Value one() const;
  Value from_int(long v) const;
  Value from_integer(const Integer& v) const;

  friend bool operator==(const Domain& a, const Domain& b) noexcept {
    return a.kind_ == b.kind_ && a.modulus_ == b.modulus_ && a.degree_ == b.degree_ &&
           a.base_ == b.base_ && a.order_ == b.order_;
  }

 private:
  Domain(DomainKind kind, OrderSpec order, std::uint64_t modulus, unsigned degree, DomainKind base)
      : kind_(kind), order_(order), modulus_(modulus), degree_(degree), base_(base) {}

  DomainKind kind_;
  OrderSpec order_;
  std::uint64_t modulus_;
  unsigned degree_;
  DomainKind base_;
};

/// Immutable element of a Domain. Rationals are kept canonical (positive,
/// coprime denominator) so equality does not depend on how a value was built.
class Value {
 public:
  using Coefficients = std::vector<Value>;

  Value();  // integer zero

  static Value integer(Integer v);
  static Value rational(Rational v);
  static Value residue(const Domain& field, std::uint64_t r);
  static Value tuple(const Domain& adjoined, Coefficients coefficients);

  const Domain& domain() const noexcept { return domain_; }

  const Integer& as_integer() const;
  const Rational& as_rational() const;
  std::uint64_t as_residue() const;
  const Coefficients& coefficients() const;

  bool is_zero() const;

  friend bool operator==(const Value& a, const Value& b);
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

 private:
  Value(Domain domain, std::variant<Integer, Rational, std::uint64_t, Coefficients> rep)
      : domain_(domain), rep_(std::move(rep)) {}

  Domain domain_;
  std::variant<Integer, Rational, std::uint64_t, Coefficients> rep_;
};

Value add(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value neg(const Value& a);
Value sub(const Value& a, const Value& b);
/// Strict order of the domain's order spec.
bool less(const Value& a, const Value& b);
/// Domain one when 0 < a, domain zero otherwise.
Value sign(const Value& a);

inline Value operator+(const Value& a, const Value& b) { return add(a, b); }
inline Value operator*(const Value& a, const Value& b) { return mul(a, b); }
inline Value operator-(const Value& a, const Value& b) { return sub(a, b); }
inline Value operator-(const Value& a) { return neg(a); }

/// Integers as signed decimal, rationals as "a/b" (or "a" when b = 1),
/// residues as decimal, tuples as "(c0,c1,...)".
std::string to_string(const Value& v);
std::ostream& operator<<(std::ostream& os, const Value& v);

/// Inverse of `to_string` for the given domain. Integer literals are accepted
/// for rational domains.
Value parse_value(const Domain& domain, std::string_view text);

bool is_prime(std::uint64_t n);

}  // namespace ringcirc
