#include "ringcirc/algebra.hpp"

#include <charconv>
#include <ostream>
#include <sstream>

namespace ringcirc {

namespace {

[[noreturn]] void mismatch(const Value& a, const Value& b) {
  throw Error("domain_mismatch",
              "domain mismatch: " + a.domain().name() + " vs " + b.domain().name());
}

void require_same(const Value& a, const Value& b) {
  if (!(a.domain() == b.domain())) mismatch(a, b);
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  __extension__ typedef unsigned __int128 wide;
  return static_cast<std::uint64_t>((static_cast<wide>(a) * b) % p);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

bool valid_integer_literal(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

Integer parse_integer(std::string_view s) {
  s = trim(s);
  if (!valid_integer_literal(s)) throw Error("parse_error", "invalid integer literal '" + std::string(s) + "'");
  if (s[0] == '+') s.remove_prefix(1);
  return Integer(std::string(s));
}

bool power_of_two(unsigned k) { return k != 0 && (k & (k - 1)) == 0; }

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Domain

Domain Domain::integers() {
  return Domain(DomainKind::integer, OrderSpec::natural, 0, 1, DomainKind::integer);
}

Domain Domain::rationals() {
  return Domain(DomainKind::rational, OrderSpec::natural, 0, 1, DomainKind::rational);
}

Domain Domain::finite_field(std::uint64_t p) {
  if (!is_prime(p)) throw Error("invalid_domain", "finite field order must be prime, got " + std::to_string(p));
  if (p > (std::uint64_t{1} << 62)) throw Error("invalid_domain", "finite field order too large");
  return Domain(DomainKind::finite_field, OrderSpec::listed, p, 1, DomainKind::finite_field);
}

Domain Domain::adjoined(DomainKind base, unsigned k) {
  if (base != DomainKind::integer && base != DomainKind::rational)
    throw Error("invalid_domain", "adjoined roots are supported over Z and Q only");
  if (k < 2) throw Error("invalid_domain", "adjoined root degree must be at least 2");
  return Domain(DomainKind::adjoined, OrderSpec::lexicographic, 0, k, base);
}

Domain Domain::parse(std::string_view text) {
  text = trim(text);
  if (text == "Z") return integers();
  if (text == "Q") return rationals();
  auto parse_uint = [&](std::string_view digits) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty())
      throw Error("invalid_domain", "cannot parse domain '" + std::string(text) + "'");
    return v;
  };
  if (text.size() > 1 && (text[0] == 'F' || text[0] == 'Z') && text[1] >= '0' && text[1] <= '9')
    return finite_field(parse_uint(text.substr(1)));
  if (text.size() >= 5 && (text[0] == 'Z' || text[0] == 'Q') && text.substr(1, 2) == "[j" &&
      text.back() == ']') {
    auto k = parse_uint(text.substr(3, text.size() - 4));
    return adjoined(text[0] == 'Z' ? DomainKind::integer : DomainKind::rational, static_cast<unsigned>(k));
  }
  throw Error("invalid_domain", "cannot parse domain '" + std::string(text) + "'");
}

Domain Domain::base() const {
  if (kind_ != DomainKind::adjoined) return *this;
  return base_ == DomainKind::integer ? integers() : rationals();
}

bool Domain::is_integral_domain() const noexcept {
  return kind_ != DomainKind::adjoined || power_of_two(degree_);
}

std::string Domain::name() const {
  switch (kind_) {
    case DomainKind::integer: return "Z";
    case DomainKind::rational: return "Q";
    case DomainKind::finite_field: return "F" + std::to_string(modulus_);
    case DomainKind::adjoined:
      return std::string(base_ == DomainKind::integer ? "Z" : "Q") + "[j" + std::to_string(degree_) + "]";
  }
  return "?";
}

Value Domain::zero() const { return from_int(0); }
Value Domain::one() const { return from_int(1); }
Value Domain::from_int(long v) const { return from_integer(Integer(v)); }

Value Domain::from_integer(const Integer& v) const {
  switch (kind_) {
    case DomainKind::integer: return Value::integer(v);
    case DomainKind::rational: return Value::rational(Rational(v));
    case DomainKind::finite_field: {
      Integer r = v % Integer(static_cast<unsigned long>(modulus_));
      if (r < 0) r += Integer(static_cast<unsigned long>(modulus_));
      return Value::residue(*this, r.get_ui());
    }
    case DomainKind::adjoined: {
      Domain b = base();
      Value::Coefficients cs(degree_, b.zero());
      cs[0] = b.from_integer(v);
      return Value::tuple(*this, std::move(cs));
    }
  }
  throw Error("invalid_domain", "unknown domain kind");
}

// ---------------------------------------------------------------------------
// Value

Value::Value() : domain_(Domain::integers()), rep_(Integer(0)) {}

Value Value::integer(Integer v) { return Value(Domain::integers(), std::move(v)); }

Value Value::rational(Rational v) {
  v.canonicalize();
  return Value(Domain::rationals(), std::move(v));
}

Value Value::residue(const Domain& field, std::uint64_t r) {
  if (field.kind() != DomainKind::finite_field) throw Error("domain_mismatch", "residue requires a finite field");
  if (r >= field.modulus())
    throw Error("invalid_value", "residue " + std::to_string(r) + " out of range for " + field.name());
  return Value(field, r);
}

Value Value::tuple(const Domain& adjoined, Coefficients coefficients) {
  if (adjoined.kind() != DomainKind::adjoined) throw Error("domain_mismatch", "tuple requires an adjoined domain");
  if (coefficients.size() != adjoined.degree())
    throw Error("invalid_value", "expected " + std::to_string(adjoined.degree()) + " coefficients, got " +
                                     std::to_string(coefficients.size()));
  Domain b = adjoined.base();
  for (auto& c : coefficients) {
    if (c.domain() == b) continue;
    // integer coefficients are accepted for rational bases
    if (b.kind() == DomainKind::rational && c.domain().kind() == DomainKind::integer) {
      c = Value::rational(Rational(c.as_integer()));
      continue;
    }
    throw Error("domain_mismatch", "coefficient in " + c.domain().name() + " for " + adjoined.name());
  }
  return Value(adjoined, std::move(coefficients));
}

const Integer& Value::as_integer() const {
  if (auto p = std::get_if<Integer>(&rep_)) return *p;
  throw Error("domain_mismatch", "value of " + domain_.name() + " is not an integer");
}

const Rational& Value::as_rational() const {
  if (auto p = std::get_if<Rational>(&rep_)) return *p;
  throw Error("domain_mismatch", "value of " + domain_.name() + " is not a rational");
}

std::uint64_t Value::as_residue() const {
  if (auto p = std::get_if<std::uint64_t>(&rep_)) return *p;
  throw Error("domain_mismatch", "value of " + domain_.name() + " is not a residue");
}

const Value::Coefficients& Value::coefficients() const {
  if (auto p = std::get_if<Coefficients>(&rep_)) return *p;
  throw Error("domain_mismatch", "value of " + domain_.name() + " is not a coefficient tuple");
}

bool Value::is_zero() const {
  switch (domain_.kind()) {
    case DomainKind::integer: return sgn(as_integer()) == 0;
    case DomainKind::rational: return sgn(as_rational()) == 0;
    case DomainKind::finite_field: return as_residue() == 0;
    case DomainKind::adjoined:
      for (const auto& c : coefficients())
        if (!c.is_zero()) return false;
      return true;
  }
  return false;
}

bool operator==(const Value& a, const Value& b) {
  if (!(a.domain_ == b.domain_)) return false;
  return a.rep_ == b.rep_;
}

// ---------------------------------------------------------------------------
// Arithmetic

Value add(const Value& a, const Value& b) {
  require_same(a, b);
  const Domain& d = a.domain();
  switch (d.kind()) {
    case DomainKind::integer: return Value::integer(a.as_integer() + b.as_integer());
    case DomainKind::rational: return Value::rational(a.as_rational() + b.as_rational());
    case DomainKind::finite_field: {
      std::uint64_t s = a.as_residue() + b.as_residue();
      if (s >= d.modulus()) s -= d.modulus();
      return Value::residue(d, s);
    }
    case DomainKind::adjoined: {
      const auto& x = a.coefficients();
      const auto& y = b.coefficients();
      Value::Coefficients out;
      out.reserve(x.size());
      for (std::size_t u = 0; u < x.size(); ++u) out.push_back(add(x[u], y[u]));
      return Value::tuple(d, std::move(out));
    }
  }
  throw Error("invalid_domain", "unknown domain kind");
}

Value mul(const Value& a, const Value& b) {
  require_same(a, b);
  const Domain& d = a.domain();
  switch (d.kind()) {
    case DomainKind::integer: return Value::integer(a.as_integer() * b.as_integer());
    case DomainKind::rational: return Value::rational(a.as_rational() * b.as_rational());
    case DomainKind::finite_field: return Value::residue(d, mulmod(a.as_residue(), b.as_residue(), d.modulus()));
    case DomainKind::adjoined: {
      // x_u * y_v lands on j^(u+v); j^k = -1 folds index u+v >= k back with a sign flip.
      const auto& x = a.coefficients();
      const auto& y = b.coefficients();
      const std::size_t k = x.size();
      Domain base = d.base();
      Value::Coefficients out(k, base.zero());
      for (std::size_t u = 0; u < k; ++u) {
        for (std::size_t v = 0; v < k; ++v) {
          Value term = mul(x[u], y[v]);
          std::size_t idx = u + v;
          if (idx >= k) {
            out[idx - k] = sub(out[idx - k], term);
          } else {
            out[idx] = add(out[idx], term);
          }
        }
      }
      return Value::tuple(d, std::move(out));
    }
  }
  throw Error("invalid_domain", "unknown domain kind");
}

Value neg(const Value& a) {
  const Domain& d = a.domain();
  switch (d.kind()) {
    case DomainKind::integer: return Value::integer(-a.as_integer());
    case DomainKind::rational: return Value::rational(-a.as_rational());
    case DomainKind::finite_field: {
      std::uint64_t r = a.as_residue();
      return Value::residue(d, r == 0 ? 0 : d.modulus() - r);
    }
    case DomainKind::adjoined: {
      Value::Coefficients out;
      for (const auto& c : a.coefficients()) out.push_back(neg(c));
      return Value::tuple(d, std::move(out));
    }
  }
  throw Error("invalid_domain", "unknown domain kind");
}

Value sub(const Value& a, const Value& b) { return add(a, neg(b)); }

bool less(const Value& a, const Value& b) {
  require_same(a, b);
  switch (a.domain().kind()) {
    case DomainKind::integer: return a.as_integer() < b.as_integer();
    case DomainKind::rational: return a.as_rational() < b.as_rational();
    case DomainKind::finite_field: return a.as_residue() < b.as_residue();
    case DomainKind::adjoined: {
      const auto& x = a.coefficients();
      const auto& y = b.coefficients();
      for (std::size_t u = 0; u < x.size(); ++u) {
        if (less(x[u], y[u])) return true;
        if (less(y[u], x[u])) return false;
      }
      return false;
    }
  }
  return false;
}

Value sign(const Value& a) {
  const Domain& d = a.domain();
  return less(d.zero(), a) ? d.one() : d.zero();
}

// ---------------------------------------------------------------------------
// Text form

std::string to_string(const Value& v) {
  switch (v.domain().kind()) {
    case DomainKind::integer: return v.as_integer().get_str();
    case DomainKind::rational: {
      const Rational& q = v.as_rational();
      if (q.get_den() == 1) return q.get_num().get_str();
      return q.get_num().get_str() + "/" + q.get_den().get_str();
    }
    case DomainKind::finite_field: return std::to_string(v.as_residue());
    case DomainKind::adjoined: {
      std::string out = "(";
      const auto& cs = v.coefficients();
      for (std::size_t u = 0; u < cs.size(); ++u) {
        if (u) out += ",";
        out += to_string(cs[u]);
      }
      return out + ")";
    }
  }
  return "?";
}

std::ostream& operator<<(std::ostream& os, const Value& v) { return os << to_string(v); }

Value parse_value(const Domain& domain, std::string_view text) {
  text = trim(text);
  switch (domain.kind()) {
    case DomainKind::integer: return Value::integer(parse_integer(text));
    case DomainKind::rational: {
      auto slash = text.find('/');
      if (slash == std::string_view::npos) return Value::rational(Rational(parse_integer(text)));
      Integer num = parse_integer(text.substr(0, slash));
      Integer den = parse_integer(text.substr(slash + 1));
      if (den == 0) throw Error("parse_error", "zero denominator in '" + std::string(text) + "'");
      return Value::rational(Rational(num, den));
    }
    case DomainKind::finite_field: {
      Integer r = parse_integer(text);
      if (r < 0 || r >= Integer(static_cast<unsigned long>(domain.modulus())))
        throw Error("parse_error", "residue '" + std::string(text) + "' out of range for " + domain.name());
      return Value::residue(domain, r.get_ui());
    }
    case DomainKind::adjoined: {
      if (text.size() < 2 || text.front() != '(' || text.back() != ')')
        throw Error("parse_error", "expected coefficient tuple for " + domain.name() + ", got '" +
                                       std::string(text) + "'");
      std::string_view body = text.substr(1, text.size() - 2);
      Value::Coefficients cs;
      Domain base = domain.base();
      while (true) {
        auto comma = body.find(',');
        cs.push_back(parse_value(base, body.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        body.remove_prefix(comma + 1);
      }
      if (cs.size() != domain.degree())
        throw Error("parse_error", "expected " + std::to_string(domain.degree()) + " coefficients in '" +
                                       std::string(text) + "'");
      return Value::tuple(domain, std::move(cs));
    }
  }
  throw Error("invalid_domain", "unknown domain kind");
}

}  // namespace ringcirc
