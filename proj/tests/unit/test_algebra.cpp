#include "doctest.h"
#include "ringcirc/algebra.hpp"
#include "ringcirc/random.hpp"

using namespace ringcirc;

namespace {

const char* kDomains[] = {"Z", "Q", "F2", "F5", "F7", "Z[j2]", "Q[j2]", "Z[j3]", "Z[j4]"};

template <class F>
void for_samples(const Domain& d, std::size_t count, F&& check) {
  Rng rng(42);
  for (std::size_t s = 0; s < count; ++s) {
    Value a = random_value(d, rng), b = random_value(d, rng), c = random_value(d, rng);
    check(a, b, c);
  }
}

}  // namespace

TEST_CASE("domain names parse back to the same domain") {
  for (const char* name : kDomains) {
    Domain d = Domain::parse(name);
    CHECK(d.name() == name);
    CHECK(Domain::parse(d.name()) == d);
  }
  CHECK(Domain::parse("Z3") == Domain::finite_field(3));
  CHECK_THROWS_AS(Domain::parse("F4"), Error);
  CHECK_THROWS_AS(Domain::parse("R"), Error);
  CHECK_THROWS_AS(Domain::parse("Z[j1]"), Error);
}

TEST_CASE("commutative ring axioms hold on samples") {
  for (const char* name : kDomains) {
    CAPTURE(name);
    Domain d = Domain::parse(name);
    for_samples(d, 200, [&](const Value& a, const Value& b, const Value& c) {
      CHECK(a + b == b + a);
      CHECK(a * b == b * a);
      CHECK((a + b) + c == a + (b + c));
      CHECK((a * b) * c == a * (b * c));
      CHECK(a * (b + c) == a * b + a * c);
      CHECK(a + d.zero() == a);
      CHECK(a * d.one() == a);
      CHECK(a + (-a) == d.zero());
      CHECK(a - b == a + (-b));
    });
  }
}

TEST_CASE("order is a strict total order") {
  for (const char* name : kDomains) {
    CAPTURE(name);
    Domain d = Domain::parse(name);
    for_samples(d, 200, [&](const Value& a, const Value& b, const Value& c) {
      int relations = (less(a, b) ? 1 : 0) + (less(b, a) ? 1 : 0) + (a == b ? 1 : 0);
      CHECK(relations == 1);
      CHECK_FALSE(less(a, a));
      if (less(a, b) && less(b, c)) CHECK(less(a, c));
    });
  }
}

TEST_CASE("order is compatible with addition, and with multiplication on Z and Q") {
  for (const char* name : {"Z", "Q", "Z[j2]", "Q[j2]"}) {
    CAPTURE(name);
    Domain d = Domain::parse(name);
    for_samples(d, 300, [&](const Value& a, const Value& b, const Value& c) {
      if (less(a, b)) CHECK(less(a + c, b + c));
      if (d.kind() != DomainKind::adjoined && less(d.zero(), a) && less(d.zero(), b)) CHECK(less(d.zero(), a * b));
    });
  }
}

TEST_CASE("the lexicographic order on adjoined tuples is not multiplicative") {
  Domain d = Domain::parse("Z[j2]");
  Value j = parse_value(d, "(0,1)");
  CHECK(less(d.zero(), j));
  CHECK(less(j * j, d.zero()));
}

TEST_CASE("finite fields use the listed order") {
  Domain f5 = Domain::finite_field(5);
  for (std::uint64_t a = 0; a < 5; ++a)
    for (std::uint64_t b = 0; b < 5; ++b) CHECK(less(Value::residue(f5, a), Value::residue(f5, b)) == (a < b));
  CHECK(f5.order() == OrderSpec::listed);
}

TEST_CASE("sign is one exactly on positive elements") {
  for (const char* name : kDomains) {
    Domain d = Domain::parse(name);
    for_samples(d, 100, [&](const Value& a, const Value&, const Value&) {
      CHECK(sign(a) == (less(d.zero(), a) ? d.one() : d.zero()));
    });
  }
}

TEST_CASE("sign expresses the order") {
  for (const char* name : {"Z", "Q"}) {
    Domain d = Domain::parse(name);
    Value two = d.from_int(2);
    for_samples(d, 500, [&](const Value& x, const Value& y, const Value&) {
      bool via_sign = sign(sign(y - x) * (two + sign(x - y))) == d.one();
      CHECK(via_sign == less(x, y));
    });
  }
}

TEST_CASE("the adjoined root satisfies j^k = -1") {
  for (unsigned k : {2u, 3u, 4u}) {
    Domain d = Domain::adjoined(DomainKind::integer, k);
    Value::Coefficients cs(k, Value::integer(0));
    cs[1] = Value::integer(1);
    Value j = Value::tuple(d, cs);
    Value p = d.one();
    for (unsigned e = 0; e < k; ++e) p = p * j;
    CHECK(p == -d.one());
  }
}

TEST_CASE("integral domain flag and a zero divisor in Z[j3]") {
  CHECK(Domain::parse("Z[j2]").is_integral_domain());
  CHECK(Domain::parse("Z[j4]").is_integral_domain());
  CHECK_FALSE(Domain::parse("Z[j3]").is_integral_domain());
  Domain d = Domain::parse("Z[j3]");
  // (1 + j)(1 - j + j^2) = 1 + j^3 = 0
  Value a = parse_value(d, "(1,1,0)");
  Value b = parse_value(d, "(1,-1,1)");
  CHECK_FALSE(a.is_zero());
  CHECK_FALSE(b.is_zero());
  CHECK((a * b).is_zero());
}

TEST_CASE("no zero divisors among samples of integral domains") {
  for (const char* name : {"Z", "Q", "F7", "Z[j2]", "Q[j2]", "Z[j4]"}) {
    Domain d = Domain::parse(name);
    for_samples(d, 300, [&](const Value& a, const Value& b, const Value&) {
      if (!a.is_zero() && !b.is_zero()) CHECK_FALSE((a * b).is_zero());
    });
  }
}

TEST_CASE("values print and parse back") {
  for (const char* name : kDomains) {
    Domain d = Domain::parse(name);
    for_samples(d, 100, [&](const Value& a, const Value&, const Value&) { CHECK(parse_value(d, to_string(a)) == a); });
  }
  Domain q = Domain::rationals();
  CHECK(parse_value(q, "2/4") == parse_value(q, "1/2"));
  CHECK(to_string(parse_value(q, "-6/3")) == "-2");
  CHECK(to_string(parse_value(q, "3/-6")) == "-1/2");
}

TEST_CASE("malformed literals are rejected with parse_error") {
  auto code = [](const char* dom, const char* text) {
    try {
      parse_value(Domain::parse(dom), text);
    } catch (const Error& e) {
      return e.code();
    }
    return std::string("none");
  };
  CHECK(code("Z", "1.5") == "parse_error");
  CHECK(code("Z", "") == "parse_error");
  CHECK(code("Q", "1/0") == "parse_error");
  CHECK(code("F5", "5") == "parse_error");
  CHECK(code("Z[j2]", "(1,2,3)") == "parse_error");
}

TEST_CASE("mixing domains is an error") {
  Value z = Value::integer(1);
  Value q = Domain::rationals().one();
  CHECK_THROWS_AS(z + q, Error);
  try {
    (void)less(z, q);
  } catch (const Error& e) {
    CHECK(e.code() == "domain_mismatch");
  }
}

TEST_CASE("prime test") {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t n = 0; n < 60; ++n)
    if (is_prime(n)) primes.push_back(n);
  CHECK(primes == std::vector<std::uint64_t>{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59});
  CHECK(is_prime(1000000007));
  CHECK_FALSE(is_prime(1000000007ULL * 3));
}

TEST_CASE("large field multiplication does not overflow") {
  const std::uint64_t p = 4611686018427387847ULL;  // prime below 2^62
  Domain f = Domain::finite_field(p);
  Value a = Value::residue(f, p - 1);
  CHECK(a * a == f.one());
}
