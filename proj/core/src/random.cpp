#include "ringcirc/random.hpp"

namespace ringcirc {

Value random_value(const Domain& d, Rng& rng, long range) {
  std::uniform_int_distribution<long> coef(-range, range);
  switch (d.kind()) {
    case DomainKind::integer: return d.from_int(coef(rng));
    case DomainKind::rational: {
      std::uniform_int_distribution<long> den(1, std::max(1L, range));
      return Value::rational(Rational(Integer(coef(rng)), Integer(den(rng))));
    }
    case DomainKind::finite_field: {
      std::uniform_int_distribution<std::uint64_t> r(0, d.modulus() - 1);
      return Value::residue(d, r(rng));
    }
    case DomainKind::adjoined: {
      Value::Coefficients cs;
      Domain base = d.base();
      for (unsigned k = 0; k < d.degree(); ++k) cs.push_back(random_value(base, rng, range));
      return Value::tuple(d, std::move(cs));
    }
  }
  return d.zero();
}

std::vector<Value> random_values(const Domain& d, std::size_t count, Rng& rng, long range) {
  std::vector<Value> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(random_value(d, rng, range));
  return out;
}

}  // namespace ringcirc
