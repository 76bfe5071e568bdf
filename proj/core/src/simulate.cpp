#include "ringcirc/simulate.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace ringcirc {

// ---------------------------------------------------------------------------
// Maps

SimulationMap SimulationMap::identity(const Domain& d) { return SimulationMap(MapKind::identity, d, d, 1); }

SimulationMap SimulationMap::adjoined(const Domain& source) {
  if (source.kind() != DomainKind::adjoined) throw Error("unsupported_map", "adjoined map needs an adjoined source");
  return SimulationMap(MapKind::adjoined, source, source.base(), source.degree());
}

SimulationMap SimulationMap::finite(std::uint64_t p, std::uint64_t q) {
  Domain src = Domain::finite_field(p);
  Domain tgt = Domain::finite_field(q);
  std::size_t k = 1;
  for (std::uint64_t cap = q; cap < p; cap *= q) ++k;
  return SimulationMap(MapKind::finite, src, tgt, k);
}

SimulationMap SimulationMap::rational() {
  return SimulationMap(MapKind::rational, Domain::rationals(), Domain::integers(), 2);
}

SimulationMap SimulationMap::between(const Domain& source, const Domain& target) {
  if (source == target) return identity(source);
  if (source.kind() == DomainKind::adjoined && source.base() == target) return adjoined(source);
  if (source.kind() == DomainKind::finite_field && target.kind() == DomainKind::finite_field)
    return finite(source.modulus(), target.modulus());
  if (source.kind() == DomainKind::rational && target.kind() == DomainKind::integer) return rational();
  throw Error("unsupported_map", "no simulation map from " + source.name() + " to " + target.name());
}

SimulationMap SimulationMap::parse(std::string_view text) {
  auto arrow = text.find("->");
  if (arrow == std::string_view::npos) throw Error("invalid_argument", "map must be written SOURCE->TARGET");
  return between(Domain::parse(text.substr(0, arrow)), Domain::parse(text.substr(arrow + 2)));
}

std::string SimulationMap::name() const { return source_.name() + "->" + target_.name(); }

std::vector<Value> SimulationMap::apply(const Value& v) const {
  if (!(v.domain() == source_)) throw Error("domain_mismatch", "value in " + v.domain().name() + " for map " + name());
  switch (kind_) {
    case MapKind::identity: return {v};
    case MapKind::adjoined: return v.coefficients();
    case MapKind::finite: {
      std::vector<Value> digits(width_, target_.zero());
      std::uint64_t r = v.as_residue();
      const std::uint64_t q = target_.modulus();
      for (std::size_t k = width_; k-- > 0;) {
        digits[k] = Value::residue(target_, r % q);
        r /= q;
      }
      return digits;
    }
    case MapKind::rational: {
      const Rational& r = v.as_rational();
      return {Value::integer(r.get_num()), Value::integer(r.get_den())};
    }
  }
  return {};
}

std::vector<Value> SimulationMap::apply_all(const std::vector<Value>& vs) const {
  std::vector<Value> out;
  for (const auto& v : vs) {
    auto code = apply(v);
    out.insert(out.end(), code.begin(), code.end());
  }
  return out;
}

bool SimulationMap::represents(const std::vector<Value>& encoded, const Value& v) const {
  if (encoded.size() != width_) return false;
  if (kind_ == MapKind::rational) {
    const Integer& a = encoded[0].as_integer();
    const Integer& b = encoded[1].as_integer();
    if (b == 0) return false;
    const Rational& r = v.as_rational();
    return a * r.get_den() == r.get_num() * b;
  }
  return apply(v) == encoded;
}

// ---------------------------------------------------------------------------
// Shared lowering driver

namespace {

using Code = std::vector<GateId>;

struct GadgetSet {
  std::function<Code(const Gate&)> constant;
  std::function<Code(const std::vector<Code>&)> add;
  std::function<Code(const std::vector<Code>&)> mul;
  std::function<Code(const Code&, const Code&)> less;
};

Lowering drive(const Circuit& c, const SimulationMap& map, CircuitBuilder& b, const GadgetSet& g) {
  const std::size_t w = map.width();
  std::vector<Code> codes(c.gates().size());
  for (GateId in : c.inputs())
    for (std::size_t k = 0; k < w; ++k) codes[in].push_back(b.input());
  for (GateId id : c.topological_order()) {
    const Gate& gate = c.gate(id);
    std::vector<Code> ops;
    for (GateId p : gate.preds) ops.push_back(codes[p]);
    switch (gate.kind) {
      case GateKind::input:
      case GateKind::output: break;
      case GateKind::constant: codes[id] = g.constant(gate); break;
      case GateKind::add:
        if (ops.size() == 1) {
          for (GateId x : ops[0]) codes[id].push_back(b.identity(x));
        } else {
          codes[id] = g.add(ops);
        }
        break;
      case GateKind::mul:
        if (ops.size() == 1) {
          for (GateId x : ops[0]) codes[id].push_back(b.identity(x));
        } else {
          codes[id] = g.mul(ops);
        }
        break;
      case GateKind::less: codes[id] = g.less(ops[0], ops[1]); break;
    }
  }
  for (GateId out : c.outputs()) {
    const Code& src = codes[c.gate(out).preds[0]];
    for (GateId x : src) codes[out].push_back(b.output(x));
  }
  return Lowering{b.build(), map, std::move(codes), 0};
}

/// Sum a - b without subtraction gates.
GateId difference(CircuitBuilder& b, std::vector<GateId> plus, std::vector<GateId> minus) {
  if (plus.empty() && minus.empty()) return b.constant(0);
  if (minus.empty()) return b.sum(std::move(plus));
  GateId neg = b.mul({b.constant(-1), b.sum(std::move(minus))});
  if (plus.empty()) return neg;
  return b.add({b.sum(std::move(plus)), neg});
}

}  // namespace

// ---------------------------------------------------------------------------
// R[j_k] over R

Lowering lower_adjoined(const Circuit& c, LoweringOptions options) {
  SimulationMap map = SimulationMap::adjoined(c.domain());
  const std::size_t k = map.width();
  CircuitBuilder b(map.target(), c.fanin());
  std::size_t tree_products = 0;

  // product of two codes through the multiplication matrix
  auto binary = [&](const Code& x, const Code& y) {
    std::vector<std::vector<GateId>> plus(k), minus(k);
    for (std::size_t u = 0; u < k; ++u)
      for (std::size_t v = 0; v < k; ++v) {
        GateId m = b.mul({x[u], y[v]});
        const bool wraps = u + v >= k;
        const bool negative = wraps != options.fault;
        (negative && wraps ? minus : plus)[(u + v) % k].push_back(m);
        if (!wraps && options.fault) {
          // fault only flips the wrapped terms
          plus[(u + v) % k].pop_back();
          plus[(u + v) % k].push_back(m);
        }
      }
    Code out;
    for (std::size_t w = 0; w < k; ++w) out.push_back(difference(b, plus[w], minus[w]));
    return out;
  };

  GadgetSet g;
  g.constant = [&](const Gate& gate) {
    Code out;
    for (const auto& coef : gate.value->coefficients()) out.push_back(b.constant(coef));
    return out;
  };
  g.add = [&](const std::vector<Code>& ops) {
    Code out;
    for (std::size_t u = 0; u < k; ++u) {
      std::vector<GateId> parts;
      for (const auto& op : ops) parts.push_back(op[u]);
      out.push_back(b.sum(std::move(parts)));
    }
    return out;
  };
  g.mul = [&](const std::vector<Code>& ops) {
    if (ops.size() == 2) return binary(ops[0], ops[1]);
    if (ops.size() <= 4) {
      // direct expansion: one monomial per choice of components
      const std::size_t m = ops.size();
      std::vector<std::vector<GateId>> plus(k), minus(k);
      std::vector<std::size_t> idx(m, 0);
      while (true) {
        std::vector<GateId> factors;
        std::size_t total = 0;
        for (std::size_t j = 0; j < m; ++j) {
          factors.push_back(ops[j][idx[j]]);
          total += idx[j];
        }
        GateId mono = b.mul(std::move(factors));
        const bool negative = (total / k) % 2 == 1;
        (negative ? minus : plus)[total % k].push_back(mono);
        std::size_t pos = m;
        while (pos > 0 && ++idx[pos - 1] == k) idx[--pos] = 0;
        if (pos == 0) break;
      }
      Code out;
      for (std::size_t w = 0; w < k; ++w) out.push_back(difference(b, plus[w], minus[w]));
      return out;
    }
    ++tree_products;
    std::vector<Code> layer = ops;
    while (layer.size() > 1) {
      std::vector<Code> next;
      for (std::size_t j = 0; j + 1 < layer.size(); j += 2) next.push_back(binary(layer[j], layer[j + 1]));
      if (layer.size() % 2 == 1) next.push_back(layer.back());
      layer = std::move(next);
    }
    return layer.front();
  };
  g.less = [&](const Code& x, const Code& y) {
    // lexicographic: sum over u of [x_v = y_v for v < u] * [x_u < y_u]
    std::vector<GateId> terms, equal;
    for (std::size_t u = 0; u < k; ++u) {
      std::vector<GateId> factors = equal;
      factors.push_back(b.less(x[u], y[u]));
      terms.push_back(b.product(std::move(factors)));
      if (u + 1 < k) equal.push_back(b.equals(x[u], y[u]));
    }
    Code out{b.sum(std::move(terms))};
    for (std::size_t u = 1; u < k; ++u) out.push_back(b.constant(0));
    return out;
  };
  Lowering l = drive(c, map, b, g);
  l.tree_products = tree_products;
  return l;
}

// ---------------------------------------------------------------------------
// F_p over F_q

Lowering lower_finite(const Circuit& c, std::uint64_t q, LoweringOptions options) {
  if (c.domain().kind() != DomainKind::finite_field) throw Error("unsupported_map", "finite lowering needs a finite field source");
  const std::uint64_t p = c.domain().modulus();
  SimulationMap map = SimulationMap::finite(p, q);
  if (p == q && !options.fault) return lower_identity(c);
  const std::size_t k = map.width();
  const Domain& tgt = map.target();
  CircuitBuilder b(tgt, c.fanin());

  auto digits_of = [&](std::uint64_t x) {
    std::vector<std::uint64_t> d(k);
    for (std::size_t j = k; j-- > 0;) {
      d[j] = x % q;
      x /= q;
    }
    return d;
  };
  auto cst = [&](std::uint64_t r) { return b.constant(Value::residue(tgt, r % q)); };

  // delta(v, r) = 1 - (v - r)^(q-1)
  std::map<std::pair<GateId, std::uint64_t>, GateId> deltas;
  auto delta = [&](GateId v, std::uint64_t r) {
    auto key = std::make_pair(v, r);
    auto it = deltas.find(key);
    if (it != deltas.end()) return it->second;
    GateId diff = r == 0 ? v : b.add({v, cst(q - r)});
    GateId power = b.product(std::vector<GateId>(q - 1, diff));
    GateId d = b.add({cst(1), b.mul({cst(q - 1), power})});
    deltas.emplace(key, d);
    return d;
  };
  std::map<std::pair<Code, std::uint64_t>, GateId> indicators;
  auto indicator = [&](const Code& code, std::uint64_t x) {
    auto key = std::make_pair(code, x);
    auto it = indicators.find(key);
    if (it != indicators.end()) return it->second;
    auto ds = digits_of(x);
    std::vector<GateId> factors;
    for (std::size_t j = 0; j < k; ++j) factors.push_back(delta(code[j], ds[j]));
    GateId ind = b.product(std::move(factors));
    indicators.emplace(key, ind);
    return ind;
  };
  // code of table(x, y) summed over all operand pairs
  auto table = [&](const Code& a, const Code& bb, const std::function<std::uint64_t(std::uint64_t, std::uint64_t)>& op) {
    std::vector<std::vector<GateId>> parts(k);
    for (std::uint64_t x = 0; x < p; ++x)
      for (std::uint64_t y = 0; y < p; ++y) {
        auto ds = digits_of(op(x, y));
        bool any = std::any_of(ds.begin(), ds.end(), [](auto d) { return d != 0; });
        if (!any) continue;
        GateId pair = b.mul({indicator(a, x), indicator(bb, y)});
        for (std::size_t j = 0; j < k; ++j)
          if (ds[j] != 0) parts[j].push_back(ds[j] == 1 ? pair : b.mul({cst(ds[j]), pair}));
      }
    Code out;
    for (std::size_t j = 0; j < k; ++j) out.push_back(parts[j].empty() ? cst(0) : b.sum(std::move(parts[j])));
    return out;
  };
  auto fold = [&](const std::vector<Code>& ops, const std::function<std::uint64_t(std::uint64_t, std::uint64_t)>& op) {
    std::vector<Code> layer = ops;
    while (layer.size() > 1) {
      std::vector<Code> next;
      for (std::size_t j = 0; j + 1 < layer.size(); j += 2) next.push_back(table(layer[j], layer[j + 1], op));
      if (layer.size() % 2 == 1) next.push_back(layer.back());
      layer = std::move(next);
    }
    return layer.front();
  };

  GadgetSet g;
  g.constant = [&](const Gate& gate) {
    Code out;
    for (auto d : digits_of(gate.value->as_residue())) out.push_back(cst(d));
    return out;
  };
  g.add = [&](const std::vector<Code>& ops) { return fold(ops, [&](auto x, auto y) { return (x + y) % p; }); };
  g.mul = [&](const std::vector<Code>& ops) {
    return fold(ops, [&](auto x, auto y) {
      std::uint64_t r = (x * y) % p;
      if (options.fault && x == 1 && y == 1) r = (r + 1) % p;
      return r;
    });
  };
  g.less = [&](const Code& x, const Code& y) {
    auto code = table(x, y, [](auto u, auto v) -> std::uint64_t { return u < v ? 1 : 0; });
    return code;
  };
  return drive(c, map, b, g);
}

// ---------------------------------------------------------------------------
// Q over Z

Lowering lower_rationals(const Circuit& c, LoweringOptions options) {
  if (c.domain().kind() != DomainKind::rational) throw Error("unsupported_map", "rational lowering needs a Q source");
  SimulationMap map = SimulationMap::rational();
  CircuitBuilder b(map.target(), c.fanin());
  GadgetSet g;
  g.constant = [&](const Gate& gate) {
    const Rational& r = gate.value->as_rational();
    return Code{b.constant(Value::integer(r.get_num())), b.constant(Value::integer(r.get_den()))};
  };
  g.add = [&](const std::vector<Code>& ops) {
    // (sum_i a_i prod_{j != i} b_j, prod_j b_j)
    std::vector<GateId> nums, dens;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      std::vector<GateId> factors{ops[i][0]};
      for (std::size_t j = 0; j < ops.size(); ++j)
        if (j != i) factors.push_back(ops[j][1]);
      nums.push_back(b.product(std::move(factors)));
      dens.push_back(ops[i][1]);
    }
    return Code{b.sum(std::move(nums)), b.product(std::move(dens))};
  };
  g.mul = [&](const std::vector<Code>& ops) {
    std::vector<GateId> nums, dens;
    for (const auto& op : ops) {
      nums.push_back(op[0]);
      dens.push_back(op[1]);
    }
    return Code{b.product(std::move(nums)), b.product(std::move(dens))};
  };
  g.less = [&](const Code& x, const Code& y) {
    // denominators are positive, so a/b < c/d iff ad < cb
    GateId ad = b.mul({x[0], y[1]});
    GateId cb = b.mul({y[0], x[1]});
    GateId lt = options.fault ? b.less(cb, ad) : b.less(ad, cb);
    return Code{lt, b.constant(1)};
  };
  return drive(c, map, b, g);
}

Lowering lower_identity(const Circuit& c) {
  SimulationMap map = SimulationMap::identity(c.domain());
  std::vector<std::vector<GateId>> codes;
  for (const auto& g : c.gates()) codes.push_back({g.id});
  return Lowering{c.unlabeled(), map, std::move(codes), 0};
}

Lowering lower(const Circuit& c, const Domain& target, LoweringOptions options) {
  SimulationMap map = SimulationMap::between(c.domain(), target);
  switch (map.kind()) {
    case MapKind::identity: return lower_identity(c);
    case MapKind::adjoined: return lower_adjoined(c, options);
    case MapKind::finite: return lower_finite(c, target.modulus(), options);
    case MapKind::rational: return lower_rationals(c, options);
  }
  throw Error("internal", "unknown map kind");
}

// ---------------------------------------------------------------------------
// Checking

namespace {

std::string render(const std::vector<Value>& vs) {
  std::string s = "[";
  for (std::size_t k = 0; k < vs.size(); ++k) s += (k ? ", " : "") + to_string(vs[k]);
  return s + "]";
}

}  // namespace

SimulationReport check_simulation(const SimulationMap& map, const Circuit& source, const Circuit& target,
                                  std::size_t samples, Rng& rng, const std::vector<std::vector<GateId>>* gate_map,
                                  long range) {
  if (!(source.domain() == map.source()) || !(target.domain() == map.target()))
    throw Error("domain_mismatch", "circuits do not match the map " + map.name());
  if (target.inputs().size() != source.inputs().size() * map.width() ||
      target.outputs().size() != source.outputs().size() * map.width())
    throw Error("invalid_argument", "circuit widths do not match the map " + map.name());
  SimulationReport r;
  r.map = map.name();
  r.source_size = size(source);
  r.target_size = size(target);
  r.source_depth = depth(source);
  r.target_depth = depth(target);
  r.size_factor = r.source_size ? static_cast<double>(r.target_size) / r.source_size : 0;
  r.depth_factor = r.source_depth ? static_cast<double>(r.target_depth) / r.source_depth : 0;
  std::map<std::string, std::string> seen;  // code -> source inputs
  const std::size_t w = map.width();
  const Value one = map.source().one();
  for (std::size_t s = 0; s < samples; ++s) {
    auto x = random_values(map.source(), source.inputs().size(), rng, range);
    auto fx = map.apply_all(x);
    auto key = render(fx);
    auto [it, fresh] = seen.emplace(key, render(x));
    if (!fresh && it->second != render(x)) r.injective = false;
    auto src_all = evaluate_all(source, x);
    auto tgt_all = evaluate_all(target, fx);
    bool commutes = true, decides = true;
    std::size_t bad_output = 0;
    for (std::size_t o = 0; o < source.outputs().size(); ++o) {
      const Value& v = src_all[source.outputs()[o]];
      std::vector<Value> code;
      for (std::size_t j = 0; j < w; ++j) code.push_back(tgt_all[target.outputs()[o * w + j]]);
      if (!map.represents(code, v)) {
        if (commutes) bad_output = o;
        commutes = false;
      }
      if ((v == one) != map.represents(code, one)) decides = false;
    }
    r.commuting += commutes ? 1 : 0;
    r.decisions_agree += decides ? 1 : 0;
    if ((!commutes || !decides) && !r.first_failure) {
      std::string msg = "inputs " + render(x) + ": output " + std::to_string(bad_output) + " not represented";
      if (gate_map) {
        for (GateId id : source.topological_order()) {
          std::vector<Value> code;
          for (GateId t : (*gate_map)[id]) code.push_back(tgt_all[t]);
          if (!map.represents(code, src_all[id])) {
            msg += "; first wrong gate " + std::to_string(id) + " (" + to_string(source.gate(id).kind) + ") gives " +
                   render(code) + " for " + to_string(src_all[id]);
            break;
          }
        }
      }
      r.first_failure = msg;
    }
  }
  r.samples = samples;
  return r;
}

SimulationReport check_simulation(const Lowering& lowering, const Circuit& source, std::size_t samples, Rng& rng,
                                  long range) {
  auto r = check_simulation(lowering.map, source, lowering.circuit, samples, rng, &lowering.gate_map, range);
  r.tree_products = lowering.tree_products;
  return r;
}

}  // namespace ringcirc
