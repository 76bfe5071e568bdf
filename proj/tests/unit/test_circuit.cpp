#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"
#include "ringcirc/circuit.hpp"
#include "ringcirc/compile.hpp"
#include "ringcirc/numeric.hpp"

#include <functional>

using namespace ringcirc;
using namespace ringcirc::testing;

namespace {

Gate make(GateKind kind, std::vector<GateId> preds, std::size_t position = 0) {
  Gate g;
  g.kind = kind;
  g.preds = std::move(preds);
  g.position = position;
  return g;
}

std::vector<Gate> numbered(std::vector<Gate> gates) {
  for (std::size_t k = 0; k < gates.size(); ++k) gates[k].id = k;
  return gates;
}

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "none";
}

Circuit less_circuit() {
  return Circuit(Domain::integers(), FanIn::unbounded,
                 numbered({make(GateKind::input, {}, 0), make(GateKind::input, {}, 1), make(GateKind::less, {0, 1}),
                           make(GateKind::output, {2})}));
}

}  // namespace

TEST_CASE("a less gate on inputs 1 and 2 outputs 1") {
  Circuit c = less_circuit();
  CHECK(evaluate(c, {Value::integer(1), Value::integer(2)}) == std::vector<Value>{Value::integer(1)});
  CHECK(evaluate(c, {Value::integer(2), Value::integer(1)}) == std::vector<Value>{Value::integer(0)});
}

TEST_CASE("construction rejects malformed graphs") {
  const Domain z = Domain::integers();
  auto build = [&](std::vector<Gate> gates, FanIn f = FanIn::unbounded) {
    return error_code([&] { Circuit(z, f, numbered(std::move(gates))); });
  };
  CHECK(build({make(GateKind::input, {}, 0), make(GateKind::add, {0, 2}), make(GateKind::add, {1})}) ==
        "invalid_circuit");
  CHECK(build({make(GateKind::input, {}, 0), make(GateKind::add, {0, 0}), make(GateKind::output, {1})}) ==
        "invalid_circuit");
  CHECK(build({make(GateKind::input, {}, 0), make(GateKind::input, {}, 1), make(GateKind::input, {}, 2),
               make(GateKind::add, {0, 1, 2}), make(GateKind::output, {3})},
              FanIn::bounded) == "invalid_circuit");
  CHECK(build({make(GateKind::input, {}, 0), make(GateKind::output, {0}), make(GateKind::add, {1})}) ==
        "invalid_circuit");
  CHECK(build({make(GateKind::input, {}, 1), make(GateKind::output, {0})}) == "invalid_circuit");
  CHECK(build({make(GateKind::input, {}, 0), make(GateKind::less, {0}), make(GateKind::output, {1})}) != "none");
  Gate bad_const = make(GateKind::constant, {});
  bad_const.value = Domain::rationals().one();
  CHECK(build({bad_const, make(GateKind::output, {0})}) != "none");
  Gate no_value = make(GateKind::constant, {});
  CHECK(build({no_value, make(GateKind::output, {0})}) != "none");
}

TEST_CASE("evaluation checks its inputs") {
  Circuit c = less_circuit();
  CHECK(error_code([&] { evaluate(c, {Value::integer(1)}); }) == "arity");
  CHECK(error_code([&] { evaluate(c, {Domain::rationals().one(), Domain::rationals().one()}); }) ==
        "domain_mismatch");
}

TEST_CASE("evaluation agrees with the recursive reference") {
  Rng rng(7);
  for (const char* name : {"Z", "Q", "F5", "Z[j2]", "Q[j2]"}) {
    Domain d = Domain::parse(name);
    for (int t = 0; t < 40; ++t) {
      CircuitShape shape;
      shape.inputs = 1 + t % 4;
      shape.gates = 3 + t % 9;
      shape.outputs = 1 + t % 2;
      shape.fanin = t % 2 ? FanIn::bounded : FanIn::unbounded;
      Circuit c = random_circuit(d, shape, rng);
      auto x = random_values(d, shape.inputs, rng);
      CHECK(evaluate(c, x) == reference_outputs(c, x));
    }
  }
}

TEST_CASE("metrics on a small circuit") {
  CircuitBuilder b(Domain::integers());
  GateId x = b.input(), y = b.input(), z = b.input();
  GateId s = b.add({x, y, z});
  GateId m = b.mul({s, x});
  b.output(b.less(m, b.constant(3)));
  Circuit c = b.build();
  CHECK(size(c) == c.gates().size());
  CHECK(depth(c) == 4);  // sources at 0, output at 4
  CHECK(max_fanin(c) == 3);
  CHECK(wire_count(c) == 3 + 2 + 2 + 1);
  auto levels = gate_levels(c);
  CHECK(levels[s] == 1);
  CHECK(levels[m] == 2);
}

TEST_CASE("builder keeps predecessors distinct and respects bounded fan-in") {
  CircuitBuilder b(Domain::integers(), FanIn::bounded);
  GateId x = b.input();
  GateId sq = b.mul({x, x});
  std::vector<GateId> many;
  for (int k = 0; k < 9; ++k) many.push_back(b.input());
  GateId s = b.sum(many);
  b.output(b.add({sq, s}));
  Circuit c = b.build();
  CHECK(max_fanin(c) <= 2);
  std::vector<Value> in;
  for (int k = 0; k < 10; ++k) in.push_back(Value::integer(k + 1));
  CHECK(evaluate(c, in)[0] == Value::integer(1 + (2 + 3 + 4 + 5 + 6 + 7 + 8 + 9 + 10)));
  CHECK(gate_levels(c)[s] == 4);  // ceil(log2 9)
}

TEST_CASE("negate and equals gadgets") {
  CircuitBuilder b(Domain::integers());
  GateId x = b.input(), y = b.input();
  b.output(b.negate(b.less(x, y)));
  b.output(b.equals(x, y));
  Circuit c = b.build();
  for (int u = -2; u <= 2; ++u)
    for (int v = -2; v <= 2; ++v) {
      auto out = evaluate(c, {Value::integer(u), Value::integer(v)});
      CHECK(out[0] == Value::integer(u < v ? 0 : 1));
      CHECK(out[1] == Value::integer(u == v ? 1 : 0));
    }
}

TEST_CASE("balance equalizes source path lengths and keeps the function") {
  Rng rng(11);
  for (int t = 0; t < 60; ++t) {
    CircuitShape shape;
    shape.inputs = 2 + t % 3;
    shape.gates = 4 + t % 12;
    shape.constants = t % 3;
    shape.outputs = 1 + t % 3;
    shape.fanin = t % 2 ? FanIn::bounded : FanIn::unbounded;
    Circuit c = random_circuit(Domain::integers(), shape, rng);
    Circuit bal = balance(c);
    CHECK(is_balanced(bal));
    for (const auto& lengths : source_path_lengths(bal)) CHECK(lengths.size() == 1);
    CHECK(depth(bal) == depth(c));
    CHECK(bal.fanin() == c.fanin());
    CHECK(max_fanin(bal) <= std::max<std::size_t>(max_fanin(c), 1));
    for (int s = 0; s < 10; ++s) {
      auto x = random_values(c.domain(), shape.inputs, rng);
      CHECK(evaluate(bal, x) == evaluate(c, x));
    }
    CHECK(size(balance(bal)) == size(bal));
  }
}

TEST_CASE("normal form: depth, prefixes, numbering and function") {
  Rng rng(5);
  for (int t = 0; t < 60; ++t) {
    CircuitShape shape;
    shape.inputs = t % 2 ? 4 : 8;
    shape.gates = 3 + t % 10;
    shape.constants = t % 2;
    shape.outputs = 1;
    Circuit c = balance(random_circuit(Domain::integers(), shape, rng));
    const std::size_t i = 1 + t % 2;
    NormalFormParams p{minimal_cfac(c, i), i};
    Circuit nf = [&] {
      try {
        return pad_and_number(c, p);
      } catch (const Error& e) {
        // two inputs compared in both orders with no room for padding
        REQUIRE(e.code() == "normal_form");
        ++p.cfac;
        return pad_and_number(c, p);
      }
    }();
    const std::size_t n = shape.inputs;
    const std::size_t D = normal_form_depth(n, p);
    CHECK(depth(nf) == D);
    CHECK(is_balanced(nf));
    CHECK(nf.label_base() == n);
    CHECK_NOTHROW(check_normal_form(nf, p));
    auto levels = gate_levels(nf);
    auto weights = seq_d_weights(n, p.cfac, i);
    REQUIRE(weights.size() == D);
    std::set<Label> labels;
    for (const auto& g : nf.gates()) {
      labels.insert(g.label);
      auto w = prefix_weights(g.label, n, p.cfac, i);
      if (levels[g.id] == 0)
        CHECK(w == std::vector<std::size_t>(i, 0));
      else
        CHECK(w == weights[D - levels[g.id]]);
      if (g.kind == GateKind::input) CHECK(g.label.back() == g.position);
      if (g.kind == GateKind::less) CHECK(nf.gate(g.preds[0]).label < nf.gate(g.preds[1]).label);
    }
    CHECK(labels.size() == nf.gates().size());
    for (int s = 0; s < 10; ++s) {
      auto x = random_values(c.domain(), n, rng);
      CHECK(evaluate(nf, x) == evaluate(c, x));
    }
  }
}

TEST_CASE("every output of the normal form sits at full depth") {
  CircuitBuilder b(Domain::integers());
  GateId w = b.input(), x = b.input(), y = b.input(), z = b.input();
  GateId shallow = b.add({w, x});
  b.output(b.mul({shallow, b.add({y, z})}));
  b.output(shallow);
  Circuit c = b.build();
  NormalFormParams p{minimal_cfac(c, 1), 1};
  Circuit nf = pad_and_number(c, p);
  const std::size_t D = normal_form_depth(4, p);
  auto levels = gate_levels(nf);
  auto top = seq_d_weights(4, p.cfac, 1).front();
  for (GateId out : nf.outputs()) {
    CHECK(levels[out] == D);
    CHECK(prefix_weights(nf.gate(out).label, 4, p.cfac, 1) == top);
  }
  std::vector<Value> in{Value::integer(1), Value::integer(2), Value::integer(3), Value::integer(4)};
  CHECK(evaluate(nf, in) == evaluate(c, in));
}

TEST_CASE("normal form preconditions") {
  Circuit c = less_circuit();
  // two inputs: floor(log2 2) = 1 so cfac must be at least 2
  CHECK(error_code([&] { pad_and_number(c, {1, 1}); }) == "invalid_argument");
  CHECK_NOTHROW(pad_and_number(c, {2, 1}));
  CHECK(minimal_cfac(c, 1) == 2);
  CircuitBuilder b(Domain::integers());
  GateId x = b.input(), y = b.input();
  b.output(b.add({b.mul({x, y}), x}));
  Circuit unbalanced = b.build();
  CHECK_FALSE(is_balanced(unbalanced));
  CHECK(error_code([&] { pad_and_number(unbalanced, {4, 1}); }) == "normal_form");
}

TEST_CASE("seq_d prefixes list the sequence") {
  NormalFormParams p{1, 2};
  for (std::size_t pos = 1; pos <= 9; ++pos) {
    auto label = seq_d_prefix(8, p, pos);
    CHECK(prefix_weights(label, 8, 1, 2) == seq_d_weights(8, 1, 2)[pos - 1]);
  }
}

TEST_CASE("class check") {
  Rng rng(3);
  CircuitShape shape;
  shape.inputs = 8;
  shape.gates = 10;
  shape.fanin = FanIn::bounded;
  Circuit c = random_circuit(Domain::integers(), shape, rng);
  auto r = check_class(c, CircuitClass::NC, 1, {100, 100, 2});
  CHECK(r.fanin_ok);
  CHECK(r.size == size(c));
  CHECK(r.n == 8);
  auto tight = check_class(c, CircuitClass::AC, 1, {0.01, 0.01, 1});
  CHECK_FALSE(tight.passed());
}
