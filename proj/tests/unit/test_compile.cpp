#include "doctest.h"
#include "generators.hpp"
#include "ringcirc/compile.hpp"
#include "ringcirc/sexpr.hpp"

#include <functional>

using namespace ringcirc;
using namespace ringcirc::testing;

namespace {

std::string error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "none";
}

StructureFactory signature_factory(std::uint64_t seed) {
  return [seed](std::size_t n) {
    Rng rng(seed + n);
    return random_signature_structure(Domain::integers(), n, rng);
  };
}

}  // namespace

TEST_CASE("compiled circuits agree with the evaluator on random sentences") {
  Rng rng(31);
  for (int t = 0; t < 60; ++t) {
    FormulaShape shape;
    shape.depth = 1 + t % 4;
    auto f = random_sentence(shape, rng);
    CAPTURE(to_sexpr(f));
    auto report = roundtrip_check(f, {2, 3, 4}, 4, signature_factory(t), rng);
    CHECK(report.all_agree());
    REQUIRE(report.rows.size() == 3);
    // the depth does not grow with the structure
    CHECK(report.rows[0].depth == report.rows[1].depth);
    CHECK(report.rows[1].depth == report.rows[2].depth);
  }
}

TEST_CASE("bounded fan-in compilation agrees as well") {
  Rng rng(37);
  for (int t = 0; t < 20; ++t) {
    FormulaShape shape;
    shape.depth = 3;
    auto f = random_sentence(shape, rng);
    CompileOptions opts;
    opts.fanin = FanIn::bounded;
    auto report = roundtrip_check(f, {2, 4}, 3, signature_factory(100 + t), rng, opts);
    CHECK(report.all_agree());
  }
}

TEST_CASE("circuit has one input per element and a single output") {
  auto f = parse_formula("(exists x (num< 0 (f_element x)))");
  Structure arb(Domain::integers(), 5);
  auto compiled = compile_formula(f, arb);
  CHECK(compiled.circuit.inputs().size() == 5);
  CHECK(compiled.circuit.outputs().size() == 1);
  std::vector<Value> x(5, Value::integer(-1));
  CHECK(evaluate(compiled.circuit, x)[0] == Value::integer(0));
  x[3] = Value::integer(2);
  CHECK(evaluate(compiled.circuit, x)[0] == Value::integer(1));
  CHECK_FALSE(compiled.bindings.empty());
  CHECK(compiled.bindings.back().formula == f);
}

TEST_CASE("relativized max has the same depth on two elements") {
  auto f = parse_formula("(num< (max (x) (rel (E x x)) (f_element x)) 0)");
  std::vector<std::size_t> depths;
  for (std::size_t n : {2u, 3u, 5u}) {
    Structure s(Domain::integers(), n);
    s.add_relation("E", 2, {{0, 0}});
    depths.push_back(depth(compile_formula(f, s).circuit));
  }
  CHECK(depths[0] == depths[1]);
  CHECK(depths[1] == depths[2]);
}

TEST_CASE("a broken negation gadget is caught and localized") {
  auto f = parse_formula("(forall x (not (num< (f_element x) 0)))");
  CompileOptions opts;
  opts.fault_negation = true;
  Rng rng(41);
  std::size_t caught = 0;
  for (int t = 0; t < 5; ++t) {
    auto report = roundtrip_check(f, {3}, 20, [](std::size_t n) { return Structure(Domain::integers(), n); }, rng,
                                  opts);
    if (report.all_agree()) continue;
    ++caught;
    REQUIRE_FALSE(report.disagreements.empty());
    CHECK(report.disagreements.front().localized.find("not") != std::string::npos);
  }
  CHECK(caught > 0);
}

TEST_CASE("compile rejects bad input") {
  Structure arb(Domain::integers(), 3);
  CHECK(error_code([&] { compile_formula(parse_formula("(= x 0)"), arb); }) == "invalid_formula");
  Structure clash(Domain::integers(), 3);
  clash.add_number_function("f_element", 1);
  CHECK(error_code([&] { compile_formula(parse_formula("true"), clash); }) == "invalid_structure");
  CHECK(error_code([&] {
          compile_formula(parse_formula("(gfr f (() (y) ()) (chi (exists z (num= (f z) 0))) (num= (f 0) 0))"), arb);
        }) == "gfr_syntax");
}

TEST_CASE("circuit encodings decide the circuit output") {
  Rng rng(43);
  for (int t = 0; t < 40; ++t) {
    CircuitShape shape;
    shape.inputs = 4;
    shape.gates = 2 + t % 6;
    shape.constants = t % 2;
    // bounded aggregators need fan-in two
    const bool bounded = t % 2 == 1;
    if (bounded) shape.fanin = FanIn::bounded;
    Circuit c = balance(random_circuit(Domain::integers(), shape, rng));
    NormalFormParams p{minimal_cfac(c, 1) + 1, 1};
    Circuit nf = pad_and_number(c, p);
    CHECK_NOTHROW(check_normal_form(nf, p));
    {
      auto enc = circuit_to_gfr(nf, p, bounded);
      CHECK(enc.params.cfac == p.cfac);
      for (int s = 0; s < 4; ++s) {
        auto x = random_values(c.domain(), 4, rng, 2);
        bool expected = evaluate(c, x)[0] == Value::integer(1);
        CHECK(eval_formula(with_input(enc.description, x), enc.sentence) == expected);
      }
    }
  }
}

TEST_CASE("normal form check names the offending gate") {
  CircuitBuilder b(Domain::integers());
  GateId x = b.input(), y = b.input(), z = b.input(), w = b.input();
  b.output(b.mul({b.add({x, y}), b.add({z, w})}));
  Circuit c = b.build();
  NormalFormParams p{minimal_cfac(c, 1), 1};
  CHECK(error_code([&] { check_normal_form(c, p); }) == "normal_form");
  Circuit nf = pad_and_number(c, p);
  CHECK_NOTHROW(check_normal_form(nf, p));
  NormalFormParams other{p.cfac + 1, 1};
  CHECK(error_code([&] { check_normal_form(nf, other); }) == "normal_form");
  CHECK(error_code([&] { circuit_to_gfr(c, p); }) == "normal_form");
  CircuitBuilder wide(Domain::integers());
  GateId a = wide.input(), e = wide.input(), g = wide.input(), h = wide.input();
  wide.output(wide.add({a, e, g, h}));
  Circuit cw = wide.build();
  NormalFormParams pw{minimal_cfac(cw, 1), 1};
  CHECK(error_code([&] { circuit_to_gfr(pad_and_number(cw, pw), pw, true); }) == "invalid_argument");
}

TEST_CASE("with_input attaches the input function") {
  Structure arb(Domain::integers(), 2);
  Structure s = with_input(arb, {Value::integer(4), Value::integer(-1)});
  CHECK(s.number("f_element", {0}) == Value::integer(4));
  CHECK(s.number("f_element", {1}) == Value::integer(-1));
  CHECK(error_code([&] { with_input(arb, {Value::integer(1)}); }) == "arity");
}
