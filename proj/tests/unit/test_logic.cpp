#include "doctest.h"
#include "generators.hpp"
#include "ringcirc/circuit.hpp"
#include "ringcirc/compile.hpp"
#include "ringcirc/logic.hpp"
#include "ringcirc/sexpr.hpp"

#include <algorithm>
#include <functional>

using namespace ringcirc;
using namespace ringcirc::testing;
namespace f = ringcirc::fo;

namespace {

Structure weighted_graph(long row0, long row1) {
  Structure s(Domain::integers(), 2);
  s.add_number_function("f_E", 2);
  s.set_number("f_E", {0, 0}, Value::integer(row0 - 1));
  s.set_number("f_E", {0, 1}, Value::integer(1));
  s.set_number("f_E", {1, 0}, Value::integer(row1));
  return s;
}

// exists x forall y (x != y -> sum_a f_E(x,a) > 2 * sum_b f_E(y,b))
FormulaPtr weighted_sentence() {
  auto row = [](const char* v, const char* a) {
    return f::aggregate(AggKind::sum, {a}, nullptr, f::apply("f_E", {f::var(v), f::var(a)}));
  };
  return f::exists({"x"}, f::forall({"y"}, f::implication(f::negation(f::index_eq(f::var("x"), f::var("y"))),
                                                           f::num_less(f::mul({f::constant(2), row("y", "b")}),
                                                                       row("x", "a")))));
}

std::string error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "none";
}

// every tuple of length k over 0..n-1 in lexicographic order
std::vector<std::vector<std::size_t>> tuples(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out{{}};
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& t : out)
      for (std::size_t e = 0; e < n; ++e) {
        auto u = t;
        u.push_back(e);
        next.push_back(u);
      }
    out = std::move(next);
  }
  return out;
}

Env env_of(const Vars& vs, const std::vector<std::size_t>& t) {
  Env env;
  for (std::size_t k = 0; k < vs.size(); ++k) env.emplace_back(vs[k], t[k]);
  return env;
}

Structure with_random_inputs(std::size_t n, Rng& rng) {
  Structure s = random_signature_structure(Domain::integers(), n, rng);
  return with_input(s, random_values(Domain::integers(), n, rng, 2));
}

}  // namespace

TEST_CASE("sum over a row of a number function") {
  Structure s(Domain::integers(), 2);
  s.add_number_function("f_E", 2);
  s.set_number("f_E", {0, 0}, Value::integer(1));
  s.set_number("f_E", {0, 1}, Value::integer(2));
  auto t = f::aggregate(AggKind::sum, {"a"}, nullptr, f::apply("f_E", {f::var("x"), f::var("a")}));
  CHECK(eval_term(s, t, {{"x", 0}}) == Value::integer(3));
}

TEST_CASE("simple terms") {
  Structure s(Domain::integers(), 3);
  CHECK(eval_term(s, f::sign(f::add({f::constant(-2), f::constant(0)}))) == Value::integer(0));
  CHECK(eval_term(s, f::aggregate(AggKind::prod, {"x"}, f::truth(false), f::constant(5))) == Value::integer(1));
  CHECK(eval_term(s, f::aggregate(AggKind::max, {"x"}, f::truth(false), f::constant(5))) == Value::integer(0));
  CHECK(eval_formula(s, f::forall({"x"}, f::index_eq(f::var("x"), f::var("x")))));
}

TEST_CASE("weighted graph sentence") {
  CHECK(eval_formula(weighted_graph(10, 3), weighted_sentence()));
  CHECK_FALSE(eval_formula(weighted_graph(5, 3), weighted_sentence()));
  // the text form evaluates the same way
  auto parsed = parse_formula(
      "(exists x (forall y (implies (not (= x y))"
      "  (num< (* 2 (sum (b) (f_E y b))) (sum (a) (f_E x a))))))");
  for (long r0 : {10, 5, 7, 6})
    for (long r1 : {3, 2, 4}) CHECK(eval_formula(weighted_graph(r0, r1), parsed) == eval_formula(weighted_graph(r0, r1), weighted_sentence()));
}

TEST_CASE("bounded aggregators take the two largest satisfiers") {
  Structure s(Domain::integers(), 4);
  s.add_number_function("val", 1);
  for (std::size_t e = 0; e < 4; ++e) s.set_number("val", {e}, Value::integer(static_cast<long>(e)));
  s.add_relation("even", 1, {{0}, {2}});
  s.add_relation("three", 1, {{3}});
  auto body = f::apply("val", {f::var("x")});
  auto bsum = [&](const char* rel) {
    return f::aggregate(AggKind::sum, {"x"}, f::relation(rel, {f::var("x")}), body, true);
  };
  CHECK(eval_term(s, bsum("even")) == Value::integer(2));
  CHECK(eval_term(s, bsum("three")) == Value::integer(3));
  CHECK(eval_term(s, f::aggregate(AggKind::prod, {"x"}, f::truth(false), body, true)) == Value::integer(1));
  CHECK(eval_term(s, f::aggregate(AggKind::sum, {"x"}, f::truth(true), body, true)) == Value::integer(5));
}

TEST_CASE("bounded aggregator equals the plain one on its two-element set") {
  Rng rng(21);
  for (int t = 0; t < 60; ++t) {
    std::size_t n = 2 + t % 3;
    Structure s = with_random_inputs(n, rng);
    Vars vs = {"u", "v"};
    auto rel = f::disjunction({f::relation("E", {f::var("u"), f::var("v")}), f::index_less(f::var("v"), f::var("u"))});
    auto body = f::add({f::apply("f_element", {f::var("u")}), f::apply("g", {f::var("v")})});
    std::vector<std::vector<std::size_t>> sat;
    for (const auto& tup : tuples(n, 2))
      if (eval_formula(s, rel, env_of(vs, tup))) sat.push_back(tup);
    std::sort(sat.rbegin(), sat.rend());
    if (sat.size() > 2) sat.resize(2);
    std::vector<FormulaPtr> picks;
    for (const auto& tup : sat)
      picks.push_back(f::conjunction({f::index_eq(f::var("u"), f::elem(tup[0])), f::index_eq(f::var("v"), f::elem(tup[1]))}));
    auto restricted = picks.empty() ? f::truth(false) : f::disjunction(picks);
    for (AggKind k : {AggKind::sum, AggKind::prod, AggKind::max})
      CHECK(eval_term(s, f::aggregate(k, vs, rel, body, true)) == eval_term(s, f::aggregate(k, vs, restricted, body)));
  }
}

TEST_CASE("aggregators agree with a direct fold") {
  Rng rng(3);
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t arity = 1; arity <= 2; ++arity) {
      Structure s = with_random_inputs(n, rng);
      Vars vs = arity == 1 ? Vars{"u"} : Vars{"u", "v"};
      auto body = f::mul({f::apply("f_element", {f::var("u")}), f::apply("g", {f::var(vs.back())})});
      auto rel = f::relation("E", {f::var("u"), f::var(vs.back())});
      const Domain& d = s.domain();
      for (bool relativized : {false, true}) {
        Value sum = d.zero(), prod = d.one(), max = d.zero();
        bool first = true;
        for (const auto& tup : tuples(n, arity)) {
          Env env = env_of(vs, tup);
          Value v = eval_term(s, body, env);
          if (relativized && !eval_formula(s, rel, env)) v = d.zero();  // chi(rel) * body
          bool counted = !relativized || eval_formula(s, rel, env);
          sum = sum + v;
          if (counted) prod = prod * v;
          max = first || less(max, v) ? v : max;
          first = false;
        }
        auto r = relativized ? rel : nullptr;
        CHECK(eval_term(s, f::aggregate(AggKind::sum, vs, r, body)) == sum);
        CHECK(eval_term(s, f::aggregate(AggKind::prod, vs, r, body)) == prod);
        CHECK(eval_term(s, f::aggregate(AggKind::max, vs, r, body)) == max);
      }
    }
}

TEST_CASE("quantifier duality and chi soundness on random sentences") {
  Rng rng(8);
  FormulaShape shape;
  shape.depth = 3;
  for (int t = 0; t < 150; ++t) {
    auto phi = random_sentence(shape, rng);
    Structure s = with_random_inputs(2 + t % 3, rng);
    bool v = eval_formula(s, phi);
    CHECK(eval_term(s, f::chi(phi)) == (v ? s.domain().one() : s.domain().zero()));
    // wrap with a dummy variable so the quantifier has something to range over
    auto ex = f::exists({"q"}, f::conjunction({f::index_eq(f::var("q"), f::elem(0)), phi}));
    auto dual = f::negation(f::forall({"q"}, f::negation(f::conjunction({f::index_eq(f::var("q"), f::elem(0)), phi}))));
    CHECK(eval_formula(s, ex) == eval_formula(s, dual));
    CHECK(eval_formula(s, ex) == v);
  }
}

TEST_CASE("unknown symbols and unbound variables are errors") {
  Structure s(Domain::integers(), 2);
  CHECK(error_code([&] { eval_formula(s, f::relation("R", {f::elem(0)})); }) == "unknown_symbol");
  CHECK(error_code([&] { eval_formula(s, f::index_eq(f::var("x"), f::elem(0))); }) == "unbound_variable");
  s.add_relation("R", 1, {{1}});
  CHECK(error_code([&] { eval_formula(s, f::relation("R", {f::elem(0), f::elem(1)})); }) == "arity");
}

TEST_CASE("structure tables") {
  Structure s(Domain::integers(), 3);
  s.add_relation("R", 2, {{2, 1}, {0, 0}});
  CHECK(s.holds("R", {2, 1}));
  CHECK_FALSE(s.holds("R", {1, 2}));
  s.add_number_function("h", 1, Value::integer(7));
  s.set_number("h", {1}, Value::integer(-1));
  CHECK(s.number("h", {0}) == Value::integer(7));
  CHECK(s.number("h", {1}) == Value::integer(-1));
  s.add_skeleton_function("succ", 1);
  s.set_skeleton("succ", {0}, 1);
  CHECK(s.skeleton("succ", {0}) == 1);
  CHECK(s.key({2, 1}) == 7);
  CHECK(s.unkey(7, 2) == std::vector<std::size_t>{2, 1});
  CHECK_THROWS_AS(s.add_relation("R", 1, {}), Error);
  CHECK_THROWS_AS(s.set_skeleton("succ", {0}, 3), Error);
  CHECK_THROWS_AS(s.add_relation("Q", 1, {{3}}), Error);
}

TEST_CASE("skeleton functions in index terms") {
  Structure s(Domain::integers(), 3);
  s.add_skeleton_function("succ", 1, 2);
  s.set_skeleton("succ", {0}, 1);
  s.set_skeleton("succ", {1}, 2);
  auto phi = f::forall({"x"}, f::disjunction({f::index_less(f::var("x"), f::skel("succ", {f::var("x")})),
                                              f::index_eq(f::var("x"), f::elem(2))}));
  CHECK(eval_formula(s, phi));
}

// ---------------------------------------------------------------------------
// Recursion

namespace {

// f(y) = sum_{z : 2z <= y} f(z): z = 0 always qualifies, so f(0) depends on itself
FormulaPtr self_dependent() {
  auto def = std::make_shared<RecursionDef>();
  def->symbol = "f";
  def->y = {{"y"}};
  def->body = f::aggregate(AggKind::sum, {"z"}, f::halving_guard({{"z"}}, {{"y"}}), f::recvar("f", {f::var("z")}));
  return f::gfr(def, f::num_eq(f::recvar("f", {f::elem(1)}), f::constant(0)));
}

}  // namespace

TEST_CASE("self dependency at zero is reported as non-well-founded") {
  Structure s(Domain::integers(), 4);
  CHECK(check_gfr_syntax(self_dependent()).empty());
  try {
    eval_formula(s, self_dependent());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == "non_well_founded");
    CHECK(std::string(e.what()).find("(0)") != std::string::npos);
  }
}

TEST_CASE("circuit encoding: recursion value equals the circuit, memoized or not") {
  Rng rng(12);
  for (int t = 0; t < 25; ++t) {
    CircuitShape shape;
    shape.inputs = 4;
    shape.gates = 2 + t % 5;
    shape.constants = t % 2;
    Circuit c = balance(random_circuit(Domain::integers(), shape, rng));
    NormalFormParams p{minimal_cfac(c, 1) + 1, 1};
    Circuit nf = pad_and_number(c, p);
    auto enc = circuit_to_gfr(nf, p);
    CHECK(check_gfr_syntax(enc.sentence).empty());
    for (int s = 0; s < 5; ++s) {
      auto x = random_values(c.domain(), 4, rng, 2);
      Structure st = with_input(enc.description, x);
      bool expected = evaluate(c, x)[0] == Value::integer(1);
      std::vector<GfrStats> stats;
      CHECK(eval_formula(st, enc.sentence, {}, {}, &stats) == expected);
      CHECK(eval_formula(st, enc.sentence, {}, EvalOptions{false, true}) == expected);
      REQUIRE(stats.size() == 1);
      CHECK(stats[0].max_counted_depth <= stats[0].cap);
    }
  }
}

TEST_CASE("recursion depth on n = 8, i = 2 stays within 24") {
  Rng rng(99);
  for (int t = 0; t < 6; ++t) {
    CircuitShape shape;
    shape.inputs = 8;
    shape.gates = 6;
    shape.max_depth = 6;
    Circuit c = balance(random_circuit(Domain::integers(), shape, rng));
    NormalFormParams p{1, 2};
    Circuit nf = pad_and_number(c, p);
    auto enc = circuit_to_gfr(nf, p);
    auto x = random_values(c.domain(), 8, rng, 2);
    std::vector<GfrStats> stats;
    eval_formula(with_input(enc.description, x), enc.sentence, {}, {}, &stats);
    REQUIRE(stats.size() == 1);
    CHECK(stats[0].max_depth <= 24);
    CHECK(stats[0].max_counted_depth <= 24);
    CHECK(stats[0].cap <= 24);
  }
}

TEST_CASE("recursion syntax checks") {
  // the encoding of a small circuit is accepted
  CircuitBuilder b(Domain::integers());
  GateId x = b.input(), y = b.input(), z = b.input(), w = b.input();
  b.output(b.add({b.mul({x, y}), b.mul({z, w})}));
  Circuit c = b.build();
  NormalFormParams p{minimal_cfac(c, 1), 1};
  auto enc = circuit_to_gfr(pad_and_number(c, p), p);
  CHECK(check_gfr_syntax(enc.sentence).empty());

  // recursion call under an unguarded existential
  auto bad = parse_formula("(gfr f (() (y) ()) (chi (exists z (num= (f z) 0))) (num= (f 0) 0))");
  auto d1 = check_gfr_syntax(bad);
  REQUIRE_FALSE(d1.empty());
  CHECK(d1[0].loc.line == 1);
  CHECK(d1[0].loc.column > 1);

  // the guard's second disjunct lacks z1 <= y1
  auto missing = parse_formula(
      "(gfr f (() (y1) (y2) ()) (sum (z1 z2) (rel (or (half-leq (z1) (y1)) (half-leq (z2) (y2)))) (f z1 z2))"
      " (num= (f 0 0) 0))");
  CHECK_FALSE(check_gfr_syntax(missing).empty());
  auto complete = parse_formula(
      "(gfr f (() (y1) (y2) ()) (sum (z1 z2) (rel (or (half-leq (z1) (y1)) (and (leq (z1) (y1)) (half-leq (z2) (y2)))))"
      " (f z1 z2)) (num= (f 0 0) 0))");
  CHECK(check_gfr_syntax(complete).empty());

  // input symbols may not appear beside the guard
  auto leaky = parse_formula(
      "(gfr f (() (y) ()) (sum (z) (rel (and (half-leq (z) (y)) (num= (f_element z) 0))) (f z)) (num= (f 0) 0))");
  CHECK_FALSE(check_gfr_syntax(leaky).empty());
}

TEST_CASE("depth cap is enforced") {
  // f(y) = 1 + sum_{z < y, 2z <= y} f(z) reaches depth floor(log2(n-1)) + 1 from n-1
  auto def = std::make_shared<RecursionDef>();
  def->symbol = "f";
  def->y = {{"y"}};
  def->body = f::add({f::constant(1), f::aggregate(AggKind::sum, {"z"},
                                                   f::conjunction({f::halving_guard({{"z"}}, {{"y"}}),
                                                                   f::index_less(f::var("z"), f::var("y"))}),
                                                   f::recvar("f", {f::var("z")}))});
  auto phi = f::gfr(def, f::num_less(f::constant(0), f::recvar("f", {f::elem(15)})));
  Structure s(Domain::integers(), 16);
  std::vector<GfrStats> stats;
  CHECK(eval_formula(s, phi, {}, {}, &stats));
  REQUIRE(stats.size() == 1);
  CHECK(stats[0].max_counted_depth <= stats[0].cap);
  CHECK(stats[0].cap == gfr_depth_cap(16, 1, 1));
}

// ---------------------------------------------------------------------------
// max elimination

TEST_CASE("max rewriting preserves truth") {
  Rng rng(17);
  auto F = [](const char* v) { return f::add({f::apply("f_element", {f::var(v)}), f::apply("g", {f::var(v)})}); };
  auto mx = f::aggregate(AggKind::max, {"x"}, nullptr, F("x"));
  std::vector<FormulaPtr> cases = {
      f::num_eq(mx, f::constant(2)),
      f::num_less(f::constant(0), f::add({mx, f::constant(-1)})),
      // nested: max over y of (max over x of F(x)) * g(y)
      f::num_less(f::aggregate(AggKind::max, {"y"}, nullptr, f::mul({mx, f::apply("g", {f::var("y")})})),
                  f::constant(3)),
      f::num_eq(f::aggregate(AggKind::max, {"x"}, f::relation("E", {f::var("x"), f::elem(0)}), F("x")), f::constant(1)),
  };
  for (const auto& phi : cases) {
    auto r = rewrite_max(phi);
    CHECK(r.rewritten >= 1);
    for (int t = 0; t < 40; ++t) {
      Structure s = with_random_inputs(3, rng);
      CHECK(eval_formula(s, r.formula) == eval_formula(s, phi));
    }
  }
  auto plain = f::num_eq(f::constant(1), f::constant(1));
  auto r = rewrite_max(plain);
  CHECK(r.rewritten == 0);
  CHECK(to_sexpr(r.formula) == to_sexpr(plain));
}

TEST_CASE("free variables and symbols") {
  auto phi = parse_formula("(and (E x y) (exists z (num= (g z) (f_element x))))");
  auto fv = free_variables(phi);
  std::sort(fv.begin(), fv.end());
  CHECK(fv == Vars{"x", "y"});
  auto syms = used_symbols(phi);
  std::sort(syms.begin(), syms.end());
  CHECK(syms == std::vector<std::string>{"E", "f_element", "g"});
}
