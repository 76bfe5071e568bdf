#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"
#include "ringcirc/simulate.hpp"

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

Circuit binary(const Domain& d, GateKind kind) {
  CircuitBuilder b(d);
  GateId x = b.input(), y = b.input();
  GateId g = kind == GateKind::add ? b.add({x, y}) : kind == GateKind::mul ? b.mul({x, y}) : b.less(x, y);
  b.output(g);
  return b.build();
}

std::vector<long> coefficients_of(const std::vector<Value>& code) {
  std::vector<long> out;
  for (const auto& v : code) out.push_back(std::stol(to_string(v)));
  return out;
}

Value adjoined_value(const Domain& d, const std::vector<long>& cs) {
  Value::Coefficients coeffs;
  for (long c : cs) coeffs.push_back(Value::integer(c));
  return Value::tuple(d, coeffs);
}

}  // namespace

TEST_CASE("maps parse, print and encode") {
  auto m = SimulationMap::parse("Z[j2]->Z");
  CHECK(m.kind() == MapKind::adjoined);
  CHECK(m.width() == 2);
  CHECK(m.name() == "Z[j2]->Z");
  Domain d = Domain::parse("Z[j2]");
  CHECK(coefficients_of(m.apply(adjoined_value(d, {3, -1}))) == std::vector<long>{3, -1});

  auto f = SimulationMap::parse("F5->F2");
  CHECK(f.width() == 3);  // 5 <= 2^3
  CHECK(f.apply(Value::residue(Domain::finite_field(5), 6 % 5)).size() == 3);

  auto q = SimulationMap::parse("Q->Z");
  CHECK(q.width() == 2);
  Value half = parse_value(Domain::rationals(), "-2/4");
  CHECK(coefficients_of(q.apply(half)) == std::vector<long>{-1, 2});
  CHECK(q.represents({Value::integer(-3), Value::integer(6)}, half));
  CHECK_FALSE(q.represents({Value::integer(1), Value::integer(2)}, half));
  CHECK_FALSE(q.represents({Value::integer(1), Value::integer(0)}, half));

  CHECK(SimulationMap::parse("Z->Z").kind() == MapKind::identity);
  CHECK(error_code([] { SimulationMap::parse("Z->Q"); }) != "none");
  CHECK(error_code([] { SimulationMap::parse("nonsense"); }) != "none");
}

TEST_CASE("adjoined maps are injective on samples") {
  Rng rng(3);
  for (const char* name : {"Z[j2]", "Z[j3]", "Q[j2]"}) {
    Domain d = Domain::parse(name);
    auto m = SimulationMap::adjoined(d);
    for (int s = 0; s < 200; ++s) {
      Value a = random_value(d, rng), b = random_value(d, rng);
      CHECK((m.apply(a) == m.apply(b)) == (a == b));
    }
  }
}

TEST_CASE("binary product gadget matches the negacyclic convolution") {
  for (unsigned k : {2u, 3u}) {
    Domain d = Domain::adjoined(DomainKind::integer, k);
    Circuit c = binary(d, GateKind::mul);
    Lowering low = lower_adjoined(c);
    CHECK(low.circuit.domain() == Domain::integers());
    Rng rng(k);
    for (int s = 0; s < 300; ++s) {
      std::vector<long> a, b;
      for (unsigned j = 0; j < k; ++j) {
        a.push_back(static_cast<long>(rng() % 7) - 3);
        b.push_back(static_cast<long>(rng() % 7) - 3);
      }
      std::vector<Value> in;
      for (long v : a) in.push_back(Value::integer(v));
      for (long v : b) in.push_back(Value::integer(v));
      CHECK(coefficients_of(evaluate(low.circuit, in)) == negacyclic_product(a, b));
    }
  }
}

TEST_CASE("lowered adjoined circuits commute with the map") {
  Rng rng(5);
  for (const char* name : {"Z[j2]", "Z[j3]", "Q[j2]"}) {
    Domain d = Domain::parse(name);
    for (int t = 0; t < 25; ++t) {
      CircuitShape shape;
      shape.inputs = 2 + t % 3;
      shape.gates = 3 + t % 8;
      shape.max_arity = 2 + t % 5;
      shape.fanin = t % 3 ? FanIn::unbounded : FanIn::bounded;
      Circuit c = random_circuit(d, shape, rng);
      Lowering low = lower_adjoined(c);
      auto report = check_simulation(low, c, 20, rng);
      CHECK(report.passed());
      CHECK(report.target_size >= report.source_size);
    }
  }
}

TEST_CASE("finite field tables of F3 over F2") {
  Domain f3 = Domain::finite_field(3);
  auto m = SimulationMap::finite(3, 2);
  for (GateKind kind : {GateKind::add, GateKind::mul, GateKind::less}) {
    Circuit c = binary(f3, kind);
    Lowering low = lower_finite(c, 2);
    CHECK(low.circuit.domain() == Domain::finite_field(2));
    for (std::uint64_t a = 0; a < 3; ++a)
      for (std::uint64_t b = 0; b < 3; ++b) {
        Value x = Value::residue(f3, a), y = Value::residue(f3, b);
        auto in = m.apply_all({x, y});
        CHECK(m.represents(evaluate(low.circuit, in), evaluate(c, {x, y})[0]));
      }
  }
}

TEST_CASE("lowered finite field circuits commute with the map") {
  Rng rng(7);
  for (auto [p, q] : {std::pair<std::uint64_t, std::uint64_t>{3, 2}, {5, 2}, {7, 3}, {5, 5}}) {
    Domain d = Domain::finite_field(p);
    for (int t = 0; t < 15; ++t) {
      CircuitShape shape;
      shape.inputs = 2;
      shape.gates = 2 + t % 5;
      shape.max_arity = 3;
      Circuit c = random_circuit(d, shape, rng);
      auto report = check_simulation(lower_finite(c, q), c, 15, rng);
      CHECK(report.passed());
    }
  }
}

TEST_CASE("rational circuits lowered to integer pairs") {
  Rng rng(9);
  Domain q = Domain::rationals();
  for (GateKind kind : {GateKind::add, GateKind::mul, GateKind::less}) {
    Circuit c = binary(q, kind);
    auto report = check_simulation(lower_rationals(c), c, 200, rng);
    CHECK(report.passed());
  }
  for (int t = 0; t < 30; ++t) {
    CircuitShape shape;
    shape.inputs = 3;
    shape.gates = 3 + t % 7;
    Circuit c = random_circuit(q, shape, rng);
    CHECK(check_simulation(lower_rationals(c), c, 20, rng).passed());
  }
}

TEST_CASE("faulty gadgets are detected and localized") {
  Rng rng(13);
  LoweringOptions bad{true};
  {
    Circuit c = binary(Domain::parse("Z[j2]"), GateKind::mul);
    auto report = check_simulation(lower_adjoined(c, bad), c, 50, rng);
    CHECK_FALSE(report.passed());
    REQUIRE(report.first_failure);
    CHECK(report.first_failure->find("mul") != std::string::npos);
  }
  {
    Circuit c = binary(Domain::finite_field(3), GateKind::mul);
    auto report = check_simulation(lower_finite(c, 2, bad), c, 100, rng);
    CHECK_FALSE(report.passed());
    CHECK(report.first_failure.has_value());
  }
  {
    Circuit c = binary(Domain::rationals(), GateKind::less);
    auto report = check_simulation(lower_rationals(c, bad), c, 50, rng);
    CHECK_FALSE(report.passed());
    CHECK(report.first_failure.has_value());
  }
}

TEST_CASE("dispatch and identity") {
  Circuit c = binary(Domain::integers(), GateKind::less);
  Rng rng(1);
  Lowering same = lower(c, Domain::integers());
  CHECK(same.map.kind() == MapKind::identity);
  CHECK(check_simulation(same, c, 20, rng).passed());
  CHECK(lower(binary(Domain::finite_field(5), GateKind::add), Domain::finite_field(2)).map.kind() == MapKind::finite);
  CHECK(error_code([&] { lower(c, Domain::finite_field(2)); }) != "none");
}

TEST_CASE("wide unbounded products go through a tree") {
  CircuitBuilder b(Domain::parse("Z[j2]"));
  std::vector<GateId> xs;
  for (int k = 0; k < 6; ++k) xs.push_back(b.input());
  b.output(b.mul(xs));
  Circuit c = b.build();
  Lowering low = lower_adjoined(c);
  CHECK(low.tree_products == 1);
  Rng rng(21);
  CHECK(check_simulation(low, c, 30, rng).passed());
}
