#include "generators.hpp"
#include "ringcirc/compile.hpp"
#include "ringcirc/simulate.hpp"

#include <benchmark/benchmark.h>

using namespace ringcirc;
using namespace ringcirc::testing;

namespace {

Circuit random_over(const Domain& d, std::size_t inputs, std::size_t gates, std::uint64_t seed) {
  Rng rng(seed);
  CircuitShape shape;
  shape.inputs = inputs;
  shape.gates = gates;
  return random_circuit(d, shape, rng);
}

void BM_Evaluate(benchmark::State& state) {
  Circuit c = random_over(Domain::integers(), 8, static_cast<std::size_t>(state.range(0)), 1);
  Rng rng(2);
  auto x = random_values(c.domain(), 8, rng);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(c, x));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(size(c)));
}
BENCHMARK(BM_Evaluate)->Arg(16)->Arg(64)->Arg(256);

void BM_Compile(benchmark::State& state) {
  Rng rng(3);
  FormulaShape shape;
  shape.depth = 4;
  auto f = random_sentence(shape, rng);
  const auto n = static_cast<std::size_t>(state.range(0));
  Structure s = random_signature_structure(Domain::integers(), n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(compile_formula(f, s));
}
BENCHMARK(BM_Compile)->Arg(2)->Arg(4)->Arg(8);

void BM_LowerAdjoined(benchmark::State& state) {
  Circuit c = random_over(Domain::parse("Z[j2]"), 4, static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(lower_adjoined(c));
}
BENCHMARK(BM_LowerAdjoined)->Arg(16)->Arg(64);

void BM_LowerFinite(benchmark::State& state) {
  Circuit c = random_over(Domain::finite_field(5), 4, static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(lower_finite(c, 2));
}
BENCHMARK(BM_LowerFinite)->Arg(16)->Arg(64);

void BM_GfrEvaluate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(6);
  CircuitShape shape;
  shape.inputs = n;
  shape.gates = 6;
  shape.max_depth = 2;
  Circuit c = balance(random_circuit(Domain::integers(), shape, rng));
  NormalFormParams p{minimal_cfac(c, 1) + 1, 1};
  auto enc = circuit_to_gfr(pad_and_number(c, p), p);
  Structure s = with_input(enc.description, random_values(c.domain(), n, rng, 2));
  for (auto _ : state) benchmark::DoNotOptimize(eval_formula(s, enc.sentence));
}
BENCHMARK(BM_GfrEvaluate)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
