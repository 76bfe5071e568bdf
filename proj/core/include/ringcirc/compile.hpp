#pragma once

// Formula -> circuit compilation and circuit -> recursion-formula encoding.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ringcirc/circuit.hpp"
#include "ringcirc/logic.hpp"
#include "ringcirc/random.hpp"

namespace ringcirc {

struct CompileOptions {
  FanIn fanin = FanIn::unbounded;
  /// Number function read from the circuit inputs: input(h) is input gate h.
  std::string input_symbol = "f_element";
  /// Test hook: the negation gadget returns its operand unchanged.
  bool fault_negation = false;
};

/// Gate computing a subformula or subterm under one variable assignment.
struct GateBinding {
  FormulaPtr formula;  // exactly one of formula / term is set
  NumberTermPtr term;
  Env env;
  GateId gate = 0;
};

struct CompiledFormula {
  Circuit circuit;
  /// Post-order; bindings inside recursion bodies are not recorded.
  std::vector<GateBinding> bindings;
};

/// Circuit with `arb.universe()` inputs whose single output is 1 iff the
/// structure `arb` extended by input(j) = x_j satisfies `f`. Symbols other
/// than the input symbol are read from `arb` at compile time.
CompiledFormula compile_formula(const FormulaPtr& f, const Structure& arb, CompileOptions options = {});

/// `arb` plus the input number function holding `inputs`.
Structure with_input(const Structure& arb, const std::vector<Value>& inputs, const std::string& symbol = "f_element");

struct GfrEncoding {
  /// Gate relations over labels; f_element is added per input by with_input.
  Structure description;
  FormulaPtr sentence;
  NormalFormParams params;
  std::size_t label_length = 0;
};

/// Relations G_add, G_mul, G_lt, G_input, G_output, G_const (arity L),
/// G_E(g, p) for every predecessor p of g (arity 2L), f_const_val (arity L),
/// and the sentence [f(y) = t(y, f)] exists a (G_output(a) and f(a) = 1).
/// `c` must be the output of pad_and_number with the same parameters.
GfrEncoding circuit_to_gfr(const Circuit& c, NormalFormParams params, bool bounded = false);

/// Throws Error("normal_form") naming the first offending gate.
void check_normal_form(const Circuit& c, NormalFormParams params);

struct RoundtripCase {
  std::size_t size = 0;
  std::vector<Value> inputs;
  bool formula = false;
  Value circuit_output;
  bool agree = false;
  /// First binding (post-order) whose gate value differs from the evaluator.
  std::string localized;
};

struct RoundtripReport {
  struct Row {
    std::size_t size = 0;
    std::size_t samples = 0;
    std::size_t agreements = 0;
    std::size_t depth = 0;
    std::size_t gates = 0;
  };
  std::vector<Row> rows;
  std::vector<RoundtripCase> disagreements;
  bool all_agree() const;
};

using StructureFactory = std::function<Structure(std::size_t n)>;

/// For each size, compiles `f` against `make(n)` and compares the circuit
/// output with eval_formula on `samples` random inputs.
RoundtripReport roundtrip_check(const FormulaPtr& f, const std::vector<std::size_t>& sizes, std::size_t samples,
                                const StructureFactory& make, Rng& rng, CompileOptions options = {}, long range = 3);

}  // namespace ringcirc
