#pragma once

// Seeded generators shared by the unit tests, the acceptance binary and the
// benchmarks.

#include <functional>
#include <optional>

#include "ringcirc/circuit.hpp"
#include "ringcirc/logic.hpp"
#include "ringcirc/random.hpp"

namespace ringcirc::testing {

struct CircuitShape {
  std::size_t inputs = 3;
  std::size_t gates = 8;  // add / mul / less gates
  std::size_t constants = 1;
  std::size_t outputs = 1;
  std::size_t max_arity = 3;
  FanIn fanin = FanIn::unbounded;
  bool allow_less = true;
  long constant_range = 3;
  /// Longest source-to-gate path among the internal gates.
  std::optional<std::size_t> max_depth;
};

/// Random circuit; the last internal gate always feeds the first output.
Circuit random_circuit(const Domain& d, const CircuitShape& shape, Rng& rng);

/// Every circuit with two inputs, up to `constants` constant gates holding
/// `constant`, and binary add / mul / less gates, whose total gate count
/// (output included) is at most `max_gates`. Gates not reaching the output
/// are kept.
void for_each_small_circuit(std::size_t max_gates, const Value& constant, std::size_t constants,
                            const std::function<void(const Circuit&)>& visit);

struct FormulaShape {
  std::size_t depth = 4;  // connective nesting
  bool aggregators = true;
  bool bounded = true;    // bsum / bprod / bmax
  bool maximum = true;    // max aggregators
};

/// Random closed GFR-free sentence over f_element (unary, the input), E
/// (binary relation), g (unary number function) and the built-in order,
/// BIT and tuple comparisons.
FormulaPtr random_sentence(const FormulaShape& shape, Rng& rng);

/// Random interpretation of E and g (values in [-2, 2]) of the given size.
Structure random_signature_structure(const Domain& d, std::size_t n, Rng& rng);

}  // namespace ringcirc::testing
