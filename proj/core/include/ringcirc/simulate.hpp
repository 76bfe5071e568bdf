#pragma once

// Lowering circuits to a smaller domain through injective element encodings.

#include <optional>
#include <string>
#include <vector>

#include "ringcirc/circuit.hpp"
#include "ringcirc/random.hpp"

namespace ringcirc {

enum class MapKind { identity, adjoined, finite, rational };

/// Injective element map f: source -> target^width.
class SimulationMap {
 public:
  static SimulationMap identity(const Domain& d);
  /// Coefficient tuple of R[j_k] over R.
  static SimulationMap adjoined(const Domain& source);
  /// F_p to base-q digit tuples of the smallest length k with p <= q^k.
  static SimulationMap finite(std::uint64_t p, std::uint64_t q);
  /// a/b to the reduced pair (a, b), b > 0.
  static SimulationMap rational();
  /// The map from `source` to `target`, if one is supported.
  static SimulationMap between(const Domain& source, const Domain& target);
  /// "Z[j2]->Z", "F3->F2", "Q->Z", "Z->Z".
  static SimulationMap parse(std::string_view text);

  MapKind kind() const noexcept { return kind_; }
  const Domain& source() const noexcept { return source_; }
  const Domain& target() const noexcept { return target_; }
  std::size_t width() const noexcept { return width_; }
  std::string name() const;

  std::vector<Value> apply(const Value& v) const;
  /// Concatenation of apply over the vector.
  std::vector<Value> apply_all(const std::vector<Value>& vs) const;
  /// Whether `encoded` represents `v`: equality of codes, or for the
  /// rational map equality of the fractions.
  bool represents(const std::vector<Value>& encoded, const Value& v) const;

 private:
  SimulationMap(MapKind kind, Domain source, Domain target, std::size_t width)
      : kind_(kind), source_(source), target_(target), width_(width) {}

  MapKind kind_;
  Domain source_;
  Domain target_;
  std::size_t width_;
};

struct LoweringOptions {
  /// Test hook: one gadget is built wrong (adjoined: the wrap-around sign
  /// of binary products; finite: one multiplication table entry; rational:
  /// the operands of comparisons).
  bool fault = false;
};

struct Lowering {
  Circuit circuit;
  SimulationMap map;
  /// For every source gate, the target gates holding its code.
  std::vector<std::vector<GateId>> gate_map;
  /// Unbounded products of fan-in above four, lowered through a tree of
  /// binary gadgets (depth grows with the fan-in).
  std::size_t tree_products = 0;
};

Lowering lower_adjoined(const Circuit& c, LoweringOptions options = {});
Lowering lower_finite(const Circuit& c, std::uint64_t q, LoweringOptions options = {});
Lowering lower_rationals(const Circuit& c, LoweringOptions options = {});
Lowering lower_identity(const Circuit& c);
/// Dispatches on the source domain and `target`.
Lowering lower(const Circuit& c, const Domain& target, LoweringOptions options = {});

struct SimulationReport {
  std::string map;
  std::size_t samples = 0;
  /// Every output satisfies represents(lowered, source).
  std::size_t commuting = 0;
  /// Source output is one iff the lowered output encodes one.
  std::size_t decisions_agree = 0;
  bool injective = true;
  std::size_t source_size = 0, target_size = 0, source_depth = 0, target_depth = 0;
  double size_factor = 0, depth_factor = 0;
  std::size_t tree_products = 0;
  /// First failure: the inputs and, when a gate map is known, the first
  /// source gate whose code is wrong.
  std::optional<std::string> first_failure;
  bool passed() const noexcept { return injective && commuting == samples && decisions_agree == samples; }
};

SimulationReport check_simulation(const SimulationMap& map, const Circuit& source, const Circuit& target,
                                  std::size_t samples, Rng& rng,
                                  const std::vector<std::vector<GateId>>* gate_map = nullptr, long range = 3);
SimulationReport check_simulation(const Lowering& lowering, const Circuit& source, std::size_t samples, Rng& rng,
                                  long range = 3);

}  // namespace ringcirc
