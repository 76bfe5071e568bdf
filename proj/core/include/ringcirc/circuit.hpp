#pragma once

// R-circuits: DAGs of input / constant / + / x / < / output gates over a Domain.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ringcirc/algebra.hpp"

namespace ringcirc {

enum class GateKind { input, constant, add, mul, less, output };

std::string to_string(GateKind kind);
GateKind parse_gate_kind(std::string_view text);

using GateId = std::size_t;
/// Gate number as a digit tuple (base = Circuit::label_base()).
using Label = std::vector<std::size_t>;

enum class FanIn { unbounded, bounded };

struct Gate {
  GateId id = 0;
  Label label;
  GateKind kind = GateKind::add;
  /// Index into Circuit::inputs() for input gates.
  std::size_t position = 0;
  /// Set for constant gates only.
  std::optional<Value> value;
  /// Ordered; the first predecessor of a less gate is its left operand.
  std::vector<GateId> preds;
};

/// A validated circuit. Gate ids are dense (gate i has id i); construction
/// checks arity, duplicate predecessors, fan-in discipline and acyclicity.
class Circuit {
 public:
  Circuit(Domain domain, FanIn fanin, std::vector<Gate> gates, std::size_t label_base = 0);

  const Domain& domain() const noexcept { return domain_; }
  FanIn fanin() const noexcept { return fanin_; }
  const std::vector<Gate>& gates() const noexcept { return gates_; }
  const Gate& gate(GateId id) const { return gates_.at(id); }
  const std::vector<GateId>& inputs() const noexcept { return inputs_; }
  const std::vector<GateId>& outputs() const noexcept { return outputs_; }
  /// Gates ordered so that predecessors come first.
  const std::vector<GateId>& topological_order() const noexcept { return topo_; }
  /// Base of the digits in gate labels, 0 when gates carry no labels.
  std::size_t label_base() const noexcept { return label_base_; }

  /// Copy with a different fan-in discipline (validated again).
  Circuit with_fanin(FanIn fanin) const;
  /// Copy with labels stripped.
  Circuit unlabeled() const;

 private:
  void validate();

  Domain domain_;
  FanIn fanin_;
  std::vector<Gate> gates_;
  std::vector<GateId> inputs_;
  std::vector<GateId> outputs_;
  std::vector<GateId> topo_;
  std::size_t label_base_;
};

/// Incremental construction. `add`/`mul` wrap a repeated predecessor in a unary
/// add gate so the no-repeated-predecessor rule holds.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(Domain domain, FanIn fanin = FanIn::unbounded);

  const Domain& domain() const noexcept { return domain_; }
  FanIn fanin() const noexcept { return fanin_; }

  GateId input();
  /// Cached per value; repeated requests return the same gate.
  GateId constant(const Value& v);
  GateId constant(long v) { return constant(domain_.from_int(v)); }
  /// Fresh constant gate even if one with the same value exists.
  GateId fresh_constant(const Value& v);
  GateId gate(GateKind kind, std::vector<GateId> preds);
  GateId add(std::vector<GateId> preds);
  GateId mul(std::vector<GateId> preds);
  GateId less(GateId left, GateId right);
  GateId output(GateId pred);
  /// Unary add (an identity wire).
  GateId identity(GateId pred);

  /// Sum/product honouring the fan-in discipline: unbounded emits a single
  /// gate, bounded emits a balanced binary tree. A single operand is
  /// returned unchanged.
  GateId sum(std::vector<GateId> preds);
  GateId product(std::vector<GateId> preds);
  /// 1 - x
  GateId negate(GateId x);
  /// mul(1 - less(a, b), 1 - less(b, a))
  GateId equals(GateId a, GateId b);

  std::size_t size() const noexcept { return gates_.size(); }
  Circuit build() const;

 private:
  std::vector<GateId> distinct(std::vector<GateId> preds);
  GateId tree(GateKind kind, std::vector<GateId> preds);

  Domain domain_;
  FanIn fanin_;
  std::vector<Gate> gates_;
  std::size_t inputs_ = 0;
  std::vector<std::pair<Value, GateId>> constants_;
};

/// Values of every gate (indexed by gate id).
std::vector<Value> evaluate_all(const Circuit& c, const std::vector<Value>& inputs);
/// Values of the output gates in order.
std::vector<Value> evaluate(const Circuit& c, const std::vector<Value>& inputs);

std::size_t size(const Circuit& c);
/// Longest path, counted in edges, from a source gate (input or constant) to
/// each gate.
std::vector<std::size_t> gate_levels(const Circuit& c);
/// Longest source-to-output path in edges; a bare input->output wire has depth 1.
std::size_t depth(const Circuit& c);
std::size_t max_fanin(const Circuit& c);
std::size_t wire_count(const Circuit& c);

/// True when, for every gate, all source-to-gate paths have the same length.
bool is_balanced(const Circuit& c);

/// Replaces every edge that skips levels with a chain of unary add gates so
/// all source-to-gate paths to a gate have equal length.
Circuit balance(const Circuit& c);

struct NormalFormParams {
  std::size_t cfac = 1;
  std::size_t exponent = 1;
};

/// Depth-encoding normal form.
///
/// The result has depth exactly cfac^i * floor(log2 n)^i (n = number of input
/// gates), all outputs at that depth, and gate labels of the form
///
///   [prefix: cfac*i digits][rank: w digits][last digit]
///
/// The prefix of a gate at level l >= 1 encodes element D+1-l of d(n,cfac,i)
/// (D the depth), each unary block written as its binary valuation 2^m - 1
/// in cfac base-n digits; sources share the all-zero prefix. Reading a path
/// from the output back to an input therefore lists d(n,cfac,i) in sequence
/// order, which is what the halving guard of the recursion formula needs.
/// The last digit of the j-th input gate is j, and the left operand of every
/// less gate carries a smaller label than its right operand.
Circuit pad_and_number(const Circuit& c, NormalFormParams params);

/// Smallest cfac making cfac^i * floor(log2 n)^i >= depth(c) and
/// cfac * floor(log2 n) >= 2.
std::size_t minimal_cfac(const Circuit& c, std::size_t exponent);

/// Target depth cfac^i * floor(log2 n)^i.
std::size_t normal_form_depth(std::size_t n, NormalFormParams params);

/// Prefix digits of the seq_d element with 1-based index `position`.
Label seq_d_prefix(std::size_t n, NormalFormParams params, std::size_t position);

struct ClassConstants {
  double c1 = 1;  // depth factor
  double c2 = 1;  // size factor
  double c3 = 1;  // size exponent
};

enum class CircuitClass { AC, NC };

struct ClassReport {
  bool size_ok = false;
  bool depth_ok = false;
  bool fanin_ok = true;
  std::size_t n = 0;
  std::size_t size = 0;
  std::size_t depth = 0;
  std::size_t max_fanin = 0;
  std::size_t wires = 0;
  double size_bound = 0;
  double depth_bound = 0;
  bool passed() const noexcept { return size_ok && depth_ok && fanin_ok; }
};

/// size <= c2 * n^c3, depth <= c1 * (log2 n)^i and, for NC, fan-in <= 2.
ClassReport check_class(const Circuit& c, CircuitClass kind, std::size_t exponent, ClassConstants consts);

}  // namespace ringcirc
