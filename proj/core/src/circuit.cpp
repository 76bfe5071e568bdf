#include "ringcirc/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <set>

#include "ringcirc/numeric.hpp"

namespace ringcirc {

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::input: return "input";
    case GateKind::constant: return "constant";
    case GateKind::add: return "add";
    case GateKind::mul: return "mul";
    case GateKind::less: return "less";
    case GateKind::output: return "output";
  }
  return "?";
}

GateKind parse_gate_kind(std::string_view text) {
  if (text == "input") return GateKind::input;
  if (text == "constant" || text == "const") return GateKind::constant;
  if (text == "add") return GateKind::add;
  if (text == "mul") return GateKind::mul;
  if (text == "less") return GateKind::less;
  if (text == "output") return GateKind::output;
  throw Error("invalid_circuit", "unknown gate kind '" + std::string(text) + "'");
}

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error("invalid_circuit", msg); }

std::string gate_name(GateId id) { return "gate " + std::to_string(id); }

}  // namespace

// ---------------------------------------------------------------------------
// Circuit

Circuit::Circuit(Domain domain, FanIn fanin, std::vector<Gate> gates, std::size_t label_base)
    : domain_(domain), fanin_(fanin), gates_(std::move(gates)), label_base_(label_base) {
  validate();
}

void Circuit::validate() {
  const std::size_t n = gates_.size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<GateId>> succs(n);
  std::vector<std::pair<std::size_t, GateId>> positions;
  for (std::size_t i = 0; i < n; ++i) {
    const Gate& g = gates_[i];
    if (g.id != i) invalid("gate ids must be dense: position " + std::to_string(i) + " holds id " + std::to_string(g.id));
    const std::size_t k = g.preds.size();
    switch (g.kind) {
      case GateKind::input:
      case GateKind::constant:
        if (k != 0) invalid(gate_name(i) + ": " + to_string(g.kind) + " gates take no predecessors");
        break;
      case GateKind::less:
        if (k != 2) invalid(gate_name(i) + ": less gates take exactly 2 predecessors");
        break;
      case GateKind::output:
        if (k != 1) invalid(gate_name(i) + ": output gates take exactly 1 predecessor");
        break;
      case GateKind::add:
      case GateKind::mul:
        if (k < 1) invalid(gate_name(i) + ": arithmetic gates need at least 1 predecessor");
        if (fanin_ == FanIn::bounded && k > 2)
          invalid(gate_name(i) + ": fan-in " + std::to_string(k) + " exceeds the bounded discipline");
        break;
    }
    if (g.kind == GateKind::constant) {
      if (!g.value) invalid(gate_name(i) + ": constant gate without value");
      if (!(g.value->domain() == domain_))
        invalid(gate_name(i) + ": constant in " + g.value->domain().name() + " but circuit is over " + domain_.name());
    } else if (g.value) {
      invalid(gate_name(i) + ": only constant gates carry a value");
    }
    std::set<GateId> seen;
    for (GateId p : g.preds) {
      if (p >= n) invalid(gate_name(i) + ": unknown predecessor " + std::to_string(p));
      if (!seen.insert(p).second) invalid(gate_name(i) + ": repeated predecessor " + std::to_string(p));
      if (gates_[p].kind == GateKind::output) invalid(gate_name(i) + ": output gate " + std::to_string(p) + " used as predecessor");
      succs[p].push_back(i);
      ++indegree[i];
    }
    if (g.kind == GateKind::input) positions.emplace_back(g.position, i);
    if (g.kind == GateKind::output) outputs_.push_back(i);
    if (label_base_ == 0) {
      if (!g.label.empty()) invalid(gate_name(i) + ": label present but circuit has no label base");
    } else {
      for (auto d : g.label)
        if (d >= label_base_) invalid(gate_name(i) + ": label digit out of range");
    }
  }
  std::sort(positions.begin(), positions.end());
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (positions[k].first != k) invalid("input positions must be 0..m-1 without gaps or repeats");
    inputs_.push_back(positions[k].second);
  }
  if (label_base_ != 0) {
    std::set<Label> labels;
    for (const auto& g : gates_)
      if (!labels.insert(g.label).second) invalid(gate_name(g.id) + ": duplicate label");
  }
  // Kahn; a leftover gate means a cycle
  std::queue<GateId> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  while (!ready.empty()) {
    GateId g = ready.front();
    ready.pop();
    topo_.push_back(g);
    for (GateId s : succs[g])
      if (--indegree[s] == 0) ready.push(s);
  }
  if (topo_.size() != n) invalid("gate graph contains a cycle");
}

Circuit Circuit::with_fanin(FanIn fanin) const { return Circuit(domain_, fanin, gates_, label_base_); }

Circuit Circuit::unlabeled() const {
  auto gates = gates_;
  for (auto& g : gates) g.label.clear();
  return Circuit(domain_, fanin_, std::move(gates), 0);
}

// ---------------------------------------------------------------------------
// Builder

CircuitBuilder::CircuitBuilder(Domain domain, FanIn fanin) : domain_(domain), fanin_(fanin) {}

GateId CircuitBuilder::input() {
  Gate g;
  g.id = gates_.size();
  g.kind = GateKind::input;
  g.position = inputs_++;
  gates_.push_back(std::move(g));
  return gates_.back().id;
}

GateId CircuitBuilder::constant(const Value& v) {
  for (const auto& [value, id] : constants_)
    if (value == v) return id;
  GateId id = fresh_constant(v);
  constants_.emplace_back(v, id);
  return id;
}

GateId CircuitBuilder::fresh_constant(const Value& v) {
  if (!(v.domain() == domain_)) throw Error("domain_mismatch", "constant in " + v.domain().name() + " for circuit over " + domain_.name());
  Gate g;
  g.id = gates_.size();
  g.kind = GateKind::constant;
  g.value = v;
  gates_.push_back(std::move(g));
  return gates_.back().id;
}

GateId CircuitBuilder::gate(GateKind kind, std::vector<GateId> preds) {
  for (GateId p : preds)
    if (p >= gates_.size()) throw Error("invalid_circuit", "unknown predecessor " + std::to_string(p));
  Gate g;
  g.id = gates_.size();
  g.kind = kind;
  g.preds = std::move(preds);
  gates_.push_back(std::move(g));
  return gates_.back().id;
}

std::vector<GateId> CircuitBuilder::distinct(std::vector<GateId> preds) {
  std::set<GateId> seen;
  for (auto& p : preds)
    if (!seen.insert(p).second) p = identity(p);
  return preds;
}

GateId CircuitBuilder::add(std::vector<GateId> preds) { return gate(GateKind::add, distinct(std::move(preds))); }
GateId CircuitBuilder::mul(std::vector<GateId> preds) { return gate(GateKind::mul, distinct(std::move(preds))); }

GateId CircuitBuilder::less(GateId left, GateId right) {
  if (left == right) right = identity(right);
  return gate(GateKind::less, {left, right});
}

GateId CircuitBuilder::output(GateId pred) { return gate(GateKind::output, {pred}); }
GateId CircuitBuilder::identity(GateId pred) { return gate(GateKind::add, {pred}); }

GateId CircuitBuilder::tree(GateKind kind, std::vector<GateId> preds) {
  if (preds.empty()) throw Error("invalid_circuit", "empty " + to_string(kind));
  if (preds.size() == 1) return preds.front();
  if (fanin_ == FanIn::unbounded) return gate(kind, distinct(std::move(preds)));
  while (preds.size() > 1) {
    std::vector<GateId> next;
    for (std::size_t k = 0; k + 1 < preds.size(); k += 2) next.push_back(gate(kind, distinct({preds[k], preds[k + 1]})));
    if (preds.size() % 2 == 1) next.push_back(preds.back());
    preds = std::move(next);
  }
  return preds.front();
}

GateId CircuitBuilder::sum(std::vector<GateId> preds) { return tree(GateKind::add, std::move(preds)); }
GateId CircuitBuilder::product(std::vector<GateId> preds) { return tree(GateKind::mul, std::move(preds)); }

GateId CircuitBuilder::negate(GateId x) { return add({constant(1), mul({constant(-1), x})}); }

GateId CircuitBuilder::equals(GateId a, GateId b) {
  GateId lt = less(a, b);
  GateId gt = less(b, a);
  return mul({negate(lt), negate(gt)});
}

Circuit CircuitBuilder::build() const { return Circuit(domain_, fanin_, gates_); }

// ---------------------------------------------------------------------------
// Evaluation and metrics

std::vector<Value> evaluate_all(const Circuit& c, const std::vector<Value>& inputs) {
  if (inputs.size() != c.inputs().size())
    throw Error("arity", "circuit has " + std::to_string(c.inputs().size()) + " inputs, got " + std::to_string(inputs.size()));
  for (const auto& v : inputs)
    if (!(v.domain() == c.domain()))
      throw Error("domain_mismatch", "input in " + v.domain().name() + " for circuit over " + c.domain().name());
  std::vector<Value> values(c.gates().size());
  for (GateId id : c.topological_order()) {
    const Gate& g = c.gate(id);
    switch (g.kind) {
      case GateKind::input: values[id] = inputs[g.position]; break;
      case GateKind::constant: values[id] = *g.value; break;
      case GateKind::add: {
        Value acc = values[g.preds[0]];
        for (std::size_t k = 1; k < g.preds.size(); ++k) acc = add(acc, values[g.preds[k]]);
        values[id] = std::move(acc);
        break;
      }
      case GateKind::mul: {
        Value acc = values[g.preds[0]];
        for (std::size_t k = 1; k < g.preds.size(); ++k) acc = mul(acc, values[g.preds[k]]);
        values[id] = std::move(acc);
        break;
      }
      case GateKind::less:
        values[id] = less(values[g.preds[0]], values[g.preds[1]]) ? c.domain().one() : c.domain().zero();
        break;
      case GateKind::output: values[id] = values[g.preds[0]]; break;
    }
  }
  return values;
}

std::vector<Value> evaluate(const Circuit& c, const std::vector<Value>& inputs) {
  auto all = evaluate_all(c, inputs);
  std::vector<Value> out;
  out.reserve(c.outputs().size());
  for (GateId o : c.outputs()) out.push_back(all[o]);
  return out;
}

std::size_t size(const Circuit& c) { return c.gates().size(); }

std::vector<std::size_t> gate_levels(const Circuit& c) {
  std::vector<std::size_t> level(c.gates().size(), 0);
  for (GateId id : c.topological_order())
    for (GateId p : c.gate(id).preds) level[id] = std::max(level[id], level[p] + 1);
  return level;
}

std::size_t depth(const Circuit& c) {
  auto level = gate_levels(c);
  std::size_t d = 0;
  for (GateId o : c.outputs()) d = std::max(d, level[o]);
  return d;
}

std::size_t max_fanin(const Circuit& c) {
  std::size_t m = 0;
  for (const auto& g : c.gates())
    if (g.kind == GateKind::add || g.kind == GateKind::mul) m = std::max(m, g.preds.size());
  return m;
}

std::size_t wire_count(const Circuit& c) {
  std::size_t w = 0;
  for (const auto& g : c.gates()) w += g.preds.size();
  return w;
}

bool is_balanced(const Circuit& c) {
  auto level = gate_levels(c);
  for (const auto& g : c.gates())
    for (GateId p : g.preds)
      if (level[p] + 1 != level[g.id]) return false;
  return true;
}

Circuit balance(const Circuit& c) {
  auto level = gate_levels(c);
  std::vector<Gate> gates;
  std::vector<GateId> remap(c.gates().size());
  auto push = [&](Gate g) {
    g.id = gates.size();
    gates.push_back(std::move(g));
    return gates.back().id;
  };
  // outputs last, in their original order, so output positions survive
  std::vector<GateId> order;
  for (GateId id : c.topological_order())
    if (c.gate(id).kind != GateKind::output) order.push_back(id);
  order.insert(order.end(), c.outputs().begin(), c.outputs().end());
  for (GateId id : order) {
    const Gate& old = c.gate(id);
    Gate g;
    g.kind = old.kind;
    g.position = old.position;
    g.value = old.value;
    for (GateId p : old.preds) {
      GateId src = remap[p];
      for (std::size_t k = level[p] + 1; k < level[id]; ++k) {
        Gate dummy;
        dummy.kind = GateKind::add;
        dummy.preds = {src};
        src = push(std::move(dummy));
      }
      g.preds.push_back(src);
    }
    remap[id] = push(std::move(g));
  }
  return Circuit(c.domain(), c.fanin(), std::move(gates));
}

// ---------------------------------------------------------------------------
// Normal form

std::size_t normal_form_depth(std::size_t n, NormalFormParams params) {
  if (params.exponent < 1) throw Error("invalid_argument", "normal form exponent must be at least 1");
  const std::size_t width = params.cfac * floor_log2(n);
  if (n < 2 || width < 2) throw Error("invalid_argument", "normal form needs cfac * floor(log2 n) >= 2 (n = " + std::to_string(n) + ")");
  std::size_t d = 1;
  for (std::size_t k = 0; k < params.exponent; ++k) d *= width;
  return d;
}

std::size_t minimal_cfac(const Circuit& c, std::size_t exponent) {
  const std::size_t n = c.inputs().size();
  if (n < 2) throw Error("invalid_argument", "normal form needs at least 2 inputs");
  const std::size_t target = depth(c);
  for (std::size_t cf = 1;; ++cf) {
    if (cf * floor_log2(n) < 2) continue;
    if (normal_form_depth(n, {cf, exponent}) >= target) return cf;
  }
}

Label seq_d_prefix(std::size_t n, NormalFormParams params, std::size_t position) {
  const std::size_t len = seq_d_block_length(n, params.cfac);
  const std::size_t radix = len + 1;
  std::size_t total = 1;
  for (std::size_t k = 0; k < params.exponent; ++k) total *= radix;
  if (position < 1 || position > total) throw Error("invalid_argument", "seq_d position out of range");
  // element p counts down from total-1
  std::size_t counter = total - position;
  std::vector<std::size_t> blocks(params.exponent);
  for (std::size_t k = params.exponent; k-- > 0;) {
    blocks[k] = counter % radix;
    counter /= radix;
  }
  Label out;
  for (auto m : blocks) {
    std::uint64_t binary = (std::uint64_t{1} << m) - 1;
    std::vector<std::size_t> digits(params.cfac);
    for (std::size_t k = params.cfac; k-- > 0;) {
      digits[k] = binary % n;
      binary /= n;
    }
    if (binary != 0) throw Error("internal", "unary block does not fit in cfac digits");
    out.insert(out.end(), digits.begin(), digits.end());
  }
  return out;
}

namespace {

struct PadNode {
  GateKind kind;
  std::vector<std::size_t> preds;
  std::optional<Value> value;
  std::size_t position = 0;
  std::size_t level = 0;
  std::size_t origin = 0;  // for deterministic tie-breaking
};

}  // namespace

Circuit pad_and_number(const Circuit& c, NormalFormParams params) {
  const std::size_t n = c.inputs().size();
  if (n < 2) throw Error("normal_form", "normal form needs at least 2 input gates");
  const std::size_t target = normal_form_depth(n, params);
  if (!is_balanced(c)) throw Error("normal_form", "circuit is not balanced");
  if (c.outputs().empty()) throw Error("normal_form", "circuit has no output gate");
  const std::size_t old_depth = depth(c);
  if (old_depth > target)
    throw Error("normal_form", "depth " + std::to_string(old_depth) + " exceeds the normal form depth " +
                                   std::to_string(target) + " for cfac=" + std::to_string(params.cfac) +
                                   ", i=" + std::to_string(params.exponent));

  // keep inputs and everything that reaches an output
  std::vector<bool> live(c.gates().size(), false);
  for (auto it = c.topological_order().rbegin(); it != c.topological_order().rend(); ++it) {
    const Gate& g = c.gate(*it);
    if (g.kind == GateKind::output) live[g.id] = true;
    if (live[g.id])
      for (GateId p : g.preds) live[p] = true;
  }
  for (GateId in : c.inputs()) live[in] = true;

  auto level = gate_levels(c);
  const std::size_t shift = target - old_depth;
  std::vector<PadNode> nodes;
  std::vector<std::size_t> remap(c.gates().size());
  auto chain = [&](std::size_t from, std::size_t count) {
    for (std::size_t k = 0; k < count; ++k) {
      PadNode d{GateKind::add, {from}, std::nullopt, 0, nodes[from].level + 1, nodes[from].origin};
      nodes.push_back(std::move(d));
      from = nodes.size() - 1;
    }
    return from;
  };
  for (GateId id : c.topological_order()) {
    if (!live[id]) continue;
    const Gate& g = c.gate(id);
    PadNode node{g.kind, {}, g.value, g.position, 0, id};
    if (g.kind == GateKind::input || g.kind == GateKind::constant) {
      node.level = 0;
    } else {
      node.level = g.kind == GateKind::output ? target : level[id] + shift;
      for (GateId p : g.preds) {
        std::size_t src = remap[p];
        const bool source = c.gate(p).kind == GateKind::input || c.gate(p).kind == GateKind::constant;
        if (source) src = chain(src, shift);
        if (g.kind == GateKind::output) src = chain(src, target - 1 - nodes[src].level);
        node.preds.push_back(src);
      }
    }
    nodes.push_back(std::move(node));
    remap[id] = nodes.size() - 1;
  }

  // group by prefix: levels 0 and 1 share the all-zero prefix
  auto group_of = [&](std::size_t lvl) { return lvl == 0 ? std::size_t{1} : lvl; };
  // order constraints "a before b" per group, resolved from the top level down
  std::map<std::size_t, std::vector<std::set<std::size_t>>> unused;
  std::vector<std::vector<std::size_t>> after(nodes.size());  // a -> b means label(a) < label(b)
  auto reaches = [&](std::size_t from, std::size_t to) {
    std::vector<std::size_t> stack{from};
    std::set<std::size_t> seen{from};
    while (!stack.empty()) {
      auto x = stack.back();
      stack.pop_back();
      if (x == to) return true;
      for (auto y : after[x])
        if (seen.insert(y).second) stack.push_back(y);
    }
    return false;
  };
  auto duplicate = [&](std::size_t x) {
    PadNode copy = nodes[x];
    nodes.push_back(std::move(copy));
    after.emplace_back();
    return nodes.size() - 1;
  };
  for (std::size_t lvl = target; lvl >= 1; --lvl) {
    for (std::size_t g = 0; g < nodes.size(); ++g) {
      if (nodes[g].level != lvl || nodes[g].kind != GateKind::less) continue;
      std::size_t a = nodes[g].preds[0];
      std::size_t b = nodes[g].preds[1];
      if (reaches(b, a)) {
        if (nodes[b].kind != GateKind::input) {
          b = duplicate(b);
          nodes[g].preds[1] = b;
        } else if (nodes[a].kind != GateKind::input) {
          a = duplicate(a);
          nodes[g].preds[0] = a;
        } else {
          throw Error("normal_form", "less gate over two inputs in both orders cannot be numbered; increase cfac");
        }
      }
      after[a].push_back(b);
    }
  }

  // rank every group with a deterministic topological order of the constraints
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t g = 0; g < nodes.size(); ++g) groups[group_of(nodes[g].level)].push_back(g);
  std::vector<std::size_t> rank(nodes.size(), 0);
  std::size_t widest = 1;
  for (auto& [key, members] : groups) {
    std::map<std::size_t, std::size_t> indeg;
    for (auto m : members) indeg[m] = 0;
    for (auto m : members)
      for (auto b : after[m]) ++indeg[b];
    auto key_of = [&](std::size_t m) { return std::tuple(nodes[m].level, nodes[m].kind != GateKind::input, nodes[m].position, nodes[m].origin, m); };
    auto cmp = [&](std::size_t x, std::size_t y) { return key_of(x) > key_of(y); };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> ready(cmp);
    for (auto m : members)
      if (indeg[m] == 0) ready.push(m);
    std::size_t r = 0;
    while (!ready.empty()) {
      auto m = ready.top();
      ready.pop();
      rank[m] = r++;
      for (auto b : after[m])
        if (--indeg[b] == 0) ready.push(b);
    }
    if (r != members.size()) throw Error("internal", "label order constraints are cyclic");
    widest = std::max(widest, members.size());
  }
  std::size_t rank_digits = 1;
  for (std::size_t cap = n; cap < widest; cap *= n) ++rank_digits;

  // ids ordered by (level, rank)
  std::vector<std::size_t> order(nodes.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) {
    return std::pair(nodes[x].level, rank[x]) < std::pair(nodes[y].level, rank[y]);
  });
  std::vector<GateId> final_id(nodes.size());
  for (std::size_t k = 0; k < order.size(); ++k) final_id[order[k]] = k;

  std::vector<Gate> gates(nodes.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const PadNode& node = nodes[order[k]];
    Gate g;
    g.id = k;
    g.kind = node.kind;
    g.value = node.value;
    g.position = node.position;
    for (auto p : node.preds) g.preds.push_back(final_id[p]);
    const std::size_t seq_pos = node.level == 0 ? target : target + 1 - node.level;
    g.label = seq_d_prefix(n, params, seq_pos);
    std::vector<std::size_t> digits(rank_digits);
    std::size_t r = rank[order[k]];
    for (std::size_t d = rank_digits; d-- > 0;) {
      digits[d] = r % n;
      r /= n;
    }
    g.label.insert(g.label.end(), digits.begin(), digits.end());
    g.label.push_back(node.kind == GateKind::input ? node.position : 0);
    gates[k] = std::move(g);
  }
  return Circuit(c.domain(), c.fanin(), std::move(gates), n);
}

ClassReport check_class(const Circuit& c, CircuitClass kind, std::size_t exponent, ClassConstants consts) {
  ClassReport r;
  r.n = c.inputs().size();
  r.size = size(c);
  r.depth = depth(c);
  r.max_fanin = max_fanin(c);
  r.wires = wire_count(c);
  const double n = static_cast<double>(std::max<std::size_t>(r.n, 1));
  r.size_bound = consts.c2 * std::pow(n, consts.c3);
  r.depth_bound = consts.c1 * std::pow(std::log2(n), static_cast<double>(exponent));
  r.size_ok = static_cast<double>(r.size) <= r.size_bound;
  r.depth_ok = static_cast<double>(r.depth) <= r.depth_bound + 1e-9;
  r.fanin_ok = kind == CircuitClass::AC || r.max_fanin <= 2;
  return r;
}

}  // namespace ringcirc
