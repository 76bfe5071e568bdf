#include "ringcirc/compile.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "ringcirc/numeric.hpp"
#include "ringcirc/sexpr.hpp"

namespace ringcirc {

bool RoundtripReport::all_agree() const {
  for (const auto& r : rows)
    if (r.agreements != r.samples) return false;
  return true;
}

Structure with_input(const Structure& arb, const std::vector<Value>& inputs, const std::string& symbol) {
  if (inputs.size() != arb.universe())
    throw Error("arity", "structure of size " + std::to_string(arb.universe()) + " needs " +
                             std::to_string(arb.universe()) + " inputs, got " + std::to_string(inputs.size()));
  Structure s = arb;
  s.add_number_function(symbol, 1);
  for (std::size_t j = 0; j < inputs.size(); ++j) s.set_number(symbol, {j}, inputs[j]);
  return s;
}

namespace {

bool contains_recvar(const NumberTermPtr& t);

bool contains_recvar(const FormulaPtr& f) {
  if (!f) return false;
  for (const auto& t : f->terms)
    if (contains_recvar(t)) return true;
  for (const auto& c : f->children)
    if (contains_recvar(c)) return true;
  return f->kind == Formula::Kind::gfr && contains_recvar(f->def->body);
}

bool contains_recvar(const NumberTermPtr& t) {
  if (t->kind == NumberTerm::Kind::recvar) return true;
  if (contains_recvar(t->formula)) return true;
  for (const auto& u : t->terms)
    if (contains_recvar(u)) return true;
  return false;
}

/// Formula built from index atoms and connectives only.
bool pure(const FormulaPtr& f) {
  if (!f->terms.empty() || f->kind == Formula::Kind::gfr) return false;
  for (const auto& c : f->children)
    if (!pure(c)) return false;
  return true;
}

struct Node {
  GateId gate;
  std::optional<Value> fixed;  // value known at compile time
};

struct Entry {
  std::optional<GateId> select;  // absent: always selected
  GateId value;
};

class Compiler {
 public:
  Compiler(const Structure& arb, CompileOptions options)
      : arb_(arb), options_(std::move(options)), b_(arb.domain(), options_.fanin), static_(arb) {
    for (std::size_t j = 0; j < arb.universe(); ++j) inputs_.push_back(b_.input());
  }

  CompiledFormula run(const FormulaPtr& f) {
    Env env;
    GateId root = formula(f, env);
    b_.output(root);
    return {b_.build(), std::move(bindings_)};
  }

 private:
  struct Frame {
    RecursionPtr def;
    Env env;
    std::map<std::vector<std::size_t>, GateId> memo;
    std::set<std::vector<std::size_t>> active;
  };

  const Domain& domain() const { return arb_.domain(); }
  GateId fresh(long v) { return b_.fresh_constant(domain().from_int(v)); }
  GateId fresh(const Value& v) { return b_.fresh_constant(v); }

  GateId neg(GateId g) {
    if (options_.fault_negation) return g;
    return b_.add({b_.constant(1), b_.mul({b_.constant(-1), g})});
  }

  GateId sign(GateId g) { return b_.less(b_.constant(0), g); }

  std::optional<bool> static_truth(const FormulaPtr& f, Env& env) {
    if (pure(f)) return static_.formula(f, env);
    if (f->kind == Formula::Kind::conjunction) {
      bool all = true;
      for (const auto& c : f->children) {
        auto v = static_truth(c, env);
        if (v && !*v) return false;
        all = all && v.has_value();
      }
      if (all) return true;
    }
    return std::nullopt;
  }

  void bind(const FormulaPtr& f, const Env& env, GateId g) {
    if (body_depth_ == 0) bindings_.push_back({f, nullptr, env, g});
  }
  void bind(const NumberTermPtr& t, const Env& env, GateId g) {
    if (body_depth_ == 0) bindings_.push_back({nullptr, t, env, g});
  }

  /// Visits every tuple over `vars` in ascending lexicographic order.
  template <class Fn>
  void each_tuple(const Vars& vars, Env& env, Fn fn) {
    const std::size_t base = env.size();
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < vars.size(); ++k) total *= arb_.universe();
    for (const auto& v : vars) env.emplace_back(v, 0);
    for (std::uint64_t key = 0; key < total; ++key) {
      auto digits = arb_.unkey(key, vars.size());
      for (std::size_t k = 0; k < vars.size(); ++k) env[base + k].second = digits[k];
      fn();
    }
    env.resize(base);
  }

  GateId formula(const FormulaPtr& f, Env& env) {
    GateId g = formula_gate(f, env);
    bind(f, env, g);
    return g;
  }

  GateId formula_gate(const FormulaPtr& f, Env& env) {
    switch (f->kind) {
      case Formula::Kind::truth:
      case Formula::Kind::index_eq:
      case Formula::Kind::index_less:
      case Formula::Kind::relation:
      case Formula::Kind::tuple_cmp:
      case Formula::Kind::bit: return fresh(static_.formula(f, env) ? 1 : 0);
      case Formula::Kind::num_eq: {
        GateId a = term(f->terms.at(0), env).gate;
        GateId c = term(f->terms.at(1), env).gate;
        return b_.mul({neg(b_.less(a, c)), neg(b_.less(c, a))});
      }
      case Formula::Kind::num_less: {
        GateId a = term(f->terms.at(0), env).gate;
        GateId c = term(f->terms.at(1), env).gate;
        return b_.less(a, c);
      }
      case Formula::Kind::negation: return neg(formula(f->children.at(0), env));
      case Formula::Kind::conjunction: {
        if (f->children.empty()) return fresh(1);
        std::vector<GateId> gs;
        for (const auto& c : f->children) gs.push_back(formula(c, env));
        return b_.product(std::move(gs));
      }
      case Formula::Kind::disjunction: {
        if (f->children.empty()) return fresh(0);
        std::vector<GateId> gs;
        for (const auto& c : f->children) gs.push_back(neg(formula(c, env)));
        return neg(b_.product(std::move(gs)));
      }
      case Formula::Kind::implication: {
        GateId a = formula(f->children.at(0), env);
        GateId c = formula(f->children.at(1), env);
        return neg(b_.mul({a, neg(c)}));
      }
      case Formula::Kind::equivalence: {
        GateId a = formula(f->children.at(0), env);
        GateId c = formula(f->children.at(1), env);
        return b_.mul({neg(b_.less(a, c)), neg(b_.less(c, a))});
      }
      case Formula::Kind::quantifier: {
        // forall: sign of the product over all instances; exists: not forall not
        const bool universal = f->value;
        std::vector<GateId> gs;
        each_tuple(f->vars, env, [&] {
          GateId g = formula(f->children.at(0), env);
          gs.push_back(universal ? g : neg(g));
        });
        GateId all = sign(b_.product(std::move(gs)));
        return universal ? all : neg(all);
      }
      case Formula::Kind::gfr: {
        Frame frame{f->def, env, {}, {}};
        frames_.push_back(&frame);
        GateId g;
        try {
          g = formula(f->children.at(0), env);
        } catch (...) {
          frames_.pop_back();
          throw;
        }
        frames_.pop_back();
        return g;
      }
    }
    throw Error("internal", "unknown formula kind");
  }

  Node term(const NumberTermPtr& t, Env& env) {
    Node n = term_node(t, env);
    bind(t, env, n.gate);
    return n;
  }

  Value literal(const NumberTerm& t) {
    auto it = literals_.find(&t);
    if (it != literals_.end()) return it->second;
    Value v = parse_value(domain(), t.literal);
    literals_.emplace(&t, v);
    return v;
  }

  Node term_node(const NumberTermPtr& t, Env& env) {
    switch (t->kind) {
      case NumberTerm::Kind::constant: {
        Value v = literal(*t);
        return {fresh(v), v};
      }
      case NumberTerm::Kind::apply: {
        if (t->name == options_.input_symbol) {
          if (t->args.size() != 1) throw Error("arity", "'" + t->name + "' takes 1 argument");
          return {b_.identity(inputs_.at(static_.index(t->args[0], env))), std::nullopt};
        }
        std::vector<std::size_t> args;
        for (const auto& a : t->args) args.push_back(static_.index(a, env));
        if (arb_.number_function(t->name)) {
          Value v = arb_.number(t->name, args);
          return {fresh(v), v};
        }
        if (arb_.relation(t->name)) {
          Value v = arb_.holds(t->name, args) ? domain().one() : domain().zero();
          return {fresh(v), v};
        }
        throw Error("unknown_symbol", "unknown symbol '" + t->name + "'");
      }
      case NumberTerm::Kind::add: {
        std::vector<GateId> gs;
        for (const auto& u : t->terms) gs.push_back(term(u, env).gate);
        return {b_.sum(std::move(gs)), std::nullopt};
      }
      case NumberTerm::Kind::mul: {
        std::vector<GateId> gs;
        for (std::size_t k = 0; k < t->terms.size(); ++k) {
          Node n = term(t->terms[k], env);
          gs.push_back(n.gate);
          if (n.fixed && n.fixed->is_zero()) {
            bool later = false;
            for (std::size_t j = k + 1; j < t->terms.size(); ++j) later = later || contains_recvar(t->terms[j]);
            // a fixed zero factor makes recursive calls in later factors irrelevant
            if (later) return {fresh(0), domain().zero()};
          }
        }
        return {b_.product(std::move(gs)), std::nullopt};
      }
      case NumberTerm::Kind::sign: return {sign(term(t->terms.at(0), env).gate), std::nullopt};
      case NumberTerm::Kind::chi: {
        GateId g = formula(t->formula, env);
        std::optional<Value> fixed;
        if (pure(t->formula)) fixed = static_.formula(t->formula, env) ? domain().one() : domain().zero();
        return {g, fixed};
      }
      case NumberTerm::Kind::aggregate: return {aggregate(*t, env), std::nullopt};
      case NumberTerm::Kind::recvar: return {recursive(*t, env), std::nullopt};
    }
    throw Error("internal", "unknown term kind");
  }

  GateId recursive(const NumberTerm& t, Env& env) {
    Frame* frame = nullptr;
    for (auto it = frames_.rbegin(); it != frames_.rend(); ++it)
      if ((*it)->def->symbol == t.name) {
        frame = *it;
        break;
      }
    if (!frame) throw Error("unknown_symbol", "recursion symbol '" + t.name + "' used outside its block");
    const RecursionDef& def = *frame->def;
    std::vector<std::size_t> args;
    for (const auto& a : t.args) args.push_back(static_.index(a, env));
    if (args.size() != def.arity()) throw Error("arity", "'" + def.symbol + "' takes " + std::to_string(def.arity()) + " arguments");
    auto it = frame->memo.find(args);
    if (it != frame->memo.end()) return it->second;
    if (frame->active.count(args)) {
      std::string s = def.symbol + "(";
      for (std::size_t k = 0; k < args.size(); ++k) s += (k ? "," : "") + std::to_string(args[k]);
      throw Error("non_well_founded", "non-well-founded recursion: " + s + ") depends on itself");
    }
    frame->active.insert(args);
    Env local = frame->env;
    std::size_t pos = 0;
    auto bind_params = [&](const Vars& vs) {
      for (const auto& v : vs) local.emplace_back(v, args[pos++]);
    };
    bind_params(def.x);
    for (const auto& blk : def.y) bind_params(blk);
    bind_params(def.rest);
    ++body_depth_;
    GateId g;
    try {
      g = term(def.body, local).gate;
    } catch (...) {
      --body_depth_;
      frame->active.erase(args);
      throw;
    }
    --body_depth_;
    frame->active.erase(args);
    frame->memo.emplace(args, g);
    return g;
  }

  GateId aggregate(const NumberTerm& t, Env& env) {
    const NumberTermPtr& body = t.terms.at(0);
    const FormulaPtr& rel = t.formula;
    const bool recursive_body = contains_recvar(body) || contains_recvar(rel);
    if (t.bounded) return bounded(t, env, recursive_body);

    std::vector<Entry> entries;
    bool pruned = false;
    each_tuple(t.vars, env, [&] {
      if (!rel) {
        entries.push_back({std::nullopt, term(body, env).gate});
        return;
      }
      if (recursive_body) {
        auto st = static_truth(rel, env);
        if (st && !*st) {
          pruned = true;
          return;
        }
        if (st) {
          entries.push_back({std::nullopt, term(body, env).gate});
          return;
        }
      }
      GateId sel = formula(rel, env);
      entries.push_back({sel, term(body, env).gate});
    });
    switch (t.agg) {
      case AggKind::sum: return sum(entries);
      case AggKind::prod: return product(entries);
      case AggKind::max: {
        std::vector<GateId> values;
        for (const auto& e : entries) values.push_back(e.select ? b_.mul({*e.select, e.value}) : e.value);
        if (pruned) values.push_back(fresh(0));
        if (values.empty()) return fresh(0);
        return max_select(values, {});
      }
    }
    throw Error("internal", "unknown aggregator");
  }

  GateId sum(const std::vector<Entry>& entries) {
    if (entries.empty()) return fresh(0);
    std::vector<GateId> gs;
    for (const auto& e : entries) gs.push_back(e.select ? b_.mul({*e.select, e.value}) : e.value);
    return b_.sum(std::move(gs));
  }

  GateId product(const std::vector<Entry>& entries) {
    if (entries.empty()) return fresh(1);
    std::vector<GateId> gs;
    for (const auto& e : entries)
      gs.push_back(e.select ? b_.add({b_.mul({*e.select, e.value}), neg(*e.select)}) : e.value);
    return b_.product(std::move(gs));
  }

  /// Value of the first maximum among the selected values, 0 when none is selected.
  GateId max_select(const std::vector<GateId>& values, const std::vector<GateId>& sels) {
    const std::size_t m = values.size();
    if (m == 1 && sels.empty()) return values.front();
    std::vector<GateId> terms;
    for (std::size_t k = 0; k < m; ++k) {
      std::vector<GateId> factors;
      if (!sels.empty()) factors.push_back(sels[k]);
      for (std::size_t j = 0; j < m; ++j) {
        if (j == k) continue;
        // j beats k: earlier and not smaller, or later and larger
        GateId beats = j < k ? neg(b_.less(values[j], values[k])) : b_.less(values[k], values[j]);
        if (!sels.empty()) beats = b_.mul({sels[j], beats});
        factors.push_back(neg(beats));
      }
      // a lone factor still takes a level so the depth does not depend on m
      GateId first = factors.size() == 1 ? b_.identity(factors.front()) : b_.product(std::move(factors));
      terms.push_back(b_.mul({first, values[k]}));
    }
    return b_.sum(std::move(terms));
  }

  GateId bounded(const NumberTerm& t, Env& env, bool recursive_body) {
    const NumberTermPtr& body = t.terms.at(0);
    const FormulaPtr& rel = t.formula;
    // Two slots: the selected tuples. A slot holds a select gate and a value.
    std::vector<GateId> sels, values;
    bool fixed = true;
    std::vector<std::vector<std::size_t>> chosen;
    const std::size_t base = env.size();
    {
      std::vector<std::vector<std::size_t>> tuples;
      each_tuple(t.vars, env, [&] {
        std::vector<std::size_t> tup;
        for (std::size_t k = 0; k < t.vars.size(); ++k) tup.push_back(env[base + k].second);
        tuples.push_back(std::move(tup));
      });
      for (auto it = tuples.rbegin(); it != tuples.rend(); ++it) {
        Env local = env;
        for (std::size_t k = 0; k < t.vars.size(); ++k) local.emplace_back(t.vars[k], (*it)[k]);
        auto st = rel ? static_truth(rel, local) : std::optional<bool>(true);
        if (!st) {
          fixed = false;
          break;
        }
        if (*st && chosen.size() < 2) chosen.push_back(*it);
      }
    }
    auto with_tuple = [&](const std::vector<std::size_t>& tup) {
      Env local = env;
      for (std::size_t k = 0; k < t.vars.size(); ++k) local.emplace_back(t.vars[k], tup[k]);
      return local;
    };
    if (fixed) {
      for (std::size_t slot = 0; slot < 2; ++slot) {
        if (slot < chosen.size()) {
          Env local = with_tuple(chosen[slot]);
          sels.push_back(fresh(1));
          values.push_back(term(body, local).gate);
        } else if (!recursive_body) {
          // an unselected slot keeps the body's shape so depth does not depend on the structure
          Env local = with_tuple(std::vector<std::size_t>(t.vars.size(), 0));
          sels.push_back(fresh(0));
          values.push_back(term(body, local).gate);
        } else {
          sels.push_back(fresh(0));
          values.push_back(fresh(0));
        }
      }
    } else {
      // tuple k is selected when it satisfies the relativizer and no two later tuples do
      std::vector<GateId> phi;
      each_tuple(t.vars, env, [&] {
        phi.push_back(formula(rel, env));
        values.push_back(term(body, env).gate);
      });
      const std::size_t m = phi.size();
      for (std::size_t k = 0; k < m; ++k) {
        std::vector<GateId> no_pair;
        for (std::size_t j = k + 1; j < m; ++j)
          for (std::size_t l = j + 1; l < m; ++l) no_pair.push_back(neg(b_.mul({phi[j], phi[l]})));
        if (no_pair.empty()) {
          sels.push_back(phi[k]);
        } else {
          no_pair.push_back(phi[k]);
          sels.push_back(b_.product(std::move(no_pair)));
        }
      }
    }
    std::vector<Entry> entries;
    for (std::size_t k = 0; k < sels.size(); ++k) entries.push_back({sels[k], values[k]});
    switch (t.agg) {
      case AggKind::sum: return sum(entries);
      case AggKind::prod: return product(entries);
      case AggKind::max:
        if (rel) {
          // a zero candidate stands for the tuples left unselected
          values.push_back(fresh(0));
          if (fixed) {
            sels.push_back(fresh(chosen.size() < tuple_total(t.vars.size()) ? 1 : 0));
          } else if (sels.size() > 2) {
            sels.push_back(fresh(1));
          } else {
            std::vector<GateId> all(sels.begin(), sels.end());
            sels.push_back(neg(b_.product(std::move(all))));
          }
        }
        return max_select(values, sels);
    }
    throw Error("internal", "unknown aggregator");
  }

  std::size_t tuple_total(std::size_t k) const {
    std::size_t total = 1;
    for (std::size_t j = 0; j < k; ++j) total *= arb_.universe();
    return total;
  }

  const Structure& arb_;
  CompileOptions options_;
  CircuitBuilder b_;
  Evaluator static_;
  std::vector<GateId> inputs_;
  std::vector<GateBinding> bindings_;
  std::vector<Frame*> frames_;
  std::unordered_map<const NumberTerm*, Value> literals_;
  std::size_t body_depth_ = 0;
};

}  // namespace

CompiledFormula compile_formula(const FormulaPtr& f, const Structure& arb, CompileOptions options) {
  if (arb.has_symbol(options.input_symbol))
    throw Error("invalid_structure", "structure already defines the input symbol '" + options.input_symbol + "'");
  auto free = free_variables(f);
  if (!free.empty()) throw Error("invalid_formula", "formula has free variable '" + free.front() + "'");
  auto diags = check_gfr_syntax(f, {options.input_symbol});
  if (!diags.empty()) throw Error("gfr_syntax", to_string(diags.front()));
  return Compiler(arb, options).run(f);
}

// ---------------------------------------------------------------------------
// Circuit -> recursion formula

namespace {

std::string label_text(const Label& l) {
  std::string s = "(";
  for (std::size_t k = 0; k < l.size(); ++k) s += (k ? "," : "") + std::to_string(l[k]);
  return s + ")";
}

[[noreturn]] void nf_fail(const Gate& g, const std::string& msg) {
  throw Error("normal_form", "gate " + std::to_string(g.id) + " " + label_text(g.label) + ": " + msg);
}

Vars block(const std::string& prefix, std::size_t width) {
  Vars v;
  for (std::size_t k = 1; k <= width; ++k) v.push_back(prefix + std::to_string(k));
  return v;
}

}  // namespace

void check_normal_form(const Circuit& c, NormalFormParams params) {
  const std::size_t n = c.inputs().size();
  if (c.label_base() != n || n < 2) throw Error("normal_form", "gate labels must be digits over the input count");
  const std::size_t target = normal_form_depth(n, params);
  if (c.outputs().size() != 1) throw Error("normal_form", "exactly one output gate is required");
  if (!is_balanced(c)) throw Error("normal_form", "circuit is not balanced");
  if (depth(c) != target)
    throw Error("normal_form", "depth " + std::to_string(depth(c)) + " differs from " + std::to_string(target));
  const std::size_t prefix_len = params.cfac * params.exponent;
  const std::size_t len = c.gates().front().label.size();
  if (len < prefix_len + 2) throw Error("normal_form", "labels are too short");
  auto levels = gate_levels(c);
  for (const auto& g : c.gates()) {
    if (g.label.size() != len) nf_fail(g, "label length differs");
    const std::size_t l = levels[g.id];
    const bool source = g.kind == GateKind::input || g.kind == GateKind::constant;
    if (source != (l == 0)) nf_fail(g, "only input and constant gates may sit at level 0");
    Label expect = seq_d_prefix(n, params, l == 0 ? target : target + 1 - l);
    if (!std::equal(expect.begin(), expect.end(), g.label.begin())) nf_fail(g, "prefix does not encode its level");
    if (g.kind == GateKind::input && g.label.back() != g.position) nf_fail(g, "last digit differs from the input position");
    if (g.kind == GateKind::less && !(c.gate(g.preds[0]).label < c.gate(g.preds[1]).label))
      nf_fail(g, "left operand label is not below the right operand label");
    if (g.kind == GateKind::output && l != target) nf_fail(g, "output below the full depth");
  }
}

GfrEncoding circuit_to_gfr(const Circuit& c, NormalFormParams params, bool bounded) {
  check_normal_form(c, params);
  if (bounded && max_fanin(c) > 2)
    throw Error("invalid_argument", "bounded aggregators see two predecessors, circuit has fan-in " +
                                        std::to_string(max_fanin(c)));
  const std::size_t n = c.inputs().size();
  const std::size_t len = c.gates().front().label.size();
  const std::size_t w = params.cfac;
  const std::size_t i = params.exponent;
  const std::size_t rest = len - w * i;

  GfrEncoding enc{Structure(c.domain(), n), nullptr, params, len};
  std::map<GateKind, std::vector<std::vector<std::size_t>>> by_kind;
  std::vector<std::vector<std::size_t>> edges;
  for (const auto& g : c.gates()) {
    by_kind[g.kind].push_back(g.label);
    for (GateId p : g.preds) {
      std::vector<std::size_t> e = g.label;
      e.insert(e.end(), c.gate(p).label.begin(), c.gate(p).label.end());
      edges.push_back(std::move(e));
    }
  }
  Structure& s = enc.description;
  s.add_relation("G_add", len, by_kind[GateKind::add]);
  s.add_relation("G_mul", len, by_kind[GateKind::mul]);
  s.add_relation("G_lt", len, by_kind[GateKind::less]);
  s.add_relation("G_input", len, by_kind[GateKind::input]);
  s.add_relation("G_output", len, by_kind[GateKind::output]);
  s.add_relation("G_const", len, by_kind[GateKind::constant]);
  s.add_relation("G_E", 2 * len, edges);
  s.add_number_function("f_const_val", len);
  for (const auto& g : c.gates())
    if (g.kind == GateKind::constant) s.set_number("f_const_val", g.label, *g.value);

  std::vector<Vars> ys, zs, bs;
  for (std::size_t j = 1; j <= i; ++j) {
    ys.push_back(block("y" + std::to_string(j) + "_", w));
    zs.push_back(block("z" + std::to_string(j) + "_", w));
    bs.push_back(block("b" + std::to_string(j) + "_", w));
  }
  Vars yr = block("r", rest), zr = block("zr", rest), br = block("br", rest);
  auto flat = [](const std::vector<Vars>& blocks, const Vars& tail) {
    Vars out;
    for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
  };
  const Vars y = flat(ys, yr), z = flat(zs, zr), bv = flat(bs, br);
  auto edge = [&](const Vars& from, const Vars& to) {
    Vars args = from;
    args.insert(args.end(), to.begin(), to.end());
    return fo::relation("G_E", fo::vars(args));
  };
  auto is = [&](const std::string& rel) { return fo::chi(fo::relation(rel, fo::vars(y))); };
  const std::string f = "f";
  auto call = [&](const Vars& a) { return fo::recvar(f, fo::vars(a)); };
  FormulaPtr pred_z = fo::conjunction({edge(y, z), fo::halving_guard(zs, ys)});
  FormulaPtr pred_b = fo::conjunction({edge(y, bv), fo::halving_guard(bs, ys), fo::tuple_cmp(TupleCmp::lt, fo::vars(bv), fo::vars(z))});

  NumberTermPtr less_value =
      fo::aggregate(AggKind::sum, z, pred_z,
                fo::aggregate(AggKind::max, bv, pred_b, fo::chi(fo::num_less(call(bv), call(z))), bounded), bounded);
  NumberTermPtr t = fo::add({
      fo::mul({is("G_input"), fo::apply("f_element", {fo::var(yr.back())})}),
      fo::mul({is("G_const"), fo::apply("f_const_val", fo::vars(y))}),
      fo::mul({is("G_add"), fo::aggregate(AggKind::sum, z, pred_z, call(z), bounded)}),
      fo::mul({is("G_mul"), fo::aggregate(AggKind::prod, z, pred_z, call(z), bounded)}),
      fo::mul({is("G_lt"), less_value}),
      fo::mul({is("G_output"), fo::aggregate(AggKind::sum, z, pred_z, call(z), bounded)}),
  });
  auto def = std::make_shared<RecursionDef>();
  def->symbol = f;
  def->y = ys;
  def->rest = yr;
  def->body = t;
  def->bounded = bounded;
  Vars a = block("a", len);
  enc.sentence = fo::gfr(def, fo::exists(a, fo::conjunction({fo::relation("G_output", fo::vars(a)), fo::num_eq(call(a), fo::constant(1))})));
  return enc;
}

// ---------------------------------------------------------------------------
// Round trip

namespace {

std::string render_env(const Env& env) {
  std::string s = "{";
  for (std::size_t k = 0; k < env.size(); ++k) s += (k ? ", " : "") + env[k].first + "=" + std::to_string(env[k].second);
  return s + "}";
}

std::string localize(const CompiledFormula& cf, const Structure& s, const std::vector<Value>& inputs) {
  auto values = evaluate_all(cf.circuit, inputs);
  Evaluator ev(s, {});
  const Domain& d = s.domain();
  for (const auto& b : cf.bindings) {
    Env env = b.env;
    Value expect = d.zero();
    std::string what;
    try {
      if (b.formula) {
        expect = ev.formula(b.formula, env) ? d.one() : d.zero();
        what = to_sexpr(b.formula);
      } else {
        expect = ev.term(b.term, env);
        what = to_sexpr(b.term);
      }
    } catch (const Error&) {
      continue;
    }
    if (!(values[b.gate] == expect))
      return what + " under " + render_env(b.env) + ": gate " + std::to_string(b.gate) + " gives " +
             to_string(values[b.gate]) + ", evaluator gives " + to_string(expect);
  }
  return "no binding disagrees";
}

}  // namespace

RoundtripReport roundtrip_check(const FormulaPtr& f, const std::vector<std::size_t>& sizes, std::size_t samples,
                                const StructureFactory& make, Rng& rng, CompileOptions options, long range) {
  RoundtripReport report;
  for (std::size_t n : sizes) {
    Structure arb = make(n);
    CompiledFormula cf = compile_formula(f, arb, options);
    RoundtripReport::Row row;
    row.size = n;
    row.depth = depth(cf.circuit);
    row.gates = size(cf.circuit);
    const Domain& d = arb.domain();
    for (std::size_t k = 0; k < samples; ++k) {
      auto x = random_values(d, n, rng, range);
      Structure s = with_input(arb, x, options.input_symbol);
      bool truth = eval_formula(s, f);
      Value out = evaluate(cf.circuit, x).front();
      const bool agree = (truth && out == d.one()) || (!truth && out == d.zero());
      ++row.samples;
      if (agree) {
        ++row.agreements;
        continue;
      }
      RoundtripCase bad{n, x, truth, out, false, localize(cf, s, x)};
      report.disagreements.push_back(std::move(bad));
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace ringcirc
