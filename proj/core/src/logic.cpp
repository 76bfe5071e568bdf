#include "ringcirc/logic.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <set>
#include <unordered_map>

#include "ringcirc/numeric.hpp"

namespace ringcirc {

std::size_t RecursionDef::arity() const {
  std::size_t a = x.size() + rest.size();
  for (const auto& b : y) a += b.size();
  return a;
}

// ---------------------------------------------------------------------------
// Builders

namespace fo {

IndexTermPtr var(std::string name) {
  auto h = std::make_shared<IndexTerm>();
  h->kind = IndexTerm::Kind::variable;
  h->name = std::move(name);
  return h;
}

IndexTermPtr elem(std::size_t e) {
  auto h = std::make_shared<IndexTerm>();
  h->kind = IndexTerm::Kind::element;
  h->element = e;
  return h;
}

IndexTermPtr skel(std::string name, std::vector<IndexTermPtr> args) {
  auto h = std::make_shared<IndexTerm>();
  h->kind = IndexTerm::Kind::apply;
  h->name = std::move(name);
  h->args = std::move(args);
  return h;
}

std::vector<IndexTermPtr> vars(const Vars& names) {
  std::vector<IndexTermPtr> out;
  for (const auto& n : names) out.push_back(var(n));
  return out;
}

namespace {
std::shared_ptr<NumberTerm> term(NumberTerm::Kind kind) {
  auto t = std::make_shared<NumberTerm>();
  t->kind = kind;
  return t;
}
std::shared_ptr<Formula> node(Formula::Kind kind) {
  auto f = std::make_shared<Formula>();
  f->kind = kind;
  return f;
}
}  // namespace

NumberTermPtr constant(std::string literal) {
  auto t = term(NumberTerm::Kind::constant);
  t->literal = std::move(literal);
  return t;
}
NumberTermPtr constant(long v) { return constant(std::to_string(v)); }

NumberTermPtr apply(std::string name, std::vector<IndexTermPtr> args) {
  auto t = term(NumberTerm::Kind::apply);
  t->name = std::move(name);
  t->args = std::move(args);
  return t;
}

NumberTermPtr recvar(std::string name, std::vector<IndexTermPtr> args) {
  auto t = term(NumberTerm::Kind::recvar);
  t->name = std::move(name);
  t->args = std::move(args);
  return t;
}

NumberTermPtr add(std::vector<NumberTermPtr> terms) {
  auto t = term(NumberTerm::Kind::add);
  t->terms = std::move(terms);
  return t;
}

NumberTermPtr mul(std::vector<NumberTermPtr> terms) {
  auto t = term(NumberTerm::Kind::mul);
  t->terms = std::move(terms);
  return t;
}

NumberTermPtr sign(NumberTermPtr s) {
  auto t = term(NumberTerm::Kind::sign);
  t->terms = {std::move(s)};
  return t;
}

NumberTermPtr chi(FormulaPtr f) {
  auto t = term(NumberTerm::Kind::chi);
  t->formula = std::move(f);
  return t;
}

NumberTermPtr aggregate(AggKind kind, Vars vars, FormulaPtr relativizer, NumberTermPtr body, bool bounded) {
  auto t = term(NumberTerm::Kind::aggregate);
  t->agg = kind;
  t->vars = std::move(vars);
  t->formula = std::move(relativizer);
  t->terms = {std::move(body)};
  t->bounded = bounded;
  return t;
}

FormulaPtr truth(bool v) {
  auto f = node(Formula::Kind::truth);
  f->value = v;
  return f;
}

FormulaPtr index_eq(IndexTermPtr a, IndexTermPtr b) {
  auto f = node(Formula::Kind::index_eq);
  f->lhs = {std::move(a)};
  f->rhs = {std::move(b)};
  return f;
}

FormulaPtr index_less(IndexTermPtr a, IndexTermPtr b) {
  auto f = node(Formula::Kind::index_less);
  f->lhs = {std::move(a)};
  f->rhs = {std::move(b)};
  return f;
}

FormulaPtr num_eq(NumberTermPtr a, NumberTermPtr b) {
  auto f = node(Formula::Kind::num_eq);
  f->terms = {std::move(a), std::move(b)};
  return f;
}

FormulaPtr num_less(NumberTermPtr a, NumberTermPtr b) {
  auto f = node(Formula::Kind::num_less);
  f->terms = {std::move(a), std::move(b)};
  return f;
}

FormulaPtr relation(std::string name, std::vector<IndexTermPtr> args) {
  auto f = node(Formula::Kind::relation);
  f->name = std::move(name);
  f->lhs = std::move(args);
  return f;
}

FormulaPtr tuple_cmp(TupleCmp cmp, std::vector<IndexTermPtr> a, std::vector<IndexTermPtr> b) {
  auto f = node(Formula::Kind::tuple_cmp);
  f->cmp = cmp;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}

FormulaPtr bit(std::vector<IndexTermPtr> index, std::vector<IndexTermPtr> value) {
  auto f = node(Formula::Kind::bit);
  f->lhs = std::move(index);
  f->rhs = std::move(value);
  return f;
}

FormulaPtr negation(FormulaPtr g) {
  auto f = node(Formula::Kind::negation);
  f->children = {std::move(g)};
  return f;
}

FormulaPtr conjunction(std::vector<FormulaPtr> fs) {
  auto f = node(Formula::Kind::conjunction);
  f->children = std::move(fs);
  return f;
}

FormulaPtr disjunction(std::vector<FormulaPtr> fs) {
  auto f = node(Formula::Kind::disjunction);
  f->children = std::move(fs);
  return f;
}

FormulaPtr implication(FormulaPtr a, FormulaPtr b) {
  auto f = node(Formula::Kind::implication);
  f->children = {std::move(a), std::move(b)};
  return f;
}

FormulaPtr equivalence(FormulaPtr a, FormulaPtr b) {
  auto f = node(Formula::Kind::equivalence);
  f->children = {std::move(a), std::move(b)};
  return f;
}

FormulaPtr forall(Vars vars, FormulaPtr body) {
  auto f = node(Formula::Kind::quantifier);
  f->value = true;
  f->vars = std::move(vars);
  f->children = {std::move(body)};
  return f;
}

FormulaPtr exists(Vars vars, FormulaPtr body) {
  auto f = node(Formula::Kind::quantifier);
  f->value = false;
  f->vars = std::move(vars);
  f->children = {std::move(body)};
  return f;
}

FormulaPtr gfr(RecursionPtr def, FormulaPtr body) {
  auto f = node(Formula::Kind::gfr);
  f->def = std::move(def);
  f->children = {std::move(body)};
  return f;
}

FormulaPtr halving_guard(const std::vector<Vars>& z, const std::vector<Vars>& y) {
  if (z.size() != y.size()) throw Error("invalid_argument", "guard block counts differ");
  std::vector<FormulaPtr> disjuncts;
  for (std::size_t j = 0; j < z.size(); ++j) {
    std::vector<FormulaPtr> parts{tuple_cmp(TupleCmp::half_leq, vars(z[j]), vars(y[j]))};
    for (std::size_t k = 0; k < j; ++k) parts.push_back(tuple_cmp(TupleCmp::leq, vars(z[k]), vars(y[k])));
    disjuncts.push_back(parts.size() == 1 ? parts.front() : conjunction(std::move(parts)));
  }
  return disjuncts.size() == 1 ? disjuncts.front() : disjunction(std::move(disjuncts));
}

}  // namespace fo

// ---------------------------------------------------------------------------
// Structure

Structure::Structure(Domain domain, std::size_t universe) : domain_(domain), universe_(universe) {
  if (universe_ == 0) throw Error("invalid_structure", "universe must be non-empty");
}

std::uint64_t Structure::key(const std::vector<std::size_t>& args) const {
  if (universe_ == 1) return 0;
  return numval(args, universe_);
}

std::vector<std::size_t> Structure::unkey(std::uint64_t key, std::size_t arity) const {
  std::vector<std::size_t> out(arity, 0);
  for (std::size_t k = arity; k-- > 0 && universe_ > 1;) {
    out[k] = key % universe_;
    key /= universe_;
  }
  return out;
}

void Structure::check_fresh(const std::string& name) const {
  if (has_symbol(name)) throw Error("invalid_structure", "symbol '" + name + "' defined twice");
}

void Structure::check_args(const std::string& name, std::size_t arity, const std::vector<std::size_t>& args) const {
  if (args.size() != arity)
    throw Error("arity", "'" + name + "' takes " + std::to_string(arity) + " arguments, got " + std::to_string(args.size()));
  for (auto a : args)
    if (a >= universe_) throw Error("invalid_structure", "element " + std::to_string(a) + " outside the universe of '" + name + "'");
}

bool Structure::has_symbol(const std::string& name) const {
  return relations_.count(name) || numbers_.count(name) || skeletons_.count(name);
}

void Structure::add_relation(const std::string& name, std::size_t arity, const std::vector<std::vector<std::size_t>>& tuples) {
  check_fresh(name);
  Relation r;
  r.arity = arity;
  for (const auto& t : tuples) {
    check_args(name, arity, t);
    r.keys.push_back(key(t));
  }
  std::sort(r.keys.begin(), r.keys.end());
  r.keys.erase(std::unique(r.keys.begin(), r.keys.end()), r.keys.end());
  relations_.emplace(name, std::move(r));
}

void Structure::add_number_function(const std::string& name, std::size_t arity, std::optional<Value> fallback) {
  check_fresh(name);
  NumberFunction f;
  f.arity = arity;
  f.fallback = fallback ? *fallback : domain_.zero();
  if (!(f.fallback.domain() == domain_)) throw Error("domain_mismatch", "default of '" + name + "' outside " + domain_.name());
  numbers_.emplace(name, std::move(f));
}

void Structure::set_number(const std::string& name, const std::vector<std::size_t>& args, const Value& v) {
  auto it = numbers_.find(name);
  if (it == numbers_.end()) throw Error("unknown_symbol", "no number function '" + name + "'");
  check_args(name, it->second.arity, args);
  if (!(v.domain() == domain_)) throw Error("domain_mismatch", "value of '" + name + "' outside " + domain_.name());
  it->second.entries.insert_or_assign(key(args), v);
}

void Structure::add_skeleton_function(const std::string& name, std::size_t arity, std::size_t fallback) {
  check_fresh(name);
  if (fallback >= universe_) throw Error("invalid_structure", "default of '" + name + "' outside the universe");
  SkeletonFunction f;
  f.arity = arity;
  f.fallback = fallback;
  skeletons_.emplace(name, std::move(f));
}

void Structure::set_skeleton(const std::string& name, const std::vector<std::size_t>& args, std::size_t v) {
  auto it = skeletons_.find(name);
  if (it == skeletons_.end()) throw Error("unknown_symbol", "no skeleton function '" + name + "'");
  check_args(name, it->second.arity, args);
  if (v >= universe_) throw Error("invalid_structure", "value of '" + name + "' outside the universe");
  it->second.entries.insert_or_assign(key(args), v);
}

const Structure::Relation* Structure::relation(const std::string& name) const {
  auto it = relations_.find(name);
  return it == relations_.end() ? nullptr : &it->second;
}

const Structure::NumberFunction* Structure::number_function(const std::string& name) const {
  auto it = numbers_.find(name);
  return it == numbers_.end() ? nullptr : &it->second;
}

const Structure::SkeletonFunction* Structure::skeleton_function(const std::string& name) const {
  auto it = skeletons_.find(name);
  return it == skeletons_.end() ? nullptr : &it->second;
}

bool Structure::holds(const std::string& name, const std::vector<std::size_t>& args) const {
  const Relation* r = relation(name);
  if (!r) throw Error("unknown_symbol", "no relation '" + name + "'");
  check_args(name, r->arity, args);
  return std::binary_search(r->keys.begin(), r->keys.end(), key(args));
}

Value Structure::number(const std::string& name, const std::vector<std::size_t>& args) const {
  const NumberFunction* f = number_function(name);
  if (!f) throw Error("unknown_symbol", "no number function '" + name + "'");
  check_args(name, f->arity, args);
  auto it = f->entries.find(key(args));
  return it == f->entries.end() ? f->fallback : it->second;
}

std::size_t Structure::skeleton(const std::string& name, const std::vector<std::size_t>& args) const {
  const SkeletonFunction* f = skeleton_function(name);
  if (!f) throw Error("unknown_symbol", "no skeleton function '" + name + "'");
  check_args(name, f->arity, args);
  auto it = f->entries.find(key(args));
  return it == f->entries.end() ? f->fallback : it->second;
}

// ---------------------------------------------------------------------------
// Evaluation

std::uint64_t gfr_depth_cap(std::size_t n, std::size_t width, std::size_t exponent) {
  std::uint64_t big = 1;
  for (std::size_t k = 0; k < width; ++k) big *= n;
  return countdown_bound(std::max<std::uint64_t>(big, 2), exponent);
}

namespace {

void flatten(const FormulaPtr& f, Formula::Kind kind, std::vector<FormulaPtr>& out) {
  if (f->kind == kind) {
    for (const auto& c : f->children) flatten(c, kind, out);
  } else {
    out.push_back(f);
  }
}

std::vector<FormulaPtr> conjuncts(const FormulaPtr& f) {
  std::vector<FormulaPtr> out;
  flatten(f, Formula::Kind::conjunction, out);
  return out;
}

bool mentions(const IndexTermPtr& h, const Vars& vars) {
  if (h->kind == IndexTerm::Kind::variable) return std::find(vars.begin(), vars.end(), h->name) != vars.end();
  for (const auto& a : h->args)
    if (mentions(a, vars)) return true;
  return false;
}

/// A relation atom among the conjuncts whose trailing arguments are exactly
/// `vars` and whose leading arguments do not mention them.
const Formula* scan_atom(const FormulaPtr& f, const Vars& vars) {
  if (!f || vars.empty()) return nullptr;
  for (const auto& c : conjuncts(f)) {
    if (c->kind != Formula::Kind::relation || c->lhs.size() < vars.size()) continue;
    const std::size_t lead = c->lhs.size() - vars.size();
    bool ok = true;
    for (std::size_t k = 0; k < vars.size() && ok; ++k) {
      const auto& a = c->lhs[lead + k];
      ok = a->kind == IndexTerm::Kind::variable && a->name == vars[k];
    }
    for (std::size_t k = 0; k < lead && ok; ++k) ok = !mentions(c->lhs[k], vars);
    if (ok) return c.get();
  }
  return nullptr;
}

struct Memo {
  Value value;
  std::size_t height = 0;
  std::size_t counted = 0;
};

struct VecHash {
  std::size_t operator()(const std::vector<std::size_t>& v) const noexcept {
    std::size_t h = v.size();
    for (auto x : v) h = h * 1000003u ^ x;
    return h;
  }
};

struct Frame {
  RecursionPtr def;
  Env env;
  std::unordered_map<std::vector<std::size_t>, Memo, VecHash> memo;
  std::set<std::vector<std::size_t>> active;
  std::size_t stats_index = 0;
};

struct Accumulator {
  Frame* frame;
  const std::vector<std::size_t>* args;
  std::size_t height = 0;
  std::size_t counted = 0;
};

std::string render_args(const std::string& f, const std::vector<std::size_t>& args) {
  std::string s = f + "(";
  for (std::size_t k = 0; k < args.size(); ++k) s += (k ? "," : "") + std::to_string(args[k]);
  return s + ")";
}

}  // namespace

struct Evaluator::Impl {
  const Structure& s;
  EvalOptions options;
  std::vector<GfrStats> stats;
  std::vector<Frame*> frames;
  std::vector<Accumulator*> accs;
  std::unordered_map<const NumberTerm*, Value> constants;
  std::unordered_map<const void*, const Formula*> scans;

  Impl(const Structure& st, EvalOptions o) : s(st), options(o) {}

  std::size_t lookup(const Env& env, const std::string& name) {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first == name) return it->second;
    throw Error("unbound_variable", "unbound variable '" + name + "'");
  }

  std::size_t index(const IndexTermPtr& h, const Env& env) {
    switch (h->kind) {
      case IndexTerm::Kind::variable: return lookup(env, h->name);
      case IndexTerm::Kind::element:
        if (h->element >= s.universe())
          throw Error("invalid_argument", "element " + std::to_string(h->element) + " outside the universe");
        return h->element;
      case IndexTerm::Kind::apply: return s.skeleton(h->name, indices(h->args, env));
    }
    return 0;
  }

  std::vector<std::size_t> indices(const std::vector<IndexTermPtr>& hs, const Env& env) {
    std::vector<std::size_t> out;
    out.reserve(hs.size());
    for (const auto& h : hs) out.push_back(index(h, env));
    return out;
  }

  const Formula* plan(const void* owner, const FormulaPtr& f, const Vars& vars) {
    auto it = scans.find(owner);
    if (it != scans.end()) return it->second;
    const Formula* atom = scan_atom(f, vars);
    scans.emplace(owner, atom);
    return atom;
  }

  std::uint64_t tuple_count(std::size_t k) {
    std::uint64_t total = 1;
    for (std::size_t j = 0; j < k; ++j) {
      if (total > std::numeric_limits<std::uint64_t>::max() / s.universe())
        throw Error("overflow", "too many tuples to enumerate");
      total *= s.universe();
    }
    return total;
  }

  /// Visits candidate tuples for `vars` (bound in env at the back) in
  /// ascending or descending lexicographic order; `visit` returns false to stop.
  void enumerate(const Formula* atom, const Vars& vars, Env& env, bool descending,
                 const std::function<bool()>& visit) {
    const std::size_t k = vars.size();
    const std::size_t base = env.size();
    for (const auto& v : vars) env.emplace_back(v, 0);
    auto bind = [&](std::uint64_t key) {
      auto digits = s.unkey(key, k);
      for (std::size_t j = 0; j < k; ++j) env[base + j].second = digits[j];
    };
    try {
      if (atom) {
        const auto* r = s.relation(atom->name);
        if (!r) throw Error("unknown_symbol", "no relation '" + atom->name + "'");
        if (r->arity != atom->lhs.size())
          throw Error("arity", "'" + atom->name + "' takes " + std::to_string(r->arity) + " arguments");
        const std::size_t lead = atom->lhs.size() - k;
        std::vector<std::size_t> prefix;
        for (std::size_t j = 0; j < lead; ++j) prefix.push_back(index(atom->lhs[j], env));
        const std::uint64_t span = tuple_count(k);
        const std::uint64_t lo = (lead == 0 ? 0 : s.key(prefix)) * span;
        const std::uint64_t hi = lo + span;
        auto first = std::lower_bound(r->keys.begin(), r->keys.end(), lo);
        auto last = std::lower_bound(first, r->keys.end(), hi);
        if (descending) {
          for (auto it = last; it != first;) {
            bind(*--it - lo);
            if (!visit()) break;
          }
        } else {
          for (auto it = first; it != last; ++it) {
            bind(*it - lo);
            if (!visit()) break;
          }
        }
      } else {
        const std::uint64_t total = tuple_count(k);
        for (std::uint64_t j = 0; j < total; ++j) {
          bind(descending ? total - 1 - j : j);
          if (!visit()) break;
        }
      }
    } catch (...) {
      env.resize(base);
      throw;
    }
    env.resize(base);
  }

  Value constant(const NumberTerm& t) {
    auto it = constants.find(&t);
    if (it != constants.end()) return it->second;
    Value v = parse_value(s.domain(), t.literal);
    constants.emplace(&t, v);
    return v;
  }

  Value term(const NumberTermPtr& t, Env& env) {
    const Domain& d = s.domain();
    switch (t->kind) {
      case NumberTerm::Kind::constant: return constant(*t);
      case NumberTerm::Kind::apply: {
        if (s.number_function(t->name)) return s.number(t->name, indices(t->args, env));
        if (s.relation(t->name)) return s.holds(t->name, indices(t->args, env)) ? d.one() : d.zero();
        if (s.skeleton_function(t->name))
          throw Error("sort_mismatch", "skeleton function '" + t->name + "' used as a number term");
        throw Error("unknown_symbol", "unknown symbol '" + t->name + "'");
      }
      case NumberTerm::Kind::add: {
        Value acc = d.zero();
        for (const auto& u : t->terms) acc = add(acc, term(u, env));
        return acc;
      }
      case NumberTerm::Kind::mul: {
        Value acc = d.one();
        for (const auto& u : t->terms) {
          acc = mul(acc, term(u, env));
          if (acc.is_zero()) break;  // later factors, recursive calls included, are not demanded
        }
        return acc;
      }
      case NumberTerm::Kind::sign: return sign(term(t->terms.at(0), env));
      case NumberTerm::Kind::chi: return formula(t->formula, env) ? d.one() : d.zero();
      case NumberTerm::Kind::aggregate: return aggregate(*t, env);
      case NumberTerm::Kind::recvar: return recursive(*t, env);
    }
    return d.zero();
  }

  Value aggregate(const NumberTerm& t, Env& env) {
    const Domain& d = s.domain();
    const NumberTermPtr& body = t.terms.at(0);
    const FormulaPtr& rel = t.formula;
    const Formula* atom = plan(&t, rel, t.vars);
    if (t.bounded) {
      std::vector<Value> picked;
      enumerate(atom, t.vars, env, true, [&] {
        if (rel && !formula(rel, env)) return true;
        picked.push_back(term(body, env));
        return picked.size() < 2;
      });
      // as with the relativized max, unselected tuples contribute 0
      if (t.agg == AggKind::max && rel && picked.size() < tuple_count(t.vars.size())) picked.push_back(d.zero());
      return fold(t.agg, picked);
    }
    if (t.agg == AggKind::max) {
      std::optional<Value> best;
      std::uint64_t satisfied = 0;
      enumerate(atom, t.vars, env, false, [&] {
        if (rel && !formula(rel, env)) return true;
        ++satisfied;
        Value v = term(body, env);
        if (!best || less(*best, v)) best = v;
        return true;
      });
      // relativized max is the max of chi * t over all tuples
      if (rel && satisfied < tuple_count(t.vars.size()) && (!best || less(*best, d.zero()))) best = d.zero();
      return best ? *best : d.zero();
    }
    Value acc = t.agg == AggKind::sum ? d.zero() : d.one();
    enumerate(atom, t.vars, env, false, [&] {
      if (rel && !formula(rel, env)) return true;
      Value v = term(body, env);
      acc = t.agg == AggKind::sum ? add(acc, v) : mul(acc, v);
      return true;
    });
    return acc;
  }

  Value fold(AggKind kind, const std::vector<Value>& vs) {
    const Domain& d = s.domain();
    if (kind == AggKind::max) {
      if (vs.empty()) return d.zero();
      Value best = vs.front();
      for (const auto& v : vs)
        if (less(best, v)) best = v;
      return best;
    }
    Value acc = kind == AggKind::sum ? d.zero() : d.one();
    for (const auto& v : vs) acc = kind == AggKind::sum ? add(acc, v) : mul(acc, v);
    return acc;
  }

  bool progress(const RecursionDef& def, const std::vector<std::size_t>& from, const std::vector<std::size_t>& to) {
    std::size_t offset = def.x.size();
    std::vector<std::uint64_t> y, z;
    for (const auto& block : def.y) {
      std::vector<std::size_t> a(from.begin() + offset, from.begin() + offset + block.size());
      std::vector<std::size_t> b(to.begin() + offset, to.begin() + offset + block.size());
      y.push_back(s.key(a));
      z.push_back(s.key(b));
      offset += block.size();
    }
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0 && 2 * z[j] <= y[j]) return true;
      if (z[j] > y[j]) return false;
    }
    return false;
  }

  Value recursive(const NumberTerm& t, Env& env) {
    Frame* frame = nullptr;
    for (auto it = frames.rbegin(); it != frames.rend(); ++it)
      if ((*it)->def->symbol == t.name) {
        frame = *it;
        break;
      }
    if (!frame) throw Error("unknown_symbol", "recursion symbol '" + t.name + "' used outside its block");
    const RecursionDef& def = *frame->def;
    auto args = indices(t.args, env);
    if (args.size() != def.arity())
      throw Error("arity", "'" + def.symbol + "' takes " + std::to_string(def.arity()) + " arguments");
    Memo result = call(*frame, args);
    // charge the edge to the caller's body when it belongs to the same block
    if (!accs.empty() && accs.back()->frame == frame) {
      Accumulator& acc = *accs.back();
      acc.height = std::max(acc.height, result.height + 1);
      acc.counted = std::max(acc.counted, result.counted + (progress(def, *acc.args, args) ? 1 : 0));
    }
    return result.value;
  }

  Memo call(Frame& frame, const std::vector<std::size_t>& args) {
    if (options.memoize) {
      auto it = frame.memo.find(args);
      if (it != frame.memo.end()) return it->second;
    }
    const RecursionDef& def = *frame.def;
    if (frame.active.count(args))
      throw Error("non_well_founded", "non-well-founded recursion: " + render_args(def.symbol, args) + " depends on itself");
    frame.active.insert(args);
    Accumulator acc{&frame, &args};
    accs.push_back(&acc);
    Env local = frame.env;
    std::size_t pos = 0;
    auto bind = [&](const Vars& vs) {
      for (const auto& v : vs) local.emplace_back(v, args[pos++]);
    };
    bind(def.x);
    for (const auto& b : def.y) bind(b);
    bind(def.rest);
    Memo m;
    try {
      m.value = term(def.body, local);
    } catch (...) {
      accs.pop_back();
      frame.active.erase(args);
      throw;
    }
    accs.pop_back();
    frame.active.erase(args);
    m.height = acc.height;
    m.counted = acc.counted;
    GfrStats& st = stats[frame.stats_index];
    ++st.calls;
    st.max_depth = std::max(st.max_depth, m.height);
    st.max_counted_depth = std::max(st.max_counted_depth, m.counted);
    if (options.enforce_depth_cap && m.counted > st.cap)
      throw Error("gfr_depth", "recursion depth " + std::to_string(m.counted) + " at " + render_args(def.symbol, args) +
                                   " exceeds the cap " + std::to_string(st.cap));
    if (options.memoize) frame.memo.emplace(args, m);
    return m;
  }

  bool tuple_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b, bool strict) {
    if (a.size() != b.size()) throw Error("arity", "tuple comparison needs equal lengths");
    if (strict) return a < b;
    return !(b < a);
  }

  bool formula(const FormulaPtr& f, Env& env) {
    switch (f->kind) {
      case Formula::Kind::truth: return f->value;
      case Formula::Kind::index_eq: return index(f->lhs.at(0), env) == index(f->rhs.at(0), env);
      case Formula::Kind::index_less: return index(f->lhs.at(0), env) < index(f->rhs.at(0), env);
      case Formula::Kind::num_eq: return term(f->terms.at(0), env) == term(f->terms.at(1), env);
      case Formula::Kind::num_less: return less(term(f->terms.at(0), env), term(f->terms.at(1), env));
      case Formula::Kind::relation: return s.holds(f->name, indices(f->lhs, env));
      case Formula::Kind::tuple_cmp: {
        auto a = indices(f->lhs, env);
        auto b = indices(f->rhs, env);
        if (f->cmp == TupleCmp::half_leq) {
          if (a.size() != b.size()) throw Error("arity", "tuple comparison needs equal lengths");
          if (s.universe() < 2) return true;
          return fo_half_leq(IndexTuple(a, s.universe()), IndexTuple(b, s.universe()));
        }
        return tuple_less(a, b, f->cmp == TupleCmp::lt);
      }
      case Formula::Kind::bit: {
        auto a = indices(f->lhs, env);
        auto b = indices(f->rhs, env);
        return bit_of(s.key(a), s.key(b)) == 1;
      }
      case Formula::Kind::negation: return !formula(f->children.at(0), env);
      case Formula::Kind::conjunction:
        for (const auto& c : f->children)
          if (!formula(c, env)) return false;
        return true;
      case Formula::Kind::disjunction:
        for (const auto& c : f->children)
          if (formula(c, env)) return true;
        return false;
      case Formula::Kind::implication: return !formula(f->children.at(0), env) || formula(f->children.at(1), env);
      case Formula::Kind::equivalence: return formula(f->children.at(0), env) == formula(f->children.at(1), env);
      case Formula::Kind::quantifier: return quantifier(*f, env);
      case Formula::Kind::gfr: return recursion_block(*f, env);
    }
    return false;
  }

  bool quantifier(const Formula& f, Env& env) {
    const FormulaPtr& body = f.children.at(0);
    if (!f.value) {
      bool found = false;
      enumerate(plan(&f, body, f.vars), f.vars, env, false, [&] {
        found = formula(body, env);
        return !found;
      });
      return found;
    }
    // forall over (implies A psi) only needs the tuples satisfying A
    const Formula* atom = nullptr;
    if (body->kind == Formula::Kind::implication) atom = plan(&f, body->children.at(0), f.vars);
    bool all = true;
    enumerate(atom, f.vars, env, false, [&] {
      all = formula(body, env);
      return all;
    });
    return all;
  }

  bool recursion_block(const Formula& f, Env& env) {
    const RecursionDef& def = *f.def;
    if (def.y.empty()) throw Error("invalid_formula", "recursion block '" + def.symbol + "' has no y blocks");
    Frame frame;
    frame.def = f.def;
    frame.env = env;
    frame.stats_index = stats.size();
    GfrStats st;
    st.symbol = def.symbol;
    st.exponent = def.exponent();
    st.cap = gfr_depth_cap(s.universe(), def.y.front().size(), def.exponent());
    stats.push_back(st);
    frames.push_back(&frame);
    bool result;
    try {
      result = formula(f.children.at(0), env);
    } catch (...) {
      frames.pop_back();
      throw;
    }
    frames.pop_back();
    return result;
  }
};

Evaluator::Evaluator(const Structure& s, EvalOptions options) : impl_(std::make_unique<Impl>(s, options)) {}
Evaluator::~Evaluator() = default;
bool Evaluator::formula(const FormulaPtr& f, Env& env) { return impl_->formula(f, env); }
Value Evaluator::term(const NumberTermPtr& t, Env& env) { return impl_->term(t, env); }
std::size_t Evaluator::index(const IndexTermPtr& h, const Env& env) { return impl_->index(h, env); }
const std::vector<GfrStats>& Evaluator::stats() const noexcept { return impl_->stats; }

bool eval_formula(const Structure& s, const FormulaPtr& f, const Env& env, EvalOptions options, std::vector<GfrStats>* stats) {
  Evaluator ev(s, options);
  Env local = env;
  bool r = ev.formula(f, local);
  if (stats) *stats = ev.stats();
  return r;
}

Value eval_term(const Structure& s, const NumberTermPtr& t, const Env& env, EvalOptions options) {
  Evaluator ev(s, options);
  Env local = env;
  return ev.term(t, local);
}

// ---------------------------------------------------------------------------
// Free variables and symbols

namespace {

void free_index(const IndexTermPtr& h, std::set<std::string>& bound, std::set<std::string>& out) {
  if (h->kind == IndexTerm::Kind::variable && !bound.count(h->name)) out.insert(h->name);
  for (const auto& a : h->args) free_index(a, bound, out);
}

void free_formula(const FormulaPtr& f, std::set<std::string>& bound, std::set<std::string>& out);

template <class Fn>
void with_bound(std::set<std::string>& bound, const Vars& vars, Fn fn) {
  std::vector<std::string> added;
  for (const auto& v : vars)
    if (bound.insert(v).second) added.push_back(v);
  fn();
  for (const auto& v : added) bound.erase(v);
}

void free_term(const NumberTermPtr& t, std::set<std::string>& bound, std::set<std::string>& out) {
  for (const auto& a : t->args) free_index(a, bound, out);
  if (t->kind == NumberTerm::Kind::aggregate) {
    with_bound(bound, t->vars, [&] {
      if (t->formula) free_formula(t->formula, bound, out);
      for (const auto& u : t->terms) free_term(u, bound, out);
    });
    return;
  }
  if (t->formula) free_formula(t->formula, bound, out);
  for (const auto& u : t->terms) free_term(u, bound, out);
}

void free_formula(const FormulaPtr& f, std::set<std::string>& bound, std::set<std::string>& out) {
  for (const auto& h : f->lhs) free_index(h, bound, out);
  for (const auto& h : f->rhs) free_index(h, bound, out);
  for (const auto& t : f->terms) free_term(t, bound, out);
  if (f->kind == Formula::Kind::quantifier) {
    with_bound(bound, f->vars, [&] { free_formula(f->children.at(0), bound, out); });
    return;
  }
  if (f->kind == Formula::Kind::gfr) {
    const auto& def = *f->def;
    Vars params = def.x;
    for (const auto& b : def.y) params.insert(params.end(), b.begin(), b.end());
    params.insert(params.end(), def.rest.begin(), def.rest.end());
    with_bound(bound, params, [&] { free_term(def.body, bound, out); });
  }
  for (const auto& c : f->children) free_formula(c, bound, out);
}

void symbols_index(const IndexTermPtr& h, std::set<std::string>& out) {
  if (h->kind == IndexTerm::Kind::apply) out.insert(h->name);
  for (const auto& a : h->args) symbols_index(a, out);
}

void symbols_formula(const FormulaPtr& f, std::set<std::string>& out);

void symbols_term(const NumberTermPtr& t, std::set<std::string>& out) {
  if (t->kind == NumberTerm::Kind::apply) out.insert(t->name);
  for (const auto& a : t->args) symbols_index(a, out);
  if (t->formula) symbols_formula(t->formula, out);
  for (const auto& u : t->terms) symbols_term(u, out);
}

void symbols_formula(const FormulaPtr& f, std::set<std::string>& out) {
  if (f->kind == Formula::Kind::relation) out.insert(f->name);
  for (const auto& h : f->lhs) symbols_index(h, out);
  for (const auto& h : f->rhs) symbols_index(h, out);
  for (const auto& t : f->terms) symbols_term(t, out);
  if (f->kind == Formula::Kind::gfr) symbols_term(f->def->body, out);
  for (const auto& c : f->children) symbols_formula(c, out);
}

bool has_recvar(const NumberTermPtr& t);

bool has_recvar(const FormulaPtr& f) {
  for (const auto& t : f->terms)
    if (has_recvar(t)) return true;
  for (const auto& c : f->children)
    if (has_recvar(c)) return true;
  return f->kind == Formula::Kind::gfr && has_recvar(f->def->body);
}

bool has_recvar(const NumberTermPtr& t) {
  if (t->kind == NumberTerm::Kind::recvar) return true;
  if (t->formula && has_recvar(t->formula)) return true;
  for (const auto& u : t->terms)
    if (has_recvar(u)) return true;
  return false;
}

}  // namespace

Vars free_variables(const FormulaPtr& f) {
  std::set<std::string> bound, out;
  free_formula(f, bound, out);
  return Vars(out.begin(), out.end());
}

Vars free_variables(const NumberTermPtr& t) {
  std::set<std::string> bound, out;
  free_term(t, bound, out);
  return Vars(out.begin(), out.end());
}

std::vector<std::string> used_symbols(const FormulaPtr& f) {
  std::set<std::string> out;
  symbols_formula(f, out);
  return {out.begin(), out.end()};
}

// ---------------------------------------------------------------------------
// Recursion syntax check

std::string to_string(const Diagnostic& d) {
  std::string s = d.path;
  if (d.loc.line) s += " (line " + std::to_string(d.loc.line) + ", column " + std::to_string(d.loc.column) + ")";
  return s + ": " + d.message;
}

namespace {

bool names_match(const std::vector<IndexTermPtr>& hs, const Vars& names) {
  if (hs.size() != names.size()) return false;
  for (std::size_t k = 0; k < hs.size(); ++k)
    if (hs[k]->kind != IndexTerm::Kind::variable || hs[k]->name != names[k]) return false;
  return true;
}

bool is_cmp(const FormulaPtr& f, TupleCmp cmp, const Vars& z, const Vars& y) {
  return f->kind == Formula::Kind::tuple_cmp && f->cmp == cmp && names_match(f->lhs, z) && names_match(f->rhs, y);
}

/// Disjunct j of the halving guard: half_leq(z_j, y_j) and leq(z_k, y_k) for k < j.
bool matches_disjunct(const FormulaPtr& f, std::size_t j, const std::vector<Vars>& z, const std::vector<Vars>& y) {
  auto parts = conjuncts(f);
  if (parts.size() != j + 1) return false;
  std::vector<bool> used(parts.size(), false);
  auto take = [&](TupleCmp cmp, std::size_t k) {
    for (std::size_t p = 0; p < parts.size(); ++p)
      if (!used[p] && is_cmp(parts[p], cmp, z[k], y[k])) {
        used[p] = true;
        return true;
      }
    return false;
  };
  if (!take(TupleCmp::half_leq, j)) return false;
  for (std::size_t k = 0; k < j; ++k)
    if (!take(TupleCmp::leq, k)) return false;
  return true;
}

bool matches_guard(const FormulaPtr& f, const std::vector<Vars>& z, const std::vector<Vars>& y) {
  std::vector<FormulaPtr> disjuncts;
  flatten(f, Formula::Kind::disjunction, disjuncts);
  if (disjuncts.size() != z.size()) return false;
  std::vector<bool> used(disjuncts.size(), false);
  for (std::size_t j = 0; j < z.size(); ++j) {
    bool found = false;
    for (std::size_t d = 0; d < disjuncts.size() && !found; ++d)
      if (!used[d] && matches_disjunct(disjuncts[d], j, z, y)) used[d] = found = true;
    if (!found) return false;
  }
  return true;
}

struct Binder {
  enum class Kind { guarded, unguarded_agg, quantifier } kind;
  Vars vars;
  bool bounded = false;
  std::string path;
};

class GfrChecker {
 public:
  GfrChecker(std::vector<std::string> inputs, std::vector<Diagnostic>& out) : inputs_(std::move(inputs)), out_(out) {}

  void formula(const FormulaPtr& f, const std::string& path) {
    if (f->kind == Formula::Kind::gfr) check_def(*f->def, path + "/gfr " + f->def->symbol);
    for (const auto& t : f->terms) outer_term(t, path);
    for (std::size_t k = 0; k < f->children.size(); ++k) formula(f->children[k], path);
  }

 private:
  // Outside recursion bodies only nested blocks matter.
  void outer_term(const NumberTermPtr& t, const std::string& path) {
    if (t->formula) formula(t->formula, path);
    for (const auto& u : t->terms) outer_term(u, path);
  }

  void report(const std::string& path, SourceLoc loc, std::string msg) { out_.push_back({path, loc, std::move(msg)}); }

  void check_def(const RecursionDef& def, const std::string& path) {
    def_ = &def;
    if (def.y.empty()) report(path, def.loc, "recursion needs at least one y block");
    for (const auto& b : def.y)
      if (b.empty() || b.size() != def.y.front().size()) {
        report(path, def.loc, "y blocks must share one positive width");
        break;
      }
    std::set<std::string> names;
    auto note = [&](const Vars& vs) {
      for (const auto& v : vs)
        if (!names.insert(v).second) report(path, def.loc, "parameter '" + v + "' repeated");
    };
    note(def.x);
    for (const auto& b : def.y) note(b);
    note(def.rest);
    binders_.clear();
    term(def.body, path + "/body");
    def_ = nullptr;
  }

  void term(const NumberTermPtr& t, const std::string& path) {
    switch (t->kind) {
      case NumberTerm::Kind::recvar:
        if (t->name == def_->symbol) recvar(*t, path + "/" + t->name);
        return;
      case NumberTerm::Kind::aggregate: aggregation(*t, path); return;
      case NumberTerm::Kind::chi: body_formula(t->formula, path + "/chi"); return;
      default:
        for (std::size_t k = 0; k < t->terms.size(); ++k) term(t->terms[k], path + "/" + kind_name(*t) + "[" + std::to_string(k) + "]");
    }
  }

  static std::string kind_name(const NumberTerm& t) {
    switch (t.kind) {
      case NumberTerm::Kind::add: return "+";
      case NumberTerm::Kind::mul: return "*";
      case NumberTerm::Kind::sign: return "sign";
      default: return "term";
    }
  }

  void body_formula(const FormulaPtr& f, const std::string& path) {
    if (f->kind == Formula::Kind::quantifier) {
      binders_.push_back({Binder::Kind::quantifier, f->vars, false, path});
      body_formula(f->children.at(0), path + (f->value ? "/forall" : "/exists"));
      binders_.pop_back();
      return;
    }
    if (f->kind == Formula::Kind::gfr) {
      const RecursionDef* saved = def_;
      auto saved_binders = binders_;
      check_def(*f->def, path + "/gfr " + f->def->symbol);
      def_ = saved;
      binders_ = std::move(saved_binders);
    }
    for (const auto& t : f->terms) term(t, path);
    for (const auto& c : f->children) body_formula(c, path);
  }

  void aggregation(const NumberTerm& t, const std::string& path) {
    const RecursionDef& def = *def_;
    std::string here = path + "/" + agg_name(t) + "(" + join(t.vars) + ")";
    Binder b{Binder::Kind::unguarded_agg, t.vars, t.bounded, here};
    const std::size_t w = def.y.empty() ? 0 : def.y.front().size();
    const std::size_t i = def.y.size();
    FormulaPtr guard;
    if (t.formula && w > 0 && t.vars.size() == i * w + def.rest.size()) {
      std::vector<Vars> z;
      for (std::size_t j = 0; j < i; ++j) z.emplace_back(t.vars.begin() + j * w, t.vars.begin() + (j + 1) * w);
      for (const auto& c : conjuncts(t.formula))
        if (matches_guard(c, z, def.y)) {
          guard = c;
          break;
        }
    }
    if (guard) {
      b.kind = Binder::Kind::guarded;
      for (const auto& c : conjuncts(t.formula)) {
        if (c == guard) continue;
        std::set<std::string> syms;
        symbols_formula(c, syms);
        for (const auto& in : inputs_)
          if (syms.count(in)) report(here + "/rel", c->loc, "guard condition uses input symbol '" + in + "'");
        if (has_recvar(c)) report(here + "/rel", c->loc, "guard condition uses a recursion symbol");
      }
    } else if (t.formula) {
      binders_.push_back({Binder::Kind::unguarded_agg, t.vars, t.bounded, here});
      body_formula(t.formula, here + "/rel");
      binders_.pop_back();
    }
    binders_.push_back(b);
    term(t.terms.at(0), here);
    binders_.pop_back();
  }

  void recvar(const NumberTerm& t, const std::string& path) {
    const RecursionDef& def = *def_;
    for (const auto& b : binders_)
      if (b.kind != Binder::Kind::guarded) {
        report(path, t.loc,
               std::string("recursion symbol under an unguarded ") +
                   (b.kind == Binder::Kind::quantifier ? "quantifier" : "aggregation") + " at " + b.path);
        return;
      }
    const Binder* g = nullptr;
    for (auto it = binders_.rbegin(); it != binders_.rend(); ++it) {
      Vars expect = def.x;
      expect.insert(expect.end(), it->vars.begin(), it->vars.end());
      if (names_match(t.args, expect)) {
        g = &*it;
        break;
      }
    }
    if (!g) {
      report(path, t.loc, binders_.empty() ? "recursion symbol outside any guarded aggregation"
                                           : "recursion arguments are not the parameters x followed by the variables of an enclosing guarded aggregation");
      return;
    }
    if (def.bounded && !g->bounded) report(path, t.loc, "bounded recursion requires a bounded aggregator at " + g->path);
  }

  static std::string agg_name(const NumberTerm& t) {
    std::string s = t.bounded ? "b" : "";
    switch (t.agg) {
      case AggKind::sum: return s + "sum";
      case AggKind::prod: return s + "prod";
      case AggKind::max: return s + "max";
    }
    return s;
  }

  static std::string join(const Vars& vs) {
    std::string s;
    for (std::size_t k = 0; k < vs.size(); ++k) s += (k ? " " : "") + vs[k];
    return s;
  }

  std::vector<std::string> inputs_;
  std::vector<Diagnostic>& out_;
  const RecursionDef* def_ = nullptr;
  std::vector<Binder> binders_;
};

}  // namespace

std::vector<Diagnostic> check_gfr_syntax(const FormulaPtr& f, const std::vector<std::string>& input_symbols) {
  std::vector<Diagnostic> out;
  GfrChecker(input_symbols, out).formula(f, "");
  for (auto& d : out)
    if (d.path.empty()) d.path = "/";
  return out;
}

// ---------------------------------------------------------------------------
// Max elimination

namespace {

using Subst = std::map<std::string, std::string>;

IndexTermPtr subst_index(const IndexTermPtr& h, const Subst& m) {
  if (h->kind == IndexTerm::Kind::variable) {
    auto it = m.find(h->name);
    return it == m.end() ? h : fo::var(it->second);
  }
  if (h->kind == IndexTerm::Kind::element) return h;
  std::vector<IndexTermPtr> args;
  for (const auto& a : h->args) args.push_back(subst_index(a, m));
  return fo::skel(h->name, std::move(args));
}

Subst without(const Subst& m, const Vars& vars) {
  Subst out = m;
  for (const auto& v : vars) out.erase(v);
  return out;
}

FormulaPtr subst_formula(const FormulaPtr& f, const Subst& m);

NumberTermPtr subst_term(const NumberTermPtr& t, const Subst& m) {
  if (m.empty()) return t;
  auto copy = std::make_shared<NumberTerm>(*t);
  for (auto& a : copy->args) a = subst_index(a, m);
  const Subst inner = t->kind == NumberTerm::Kind::aggregate ? without(m, t->vars) : m;
  if (copy->formula) copy->formula = subst_formula(copy->formula, inner);
  for (auto& u : copy->terms) u = subst_term(u, inner);
  return copy;
}

FormulaPtr subst_formula(const FormulaPtr& f, const Subst& m) {
  if (m.empty()) return f;
  auto copy = std::make_shared<Formula>(*f);
  for (auto& h : copy->lhs) h = subst_index(h, m);
  for (auto& h : copy->rhs) h = subst_index(h, m);
  for (auto& t : copy->terms) t = subst_term(t, m);
  Subst inner = m;
  if (f->kind == Formula::Kind::quantifier) inner = without(m, f->vars);
  if (f->kind == Formula::Kind::gfr) {
    const auto& def = *f->def;
    Vars params = def.x;
    for (const auto& b : def.y) params.insert(params.end(), b.begin(), b.end());
    params.insert(params.end(), def.rest.begin(), def.rest.end());
    auto d = std::make_shared<RecursionDef>(def);
    d->body = subst_term(def.body, without(m, params));
    copy->def = d;
  }
  for (auto& c : copy->children) c = subst_formula(c, inner);
  return copy;
}

class MaxRewriter {
 public:
  explicit MaxRewriter(MaxRewrite& out) : out_(out) {}

  FormulaPtr formula(const FormulaPtr& f, const std::string& path) {
    switch (f->kind) {
      case Formula::Kind::num_eq:
      case Formula::Kind::num_less: return atom(f, path);
      case Formula::Kind::gfr: {
        note_skipped(f->def->body, path + "/gfr " + f->def->symbol);
        auto copy = std::make_shared<Formula>(*f);
        copy->children = {formula(f->children.at(0), path)};
        return copy;
      }
      default: break;
    }
    if (f->children.empty()) return f;
    auto copy = std::make_shared<Formula>(*f);
    for (auto& c : copy->children) c = formula(c, path);
    return copy;
  }

 private:
  // Rewrites max terms exposed in the atom, i.e. reachable through + * sign.
  FormulaPtr atom(const FormulaPtr& f, const std::string& path) {
    auto copy = std::make_shared<Formula>(*f);
    for (auto& t : copy->terms) t = inner_formulas(t, path);
    const NumberTerm* target = nullptr;
    for (const auto& t : copy->terms)
      if ((target = exposed_max(t))) break;
    if (!target) return copy;
    ++out_.rewritten;
    // max with a relativizer is the max of chi * body
    NumberTermPtr body = target->terms.at(0);
    if (target->formula) body = fo::mul({fo::chi(target->formula), body});
    Subst to_y, to_x;
    Vars ys, xs;
    for (const auto& v : target->vars) {
      ys.push_back(fresh());
      xs.push_back(fresh());
      to_y[v] = ys.back();
      to_x[v] = xs.back();
    }
    NumberTermPtr fy = subst_term(body, to_y);
    NumberTermPtr fx = subst_term(body, to_x);
    for (auto& t : copy->terms) t = replace(t, target, fy);
    FormulaPtr maximal = fo::forall(xs, fo::negation(fo::num_less(fy, fx)));
    FormulaPtr result = fo::exists(ys, fo::conjunction({maximal, copy}));
    return formula(result, path);
  }

  NumberTermPtr inner_formulas(const NumberTermPtr& t, const std::string& path) {
    if (t->kind == NumberTerm::Kind::chi) {
      auto copy = std::make_shared<NumberTerm>(*t);
      copy->formula = formula(t->formula, path + "/chi");
      return copy;
    }
    if (t->kind == NumberTerm::Kind::aggregate) {
      note_skipped(t->terms.at(0), path);
      if (t->formula) note_skipped_formula(t->formula, path);
      if (t->agg == AggKind::max && !t->bounded && has_recvar(t)) {
        out_.skipped.push_back({path, t->loc, "max over a recursion symbol left in place"});
      }
      return t;
    }
    if (t->terms.empty()) return t;
    auto copy = std::make_shared<NumberTerm>(*t);
    for (auto& u : copy->terms) u = inner_formulas(u, path);
    return copy;
  }

  const NumberTerm* exposed_max(const NumberTermPtr& t) {
    if (t->kind == NumberTerm::Kind::aggregate) {
      if (t->agg == AggKind::max && !t->bounded && !has_recvar(t)) return t.get();
      return nullptr;
    }
    if (t->kind == NumberTerm::Kind::add || t->kind == NumberTerm::Kind::mul || t->kind == NumberTerm::Kind::sign)
      for (const auto& u : t->terms)
        if (auto m = exposed_max(u)) return m;
    return nullptr;
  }

  NumberTermPtr replace(const NumberTermPtr& t, const NumberTerm* target, const NumberTermPtr& with) {
    if (t.get() == target) return with;
    if (t->kind != NumberTerm::Kind::add && t->kind != NumberTerm::Kind::mul && t->kind != NumberTerm::Kind::sign) return t;
    auto copy = std::make_shared<NumberTerm>(*t);
    for (auto& u : copy->terms) u = replace(u, target, with);
    return copy;
  }

  // max terms under another binder are reported, not rewritten
  void note_skipped(const NumberTermPtr& t, const std::string& path) {
    if (t->kind == NumberTerm::Kind::aggregate && t->agg == AggKind::max && !t->bounded)
      out_.skipped.push_back({path, t->loc, "max under a term binder left in place"});
    if (t->formula) note_skipped_formula(t->formula, path);
    for (const auto& u : t->terms) note_skipped(u, path);
  }

  void note_skipped_formula(const FormulaPtr& f, const std::string& path) {
    for (const auto& t : f->terms) note_skipped(t, path);
    for (const auto& c : f->children) note_skipped_formula(c, path);
    if (f->kind == Formula::Kind::gfr) note_skipped(f->def->body, path);
  }

  std::string fresh() { return "_m" + std::to_string(++counter_); }

  MaxRewrite& out_;
  std::size_t counter_ = 0;

 public:
  void reserve_names(const FormulaPtr& f) {
    std::set<std::string> bound, names;
    free_formula(f, bound, names);
    collect_bound(f, names);
    for (const auto& n : names)
      if (n.rfind("_m", 0) == 0) {
        try {
          counter_ = std::max<std::size_t>(counter_, std::stoul(n.substr(2)));
        } catch (...) {
        }
      }
  }

 private:
  void collect_bound(const FormulaPtr& f, std::set<std::string>& out) {
    out.insert(f->vars.begin(), f->vars.end());
    for (const auto& t : f->terms) collect_bound(t, out);
    for (const auto& c : f->children) collect_bound(c, out);
    if (f->kind == Formula::Kind::gfr) collect_bound(f->def->body, out);
  }
  void collect_bound(const NumberTermPtr& t, std::set<std::string>& out) {
    out.insert(t->vars.begin(), t->vars.end());
    if (t->formula) collect_bound(t->formula, out);
    for (const auto& u : t->terms) collect_bound(u, out);
  }
};

}  // namespace

MaxRewrite rewrite_max(const FormulaPtr& f) {
  MaxRewrite out;
  MaxRewriter r(out);
  r.reserve_names(f);
  out.formula = r.formula(f, "");
  std::vector<Diagnostic> unique;
  for (const auto& d : out.skipped) {
    bool seen = false;
    for (const auto& u : unique) seen = seen || (u.path == d.path && u.message == d.message);
    if (!seen) unique.push_back(d);
  }
  out.skipped = std::move(unique);
  return out;
}

}  // namespace ringcirc
