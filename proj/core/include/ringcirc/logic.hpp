#pragma once

// FO over R-structures: index terms, number terms, formulas, aggregators and
// guarded functional recursion.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ringcirc/algebra.hpp"

namespace ringcirc {

struct SourceLoc {
  std::size_t line = 0;  // 0 when the node was built in code
  std::size_t column = 0;
};

struct IndexTerm;
struct NumberTerm;
struct Formula;
struct RecursionDef;
using IndexTermPtr = std::shared_ptr<const IndexTerm>;
using NumberTermPtr = std::shared_ptr<const NumberTerm>;
using FormulaPtr = std::shared_ptr<const Formula>;
using RecursionPtr = std::shared_ptr<const RecursionDef>;
using Vars = std::vector<std::string>;

struct IndexTerm {
  enum class Kind { variable, element, apply };
  Kind kind = Kind::variable;
  std::string name;  // variable or skeleton function
  std::size_t element = 0;
  std::vector<IndexTermPtr> args;
  SourceLoc loc;
};

enum class AggKind { sum, prod, max };

struct NumberTerm {
  enum class Kind { constant, apply, add, mul, sign, chi, aggregate, recvar };
  Kind kind = Kind::constant;
  /// Constant in the domain's text form, resolved against the structure's domain.
  std::string literal;
  std::string name;                  // apply / recvar symbol
  std::vector<IndexTermPtr> args;    // apply / recvar
  std::vector<NumberTermPtr> terms;  // add / mul operands, sign operand, aggregate body
  FormulaPtr formula;                // chi operand, aggregate relativizer (may be null)
  AggKind agg = AggKind::sum;
  bool bounded = false;
  Vars vars;
  SourceLoc loc;
};

enum class TupleCmp { leq, lt, half_leq };

struct Formula {
  enum class Kind {
    truth, index_eq, index_less, num_eq, num_less, relation, tuple_cmp, bit,
    negation, conjunction, disjunction, implication, equivalence, quantifier, gfr
  };
  Kind kind = Kind::truth;
  bool value = true;  // truth constant; universal flag for quantifiers
  std::vector<IndexTermPtr> lhs;  // index atoms, tuple comparisons, bit
  std::vector<IndexTermPtr> rhs;
  std::vector<NumberTermPtr> terms;  // num_eq / num_less
  std::string name;                  // relation symbol
  TupleCmp cmp = TupleCmp::leq;
  std::vector<FormulaPtr> children;
  Vars vars;
  RecursionPtr def;  // gfr: definition, children[0] is the body
  SourceLoc loc;
};

/// [f(x, y_1..y_i, rest) = body] for one recursion symbol.
struct RecursionDef {
  std::string symbol;
  Vars x;
  std::vector<Vars> y;  // i blocks of equal positive width
  Vars rest;
  NumberTermPtr body;
  bool bounded = false;
  SourceLoc loc;

  std::size_t exponent() const noexcept { return y.size(); }
  std::size_t arity() const;
};

namespace fo {
// Builders used by tests and the compiler.
IndexTermPtr var(std::string name);
IndexTermPtr elem(std::size_t e);
IndexTermPtr skel(std::string name, std::vector<IndexTermPtr> args);
std::vector<IndexTermPtr> vars(const Vars& names);

NumberTermPtr constant(std::string literal);
NumberTermPtr constant(long v);
NumberTermPtr apply(std::string name, std::vector<IndexTermPtr> args);
NumberTermPtr recvar(std::string name, std::vector<IndexTermPtr> args);
NumberTermPtr add(std::vector<NumberTermPtr> terms);
NumberTermPtr mul(std::vector<NumberTermPtr> terms);
NumberTermPtr sign(NumberTermPtr t);
NumberTermPtr chi(FormulaPtr f);
NumberTermPtr aggregate(AggKind kind, Vars vars, FormulaPtr relativizer, NumberTermPtr body, bool bounded = false);

FormulaPtr truth(bool v);
FormulaPtr index_eq(IndexTermPtr a, IndexTermPtr b);
FormulaPtr index_less(IndexTermPtr a, IndexTermPtr b);
FormulaPtr num_eq(NumberTermPtr a, NumberTermPtr b);
FormulaPtr num_less(NumberTermPtr a, NumberTermPtr b);
FormulaPtr relation(std::string name, std::vector<IndexTermPtr> args);
FormulaPtr tuple_cmp(TupleCmp cmp, std::vector<IndexTermPtr> a, std::vector<IndexTermPtr> b);
FormulaPtr bit(std::vector<IndexTermPtr> index, std::vector<IndexTermPtr> value);
FormulaPtr negation(FormulaPtr f);
FormulaPtr conjunction(std::vector<FormulaPtr> fs);
FormulaPtr disjunction(std::vector<FormulaPtr> fs);
FormulaPtr implication(FormulaPtr a, FormulaPtr b);
FormulaPtr equivalence(FormulaPtr a, FormulaPtr b);
FormulaPtr forall(Vars vars, FormulaPtr body);
FormulaPtr exists(Vars vars, FormulaPtr body);
FormulaPtr gfr(RecursionPtr def, FormulaPtr body);

/// The halving guard for aggregation blocks z against parameter blocks y.
FormulaPtr halving_guard(const std::vector<Vars>& z, const std::vector<Vars>& y);
}  // namespace fo

// ---------------------------------------------------------------------------
// Structures

/// Finite ordered universe 0..n-1 with named function tables. Tuples are keyed
/// by their base-n value.
class Structure {
 public:
  Structure(Domain domain, std::size_t universe);

  const Domain& domain() const noexcept { return domain_; }
  std::size_t universe() const noexcept { return universe_; }

  struct Relation {
    std::size_t arity = 0;
    std::vector<std::uint64_t> keys;  // sorted, unique
  };
  struct NumberFunction {
    std::size_t arity = 0;
    std::map<std::uint64_t, Value> entries;
    Value fallback;
  };
  struct SkeletonFunction {
    std::size_t arity = 0;
    std::map<std::uint64_t, std::size_t> entries;
    std::size_t fallback = 0;
  };

  void add_relation(const std::string& name, std::size_t arity, const std::vector<std::vector<std::size_t>>& tuples);
  /// Sparse table; tuples not listed map to `fallback` (domain zero when unset).
  void add_number_function(const std::string& name, std::size_t arity, std::optional<Value> fallback = std::nullopt);
  void set_number(const std::string& name, const std::vector<std::size_t>& args, const Value& v);
  void add_skeleton_function(const std::string& name, std::size_t arity, std::size_t fallback = 0);
  void set_skeleton(const std::string& name, const std::vector<std::size_t>& args, std::size_t v);

  const Relation* relation(const std::string& name) const;
  const NumberFunction* number_function(const std::string& name) const;
  const SkeletonFunction* skeleton_function(const std::string& name) const;
  const std::map<std::string, Relation>& relations() const noexcept { return relations_; }
  const std::map<std::string, NumberFunction>& number_functions() const noexcept { return numbers_; }
  const std::map<std::string, SkeletonFunction>& skeleton_functions() const noexcept { return skeletons_; }
  bool has_symbol(const std::string& name) const;

  bool holds(const std::string& name, const std::vector<std::size_t>& args) const;
  Value number(const std::string& name, const std::vector<std::size_t>& args) const;
  std::size_t skeleton(const std::string& name, const std::vector<std::size_t>& args) const;

  std::uint64_t key(const std::vector<std::size_t>& args) const;
  std::vector<std::size_t> unkey(std::uint64_t key, std::size_t arity) const;

 private:
  void check_args(const std::string& name, std::size_t arity, const std::vector<std::size_t>& args) const;
  void check_fresh(const std::string& name) const;

  Domain domain_;
  std::size_t universe_;
  std::map<std::string, Relation> relations_;
  std::map<std::string, NumberFunction> numbers_;
  std::map<std::string, SkeletonFunction> skeletons_;
};

// ---------------------------------------------------------------------------
// Evaluation

using Env = std::vector<std::pair<std::string, std::size_t>>;

struct EvalOptions {
  bool memoize = true;
  /// Raise an error when the counted recursion depth exceeds the cap.
  bool enforce_depth_cap = true;
};

/// Per recursion block, accumulated over one evaluation.
struct GfrStats {
  std::string symbol;
  std::size_t exponent = 0;
  std::size_t calls = 0;       // bodies evaluated
  std::size_t max_depth = 0;   // longest dependency chain, in edges
  /// Longest chain counting only steps that halve some non-zero y block
  /// (earlier blocks not increasing). Degenerate steps at zero blocks are
  /// excluded; this is the quantity the cap bounds.
  std::size_t max_counted_depth = 0;
  std::uint64_t cap = 0;  // (floor(log2(N-1)) + 2)^i - 1 with N = n^width
};

class Evaluator {
 public:
  explicit Evaluator(const Structure& s, EvalOptions options = {});
  ~Evaluator();
  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  bool formula(const FormulaPtr& f, Env& env);
  Value term(const NumberTermPtr& t, Env& env);
  std::size_t index(const IndexTermPtr& h, const Env& env);

  const std::vector<GfrStats>& stats() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

bool eval_formula(const Structure& s, const FormulaPtr& f, const Env& env = {}, EvalOptions options = {},
                  std::vector<GfrStats>* stats = nullptr);
Value eval_term(const Structure& s, const NumberTermPtr& t, const Env& env = {}, EvalOptions options = {});

/// Cap on the counted recursion depth for blocks of `width` digits over a
/// universe of size n.
std::uint64_t gfr_depth_cap(std::size_t n, std::size_t width, std::size_t exponent);

// ---------------------------------------------------------------------------
// Static checks and rewrites

struct Diagnostic {
  std::string path;
  SourceLoc loc;
  std::string message;
};
std::string to_string(const Diagnostic& d);

/// Checks every recursion block in `f`. `input_symbols` lists the symbols of
/// the input structure that must not occur in a guard's remaining relativizer.
std::vector<Diagnostic> check_gfr_syntax(const FormulaPtr& f, const std::vector<std::string>& input_symbols = {"f_element"});

Vars free_variables(const FormulaPtr& f);
Vars free_variables(const NumberTermPtr& t);

struct MaxRewrite {
  FormulaPtr formula;
  std::size_t rewritten = 0;
  std::vector<Diagnostic> skipped;  // max terms left in place
};

/// Eliminates unrelativized max aggregators: an atom A[max_x F(x)] becomes
/// exists y (forall x not F(y) < F(x)) and A[F(y)], innermost first. A max
/// term inside a recursion body or under another term binder is left alone
/// and reported.
MaxRewrite rewrite_max(const FormulaPtr& f);

/// Symbols applied anywhere in `f` (relations, number and skeleton functions).
std::vector<std::string> used_symbols(const FormulaPtr& f);

}  // namespace ringcirc
