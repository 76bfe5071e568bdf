#include "ringcirc/sexpr.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace ringcirc {

namespace {

struct Sx {
  bool list = false;
  bool quoted = false;
  std::string atom;
  std::vector<Sx> items;
  SourceLoc loc;
};

[[noreturn]] void fail(SourceLoc loc, const std::string& msg) {
  throw Error("syntax", "line " + std::to_string(loc.line) + ", column " + std::to_string(loc.column) + ": " + msg);
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  Sx read_all() {
    skip();
    if (pos_ >= text_.size()) fail(here(), "empty input");
    Sx s = read();
    skip();
    if (pos_ < text_.size()) fail(here(), "unexpected text after the expression");
    return s;
  }

 private:
  SourceLoc here() const { return {line_, col_}; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Sx read() {
    Sx s;
    s.loc = here();
    char c = text_[pos_];
    if (c == '(') {
      s.list = true;
      advance();
      while (true) {
        skip();
        if (pos_ >= text_.size()) fail(s.loc, "unbalanced '('");
        if (text_[pos_] == ')') {
          advance();
          return s;
        }
        s.items.push_back(read());
      }
    }
    if (c == ')') fail(s.loc, "unexpected ')'");
    if (c == '"') {
      advance();
      s.quoted = true;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        s.atom += text_[pos_];
        advance();
      }
      if (pos_ >= text_.size()) fail(s.loc, "unterminated string");
      advance();
      return s;
    }
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == '"' || d == ';') break;
      s.atom += d;
      advance();
    }
    return s;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

bool is_number(const std::string& a) {
  std::size_t k = 0;
  if (k < a.size() && a[k] == '-') ++k;
  const std::size_t start = k;
  while (k < a.size() && std::isdigit(static_cast<unsigned char>(a[k]))) ++k;
  if (k == start) return false;
  if (k == a.size()) return true;
  if (a[k] != '/') return false;
  const std::size_t den = ++k;
  while (k < a.size() && std::isdigit(static_cast<unsigned char>(a[k]))) ++k;
  return k > den && k == a.size();
}

bool is_natural(const std::string& a) {
  return !a.empty() && std::all_of(a.begin(), a.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

const std::set<std::string>& formula_heads() {
  static const std::set<std::string> heads{"=", "<", "num=", "num<", "leq", "lt", "half-leq", "bit", "not", "and",
                                           "or", "implies", "iff", "forall", "exists", "gfr", "bgfr"};
  return heads;
}

const std::set<std::string>& term_heads() {
  static const std::set<std::string> heads{"+", "*", "sign", "chi", "sum", "prod", "max", "bsum", "bprod", "bmax"};
  return heads;
}

class Parser {
 public:
  FormulaPtr formula(const Sx& s) {
    if (!s.list) {
      if (s.atom == "true" || s.atom == "false") return located(fo::truth(s.atom == "true"), s);
      fail(s.loc, "expected a formula, got '" + s.atom + "'");
    }
    if (s.items.empty()) fail(s.loc, "empty formula");
    const Sx& head = s.items.front();
    if (head.list || head.quoted) fail(head.loc, "expected a formula head");
    const std::string& h = head.atom;
    auto arity = [&](std::size_t n) {
      if (s.items.size() != n + 1) fail(s.loc, "'" + h + "' takes " + std::to_string(n) + " operands");
    };
    if (h == "=" || h == "<") {
      arity(2);
      return located(h == "=" ? fo::index_eq(index(s.items[1]), index(s.items[2]))
                              : fo::index_less(index(s.items[1]), index(s.items[2])),
                     s);
    }
    if (h == "num=" || h == "num<") {
      arity(2);
      return located(h == "num=" ? fo::num_eq(term(s.items[1]), term(s.items[2]))
                                 : fo::num_less(term(s.items[1]), term(s.items[2])),
                     s);
    }
    if (h == "leq" || h == "lt" || h == "half-leq") {
      arity(2);
      TupleCmp c = h == "leq" ? TupleCmp::leq : h == "lt" ? TupleCmp::lt : TupleCmp::half_leq;
      auto a = tuple(s.items[1]);
      auto b = tuple(s.items[2]);
      if (a.size() != b.size()) fail(s.loc, "tuple comparison needs tuples of equal length");
      return located(fo::tuple_cmp(c, std::move(a), std::move(b)), s);
    }
    if (h == "bit") {
      arity(2);
      return located(fo::bit(tuple(s.items[1]), tuple(s.items[2])), s);
    }
    if (h == "not") {
      arity(1);
      return located(fo::negation(formula(s.items[1])), s);
    }
    if (h == "and" || h == "or") {
      std::vector<FormulaPtr> cs;
      for (std::size_t k = 1; k < s.items.size(); ++k) cs.push_back(formula(s.items[k]));
      return located(h == "and" ? fo::conjunction(std::move(cs)) : fo::disjunction(std::move(cs)), s);
    }
    if (h == "implies" || h == "iff") {
      arity(2);
      auto a = formula(s.items[1]);
      auto b = formula(s.items[2]);
      return located(h == "implies" ? fo::implication(a, b) : fo::equivalence(a, b), s);
    }
    if (h == "forall" || h == "exists") {
      arity(2);
      Vars vs = variables(s.items[1]);
      auto body = formula(s.items[2]);
      return located(h == "forall" ? fo::forall(vs, body) : fo::exists(vs, body), s);
    }
    if (h == "gfr" || h == "bgfr") return recursion(s, h == "bgfr");
    if (term_heads().count(h)) fail(head.loc, "'" + h + "' builds a number term, not a formula");
    if (is_number(h)) fail(head.loc, "expected a formula head, got '" + h + "'");
    std::vector<IndexTermPtr> args;
    for (std::size_t k = 1; k < s.items.size(); ++k) args.push_back(index(s.items[k]));
    return located(fo::relation(h, std::move(args)), s);
  }

  NumberTermPtr term(const Sx& s) {
    if (!s.list) {
      if (s.quoted) return located(fo::constant(s.atom), s);
      if (is_number(s.atom)) return located(fo::constant(s.atom), s);
      fail(s.loc, "expected a number term, got '" + s.atom + "'");
    }
    if (s.items.empty()) fail(s.loc, "empty term");
    const Sx& head = s.items.front();
    if (head.list || head.quoted) fail(head.loc, "expected a term head");
    const std::string& h = head.atom;
    if (h == "+" || h == "*") {
      if (s.items.size() < 2) fail(s.loc, "'" + h + "' needs operands");
      std::vector<NumberTermPtr> ts;
      for (std::size_t k = 1; k < s.items.size(); ++k) ts.push_back(term(s.items[k]));
      return located(h == "+" ? fo::add(std::move(ts)) : fo::mul(std::move(ts)), s);
    }
    if (h == "sign" || h == "chi") {
      if (s.items.size() != 2) fail(s.loc, "'" + h + "' takes 1 operand");
      return located(h == "sign" ? fo::sign(term(s.items[1])) : fo::chi(formula(s.items[1])), s);
    }
    if (h == "sum" || h == "prod" || h == "max" || h == "bsum" || h == "bprod" || h == "bmax") {
      const bool bounded = h.front() == 'b';
      const std::string base = bounded ? h.substr(1) : h;
      AggKind kind = base == "sum" ? AggKind::sum : base == "prod" ? AggKind::prod : AggKind::max;
      if (s.items.size() != 3 && s.items.size() != 4) fail(s.loc, "'" + h + "' takes (vars) [(rel f)] t");
      Vars vs = variables(s.items[1]);
      FormulaPtr rel;
      if (s.items.size() == 4) {
        const Sx& r = s.items[2];
        if (!r.list || r.items.size() != 2 || r.items[0].list || r.items[0].atom != "rel")
          fail(r.loc, "expected (rel formula)");
        rel = formula(r.items[1]);
      }
      return located(fo::aggregate(kind, vs, rel, term(s.items.back()), bounded), s);
    }
    if (formula_heads().count(h)) fail(head.loc, "'" + h + "' builds a formula; wrap it in (chi ...)");
    if (is_number(h)) fail(head.loc, "expected a term head, got '" + h + "'");
    std::vector<IndexTermPtr> args;
    for (std::size_t k = 1; k < s.items.size(); ++k) args.push_back(index(s.items[k]));
    if (std::find(scope_.begin(), scope_.end(), h) != scope_.end()) return located(fo::recvar(h, std::move(args)), s);
    return located(fo::apply(h, std::move(args)), s);
  }

  IndexTermPtr index(const Sx& s) {
    if (s.quoted) fail(s.loc, "expected an index term");
    if (!s.list) {
      if (is_natural(s.atom)) return located(fo::elem(std::stoul(s.atom)), s);
      if (is_number(s.atom)) fail(s.loc, "universe elements are natural numbers");
      if (formula_heads().count(s.atom) || term_heads().count(s.atom) || s.atom == "true" || s.atom == "false")
        fail(s.loc, "reserved word '" + s.atom + "' used as a variable");
      return located(fo::var(s.atom), s);
    }
    if (s.items.empty() || s.items[0].list) fail(s.loc, "expected a skeleton function application");
    std::vector<IndexTermPtr> args;
    for (std::size_t k = 1; k < s.items.size(); ++k) args.push_back(index(s.items[k]));
    return located(fo::skel(s.items[0].atom, std::move(args)), s);
  }

 private:
  template <class T>
  static std::shared_ptr<const T> located(std::shared_ptr<const T> p, const Sx& s) {
    auto copy = std::const_pointer_cast<T>(p);
    copy->loc = s.loc;
    return copy;
  }

  std::vector<IndexTermPtr> tuple(const Sx& s) {
    if (!s.list) return {index(s)};
    std::vector<IndexTermPtr> out;
    for (const auto& item : s.items) out.push_back(index(item));
    return out;
  }

  Vars variables(const Sx& s) {
    Vars vs;
    auto one = [&](const Sx& v) {
      if (v.list || v.quoted || is_number(v.atom) || v.atom.empty()) fail(v.loc, "expected a variable name");
      vs.push_back(v.atom);
    };
    if (s.list) {
      for (const auto& v : s.items) one(v);
    } else {
      one(s);
    }
    return vs;
  }

  FormulaPtr recursion(const Sx& s, bool bounded) {
    if (s.items.size() != 5) fail(s.loc, "expected (gfr f ((x..) (y1..) .. (rest..)) t formula)");
    const Sx& sym = s.items[1];
    if (sym.list || sym.quoted) fail(sym.loc, "expected the recursion symbol");
    const Sx& params = s.items[2];
    if (!params.list || params.items.size() < 3) fail(params.loc, "parameters need (x..), at least one y block and (rest..)");
    auto def = std::make_shared<RecursionDef>();
    def->symbol = sym.atom;
    def->bounded = bounded;
    def->loc = s.loc;
    auto block = [&](const Sx& b) {
      if (!b.list) fail(b.loc, "parameter blocks are lists");
      return variables(b);
    };
    def->x = block(params.items.front());
    for (std::size_t k = 1; k + 1 < params.items.size(); ++k) def->y.push_back(block(params.items[k]));
    def->rest = block(params.items.back());
    scope_.push_back(def->symbol);
    def->body = term(s.items[3]);
    auto body = formula(s.items[4]);
    scope_.pop_back();
    return located(fo::gfr(def, body), s);
  }

  std::vector<std::string> scope_;
};

std::string join_index(const std::vector<IndexTermPtr>& hs) {
  std::string s = "(";
  for (std::size_t k = 0; k < hs.size(); ++k) s += (k ? " " : "") + to_sexpr(hs[k]);
  return s + ")";
}

std::string join_vars(const Vars& vs) {
  std::string s = "(";
  for (std::size_t k = 0; k < vs.size(); ++k) s += (k ? " " : "") + vs[k];
  return s + ")";
}

std::string apply_form(const std::string& head, const std::vector<IndexTermPtr>& args) {
  std::string s = "(" + head;
  for (const auto& a : args) s += " " + to_sexpr(a);
  return s + ")";
}

}  // namespace

FormulaPtr parse_formula(std::string_view text) {
  Reader r(text);
  return Parser().formula(r.read_all());
}

NumberTermPtr parse_term(std::string_view text) {
  Reader r(text);
  return Parser().term(r.read_all());
}

std::string to_sexpr(const IndexTermPtr& h) {
  switch (h->kind) {
    case IndexTerm::Kind::variable: return h->name;
    case IndexTerm::Kind::element: return std::to_string(h->element);
    case IndexTerm::Kind::apply: return apply_form(h->name, h->args);
  }
  return "?";
}

std::string to_sexpr(const NumberTermPtr& t) {
  switch (t->kind) {
    case NumberTerm::Kind::constant:
      return is_number(t->literal) ? t->literal : "\"" + t->literal + "\"";
    case NumberTerm::Kind::apply:
    case NumberTerm::Kind::recvar: return apply_form(t->name, t->args);
    case NumberTerm::Kind::add:
    case NumberTerm::Kind::mul: {
      std::string s = t->kind == NumberTerm::Kind::add ? "(+" : "(*";
      for (const auto& u : t->terms) s += " " + to_sexpr(u);
      return s + ")";
    }
    case NumberTerm::Kind::sign: return "(sign " + to_sexpr(t->terms.at(0)) + ")";
    case NumberTerm::Kind::chi: return "(chi " + to_sexpr(t->formula) + ")";
    case NumberTerm::Kind::aggregate: {
      std::string head = t->agg == AggKind::sum ? "sum" : t->agg == AggKind::prod ? "prod" : "max";
      std::string s = "(" + std::string(t->bounded ? "b" : "") + head + " " + join_vars(t->vars);
      if (t->formula) s += " (rel " + to_sexpr(t->formula) + ")";
      return s + " " + to_sexpr(t->terms.at(0)) + ")";
    }
  }
  return "?";
}

std::string to_sexpr(const FormulaPtr& f) {
  auto nary = [&](const std::string& head) {
    std::string s = "(" + head;
    for (const auto& c : f->children) s += " " + to_sexpr(c);
    return s + ")";
  };
  switch (f->kind) {
    case Formula::Kind::truth: return f->value ? "true" : "false";
    case Formula::Kind::index_eq: return "(= " + to_sexpr(f->lhs.at(0)) + " " + to_sexpr(f->rhs.at(0)) + ")";
    case Formula::Kind::index_less: return "(< " + to_sexpr(f->lhs.at(0)) + " " + to_sexpr(f->rhs.at(0)) + ")";
    case Formula::Kind::num_eq: return "(num= " + to_sexpr(f->terms.at(0)) + " " + to_sexpr(f->terms.at(1)) + ")";
    case Formula::Kind::num_less: return "(num< " + to_sexpr(f->terms.at(0)) + " " + to_sexpr(f->terms.at(1)) + ")";
    case Formula::Kind::relation: return apply_form(f->name, f->lhs);
    case Formula::Kind::tuple_cmp: {
      std::string head = f->cmp == TupleCmp::leq ? "leq" : f->cmp == TupleCmp::lt ? "lt" : "half-leq";
      return "(" + head + " " + join_index(f->lhs) + " " + join_index(f->rhs) + ")";
    }
    case Formula::Kind::bit: return "(bit " + join_index(f->lhs) + " " + join_index(f->rhs) + ")";
    case Formula::Kind::negation: return nary("not");
    case Formula::Kind::conjunction: return nary("and");
    case Formula::Kind::disjunction: return nary("or");
    case Formula::Kind::implication: return nary("implies");
    case Formula::Kind::equivalence: return nary("iff");
    case Formula::Kind::quantifier:
      return "(" + std::string(f->value ? "forall" : "exists") + " " + join_vars(f->vars) + " " +
             to_sexpr(f->children.at(0)) + ")";
    case Formula::Kind::gfr: {
      const auto& d = *f->def;
      std::string params = "(" + join_vars(d.x);
      for (const auto& b : d.y) params += " " + join_vars(b);
      params += " " + join_vars(d.rest) + ")";
      return "(" + std::string(d.bounded ? "bgfr" : "gfr") + " " + d.symbol + " " + params + " " + to_sexpr(d.body) +
             " " + to_sexpr(f->children.at(0)) + ")";
    }
  }
  return "?";
}

}  // namespace ringcirc
