#include "avstl/formula.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "avstl/errors.hpp"

namespace avstl {

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (std::isnan(lo) || std::isnan(hi)) throw std::invalid_argument("interval endpoint is NaN");
  if (lo < 0.0) throw std::invalid_argument("interval endpoints must be nonnegative");
  if (std::isinf(lo)) throw std::invalid_argument("interval lower endpoint must be finite");
  if (!(lo < hi)) throw std::invalid_argument("interval must be non-singular (lo < hi)");
}

Interval Interval::unbounded(double lo) {
  return Interval(lo, std::numeric_limits<double>::infinity());
}

bool is_temporal(Op op) {
  switch (op) {
    case Op::Until:
    case Op::AvgUntil:
    case Op::Release:
    case Op::AvgRelease:
    case Op::Eventually:
    case Op::Always:
    case Op::AvgEventually:
    case Op::AvgAlways:
      return true;
    default:
      return false;
  }
}

bool is_averaged(Op op) {
  return op == Op::AvgUntil || op == Op::AvgRelease || op == Op::AvgEventually ||
         op == Op::AvgAlways;
}

bool is_unary_temporal(Op op) {
  return op == Op::Eventually || op == Op::Always || op == Op::AvgEventually ||
         op == Op::AvgAlways;
}

bool is_binary_temporal(Op op) {
  return op == Op::Until || op == Op::AvgUntil || op == Op::Release || op == Op::AvgRelease;
}

namespace {

FormulaPtr make(Op op, std::optional<Interval> i, std::optional<Atomic> a, FormulaPtr l,
                FormulaPtr r) {
  return std::make_shared<FormulaNode>(FormulaNode{op, std::move(i), std::move(a),
                                                   std::move(l), std::move(r)});
}

}  // namespace

Formula Formula::verum() { return Formula(make(Op::True, {}, {}, nullptr, nullptr)); }
Formula Formula::falsum() { return Formula(make(Op::False, {}, {}, nullptr, nullptr)); }

Formula Formula::atom(Atomic a) {
  if (std::isnan(a.threshold) || std::isinf(a.threshold))
    throw std::invalid_argument("atom threshold must be finite");
  if (a.variable.empty()) throw std::invalid_argument("atom variable must be named");
  return Formula(make(Op::Atom, {}, std::move(a), nullptr, nullptr));
}

Formula Formula::prop(const std::string& name) {
  return atom(Atomic{name, Relation::Ge, 0.0});
}

Formula Formula::negation(Formula f) {
  return Formula(make(Op::Not, {}, {}, f.node_, nullptr));
}
Formula Formula::conjunction(Formula a, Formula b) {
  return Formula(make(Op::And, {}, {}, a.node_, b.node_));
}
Formula Formula::disjunction(Formula a, Formula b) {
  return Formula(make(Op::Or, {}, {}, a.node_, b.node_));
}
Formula Formula::implication(Formula a, Formula b) {
  return Formula(make(Op::Implies, {}, {}, a.node_, b.node_));
}
Formula Formula::until(Interval i, Formula a, Formula b) {
  return Formula(make(Op::Until, i, {}, a.node_, b.node_));
}
Formula Formula::avg_until(Interval i, Formula a, Formula b) {
  return Formula(make(Op::AvgUntil, i, {}, a.node_, b.node_));
}
Formula Formula::release(Interval i, Formula a, Formula b) {
  return Formula(make(Op::Release, i, {}, a.node_, b.node_));
}
Formula Formula::avg_release(Interval i, Formula a, Formula b) {
  return Formula(make(Op::AvgRelease, i, {}, a.node_, b.node_));
}
Formula Formula::eventually(Interval i, Formula f) {
  return Formula(make(Op::Eventually, i, {}, f.node_, nullptr));
}
Formula Formula::always(Interval i, Formula f) {
  return Formula(make(Op::Always, i, {}, f.node_, nullptr));
}
Formula Formula::avg_eventually(Interval i, Formula f) {
  return Formula(make(Op::AvgEventually, i, {}, f.node_, nullptr));
}
Formula Formula::avg_always(Interval i, Formula f) {
  return Formula(make(Op::AvgAlways, i, {}, f.node_, nullptr));
}

int Formula::arity() const {
  if (!node_) return 0;
  if (node_->right) return 2;
  if (node_->left) return 1;
  return 0;
}

Formula Formula::child(int index) const {
  if (!node_) throw std::invalid_argument("empty formula");
  const FormulaPtr& c = index == 0 ? node_->left : node_->right;
  if (index < 0 || index > 1 || !c) throw std::invalid_argument("no such child");
  Formula f;
  f.node_ = c;
  return f;
}

bool structurally_equal(const Formula& a, const Formula& b) {
  const FormulaNode* x = a ? &a.node() : nullptr;
  const FormulaNode* y = b ? &b.node() : nullptr;
  if (!x || !y) return x == y;
  if (x->op != y->op) return false;
  if (x->interval.has_value() != y->interval.has_value()) return false;
  if (x->interval && !(*x->interval == *y->interval)) return false;
  if (x->atom.has_value() != y->atom.has_value()) return false;
  if (x->atom) {
    if (x->atom->variable != y->atom->variable || x->atom->relation != y->atom->relation ||
        x->atom->threshold != y->atom->threshold)
      return false;
  }
  int n = a.arity();
  if (n != b.arity()) return false;
  for (int i = 0; i < n; ++i)
    if (!structurally_equal(a.child(i), b.child(i))) return false;
  return true;
}

int averaged_depth(const Formula& f) {
  if (!f) return 0;
  int inner = 0;
  for (int i = 0; i < f.arity(); ++i) inner = std::max(inner, averaged_depth(f.child(i)));
  return inner + (is_averaged(f.node().op) ? 1 : 0);
}

double temporal_horizon(const Formula& f) {
  if (!f) return 0.0;
  double inner = 0.0;
  for (int i = 0; i < f.arity(); ++i) inner = std::max(inner, temporal_horizon(f.child(i)));
  if (is_temporal(f.node().op)) {
    const Interval& iv = *f.node().interval;
    if (!iv.is_bounded()) return std::numeric_limits<double>::infinity();
    return iv.hi() + inner;
  }
  return inner;
}

namespace {
void collect_vars(const Formula& f, std::set<std::string>& out) {
  if (!f) return;
  if (f.node().op == Op::Atom) out.insert(f.node().atom->variable);
  for (int i = 0; i < f.arity(); ++i) collect_vars(f.child(i), out);
}
}  // namespace

std::vector<std::string> referenced_variables(const Formula& f) {
  std::set<std::string> s;
  collect_vars(f, s);
  return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok {
  End,
  Ident,
  Number,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Not,
  And,
  Or,
  Arrow,
  Lt,
  Le,
  Ge,
  Gt,
  KwTrue,
  KwFalse,
  KwF,
  KwG,
  KwAvF,
  KwAvG,
  KwU,
  KwR,
  KwAvU,
  KwAvR,
  KwInf,
};

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::End;
      return t;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      t.text = std::string(src_.substr(start, pos_ - start));
      t.kind = keyword(t.text);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
        ((c == '-' || c == '+') && pos_ + 1 < src_.size() &&
         (std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) || src_[pos_ + 1] == '.') &&
         !arrow_ahead())) {
      return lex_number(t);
    }
    switch (c) {
      case '(': advance(); t.kind = Tok::LParen; return t;
      case ')': advance(); t.kind = Tok::RParen; return t;
      case '[': advance(); t.kind = Tok::LBracket; return t;
      case ']': advance(); t.kind = Tok::RBracket; return t;
      case ',': advance(); t.kind = Tok::Comma; return t;
      case '!': advance(); t.kind = Tok::Not; return t;
      case '&': advance(); t.kind = Tok::And; return t;
      case '|': advance(); t.kind = Tok::Or; return t;
      case '-':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
          advance();
          advance();
          t.kind = Tok::Arrow;
          return t;
        }
        throw ParseError("unexpected '-'", line_, col_);
      case '<':
        advance();
        if (pos_ < src_.size() && src_[pos_] == '=') {
          advance();
          t.kind = Tok::Le;
        } else {
          t.kind = Tok::Lt;
        }
        return t;
      case '>':
        advance();
        if (pos_ < src_.size() && src_[pos_] == '=') {
          advance();
          t.kind = Tok::Ge;
        } else {
          t.kind = Tok::Gt;
        }
        return t;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }
  }

 private:
  bool arrow_ahead() const {
    return src_[pos_] == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>';
  }

  static Tok keyword(const std::string& s) {
    if (s == "true") return Tok::KwTrue;
    if (s == "false") return Tok::KwFalse;
    if (s == "F") return Tok::KwF;
    if (s == "G") return Tok::KwG;
    if (s == "AvF") return Tok::KwAvF;
    if (s == "AvG") return Tok::KwAvG;
    if (s == "U") return Tok::KwU;
    if (s == "R") return Tok::KwR;
    if (s == "AvU") return Tok::KwAvU;
    if (s == "AvR") return Tok::KwAvR;
    if (s == "inf") return Tok::KwInf;
    return Tok::Ident;
  }

  Token lex_number(Token t) {
    std::size_t start = pos_;
    if (src_[pos_] == '-' || src_[pos_] == '+') advance();
    bool digits = false;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      advance();
      digits = true;
    }
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        advance();
        digits = true;
      }
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) advance();
      bool expd = false;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        advance();
        expd = true;
      }
      if (!expd) {
        pos_ = mark;  // not an exponent after all
      }
    }
    if (!digits) throw ParseError("malformed number", t.line, t.col);
    t.kind = Tok::Number;
    t.text = std::string(src_.substr(start, pos_ - start));
    t.number = std::stod(t.text);
    return t;
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '\n') {
        ++pos_;
        ++line_;
        col_ = 1;
      } else {
        break;
      }
    }
  }

  void advance() {
    ++pos_;
    ++col_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { shift(); }

  Formula parse() {
    Formula f = implication();
    expect(Tok::End, "end of input");
    return f;
  }

 private:
  Formula implication() {
    Formula lhs = disjunction();
    if (cur_.kind == Tok::Arrow) {
      shift();
      return Formula::implication(lhs, implication());  // right-associative
    }
    return lhs;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (cur_.kind == Tok::Or) {
      shift();
      f = Formula::disjunction(f, conjunction());
    }
    return f;
  }

  Formula conjunction() {
    Formula f = temporal_binary();
    while (cur_.kind == Tok::And) {
      shift();
      f = Formula::conjunction(f, temporal_binary());
    }
    return f;
  }

  // Non-associative: `a U b U c` is a parse error, parenthesize.
  Formula temporal_binary() {
    Formula lhs = unary();
    Tok k = cur_.kind;
    if (k == Tok::KwU || k == Tok::KwR || k == Tok::KwAvU || k == Tok::KwAvR) {
      Token op = cur_;
      shift();
      Interval iv = optional_interval();
      Formula rhs = unary();
      if (cur_.kind == Tok::KwU || cur_.kind == Tok::KwR || cur_.kind == Tok::KwAvU ||
          cur_.kind == Tok::KwAvR)
        throw ParseError("binary temporal operators are non-associative; add parentheses",
                         cur_.line, cur_.col);
      switch (op.kind) {
        case Tok::KwU: return Formula::until(iv, lhs, rhs);
        case Tok::KwR: return Formula::release(iv, lhs, rhs);
        case Tok::KwAvU: return Formula::avg_until(iv, lhs, rhs);
        default: return Formula::avg_release(iv, lhs, rhs);
      }
    }
    return lhs;
  }

  Formula unary() {
    switch (cur_.kind) {
      case Tok::Not:
        shift();
        return Formula::negation(unary());
      case Tok::KwF: {
        shift();
        Interval iv = optional_interval();
        return Formula::eventually(iv, unary());
      }
      case Tok::KwG: {
        shift();
        Interval iv = optional_interval();
        return Formula::always(iv, unary());
      }
      case Tok::KwAvF: {
        shift();
        Interval iv = optional_interval();
        return Formula::avg_eventually(iv, unary());
      }
      case Tok::KwAvG: {
        shift();
        Interval iv = optional_interval();
        return Formula::avg_always(iv, unary());
      }
      default:
        return primary();
    }
  }

  Formula primary() {
    switch (cur_.kind) {
      case Tok::KwTrue:
        shift();
        return Formula::verum();
      case Tok::KwFalse:
        shift();
        return Formula::falsum();
      case Tok::LParen: {
        shift();
        Formula f = implication();
        expect(Tok::RParen, "')'");
        return f;
      }
      case Tok::Ident: {
        std::string name = cur_.text;
        shift();
        Relation rel;
        switch (cur_.kind) {
          case Tok::Lt: rel = Relation::Lt; break;
          case Tok::Le: rel = Relation::Le; break;
          case Tok::Ge: rel = Relation::Ge; break;
          case Tok::Gt: rel = Relation::Gt; break;
          default:
            return Formula::prop(name);  // bare identifier: `name >= 0`
        }
        shift();
        if (cur_.kind != Tok::Number)
          throw ParseError("expected a number after the relation", cur_.line, cur_.col);
        double thr = cur_.number;
        shift();
        return Formula::atom(Atomic{name, rel, thr});
      }
      default:
        throw ParseError("expected a formula", cur_.line, cur_.col);
    }
  }

  Interval optional_interval() {
    if (cur_.kind != Tok::LBracket) return Interval::everything();
    Token open = cur_;
    shift();
    double lo = interval_number();
    expect(Tok::Comma, "','");
    if (cur_.kind == Tok::KwInf) {
      shift();
      expect(Tok::RParen, "')' after 'inf'");
      return check_interval(lo, std::numeric_limits<double>::infinity(), open);
    }
    double hi = interval_number();
    expect(Tok::RBracket, "']'");
    return check_interval(lo, hi, open);
  }

  double interval_number() {
    if (cur_.kind != Tok::Number)
      throw ParseError("expected an interval endpoint", cur_.line, cur_.col);
    double v = cur_.number;
    if (v < 0.0)
      throw ParseError("interval endpoints must be nonnegative", cur_.line, cur_.col);
    shift();
    return v;
  }

  Interval check_interval(double lo, double hi, const Token& open) {
    if (!(lo < hi))
      throw ParseError("singular interval: lower endpoint must be strictly below the upper",
                       open.line, open.col);
    return Interval(lo, hi);
  }

  void expect(Tok k, const char* what) {
    if (cur_.kind != k)
      throw ParseError(std::string("expected ") + what, cur_.line, cur_.col);
    if (k != Tok::End) shift();
  }

  void shift() { cur_ = lex_.next(); }

  Lexer lex_;
  Token cur_;
};

}  // namespace

Formula parse_formula(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Printer

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Trim the representation when a short round-trip exists.
  for (int prec = 1; prec <= 16; ++prec) {
    char shorter[64];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::stod(shorter) == v) return shorter;
  }
  return buf;
}

std::string fmt_interval(const Interval& iv) {
  if (iv.is_everything()) return "";
  std::string s = "[" + fmt_double(iv.lo()) + ",";
  s += iv.is_bounded() ? fmt_double(iv.hi()) + "]" : std::string("inf)");
  return s;
}

int precedence(Op op) {
  switch (op) {
    case Op::True:
    case Op::False:
    case Op::Atom:
      return 0;
    case Op::Not:
    case Op::Eventually:
    case Op::Always:
    case Op::AvgEventually:
    case Op::AvgAlways:
      return 1;
    case Op::Until:
    case Op::AvgUntil:
    case Op::Release:
    case Op::AvgRelease:
      return 2;
    case Op::And:
      return 3;
    case Op::Or:
      return 4;
    case Op::Implies:
      return 5;
  }
  return 5;
}

const char* rel_text(Relation r) {
  switch (r) {
    case Relation::Lt: return "<";
    case Relation::Le: return "<=";
    case Relation::Ge: return ">=";
    case Relation::Gt: return ">";
  }
  return "?";
}

void print(const Formula& f, int parent_prec, std::string& out) {
  const FormulaNode& n = f.node();
  int prec = precedence(n.op);
  bool parens = prec > parent_prec;
  if (parens) out += "(";
  switch (n.op) {
    case Op::True: out += "true"; break;
    case Op::False: out += "false"; break;
    case Op::Atom:
      out += n.atom->variable;
      out += " ";
      out += rel_text(n.atom->relation);
      out += " ";
      out += fmt_double(n.atom->threshold);
      break;
    case Op::Not:
      out += "!";
      print(f.child(0), 1, out);
      break;
    case Op::Eventually:
    case Op::Always:
    case Op::AvgEventually:
    case Op::AvgAlways: {
      out += n.op == Op::Eventually ? "F"
             : n.op == Op::Always   ? "G"
             : n.op == Op::AvgEventually ? "AvF" : "AvG";
      out += fmt_interval(*n.interval);
      out += " ";
      print(f.child(0), 1, out);
      break;
    }
    case Op::Until:
    case Op::AvgUntil:
    case Op::Release:
    case Op::AvgRelease: {
      print(f.child(0), 1, out);
      out += " ";
      out += n.op == Op::Until ? "U" : n.op == Op::AvgUntil ? "AvU"
             : n.op == Op::Release ? "R" : "AvR";
      out += fmt_interval(*n.interval);
      out += " ";
      print(f.child(1), 1, out);
      break;
    }
    case Op::And:
      print(f.child(0), 3, out);
      out += " & ";
      print(f.child(1), 2, out);  // left-associative
      break;
    case Op::Or:
      print(f.child(0), 4, out);
      out += " | ";
      print(f.child(1), 3, out);
      break;
    case Op::Implies:
      print(f.child(0), 4, out);
      out += " -> ";
      print(f.child(1), 5, out);  // right-associative
      break;
  }
  if (parens) out += ")";
}

}  // namespace

std::string unparse(const Formula& f) {
  if (!f) throw std::invalid_argument("empty formula");
  std::string out;
  print(f, 5, out);
  return out;
}

// ---------------------------------------------------------------------------
// Paths and refinements

Formula node_at(const Formula& f, const NodePath& path) {
  Formula cur = f;
  for (int step : path) {
    if (step < 0 || step >= cur.arity())
      throw std::invalid_argument("path leaves the formula tree");
    cur = cur.child(step);
  }
  return cur;
}

bool is_positive_position(const Formula& f, const NodePath& path) {
  node_at(f, path);  // validate the whole path first
  Formula cur = f;
  bool positive = true;
  for (int step : path) {
    Op op = cur.node().op;
    if (op == Op::Not) positive = false;
    if (op == Op::Implies && step == 0) positive = false;  // antecedent is negated
    cur = cur.child(step);
  }
  return positive;
}

namespace {

Formula rebuild_with(const Formula& f, const NodePath& path, std::size_t depth,
                     const Formula& replacement) {
  if (depth == path.size()) return replacement;
  int step = path[depth];
  Formula newborn = rebuild_with(f.child(step), path, depth + 1, replacement);
  const FormulaNode& n = f.node();
  Formula l = step == 0 ? newborn : f.child(0);
  Formula r = f.arity() == 2 ? (step == 1 ? newborn : f.child(1)) : Formula();
  switch (n.op) {
    case Op::Not: return Formula::negation(l);
    case Op::And: return Formula::conjunction(l, r);
    case Op::Or: return Formula::disjunction(l, r);
    case Op::Implies: return Formula::implication(l, r);
    case Op::Until: return Formula::until(*n.interval, l, r);
    case Op::AvgUntil: return Formula::avg_until(*n.interval, l, r);
    case Op::Release: return Formula::release(*n.interval, l, r);
    case Op::AvgRelease: return Formula::avg_release(*n.interval, l, r);
    case Op::Eventually: return Formula::eventually(*n.interval, l);
    case Op::Always: return Formula::always(*n.interval, l);
    case Op::AvgEventually: return Formula::avg_eventually(*n.interval, l);
    case Op::AvgAlways: return Formula::avg_always(*n.interval, l);
    default:
      throw std::invalid_argument("path leaves the formula tree");
  }
}

}  // namespace

Formula refine_eventually(const Formula& f, const NodePath& path) {
  Formula target = node_at(f, path);
  if (target.node().op != Op::Eventually)
    throw std::invalid_argument("refinement target is not an eventually");
  const Interval& iv = *target.node().interval;
  if (!iv.is_bounded())
    throw std::invalid_argument("cannot refine an unbounded eventually");
  if (!is_positive_position(f, path))
    throw std::invalid_argument("refinement target is at a negative position");
  return rebuild_with(f, path, 0, Formula::avg_eventually(iv, target.child(0)));
}

Formula refine_always(const Formula& f, const NodePath& path, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("refinement delta must be positive");
  Formula target = node_at(f, path);
  if (target.node().op != Op::Always)
    throw std::invalid_argument("refinement target is not an always");
  const Interval& iv = *target.node().interval;
  if (!iv.is_bounded()) throw std::invalid_argument("cannot refine an unbounded always");
  if (!is_positive_position(f, path))
    throw std::invalid_argument("refinement target is at a negative position");
  Formula tail = Formula::avg_always(Interval(iv.hi(), iv.hi() + delta), target.child(0));
  return rebuild_with(f, path, 0, Formula::conjunction(target, tail));
}

}  // namespace avstl
