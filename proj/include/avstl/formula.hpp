#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace avstl {

enum class Relation { Lt, Le, Ge, Gt };

struct Atomic {
  std::string variable;
  Relation relation = Relation::Ge;
  double threshold = 0.0;
};

/// Closed non-singular interval [lo, hi] or [lo, inf). lo >= 0 and, when
/// bounded, lo < hi strictly.
class Interval {
 public:
  Interval(double lo, double hi);
  static Interval unbounded(double lo = 0.0);
  static Interval everything() { return unbounded(0.0); }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool is_bounded() const { return hi_ != std::numeric_limits<double>::infinity(); }
  bool is_everything() const { return lo_ == 0.0 && !is_bounded(); }

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }

 private:
  double lo_, hi_;
};

enum class Op {
  True,
  False,
  Atom,
  Not,
  And,
  Or,
  Implies,
  Until,
  AvgUntil,
  Release,
  AvgRelease,
  // Derived unary forms. They desugar per the usual abbreviations but keep
  // their own node kind so the evaluator can dispatch to the specialized
  // window algorithms.
  Eventually,
  Always,
  AvgEventually,
  AvgAlways,
};

bool is_temporal(Op op);
bool is_averaged(Op op);
bool is_unary_temporal(Op op);
bool is_binary_temporal(Op op);

class Formula;
using FormulaPtr = std::shared_ptr<const class FormulaNode>;

struct FormulaNode {
  Op op;
  std::optional<Interval> interval;  // temporal operators only
  std::optional<Atomic> atom;        // Op::Atom only
  FormulaPtr left, right;            // unary ops use left
};

/// Immutable formula handle (shared AST).
class Formula {
 public:
  Formula() = default;

  static Formula verum();
  static Formula falsum();
  static Formula atom(Atomic a);
  /// Propositional-variable shorthand: `name >= 0`.
  static Formula prop(const std::string& name);
  static Formula negation(Formula f);
  static Formula conjunction(Formula a, Formula b);
  static Formula disjunction(Formula a, Formula b);
  static Formula implication(Formula a, Formula b);
  static Formula until(Interval i, Formula a, Formula b);
  static Formula avg_until(Interval i, Formula a, Formula b);
  static Formula release(Interval i, Formula a, Formula b);
  static Formula avg_release(Interval i, Formula a, Formula b);
  static Formula eventually(Interval i, Formula f);
  static Formula always(Interval i, Formula f);
  static Formula avg_eventually(Interval i, Formula f);
  static Formula avg_always(Interval i, Formula f);

  const FormulaNode& node() const { return *node_; }
  const FormulaPtr& ptr() const { return node_; }
  explicit operator bool() const { return node_ != nullptr; }

  Formula child(int index) const;
  int arity() const;

 private:
  explicit Formula(FormulaPtr p) : node_(std::move(p)) {}
  FormulaPtr node_;
};

bool structurally_equal(const Formula& a, const Formula& b);

/// Maximum nesting depth of averaged temporal operators; 0 when
/// averaging-free.
int averaged_depth(const Formula& f);

/// How far into the future the formula looks; +inf when any temporal
/// interval is unbounded.
double temporal_horizon(const Formula& f);

/// Variables referenced by atoms.
std::vector<std::string> referenced_variables(const Formula& f);

/// Parses the concrete syntax. Grammar tokens: `G`/`F` and `AvG`/`AvF` for
/// the (averaged) always/eventually forms, `U`/`AvU`/`R`/`AvR` for the
/// binary temporal operators, `&`, `|`, `!`, `->`, intervals `[a,b]` or
/// `[a,inf)` (omitted interval means `[0,inf)`), atoms `x >= 3.5`, bare
/// identifiers as `ident >= 0`, and `true`/`false`. Precedence, tightest
/// first: `!` and the unary temporal operators, then the binary temporal
/// operators (non-associative), then `&`, `|`, `->`.
Formula parse_formula(std::string_view text);

/// Canonical text form; `parse_formula(unparse(f))` is structurally equal
/// to `f`.
std::string unparse(const Formula& f);

/// Path from the root: a sequence of child indices (0 for unary operands,
/// 0/1 for binary ones).
using NodePath = std::vector<int>;

/// Locates the node at `path`; throws std::invalid_argument when the path
/// leaves the tree.
Formula node_at(const Formula& f, const NodePath& path);

/// True when the path crosses no negation, counting an implication's
/// antecedent as one (a -> b reads as !a | b).
bool is_positive_position(const Formula& f, const NodePath& path);

/// Replaces a bounded eventually at a positive position by its averaged
/// form. Falsifying the result falsifies the original.
Formula refine_eventually(const Formula& f, const NodePath& path);

/// Strengthens a bounded always at a positive position with an averaged
/// tail over [hi, hi + delta].
Formula refine_always(const Formula& f, const NodePath& path, double delta);

}  // namespace avstl
