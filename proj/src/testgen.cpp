#include "avstl/testgen.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace avstl::testgen {

namespace {

std::string var_name(int i) { return "x" + std::to_string(i); }

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int pick(Rng& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

}  // namespace

Trace random_trace(Rng& rng, const TraceOptions& opt) {
  int segments = 1 + pick(rng, opt.max_segments);
  std::map<std::string, FplSignal> channels;
  for (int v = 0; v < opt.variables; ++v) {
    std::vector<double> times{0.0};
    for (int i = 1; i < segments; ++i) times.push_back(uniform(rng, 0.0, opt.horizon));
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    std::vector<std::pair<double, double>> steps;
    for (double t : times) steps.emplace_back(t, uniform(rng, opt.value_lo, opt.value_hi));
    channels.emplace(var_name(v), FplSignal::from_steps(steps));
  }
  return Trace(std::move(channels));
}

namespace {

Interval random_interval(Rng& rng, const FormulaOptions& opt) {
  double lo = uniform(rng, 0.0, opt.interval_span * 0.5);
  if (uniform(rng, 0.0, 1.0) < opt.unbounded_weight) return Interval::unbounded(lo);
  double hi = lo + uniform(rng, 0.1, opt.interval_span * 0.5);
  return Interval(lo, hi);
}

Formula random_atomish(Rng& rng, const FormulaOptions& opt) {
  int kind = pick(rng, 10);
  if (kind == 0) return Formula::verum();
  if (kind == 1) return Formula::falsum();
  Relation rels[4] = {Relation::Lt, Relation::Le, Relation::Ge, Relation::Gt};
  return Formula::atom(Atomic{var_name(pick(rng, opt.variables)), rels[pick(rng, 4)],
                              uniform(rng, -8.0, 8.0)});
}

Formula gen(Rng& rng, const FormulaOptions& opt, int depth, int averaged_budget) {
  if (depth <= 0) return random_atomish(rng, opt);
  int kind = pick(rng, 12);
  auto sub = [&](int budget) { return gen(rng, opt, depth - 1, budget); };
  switch (kind) {
    case 0:
      return random_atomish(rng, opt);
    case 1:
      return Formula::negation(sub(averaged_budget));
    case 2:
      return Formula::conjunction(sub(averaged_budget), sub(averaged_budget));
    case 3:
      return Formula::disjunction(sub(averaged_budget), sub(averaged_budget));
    case 4:
      return Formula::implication(sub(averaged_budget), sub(averaged_budget));
    case 5:
      return Formula::eventually(random_interval(rng, opt), sub(averaged_budget));
    case 6:
      return Formula::always(random_interval(rng, opt), sub(averaged_budget));
    case 7:
      return Formula::until(random_interval(rng, opt), sub(averaged_budget),
                            sub(averaged_budget));
    case 8:
      return Formula::release(random_interval(rng, opt), sub(averaged_budget),
                              sub(averaged_budget));
    case 9:
      if (averaged_budget > 0)
        return Formula::avg_eventually(random_interval(rng, opt), sub(averaged_budget - 1));
      return Formula::eventually(random_interval(rng, opt), sub(0));
    case 10:
      if (averaged_budget > 0)
        return Formula::avg_always(random_interval(rng, opt), sub(averaged_budget - 1));
      return Formula::always(random_interval(rng, opt), sub(0));
    default:
      if (averaged_budget > 0) {
        Formula l = sub(averaged_budget - 1), r = sub(averaged_budget - 1);
        return pick(rng, 2) == 0 ? Formula::avg_until(random_interval(rng, opt), l, r)
                                 : Formula::avg_release(random_interval(rng, opt), l, r);
      }
      return Formula::until(random_interval(rng, opt), sub(0), sub(0));
  }
}

}  // namespace

Formula random_formula(Rng& rng, const FormulaOptions& opt) {
  return gen(rng, opt, 1 + pick(rng, opt.max_depth), opt.max_averaged);
}

ContextInstance random_positive_context(Rng& rng, const FormulaOptions& opt) {
  // Grammar: a hole, or a binary connective / (averaged) binary temporal
  // operator with the hole on one side and an averaging-free formula on the
  // other. No negations.
  NodePath path;
  Formula hole = Formula::verum();

  int layers = pick(rng, 3);
  // Build from the hole outward, recording the path top-down afterwards.
  struct Layer {
    int kind;
    int hole_side;
    Interval iv;
    Formula other;
  };
  // Averaged connectives appear in the context only when the caller plans to
  // plug an averaging-free formula (otherwise nesting would be rejected).
  int kinds = opt.max_averaged > 0 ? 6 : 4;
  std::vector<Layer> layers_v;
  for (int i = 0; i < layers; ++i) {
    Layer l{pick(rng, kinds), pick(rng, 2), random_interval(rng, opt), gen(rng, opt, 2, 0)};
    layers_v.push_back(l);
  }
  Formula cur = hole;
  for (const Layer& l : layers_v) {
    Formula a = l.hole_side == 0 ? cur : l.other;
    Formula b = l.hole_side == 0 ? l.other : cur;
    switch (l.kind) {
      case 0: cur = Formula::conjunction(a, b); break;
      case 1: cur = Formula::disjunction(a, b); break;
      case 2: cur = Formula::until(l.iv, a, b); break;
      case 3: cur = Formula::release(l.iv, a, b); break;
      case 4: cur = Formula::avg_until(l.iv, a, b); break;
      default: cur = Formula::avg_release(l.iv, a, b); break;
    }
  }
  for (auto it = layers_v.rbegin(); it != layers_v.rend(); ++it)
    path.push_back(it->hole_side);
  return ContextInstance{cur, path};
}

namespace {

Formula replace_at(const Formula& f, const NodePath& path, std::size_t depth,
                   const Formula& inner) {
  if (depth == path.size()) return inner;
  const FormulaNode& n = f.node();
  int step = path[depth];
  Formula nl = step == 0 ? replace_at(f.child(0), path, depth + 1, inner) : f.child(0);
  Formula nr = f.arity() == 2
                   ? (step == 1 ? replace_at(f.child(1), path, depth + 1, inner) : f.child(1))
                   : Formula();
  switch (n.op) {
    case Op::And: return Formula::conjunction(nl, nr);
    case Op::Or: return Formula::disjunction(nl, nr);
    case Op::Until: return Formula::until(*n.interval, nl, nr);
    case Op::Release: return Formula::release(*n.interval, nl, nr);
    case Op::AvgUntil: return Formula::avg_until(*n.interval, nl, nr);
    case Op::AvgRelease: return Formula::avg_release(*n.interval, nl, nr);
    default: throw std::invalid_argument("unexpected context node");
  }
}

}  // namespace

Formula plug(const ContextInstance& ctx, const Formula& inner) {
  return replace_at(ctx.skeleton, ctx.hole, 0, inner);
}

}  // namespace avstl::testgen
