#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "avstl/formula.hpp"
#include "avstl/signal.hpp"

namespace avstl::testgen {

using Rng = std::mt19937_64;

struct TraceOptions {
  int max_segments = 50;
  int variables = 2;  // named x0, x1, ...
  double horizon = 10.0;
  double value_lo = -10.0;
  double value_hi = 10.0;
};

struct FormulaOptions {
  int max_depth = 4;
  int variables = 2;
  int max_averaged = 1;      // averaged operators per branch
  double interval_span = 8.0;
  double unbounded_weight = 0.15;  // chance a temporal interval is [a, inf)
};

/// Random piecewise-constant trace with continuous-valued breakpoints.
Trace random_trace(Rng& rng, const TraceOptions& opt = {});

/// Random formula honoring the averaged-nesting budget.
Formula random_formula(Rng& rng, const FormulaOptions& opt = {});

/// Random formula from the negation-free context grammar with a hole,
/// returned as the path to the hole plus a builder: plug(hole) yields the
/// full formula.
struct ContextInstance {
  Formula skeleton;  // hole filled with `true` as a placeholder
  NodePath hole;
};
ContextInstance random_positive_context(Rng& rng, const FormulaOptions& opt = {});

/// Plugs `inner` into the context's hole.
Formula plug(const ContextInstance& ctx, const Formula& inner);

}  // namespace avstl::testgen
