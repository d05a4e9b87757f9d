#pragma once

#include <span>
#include <vector>

#include "avstl/formula.hpp"
#include "avstl/robustness.hpp"
#include "avstl/signal.hpp"

namespace avstl::oracle {

struct OracleConfig {
  /// Maximum number of grid halvings for the averaged integrals.
  int integration_refinements = 20;
  /// Convergence threshold between successive trapezoid refinements.
  double abs_tolerance = 1e-7;
};

/// Brute-force reference semantics: suprema and infima by enumerating event
/// candidates, averaged operators by trapezoid sums over refining grids.
/// Quadratic or worse; shares no window or deque code with the evaluator.
RobustnessPair oracle_evaluate(const Trace& trace, const Formula& f,
                               const OracleConfig& cfg = {});

/// Robustness at each requested start time, via the same reference path.
std::vector<RobustnessPair> oracle_robust_signal_samples(const Trace& trace, const Formula& f,
                                                         std::span<const double> times,
                                                         const OracleConfig& cfg = {});

}  // namespace avstl::oracle
