#pragma once

#include "avstl/extended_real.hpp"
#include "avstl/formula.hpp"
#include "avstl/signal.hpp"

namespace avstl {

/// The two truth values of a formula over a trace at time 0: a nonnegative
/// positive robustness and a nonpositive negative robustness.
struct RobustnessPair {
  ExtendedReal pos;
  ExtendedReal neg;
};

/// Both robustness channels as functions of the evaluation start time.
struct RobustnessSignal {
  FplSignal pos;
  FplSignal neg;
};

/// Positive/negative robustness of `f` over `trace` at time 0.
///
/// Requires averaged_depth(f) <= 1 (UnsupportedFormulaError otherwise) and
/// every atom variable present in the trace (UnknownVariableError).
RobustnessPair evaluate(const Trace& trace, const Formula& f);

/// Full robustness signals, computed bottom-up with the sliding-window
/// algorithms. On a piecewise-constant trace the outputs are
/// piecewise-constant for averaging-free formulas and piecewise-linear when
/// one averaged layer is present.
RobustnessSignal robust_signal(const Trace& trace, const Formula& f);

// --- building blocks, exposed for direct testing -------------------------

/// t -> sup (Max) or inf (Min) of `s` over [t+a, t+b], 0 <= a < b. One
/// backward sweep; linear in the number of segments.
FplSignal sliding_window(const FplSignal& s, double a, double b, Extremum mode);

/// t -> sup/inf of `s` over [t+a, inf).
FplSignal suffix_extremum(const FplSignal& s, double a, Extremum mode);

/// t -> mean over tau in [a,b] of (sup of s over [t+a, t+tau]); the
/// incremental-area sliding window. Input must be piecewise-constant.
FplSignal avg_eventually(const FplSignal& s, double a, double b);

/// t -> sup over tau >= t of ( s2(tau) /\ inf of s1 over [t, tau) ); the
/// untimed-until backward pass. Both channels use this same recurrence on
/// their own inputs. Inputs must settle (constant final segment).
FplSignal untimed_until(const FplSignal& s1, const FplSignal& s2);

/// Until over a bounded window [a,b], decomposed as
/// min( sup-window of s2 over [a,b], inf-window over [0,a] of the untimed
/// until ).
FplSignal bounded_until(const FplSignal& s1, const FplSignal& s2, double a, double b);

/// Averaged until over [a,b]: the mean over tau of the until over [a,tau],
/// maintained incrementally with a truncating window. `phi2` is the second
/// operand's channel signal and `g` the decomposition factor
/// (inf-window over [0,a] of the untimed until; the untimed until itself
/// when a = 0). Inputs must be piecewise-constant.
FplSignal avg_until(const FplSignal& phi2, const FplSignal& g, double a, double b);

/// (Averaged-)release of one channel, computed by duality: negate the
/// operands, run the until machinery, negate the result.
FplSignal release_signal(const FplSignal& s1, const FplSignal& s2, const Interval& iv,
                         bool averaged);

}  // namespace avstl
