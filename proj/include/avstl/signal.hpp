#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "avstl/extended_real.hpp"

namespace avstl {

enum class Extremum { Min, Max };
enum class ClampMode { NonNegative, NonPositive };

/// One affine piece of a piecewise-linear signal. The piece covers
/// [start, next.start) and takes the value `value + slope * (t - start)`
/// there; the last piece extends to +inf. Infinite values carry slope 0.
struct Segment {
  double start = 0.0;
  ExtendedReal value;
  double slope = 0.0;
};

/// A finitely piecewise-linear signal on [0, inf): a nonempty list of
/// segments with strictly increasing, left-closed start times, the first at
/// t = 0 and the last extending forever. Piecewise-constant signals are the
/// special case with all slopes zero.
///
/// Immutable after construction; all operations return new signals.
/// Construction canonicalizes: collinear adjacent segments are merged and
/// breakpoints closer than 1e-12 seconds are collapsed onto one timestamp.
class FplSignal {
 public:
  explicit FplSignal(std::vector<Segment> segments);

  static FplSignal constant(ExtendedReal v);
  /// Piecewise-constant signal from (time, value) steps.
  static FplSignal from_steps(const std::vector<std::pair<double, double>>& steps);

  const std::vector<Segment>& segments() const { return segs_; }
  std::size_t size() const { return segs_.size(); }
  double last_time() const { return segs_.back().start; }

  bool is_piecewise_constant() const;
  bool is_constant() const;
  bool all_finite() const;
  /// True when the final segment has slope 0 (the signal settles).
  bool has_constant_tail() const { return segs_.back().slope == 0.0; }

  /// Value at time t >= 0; throws std::domain_error for negative t.
  ExtendedReal value_at(double t) const;

  /// Signal t -> this(t + d) for d >= 0, re-based so the first timestamp
  /// is 0. Throws std::domain_error for negative d.
  FplSignal shifted(double d) const;

  FplSignal negated() const;

  /// Pointwise max with 0 (NonNegative) or min with 0 (NonPositive); zero
  /// crossings become breakpoints.
  FplSignal clamped(ClampMode mode) const;

  /// Exact integral over [lo, hi] (per-segment trapezoids). Requires
  /// 0 <= lo <= hi. A window where every value is +inf (resp. -inf) yields
  /// that pole; a mix of finite and infinite values is rejected with
  /// EvaluationError.
  ExtendedReal area(double lo, double hi) const;

  /// Index of the segment whose span contains t (t >= 0).
  std::size_t segment_index(double t) const;

 private:
  std::vector<Segment> segs_;
};

/// Pointwise min or max of two signals. Breakpoints are the union of both
/// inputs' timestamps plus every crossing point of two affine pieces.
FplSignal pointwise(const FplSignal& a, const FplSignal& b, Extremum which);

/// Incremental builder used by the signal algorithms. Appends breakpoints in
/// increasing time order, snapping near-coincident timestamps (< 1e-12 s) to
/// the previous one.
class SegmentsBuilder {
 public:
  void push(double start, ExtendedReal value, double slope);
  bool empty() const { return segs_.empty(); }
  const Segment& back() const { return segs_.back(); }
  FplSignal finish() &&;
  std::vector<Segment> take() && { return std::move(segs_); }

 private:
  std::vector<Segment> segs_;
};

/// A multi-variable piecewise-constant signal with finite values, one
/// channel per variable. Models emit these and the evaluator consumes them.
class Trace {
 public:
  explicit Trace(std::map<std::string, FplSignal> channels);

  static Trace load_csv(std::istream& in);
  static Trace load_csv_file(const std::string& path);
  void write_csv(std::ostream& out) const;

  bool has(const std::string& variable) const;
  const FplSignal& channel(const std::string& variable) const;
  const std::map<std::string, FplSignal>& channels() const { return channels_; }
  std::vector<std::string> variables() const;

  /// Largest timestamp present in any channel.
  double horizon() const { return horizon_; }

  /// Sorted union of all channel timestamps.
  std::vector<double> timestamps() const;

 private:
  std::map<std::string, FplSignal> channels_;
  double horizon_ = 0.0;
};

}  // namespace avstl
