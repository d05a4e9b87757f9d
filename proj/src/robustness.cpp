#include "avstl/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

#include "avstl/errors.hpp"

namespace avstl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double line_value(const Segment& s, double t) {
  if (!s.value.is_finite()) return s.value.raw();
  return s.value.raw() + s.slope * (t - s.start);
}

bool better(Extremum mode, double x, double y) {
  return mode == Extremum::Max ? x >= y : x <= y;
}

void check_window(double a, double b) {
  if (!(a >= 0.0) || !(a < b) || std::isinf(b) || std::isnan(a) || std::isnan(b))
    throw std::domain_error("window requires 0 <= a < b with b finite");
}

// --- local piecewise-linear scraps ----------------------------------------
// Pieces covering one cell [x0, x1); used by the backward until pass where
// each input cell produces a handful of output pieces.

using Pieces = std::vector<Segment>;

Pieces line_pieces(double x0, ExtendedReal v_at_x0, double slope) {
  return {Segment{x0, v_at_x0, v_at_x0.is_finite() ? slope : 0.0}};
}

// Winner pieces of two affine pieces over [x0, x1); mirrors the pointwise
// cell merge.
void emit_cell(Pieces& out, const Segment& sa, const Segment& sb, double x0, double x1,
               Extremum which) {
  const bool take_max = which == Extremum::Max;
  double a0 = line_value(sa, x0), b0 = line_value(sb, x0);

  auto push = [&](double from, const Segment& win) {
    Segment s{from, ExtendedReal(line_value(win, from)),
              win.value.is_finite() ? win.slope : 0.0};
    if (!out.empty() && out.back().start >= from - 1e-12) {
      out.back() = Segment{out.back().start, s.value, s.slope};
    } else {
      out.push_back(s);
    }
  };

  if (!sa.value.is_finite() || !sb.value.is_finite()) {
    push(x0, better(which, a0, b0) ? sa : sb);
    return;
  }
  double qa = sa.slope, qb = sb.slope;
  if (qa != qb) {
    double tc = x0 + (b0 - a0) / (qa - qb);
    if (tc > x0 + 1e-12 && tc < x1 - 1e-12) {
      bool a_first = better(which, a0, b0);
      push(x0, a_first ? sa : sb);
      push(tc, a_first ? sb : sa);
      return;
    }
  }
  bool a_wins = a0 != b0 ? better(which, a0, b0) : (take_max ? qa >= qb : qa <= qb);
  push(x0, a_wins ? sa : sb);
}

Pieces combine(const Pieces& a, const Pieces& b, Extremum which, double x1) {
  Pieces out;
  std::size_t ia = 0, ib = 0;
  double x = std::max(a.front().start, b.front().start);
  while (true) {
    double na = ia + 1 < a.size() ? a[ia + 1].start : x1;
    double nb = ib + 1 < b.size() ? b[ib + 1].start : x1;
    double nx = std::min(na, nb);
    emit_cell(out, a[ia], b[ib], x, nx, which);
    if (nx >= x1) break;
    if (na == nx) ++ia;
    if (nb == nx) ++ib;
    x = nx;
  }
  return out;
}

double pieces_front_value(const Pieces& p) { return p.front().value.raw(); }

// Running extremum toward the cell end: t -> ext of `m` over [t, x1].
Pieces running_toward_end(const Pieces& m, double x1, Extremum mode) {
  // Walk right-to-left carrying the extremum of everything to the right.
  std::vector<Pieces> parts;
  double carry = mode == Extremum::Max ? -kInf : kInf;
  for (std::size_t j = m.size(); j-- > 0;) {
    const Segment& piece = m[j];
    double end = j + 1 < m.size() ? m[j + 1].start : x1;
    Pieces local;
    bool rising = mode == Extremum::Max ? piece.slope > 0.0 : piece.slope < 0.0;
    if (!piece.value.is_finite() || piece.slope == 0.0 || rising) {
      // Extremum over [t, end] sits at the far end (or anywhere, if flat).
      double at_end = line_value(piece, end);
      double v = mode == Extremum::Max ? std::max(at_end, carry) : std::min(at_end, carry);
      local = line_pieces(piece.start, ExtendedReal(v), 0.0);
    } else {
      // Monotone toward the extremum at t itself; blend with the carry.
      Pieces self = line_pieces(piece.start, piece.value, piece.slope);
      Pieces rest = line_pieces(piece.start, ExtendedReal(carry), 0.0);
      local = combine(self, rest, mode, end);
    }
    parts.push_back(std::move(local));
    double at_start = line_value(piece, piece.start);
    double at_end = line_value(piece, end);
    double piece_ext = mode == Extremum::Max ? std::max(at_start, at_end)
                                             : std::min(at_start, at_end);
    carry = mode == Extremum::Max ? std::max(carry, piece_ext) : std::min(carry, piece_ext);
  }
  Pieces out;
  for (std::size_t j = parts.size(); j-- > 0;)
    for (const Segment& s : parts[j]) {
      if (!out.empty() && s.start <= out.back().start + 1e-12) {
        out.back() = Segment{out.back().start, s.value, s.slope};
      } else {
        out.push_back(s);
      }
    }
  return out;
}

FplSignal translate(const FplSignal& s, double c) {
  std::vector<Segment> out;
  out.reserve(s.size());
  for (const Segment& seg : s.segments())
    out.push_back(Segment{seg.start,
                          seg.value.is_finite() ? ExtendedReal(seg.value.raw() + c) : seg.value,
                          seg.slope});
  return FplSignal(std::move(out));
}

}  // namespace

// ---------------------------------------------------------------------------
// Sliding window over [t+a, t+b]

FplSignal sliding_window(const FplSignal& s, double a, double b, Extremum mode) {
  check_window(a, b);
  if (s.is_constant()) return s;

  const auto& segs = s.segments();
  const std::size_t n = segs.size();
  const Segment& last = segs.back();
  const double tail_t = std::max(0.0, last.start - a);

  if (tail_t == 0.0) {
    // The window never sees anything but the final piece.
    bool use_right = mode == Extremum::Max ? last.slope > 0.0 : last.slope < 0.0;
    ExtendedReal v = last.value.is_finite()
                         ? ExtendedReal(line_value(last, use_right ? b : a))
                         : last.value;
    return FplSignal({Segment{0.0, v, last.value.is_finite() ? last.slope : 0.0}});
  }

  // Event grid: t where the window's left or right edge crosses a breakpoint.
  // Near-coincident events are merged so every interval is wide enough for
  // the midpoint piece lookups below to be unambiguous.
  std::vector<double> events;
  events.reserve(2 * n + 2);
  events.push_back(0.0);
  for (const Segment& seg : segs)
    for (double d : {a, b}) {
      double e = seg.start - d;
      if (e > 0.0 && e < tail_t) events.push_back(e);
    }
  events.push_back(tail_t);
  std::sort(events.begin(), events.end());
  std::vector<double> grid;
  for (double e : events)
    if (grid.empty() || e - grid.back() > 1e-12) grid.push_back(e);
  if (grid.back() != tail_t) grid.back() = tail_t;

  // Peak of the signal at an interior breakpoint: both one-sided values.
  auto peak = [&](std::size_t i) {
    double left = line_value(segs[i - 1], segs[i].start);
    double right = segs[i].value.raw();
    return mode == Extremum::Max ? std::max(left, right) : std::min(left, right);
  };

  std::deque<std::pair<std::size_t, double>> members;  // (breakpoint index, peak)
  std::size_t add_idx = 1;

  Pieces out;
  out.reserve(2 * grid.size());
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    double lo = grid[k], hi = grid[k + 1];
    // The window content is uniform across the interval; classify it from
    // the midpoint, which sits clear of every breakpoint.
    double mid = lo + 0.5 * (hi - lo);
    while (add_idx < n && segs[add_idx].start <= mid + b) {
      if (segs[add_idx].start > mid + a) {
        double p = peak(add_idx);
        while (!members.empty() && better(mode, p, members.back().second)) members.pop_back();
        members.emplace_back(add_idx, p);
      }
      ++add_idx;
    }
    while (!members.empty() && segs[members.front().first].start <= mid + a)
      members.pop_front();

    const Segment& sl = segs[s.segment_index(mid + a)];
    const Segment& sr = segs[s.segment_index(mid + b)];
    Pieces env = combine(line_pieces(lo, ExtendedReal(line_value(sl, lo + a)), sl.slope),
                         line_pieces(lo, ExtendedReal(line_value(sr, lo + b)), sr.slope),
                         mode, hi);
    if (!members.empty())
      env = combine(env, line_pieces(lo, ExtendedReal(members.front().second), 0.0), mode, hi);
    for (const Segment& seg : env) out.push_back(seg);
  }

  // Tail: the window has fully entered the final piece.
  {
    bool use_right = mode == Extremum::Max ? last.slope > 0.0 : last.slope < 0.0;
    double off = use_right ? b : a;
    ExtendedReal v = last.value.is_finite()
                         ? ExtendedReal(line_value(last, tail_t + off))
                         : last.value;
    Segment tail{tail_t, v, last.value.is_finite() ? last.slope : 0.0};
    if (!out.empty() && out.back().start >= tail_t - 1e-12) {
      out.back() = Segment{out.back().start, tail.value, tail.slope};
    } else {
      out.push_back(tail);
    }
  }
  return FplSignal(std::move(out));
}

FplSignal suffix_extremum(const FplSignal& s, double a, Extremum mode) {
  if (a < 0.0) throw std::domain_error("window offset must be nonnegative");
  const auto& segs = s.segments();

  std::vector<Pieces> parts;
  const Segment& last = segs.back();
  double carry;
  {
    // Extremum of the last piece over [t, inf).
    bool diverges = mode == Extremum::Max ? last.slope > 0.0 : last.slope < 0.0;
    if (!last.value.is_finite()) {
      parts.push_back(line_pieces(last.start, last.value, 0.0));
      carry = last.value.raw();
    } else if (diverges) {
      carry = mode == Extremum::Max ? kInf : -kInf;
      parts.push_back(line_pieces(last.start, ExtendedReal(carry), 0.0));
    } else if (last.slope == 0.0) {
      carry = last.value.raw();
      parts.push_back(line_pieces(last.start, last.value, 0.0));
    } else {
      parts.push_back(line_pieces(last.start, last.value, last.slope));
      carry = last.value.raw();
    }
  }
  for (std::size_t i = segs.size() - 1; i-- > 0;) {
    const Segment& piece = segs[i];
    double end = segs[i + 1].start;
    Pieces m = line_pieces(piece.start, piece.value, piece.slope);
    Pieces run = running_toward_end(m, end, mode);
    Pieces rest = line_pieces(piece.start, ExtendedReal(carry), 0.0);
    parts.push_back(combine(run, rest, mode, end));
    carry = pieces_front_value(parts.back());
  }

  std::vector<Segment> out;
  for (std::size_t j = parts.size(); j-- > 0;)
    for (const Segment& seg : parts[j]) out.push_back(seg);
  FplSignal y(std::move(out));
  return a == 0.0 ? y : y.shifted(a);
}

// ---------------------------------------------------------------------------
// Averaged windows (incremental area over a backward sweep)

namespace {

struct WindowEntry {
  double t;
  double r;
};

// Shared state of the averaged sweeps.
struct AvgSweep {
  double a = 0.0, b = 0.0, width = 0.0;
  std::deque<WindowEntry> F;  // ascending t, ascending r
  double area = 0.0;
  long slides = 0;

  void recompute_area(double t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) {
      double end = i + 1 < F.size() ? F[i + 1].t : t + b;
      acc += F[i].r * (end - F[i].t);
    }
    area = acc;
  }

  // Exact bounds on the window mean kill accumulated drift.
  void clamp_area() {
    area = std::min(std::max(area, F.front().r * width), F.back().r * width);
  }

  void dequeue_stale(double t) {
    // The left-edge entry is always in the window; the tolerance absorbs
    // rounding between an entry timestamp and the recomputed window edge.
    while (F.size() > 1 && F.back().t > t + b + 1e-12) F.pop_back();
  }

  // Pops entries dominated by the new left value, pushes the left endpoint
  // and applies the matching area updates. `strip` is the right-edge value
  // over the strip the window just abandoned.
  void slide(double t, double t_old, double v, double strip) {
    double area_pop = 0.0;
    std::vector<WindowEntry> popped;
    while (!F.empty() && F.front().r <= v) {
      popped.push_back(F.front());
      F.pop_front();
    }
    double t_pop = F.empty() ? t + b : F.front().t;
    for (std::size_t i = 0; i < popped.size(); ++i) {
      double end = i + 1 < popped.size() ? popped[i + 1].t : t_pop;
      area_pop += popped[i].r * (end - popped[i].t);
    }
    F.push_front({t + a, v});
    area += -(t_old - t) * strip - area_pop + (t_pop - (t + a)) * v;
  }

  void truncate(double t, double cap) {
    if (F.back().r <= cap) return;
    double area_trunc = 0.0;
    double prev = t + b;
    double t_trunc = 0.0;
    while (!F.empty() && F.back().r > cap) {
      area_trunc += F.back().r * (prev - F.back().t);
      prev = F.back().t;
      t_trunc = F.back().t;
      F.pop_back();
    }
    if (F.empty() || F.back().r < cap) F.push_back({t_trunc, cap});
    area += -area_trunc + ((t + b) - t_trunc) * cap;
  }

  void tick(double t) {
    if (++slides % 4096 == 0) recompute_area(t);
    clamp_area();
  }
};

void require_finite_fpc(const FplSignal& s, const char* what) {
  if (!s.is_piecewise_constant())
    throw EvaluationError(std::string(what) + " requires a piecewise-constant operand");
  if (!s.all_finite())
    throw EvaluationError(std::string(what) +
                          " mixes finite and infinite values in an integration window");
}

FplSignal build_descending(std::vector<Segment> rev) {
  std::reverse(rev.begin(), rev.end());
  SegmentsBuilder out;
  for (const Segment& s : rev) out.push(s.start, s.value, s.slope);
  return std::move(out).finish();
}

}  // namespace

FplSignal avg_eventually(const FplSignal& s, double a, double b) {
  check_window(a, b);
  if (s.is_constant()) return s;
  require_finite_fpc(s, "averaged window");

  const auto& segs = s.segments();
  const double width = b - a;
  double t = s.last_time() - a;
  double rn = segs.back().value.raw();
  if (t <= 0.0) return FplSignal::constant(rn);

  std::vector<Segment> rev;
  rev.push_back(Segment{t, ExtendedReal(rn), 0.0});

  AvgSweep w;
  w.a = a;
  w.b = b;
  w.width = width;
  w.F.push_back({t + a, rn});
  w.area = width * rn;

  // Left-edge values are read off by segment index; the sweep starts with
  // the edge sitting on the last breakpoint, so the next one to hit is its
  // left neighbour.
  long hit = static_cast<long>(segs.size()) - 2;

  while (t > 0.0) {
    double t_old = t;
    double cand = -kInf;
    if (hit >= 0) cand = segs[hit].start - a;
    for (std::size_t j = w.F.size(); j-- > 0;) {
      double e = w.F[j].t - b;
      if (e < t_old) {
        cand = std::max(cand, e);
        break;
      }
    }
    t = std::max(cand, 0.0);
    double v = segs[hit >= 0 ? hit : 0].value.raw();
    if (hit >= 0 && segs[hit].start - a == t) --hit;

    w.dequeue_stale(t);
    double strip = w.F.back().r;
    w.slide(t, t_old, v, strip);
    w.tick(t);

    double slope = (w.F.back().r - w.F.front().r) / width;
    rev.push_back(Segment{t, ExtendedReal(w.area / width), slope});
  }
  return build_descending(std::move(rev));
}

FplSignal avg_until(const FplSignal& phi2, const FplSignal& g, double a, double b) {
  check_window(a, b);
  if (phi2.is_constant()) {
    ExtendedReal c = phi2.segments().front().value;
    if (c.is_plus_inf()) return g;  // window content is the cap itself
    if (c.is_minus_inf()) return FplSignal::constant(ExtendedReal::minus_inf());
  }
  if (g.is_constant()) {
    ExtendedReal c = g.segments().front().value;
    if (c.is_plus_inf()) return avg_eventually(phi2, a, b);  // cap never binds
    if (c.is_minus_inf()) return FplSignal::constant(ExtendedReal::minus_inf());
  }
  require_finite_fpc(phi2, "averaged until");
  require_finite_fpc(g, "averaged until");

  const auto& segs = phi2.segments();
  const auto& gsegs = g.segments();
  const double width = b - a;

  double t = std::max(phi2.last_time() - a, g.last_time());
  double r0 = std::min(segs.back().value.raw(), gsegs.back().value.raw());
  if (t <= 0.0) return FplSignal::constant(r0);

  std::vector<Segment> rev;
  rev.push_back(Segment{t, ExtendedReal(r0), 0.0});

  AvgSweep w;
  w.a = a;
  w.b = b;
  w.width = width;
  w.F.push_back({t + a, r0});
  w.area = width * r0;

  // Index-tracked positions of the window's left edge within phi2 and of
  // the sweep time within g.
  long hit = static_cast<long>(segs.size()) - 1;
  if (phi2.last_time() - a >= g.last_time()) --hit;  // edge starts on the breakpoint
  long g_hit = static_cast<long>(gsegs.size()) - 1;
  if (g.last_time() >= phi2.last_time() - a) --g_hit;

  while (t > 0.0) {
    double t_old = t;
    double cand = -kInf;
    if (hit >= 0) cand = segs[hit].start - a;
    if (g_hit >= 0) cand = std::max(cand, gsegs[g_hit].start);
    for (std::size_t j = w.F.size(); j-- > 0;) {
      double e = w.F[j].t - b;
      if (e < t_old) {
        cand = std::max(cand, e);
        break;
      }
    }
    t = std::max(cand, 0.0);
    double v = segs[hit >= 0 ? hit : 0].value.raw();
    double cap = gsegs[g_hit >= 0 ? g_hit : 0].value.raw();
    if (hit >= 0 && segs[hit].start - a == t) --hit;
    if (g_hit >= 0 && gsegs[g_hit].start == t) --g_hit;

    w.dequeue_stale(t);
    double strip = w.F.back().r;
    w.slide(t, t_old, v, strip);
    w.truncate(t, cap);
    w.tick(t);

    double slope = (w.F.back().r - w.F.front().r) / width;
    rev.push_back(Segment{t, ExtendedReal(w.area / width), slope});
  }
  return build_descending(std::move(rev));
}

// ---------------------------------------------------------------------------
// Until family

FplSignal untimed_until(const FplSignal& s1, const FplSignal& s2) {
  if (!s1.has_constant_tail() || !s2.has_constant_tail())
    throw EvaluationError("untimed temporal operators need signals that settle");

  // Merged cell boundaries.
  std::vector<double> cuts;
  for (const Segment& s : s1.segments()) cuts.push_back(s.start);
  for (const Segment& s : s2.segments()) cuts.push_back(s.start);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  ExtendedReal carry = s2.segments().back().value;  // value on the settled tail
  std::vector<Pieces> parts;
  parts.push_back(line_pieces(cuts.back(), carry, 0.0));

  for (std::size_t k = cuts.size() - 1; k-- > 0;) {
    double x0 = cuts[k], x1 = cuts[k + 1];
    const Segment& a1 = s1.segments()[s1.segment_index(x0)];
    const Segment& a2 = s2.segments()[s2.segment_index(x0)];
    Pieces l1 = line_pieces(x0, ExtendedReal(line_value(a1, x0)), a1.slope);
    Pieces l2 = line_pieces(x0, ExtendedReal(line_value(a2, x0)), a2.slope);

    // y = s2 \/ ( s1 /\ ( sup of (s1 /\ s2) ahead \/ (s1 at the cut /\ Y) ) )
    Pieces m = combine(l1, l2, Extremum::Min, x1);
    Pieces ahead = running_toward_end(m, x1, Extremum::Max);
    double l1_end = line_value(a1, x1);
    double c = std::min(l1_end, carry.raw());
    Pieces h = combine(ahead, line_pieces(x0, ExtendedReal(c), 0.0), Extremum::Max, x1);
    Pieces g1 = combine(l1, h, Extremum::Min, x1);
    Pieces y = combine(l2, g1, Extremum::Max, x1);

    carry = y.front().value;
    parts.push_back(std::move(y));
  }

  std::vector<Segment> out;
  for (std::size_t j = parts.size(); j-- > 0;)
    for (const Segment& seg : parts[j]) out.push_back(seg);
  return FplSignal(std::move(out));
}

namespace {

FplSignal until_channel(const FplSignal& u1, const FplSignal& u2, const Interval& iv,
                        bool averaged) {
  double a = iv.lo();
  if (!iv.is_bounded()) {
    // Averaged and plain coincide on unbounded intervals.
    FplSignal y = untimed_until(u1, u2);
    if (a == 0.0) return y;
    return pointwise(suffix_extremum(u2, a, Extremum::Max),
                     sliding_window(y, 0.0, a, Extremum::Min), Extremum::Min);
  }
  double b = iv.hi();
  FplSignal y = untimed_until(u1, u2);
  FplSignal g = a == 0.0 ? y : sliding_window(y, 0.0, a, Extremum::Min);
  if (averaged) return avg_until(u2, g, a, b);
  return pointwise(sliding_window(u2, a, b, Extremum::Max), g, Extremum::Min);
}

}  // namespace

FplSignal bounded_until(const FplSignal& s1, const FplSignal& s2, double a, double b) {
  check_window(a, b);
  return until_channel(s1, s2, Interval(a, b), false);
}

FplSignal release_signal(const FplSignal& s1, const FplSignal& s2, const Interval& iv,
                         bool averaged) {
  return until_channel(s1.negated(), s2.negated(), iv, averaged).negated();
}

// ---------------------------------------------------------------------------
// Structural recursion

namespace {

RobustnessSignal rec(const Trace& tr, const Formula& f);

RobustnessSignal atom_signal(const Trace& tr, const Atomic& at) {
  const FplSignal& x = tr.channel(at.variable);
  FplSignal diff = (at.relation == Relation::Ge || at.relation == Relation::Gt)
                       ? translate(x, -at.threshold)
                       : translate(x.negated(), at.threshold);
  return {diff.clamped(ClampMode::NonNegative), diff.clamped(ClampMode::NonPositive)};
}

RobustnessSignal unary_window(const RobustnessSignal& in, const Interval& iv, Extremum mode) {
  if (iv.is_bounded())
    return {sliding_window(in.pos, iv.lo(), iv.hi(), mode),
            sliding_window(in.neg, iv.lo(), iv.hi(), mode)};
  return {suffix_extremum(in.pos, iv.lo(), mode), suffix_extremum(in.neg, iv.lo(), mode)};
}

RobustnessSignal rec(const Trace& tr, const Formula& f) {
  const FormulaNode& n = f.node();
  switch (n.op) {
    case Op::True:
      return {FplSignal::constant(ExtendedReal::plus_inf()), FplSignal::constant(0.0)};
    case Op::False:
      return {FplSignal::constant(0.0), FplSignal::constant(ExtendedReal::minus_inf())};
    case Op::Atom:
      return atom_signal(tr, *n.atom);
    case Op::Not: {
      RobustnessSignal c = rec(tr, f.child(0));
      return {c.neg.negated(), c.pos.negated()};
    }
    case Op::And: {
      RobustnessSignal l = rec(tr, f.child(0)), r = rec(tr, f.child(1));
      return {pointwise(l.pos, r.pos, Extremum::Min), pointwise(l.neg, r.neg, Extremum::Min)};
    }
    case Op::Or: {
      RobustnessSignal l = rec(tr, f.child(0)), r = rec(tr, f.child(1));
      return {pointwise(l.pos, r.pos, Extremum::Max), pointwise(l.neg, r.neg, Extremum::Max)};
    }
    case Op::Implies: {
      // a -> b  ==  !a | b
      RobustnessSignal l = rec(tr, f.child(0)), r = rec(tr, f.child(1));
      return {pointwise(l.neg.negated(), r.pos, Extremum::Max),
              pointwise(l.pos.negated(), r.neg, Extremum::Max)};
    }
    case Op::Eventually:
      return unary_window(rec(tr, f.child(0)), *n.interval, Extremum::Max);
    case Op::Always:
      return unary_window(rec(tr, f.child(0)), *n.interval, Extremum::Min);
    case Op::AvgEventually: {
      RobustnessSignal c = rec(tr, f.child(0));
      const Interval& iv = *n.interval;
      if (!iv.is_bounded()) return unary_window(c, iv, Extremum::Max);
      return {avg_eventually(c.pos, iv.lo(), iv.hi()), avg_eventually(c.neg, iv.lo(), iv.hi())};
    }
    case Op::AvgAlways: {
      RobustnessSignal c = rec(tr, f.child(0));
      const Interval& iv = *n.interval;
      if (!iv.is_bounded()) return unary_window(c, iv, Extremum::Min);
      // Dual sweep: an averaged inf-window is the negated sup-window of the
      // negated signal.
      auto dual = [&](const FplSignal& s) {
        return avg_eventually(s.negated(), iv.lo(), iv.hi()).negated();
      };
      return {dual(c.pos), dual(c.neg)};
    }
    case Op::Until:
    case Op::AvgUntil: {
      RobustnessSignal l = rec(tr, f.child(0)), r = rec(tr, f.child(1));
      bool avg = n.op == Op::AvgUntil && n.interval->is_bounded();
      return {until_channel(l.pos, r.pos, *n.interval, avg),
              until_channel(l.neg, r.neg, *n.interval, avg)};
    }
    case Op::Release:
    case Op::AvgRelease: {
      RobustnessSignal l = rec(tr, f.child(0)), r = rec(tr, f.child(1));
      bool avg = n.op == Op::AvgRelease && n.interval->is_bounded();
      return {release_signal(l.pos, r.pos, *n.interval, avg),
              release_signal(l.neg, r.neg, *n.interval, avg)};
    }
  }
  throw EvaluationError("unhandled formula node");
}

void validate_inputs(const Trace& tr, const Formula& f) {
  if (!f) throw std::invalid_argument("empty formula");
  if (averaged_depth(f) > 1)
    throw UnsupportedFormulaError("nested averaged temporal operators are not supported");
  for (const std::string& v : referenced_variables(f)) tr.channel(v);  // throws when missing
}

}  // namespace

RobustnessSignal robust_signal(const Trace& trace, const Formula& f) {
  validate_inputs(trace, f);
  return rec(trace, f);
}

RobustnessPair evaluate(const Trace& trace, const Formula& f) {
  RobustnessSignal rs = robust_signal(trace, f);
  return {rs.pos.value_at(0.0), rs.neg.value_at(0.0)};
}

}  // namespace avstl
