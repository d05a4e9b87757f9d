#include "avstl/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <unordered_map>
#include <vector>

#include "avstl/errors.hpp"

namespace avstl::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Channel { Pos, Neg };
Channel flip(Channel c) { return c == Channel::Pos ? Channel::Neg : Channel::Pos; }

using Fn = std::function<double(double)>;

// One affine stretch of a sampled function, produced by adaptive bisection.
// v0 is the actual (right-)value at x0; lim_left / lim_right are the affine
// limits when approaching the panel edges from inside.
struct Panel {
  double x0, x1;
  double v0;
  double lim_left, lim_right;
};

// Splits (x0, x1) until fn looks affine on each piece (five-point
// collinearity test). Jumps at x0 itself are fine: the panel records both
// the point value and the one-sided limits.
void refine_panels(const Fn& fn, double x0, double x1, double v0, int depth,
                   std::vector<Panel>& out) {
  double w = x1 - x0;
  double xs[5] = {x0 + w / 64.0, x0 + 0.25 * w, x0 + 0.5 * w, x0 + 0.75 * w,
                  x1 - w / 64.0};
  double fs[5];
  for (int i = 0; i < 5; ++i) fs[i] = fn(xs[i]);

  bool any_inf = false, all_same = true;
  for (int i = 0; i < 5; ++i) {
    if (std::isinf(fs[i])) any_inf = true;
    if (fs[i] != fs[0]) all_same = false;
  }
  if (any_inf) {
    if (all_same) {
      out.push_back(Panel{x0, x1, v0, fs[0], fs[0]});
      return;
    }
  } else {
    double slope = (fs[3] - fs[1]) / (0.5 * w);
    auto on_line = [&](double x, double f) {
      double predicted = fs[1] + slope * (x - xs[1]);
      double scale = 1.0 + std::abs(fs[1]) + std::abs(fs[3]);
      return std::abs(f - predicted) <= 1e-9 * scale;
    };
    if (on_line(xs[0], fs[0]) && on_line(xs[2], fs[2]) && on_line(xs[4], fs[4])) {
      out.push_back(Panel{x0, x1, v0, fs[1] + slope * (x0 - xs[1]),
                          fs[1] + slope * (x1 - xs[1])});
      return;
    }
  }
  if (depth <= 0 || w <= 1e-11 * (1.0 + std::abs(x0))) {
    // Secant fallback; the sliver contributes negligibly.
    out.push_back(Panel{x0, x1, v0, fs[0], fs[4]});
    return;
  }
  double mid = x0 + 0.5 * w;
  refine_panels(fn, x0, mid, v0, depth - 1, out);
  refine_panels(fn, mid, x1, fn(mid), depth - 1, out);
}

std::vector<Panel> panels_of(const Fn& fn, double x0, double x1) {
  std::vector<Panel> out;
  if (x1 > x0) refine_panels(fn, x0, x1, fn(x0), 48, out);
  return out;
}

// Extremum of fn over [x0, x1); closure limits at x1 are included, the
// right-point value itself is not (half-open cell).
double cell_extremum(const Fn& fn, double x0, double x1, Extremum mode) {
  double best = mode == Extremum::Max ? -kInf : kInf;
  auto feed = [&](double v) {
    best = mode == Extremum::Max ? std::max(best, v) : std::min(best, v);
  };
  for (const Panel& p : panels_of(fn, x0, x1)) {
    feed(p.v0);
    feed(p.lim_left);
    feed(p.lim_right);
  }
  return best;
}

struct MemoKey {
  std::uint32_t node;
  std::uint32_t channel;
  std::uint64_t time_bits;
  bool operator==(const MemoKey&) const = default;
};

struct MemoHash {
  std::size_t operator()(const MemoKey& k) const {
    std::uint64_t h = k.time_bits * 0x9E3779B97F4A7C15ull;
    h ^= (std::uint64_t(k.node) << 33) ^ (std::uint64_t(k.channel) << 1);
    h ^= h >> 29;
    h *= 0xBF58476D1CE4E5B9ull;
    h ^= h >> 32;
    return static_cast<std::size_t>(h);
  }
};

class Evaluator {
 public:
  Evaluator(const Trace& trace, const Formula& f, const OracleConfig& cfg)
      : trace_(trace), cfg_(cfg) {
    root_ = intern(f);
  }

  double value(Channel ch, double t) { return value(root_, ch, t); }

 private:
  struct NodeRec {
    Formula formula;
    int left = -1, right = -1;
    std::vector<double> events;  // absolute times where this signal may break
  };

  int intern(const Formula& f) {
    NodeRec rec;
    rec.formula = f;
    if (f.arity() >= 1) rec.left = intern(f.child(0));
    if (f.arity() == 2) rec.right = intern(f.child(1));
    rec.events = compute_events(rec);
    nodes_.push_back(std::move(rec));
    return static_cast<int>(nodes_.size() - 1);
  }

  std::vector<double> compute_events(const NodeRec& rec) const {
    const FormulaNode& n = rec.formula.node();
    std::vector<double> ev;
    if (n.op == Op::Atom || n.op == Op::True || n.op == Op::False) {
      ev = trace_.timestamps();
    } else {
      if (rec.left >= 0) ev = nodes_[rec.left].events;
      if (rec.right >= 0) {
        const auto& r = nodes_[rec.right].events;
        ev.insert(ev.end(), r.begin(), r.end());
      }
      if (is_temporal(n.op)) {
        std::vector<double> shifted;
        for (double e : ev) {
          shifted.push_back(e - n.interval->lo());
          if (n.interval->is_bounded()) shifted.push_back(e - n.interval->hi());
        }
        ev.insert(ev.end(), shifted.begin(), shifted.end());
      }
    }
    std::erase_if(ev, [](double e) { return e < 0.0; });
    ev.push_back(0.0);
    std::sort(ev.begin(), ev.end());
    ev.erase(std::unique(ev.begin(), ev.end()), ev.end());
    return ev;
  }

  double max_event(int id) const { return nodes_[id].events.back(); }

  double value(int id, Channel ch, double t) {
    MemoKey key{static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(ch),
                std::bit_cast<std::uint64_t>(t)};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    double v = compute(id, ch, t);
    memo_.emplace(key, v);
    return v;
  }

  double compute(int id, Channel ch, double t) {
    const NodeRec& rec = nodes_[id];
    const FormulaNode& n = rec.formula.node();
    switch (n.op) {
      case Op::True:
        return ch == Channel::Pos ? kInf : 0.0;
      case Op::False:
        return ch == Channel::Pos ? 0.0 : -kInf;
      case Op::Atom: {
        double x = trace_.channel(n.atom->variable).value_at(t).raw();
        double diff = (n.atom->relation == Relation::Ge || n.atom->relation == Relation::Gt)
                          ? x - n.atom->threshold
                          : n.atom->threshold - x;
        return ch == Channel::Pos ? std::max(0.0, diff) : std::min(0.0, diff);
      }
      case Op::Not:
        return -value(rec.left, flip(ch), t);
      case Op::And:
        return std::min(value(rec.left, ch, t), value(rec.right, ch, t));
      case Op::Or:
        return std::max(value(rec.left, ch, t), value(rec.right, ch, t));
      case Op::Implies:
        return std::max(-value(rec.left, flip(ch), t), value(rec.right, ch, t));
      case Op::Eventually:
      case Op::AvgEventually: {
        bool averaged = n.op == Op::AvgEventually && n.interval->is_bounded();
        Fn w = [&](double u) { return value(rec.left, ch, t + u); };
        if (!averaged) return window_extremum(id, w, t, Extremum::Max);
        return integrate_running(id, w, t, Extremum::Max);
      }
      case Op::Always:
      case Op::AvgAlways: {
        bool averaged = n.op == Op::AvgAlways && n.interval->is_bounded();
        Fn w = [&](double u) { return value(rec.left, ch, t + u); };
        if (!averaged) return window_extremum(id, w, t, Extremum::Min);
        return integrate_running(id, w, t, Extremum::Min);
      }
      case Op::Until:
      case Op::AvgUntil:
        return until_like(id, ch, t, /*release=*/false,
                          n.op == Op::AvgUntil && n.interval->is_bounded());
      case Op::Release:
      case Op::AvgRelease:
        return until_like(id, ch, t, /*release=*/true,
                          n.op == Op::AvgRelease && n.interval->is_bounded());
    }
    throw OracleError("unhandled node");
  }

  // Candidate grid over window offsets [0, hi]: shifted events plus the
  // interval endpoints.
  std::vector<double> offset_grid(int id, double t, double lo, double hi) const {
    std::vector<double> g{0.0, lo, hi};
    for (double e : nodes_[id].events) {
      double u = e - t;
      if (u > 0.0 && u < hi) g.push_back(u);
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    std::erase_if(g, [&](double u) { return u < 0.0 || u > hi; });
    return g;
  }

  double window_hi(int id, double t, const Interval& iv) const {
    if (iv.is_bounded()) return iv.hi();
    // Everything is settled past the last event; one extra candidate there
    // covers the tail.
    return std::max(iv.lo(), max_event(id) - t) + 1.0;
  }

  double window_extremum(int id, const Fn& w, double t, Extremum mode) {
    const Interval& iv = *nodes_[id].formula.node().interval;
    double lo = iv.lo(), hi = window_hi(id, t, iv);
    std::vector<double> grid = offset_grid(id, t, lo, hi);
    double best = mode == Extremum::Max ? -kInf : kInf;
    auto feed = [&](double v) {
      best = mode == Extremum::Max ? std::max(best, v) : std::min(best, v);
    };
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      if (grid[k + 1] <= lo) continue;
      feed(cell_extremum(w, grid[k], grid[k + 1], mode));
    }
    feed(w(hi));
    return best;
  }

  // Shared until/release evaluation. The window term at offset u is
  //   q(u) = s2(t+u) /\ inf of s1 over [t, t+u)     (until)
  //   r(u) = s2(t+u) \/ sup of s1 over [t, t+u)     (release)
  // and the result is the sup (until) or inf (release) of that over the
  // window, or its running average for the averaged forms.
  double until_like(int id, Channel ch, double t, bool release, bool averaged) {
    const NodeRec& rec = nodes_[id];
    const Interval& iv = *rec.formula.node().interval;
    double lo = iv.lo(), hi = window_hi(id, t, iv);
    Extremum outer = release ? Extremum::Min : Extremum::Max;
    Extremum prefix_mode = release ? Extremum::Max : Extremum::Min;

    Fn v1 = [&](double x) { return value(rec.left, ch, x); };
    Fn v2 = [&](double x) { return value(rec.right, ch, x); };

    std::vector<double> grid = offset_grid(id, t, lo, hi);

    // Prefix extremum of s1 over [t, t+u), advanced cell by cell.
    double pref = release ? -kInf : kInf;
    double best = outer == Extremum::Max ? -kInf : kInf;
    auto feed = [&](double v) {
      best = outer == Extremum::Max ? std::max(best, v) : std::min(best, v);
    };
    auto combine_q = [&](double a, double b) {
      return release ? std::max(a, b) : std::min(a, b);
    };

    std::vector<double> taus, qvals;  // running-term samples for averaging
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      double u0 = grid[k], u1 = grid[k + 1];
      if (u1 > lo) {
        // In-cell prefix: the part of s1 between t+u0 and the sample point.
        Fn q = [&, u0, pref](double u) {
          double p = pref;
          if (u > u0) {
            double in_cell = cell_extremum(v1, t + u0, t + u, prefix_mode);
            p = prefix_mode == Extremum::Min ? std::min(p, in_cell) : std::max(p, in_cell);
          }
          return combine_q(v2(t + u), p);
        };
        if (!averaged) {
          feed(cell_extremum(q, u0, u1, outer));
        } else {
          for (const Panel& p : panels_of(q, u0, u1)) {
            taus.push_back(p.x0);
            qvals.push_back(p.v0);
            taus.push_back(p.x0);
            qvals.push_back(p.lim_left);
            taus.push_back(p.x1);
            qvals.push_back(p.lim_right);
          }
        }
      }
      double cell = cell_extremum(v1, t + u0, t + u1, prefix_mode);
      pref = prefix_mode == Extremum::Min ? std::min(pref, cell) : std::max(pref, cell);
    }
    double q_end = combine_q(v2(t + hi), pref);
    if (!averaged) {
      feed(q_end);
      return best;
    }
    taus.push_back(hi);
    qvals.push_back(q_end);
    return integrate_samples(lo, hi, taus, qvals, outer);
  }

  // Averaged eventually/always: integrate the running extremum of w over
  // [lo, tau] for tau in [lo, hi], normalized by the window width.
  double integrate_running(int id, const Fn& w, double t, Extremum mode) {
    const Interval& iv = *nodes_[id].formula.node().interval;
    double lo = iv.lo(), hi = iv.hi();
    std::vector<double> grid = offset_grid(id, t, lo, hi);
    std::vector<double> taus, qvals;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      if (grid[k + 1] <= lo) continue;
      for (const Panel& p : panels_of(w, grid[k], grid[k + 1])) {
        taus.push_back(p.x0);
        qvals.push_back(p.v0);
        taus.push_back(p.x0);
        qvals.push_back(p.lim_left);
        taus.push_back(p.x1);
        qvals.push_back(p.lim_right);
      }
    }
    taus.push_back(hi);
    qvals.push_back(w(hi));
    return integrate_samples(lo, hi, taus, qvals, mode);
  }

  // Integrates the running extremum of piecewise-affine samples:
  // h(tau) = ext of q over [lo, tau]. The sample list holds panel corner
  // values (point values and one-sided limits) in increasing tau order;
  // between consecutive taus the underlying q is affine, so h is the
  // running extremum of the straight line between the samples. Trapezoid
  // sums over this grid, halved until convergence.
  double integrate_samples(double lo, double hi, const std::vector<double>& taus,
                           const std::vector<double>& qvals, Extremum mode) {
    if (!(hi > lo)) throw OracleError("degenerate averaging window");
    auto ext = [&](double a, double b) {
      return mode == Extremum::Max ? std::max(a, b) : std::min(a, b);
    };

    // Collapse the corner samples into panels of h. Within a panel q runs
    // affinely from q_left to q_right, so the running extremum there is the
    // flat carry clipped against that line.
    struct HPanel {
      double x0, x1, carry, q_left, q_right;
    };
    std::vector<HPanel> hp;
    double running = mode == Extremum::Max ? -kInf : kInf;
    bool any_inf = false, any_finite = false;
    double pole = 0.0;
    for (std::size_t i = 0; i + 1 < taus.size(); ++i) {
      running = ext(running, qvals[i]);
      double x0 = taus[i], x1 = taus[i + 1];
      if (x1 <= x0) continue;
      double q0 = qvals[i], q1 = qvals[i + 1];
      double h0 = running;  // carry already includes the left limit
      if (std::isinf(h0) || std::isinf(q1)) {
        any_inf = true;
        pole = std::isinf(h0) ? h0 : q1;
        if (std::isfinite(h0) || std::isfinite(q1)) any_finite = true;
      } else {
        any_finite = true;
      }
      hp.push_back(HPanel{x0, x1, h0, q0, q1});
      running = ext(running, q1);
    }
    if (any_inf) {
      if (any_finite)
        throw EvaluationError("integration window mixes finite and infinite values");
      return pole;
    }

    auto h_at = [&](const HPanel& p, double x) {
      double line = p.q_left + (p.q_right - p.q_left) * ((x - p.x0) / (p.x1 - p.x0));
      return ext(p.carry, line);
    };

    double prev = 0.0;
    for (int level = 0; level <= cfg_.integration_refinements; ++level) {
      long pieces = 1L << level;
      double total = 0.0;
      for (const HPanel& p : hp) {
        double w = (p.x1 - p.x0) / static_cast<double>(pieces);
        if (w == 0.0) continue;
        double acc = 0.5 * (h_at(p, p.x0) + h_at(p, p.x1));
        for (long j = 1; j < pieces; ++j) acc += h_at(p, p.x0 + w * j);
        total += acc * w;
      }
      if (level > 0 && std::abs(total - prev) < cfg_.abs_tolerance)
        return total / (hi - lo);
      prev = total;
    }
    throw OracleError("averaged integral did not converge");
  }

  const Trace& trace_;
  OracleConfig cfg_;
  std::vector<NodeRec> nodes_;
  int root_;
  std::unordered_map<MemoKey, double, MemoHash> memo_;
};

void validate(const Trace& trace, const Formula& f) {
  if (!f) throw std::invalid_argument("empty formula");
  if (averaged_depth(f) > 1)
    throw UnsupportedFormulaError("nested averaged temporal operators are not supported");
  for (const std::string& v : referenced_variables(f)) trace.channel(v);
}

}  // namespace

RobustnessPair oracle_evaluate(const Trace& trace, const Formula& f, const OracleConfig& cfg) {
  validate(trace, f);
  Evaluator ev(trace, f, cfg);
  return {ExtendedReal(ev.value(Channel::Pos, 0.0)), ExtendedReal(ev.value(Channel::Neg, 0.0))};
}

std::vector<RobustnessPair> oracle_robust_signal_samples(const Trace& trace, const Formula& f,
                                                         std::span<const double> times,
                                                         const OracleConfig& cfg) {
  validate(trace, f);
  Evaluator ev(trace, f, cfg);
  std::vector<RobustnessPair> out;
  out.reserve(times.size());
  for (double t : times) {
    if (t < 0.0) throw std::domain_error("sample times must be nonnegative");
    out.push_back({ExtendedReal(ev.value(Channel::Pos, t)),
                   ExtendedReal(ev.value(Channel::Neg, t))});
  }
  return out;
}

}  // namespace avstl::oracle
