#include "avstl/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "avstl/errors.hpp"

namespace avstl {

namespace {

constexpr double kSnapEps = 1e-12;

double line_value(const Segment& s, double t) {
  if (!s.value.is_finite()) return s.value.raw();
  return s.value.raw() + s.slope * (t - s.start);
}

void validate(const std::vector<Segment>& segs) {
  if (segs.empty()) throw std::invalid_argument("signal needs at least one segment");
  if (segs.front().start != 0.0)
    throw std::invalid_argument("first segment must start at t = 0");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Segment& s = segs[i];
    if (std::isnan(s.start) || std::isinf(s.start))
      throw std::invalid_argument("segment timestamp must be finite");
    if (std::isnan(s.value.raw())) throw std::invalid_argument("segment value is NaN");
    if (!std::isfinite(s.slope)) throw std::invalid_argument("segment slope must be finite");
    if (!s.value.is_finite() && s.slope != 0.0)
      throw std::invalid_argument("infinite segment value requires slope 0");
    if (i > 0 && !(segs[i - 1].start < s.start))
      throw std::invalid_argument("segment timestamps must be strictly increasing");
  }
}

std::vector<Segment> canonicalize(std::vector<Segment> segs) {
  std::vector<Segment> out;
  out.reserve(segs.size());
  for (const Segment& s : segs) {
    if (!out.empty()) {
      const Segment& p = out.back();
      ExtendedReal reach = p.value.is_finite()
                               ? ExtendedReal(p.value.raw() + p.slope * (s.start - p.start))
                               : p.value;
      if (p.slope == s.slope && reach == s.value) continue;  // collinear
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

FplSignal::FplSignal(std::vector<Segment> segments) {
  validate(segments);
  segs_ = canonicalize(std::move(segments));
}

FplSignal FplSignal::constant(ExtendedReal v) {
  return FplSignal({Segment{0.0, v, 0.0}});
}

FplSignal FplSignal::from_steps(const std::vector<std::pair<double, double>>& steps) {
  std::vector<Segment> segs;
  segs.reserve(steps.size());
  for (const auto& [t, v] : steps) segs.push_back(Segment{t, ExtendedReal(v), 0.0});
  return FplSignal(std::move(segs));
}

bool FplSignal::is_piecewise_constant() const {
  return std::all_of(segs_.begin(), segs_.end(),
                     [](const Segment& s) { return s.slope == 0.0; });
}

bool FplSignal::is_constant() const { return segs_.size() == 1 && segs_[0].slope == 0.0; }

bool FplSignal::all_finite() const {
  return std::all_of(segs_.begin(), segs_.end(),
                     [](const Segment& s) { return s.value.is_finite(); });
}

std::size_t FplSignal::segment_index(double t) const {
  if (t < 0.0) throw std::domain_error("signal time must be nonnegative");
  // Last segment with start <= t.
  auto it = std::upper_bound(segs_.begin(), segs_.end(), t,
                             [](double v, const Segment& s) { return v < s.start; });
  return static_cast<std::size_t>(it - segs_.begin()) - 1;
}

ExtendedReal FplSignal::value_at(double t) const {
  const Segment& s = segs_[segment_index(t)];
  return ExtendedReal(line_value(s, t));
}

FplSignal FplSignal::shifted(double d) const {
  if (d < 0.0) throw std::domain_error("shift distance must be nonnegative");
  if (d == 0.0) return *this;
  std::size_t k = segment_index(d);
  std::vector<Segment> out;
  out.reserve(segs_.size() - k);
  out.push_back(Segment{0.0, ExtendedReal(line_value(segs_[k], d)), segs_[k].slope});
  for (std::size_t i = k + 1; i < segs_.size(); ++i)
    out.push_back(Segment{segs_[i].start - d, segs_[i].value, segs_[i].slope});
  return FplSignal(std::move(out));
}

FplSignal FplSignal::negated() const {
  std::vector<Segment> out;
  out.reserve(segs_.size());
  for (const Segment& s : segs_) out.push_back(Segment{s.start, -s.value, -s.slope});
  return FplSignal(std::move(out));
}

FplSignal FplSignal::clamped(ClampMode mode) const {
  FplSignal zero = FplSignal::constant(0.0);
  return mode == ClampMode::NonNegative ? pointwise(*this, zero, Extremum::Max)
                                        : pointwise(*this, zero, Extremum::Min);
}

ExtendedReal FplSignal::area(double lo, double hi) const {
  if (!(lo >= 0.0) || !(hi >= lo))
    throw std::domain_error("integration bounds require 0 <= lo <= hi");
  if (lo == hi) return ExtendedReal(0.0);

  std::size_t first = segment_index(lo);
  std::size_t last = segment_index(hi);
  // hi sitting exactly on a breakpoint contributes zero width from that
  // segment; step back so the pole check ignores it.
  if (last > first && segs_[last].start == hi) --last;

  bool any_inf = false, any_finite = false, plus = false, minus = false;
  for (std::size_t i = first; i <= last; ++i) {
    if (segs_[i].value.is_finite()) {
      any_finite = true;
    } else {
      any_inf = true;
      (segs_[i].value.is_plus_inf() ? plus : minus) = true;
    }
  }
  if (any_inf) {
    if (any_finite || (plus && minus))
      throw EvaluationError("integration window mixes finite and infinite values");
    return plus ? ExtendedReal::plus_inf() : ExtendedReal::minus_inf();
  }

  double acc = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    double x0 = std::max(lo, segs_[i].start);
    double x1 = (i + 1 < segs_.size()) ? std::min(hi, segs_[i + 1].start) : hi;
    if (x1 <= x0) continue;
    acc += 0.5 * (line_value(segs_[i], x0) + line_value(segs_[i], x1)) * (x1 - x0);
  }
  return ExtendedReal(acc);
}

namespace {

// Emits the winner pieces of two affine segments over [x0, x1). x1 may be
// +inf for the tail cell. Crossings inside the cell become breakpoints.
void emit_extremum_cell(SegmentsBuilder& out, const Segment& sa, const Segment& sb,
                        double x0, double x1, Extremum which) {
  const bool take_max = which == Extremum::Max;
  auto better = [&](double va, double vb) { return take_max ? va >= vb : va <= vb; };

  double a0 = line_value(sa, x0), b0 = line_value(sb, x0);
  if (!sa.value.is_finite() || !sb.value.is_finite()) {
    // An infinite piece dominates (or is dominated) over the whole cell.
    const Segment& win = better(a0, b0) ? sa : sb;
    out.push(x0, ExtendedReal(line_value(win, x0)), win.slope);
    return;
  }

  double qa = sa.slope, qb = sb.slope;
  double cross = std::numeric_limits<double>::quiet_NaN();
  if (qa != qb) {
    double tc = x0 + (b0 - a0) / (qa - qb);
    if (tc > x0 + kSnapEps && (std::isinf(x1) || tc < x1 - kSnapEps)) cross = tc;
  }

  auto push_piece = [&](double from, bool a_wins) {
    const Segment& win = a_wins ? sa : sb;
    out.push(from, ExtendedReal(line_value(win, from)), win.slope);
  };

  if (std::isnan(cross)) {
    bool a_wins;
    if (a0 != b0) {
      a_wins = better(a0, b0);
    } else {
      // Equal at the left edge: the slope decides.
      a_wins = take_max ? qa >= qb : qa <= qb;
    }
    push_piece(x0, a_wins);
  } else {
    bool a_wins_left = better(a0, b0);  // a0 != b0 here, else cross == x0
    push_piece(x0, a_wins_left);
    push_piece(cross, !a_wins_left);
  }
}

}  // namespace

FplSignal pointwise(const FplSignal& a, const FplSignal& b, Extremum which) {
  const auto& sa = a.segments();
  const auto& sb = b.segments();
  SegmentsBuilder out;

  std::size_t ia = 0, ib = 0;
  double x = 0.0;
  while (true) {
    double next_a = ia + 1 < sa.size() ? sa[ia + 1].start
                                       : std::numeric_limits<double>::infinity();
    double next_b = ib + 1 < sb.size() ? sb[ib + 1].start
                                       : std::numeric_limits<double>::infinity();
    double x1 = std::min(next_a, next_b);
    emit_extremum_cell(out, sa[ia], sb[ib], x, x1, which);
    if (std::isinf(x1)) break;
    if (next_a == x1) ++ia;
    if (next_b == x1) ++ib;
    x = x1;
  }
  return std::move(out).finish();
}

void SegmentsBuilder::push(double start, ExtendedReal value, double slope) {
  if (!segs_.empty()) {
    double prev = segs_.back().start;
    if (start <= prev + kSnapEps) {
      // Same (or nearly same) timestamp: the later write wins.
      segs_.back() = Segment{prev, value, slope};
      return;
    }
  }
  segs_.push_back(Segment{start, value, slope});
}

FplSignal SegmentsBuilder::finish() && { return FplSignal(std::move(segs_)); }

// ---------------------------------------------------------------------------
// Trace

Trace::Trace(std::map<std::string, FplSignal> channels) : channels_(std::move(channels)) {
  if (channels_.empty()) throw std::invalid_argument("trace needs at least one channel");
  for (const auto& [name, sig] : channels_) {
    if (!sig.is_piecewise_constant())
      throw std::invalid_argument("trace channel '" + name + "' must be piecewise-constant");
    if (!sig.all_finite())
      throw std::invalid_argument("trace channel '" + name + "' must be finite");
    horizon_ = std::max(horizon_, sig.last_time());
  }
}

bool Trace::has(const std::string& variable) const { return channels_.count(variable) > 0; }

const FplSignal& Trace::channel(const std::string& variable) const {
  auto it = channels_.find(variable);
  if (it == channels_.end())
    throw UnknownVariableError("unknown variable '" + variable + "'");
  return it->second;
}

std::vector<std::string> Trace::variables() const {
  std::vector<std::string> names;
  names.reserve(channels_.size());
  for (const auto& [name, sig] : channels_) names.push_back(name);
  return names;
}

std::vector<double> Trace::timestamps() const {
  std::vector<double> ts;
  for (const auto& [name, sig] : channels_)
    for (const Segment& s : sig.segments()) ts.push_back(s.start);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

Trace Trace::load_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("empty trace file");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  std::vector<std::string> names;
  {
    std::stringstream ss(header);
    std::string field;
    while (std::getline(ss, field, ',')) names.push_back(field);
  }
  if (names.empty() || names[0] != "time")
    throw std::invalid_argument("trace header must start with 'time'");
  if (names.size() < 2) throw std::invalid_argument("trace needs at least one variable");

  std::size_t nvars = names.size() - 1;
  std::vector<std::vector<std::pair<double, double>>> steps(nvars);
  double prev_t = -1.0;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ss, field, ',')) {
      std::size_t pos = 0;
      double v;
      try {
        v = std::stod(field, &pos);
      } catch (const std::exception&) {
        throw std::invalid_argument("trace row " + std::to_string(row) + ": bad number '" +
                                    field + "'");
      }
      if (pos != field.size())
        throw std::invalid_argument("trace row " + std::to_string(row) + ": bad number '" +
                                    field + "'");
      vals.push_back(v);
    }
    if (vals.size() != names.size())
      throw std::invalid_argument("trace row " + std::to_string(row) +
                                  ": expected " + std::to_string(names.size()) + " fields");
    double t = vals[0];
    if (row == 1 && t != 0.0)
      throw std::invalid_argument("trace must start at time 0");
    if (t <= prev_t)
      throw std::invalid_argument("trace times must be strictly increasing");
    for (std::size_t i = 0; i < nvars; ++i) {
      if (!std::isfinite(vals[i + 1]))
        throw std::invalid_argument("trace values must be finite");
      steps[i].emplace_back(t, vals[i + 1]);
    }
    prev_t = t;
  }
  if (row == 0) throw std::invalid_argument("trace has no rows");

  std::map<std::string, FplSignal> channels;
  for (std::size_t i = 0; i < nvars; ++i)
    channels.emplace(names[i + 1], FplSignal::from_steps(steps[i]));
  return Trace(std::move(channels));
}

Trace Trace::load_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open trace file '" + path + "'");
  return load_csv(f);
}

void Trace::write_csv(std::ostream& out) const {
  std::vector<const FplSignal*> sigs;
  out << "time";
  for (const auto& [name, sig] : channels_) {
    out << ',' << name;
    sigs.push_back(&sig);
  }
  out << '\n';

  std::vector<double> ts = timestamps();
  char buf[64];
  for (double t : ts) {
    std::snprintf(buf, sizeof buf, "%.17g", t);
    out << buf;
    for (const FplSignal* sig : sigs) {
      std::snprintf(buf, sizeof buf, "%.17g", sig->value_at(t).raw());
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace avstl
