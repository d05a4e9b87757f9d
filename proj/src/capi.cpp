#include "avstl.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "avstl/errors.hpp"
#include "avstl/falsify.hpp"
#include "avstl/formula.hpp"
#include "avstl/robustness.hpp"
#include "avstl/signal.hpp"

struct avstl_trace {
  avstl::Trace trace;
};

struct avstl_formula {
  avstl::Formula formula;
};

struct avstl_robustness_signal {
  avstl::RobustnessSignal signal;
  std::vector<double> starts;  // merged breakpoints of both channels
};

namespace {

thread_local std::string g_last_error = "";

avstl_status fail(avstl_status code, const char* msg) {
  g_last_error = msg;
  return code;
}

template <typename F>
avstl_status guarded(F&& body) {
  try {
    return body();
  } catch (const avstl::ParseError& e) {
    std::ostringstream os;
    os << e.what() << " (line " << e.line() << ", column " << e.column() << ")";
    g_last_error = os.str();
    return AVSTL_ERR_PARSE;
  } catch (const avstl::UnsupportedFormulaError& e) {
    g_last_error = e.what();
    return AVSTL_ERR_UNSUPPORTED_FORMULA;
  } catch (const avstl::UnknownVariableError& e) {
    g_last_error = e.what();
    return AVSTL_ERR_EVAL;
  } catch (const avstl::EvaluationError& e) {
    g_last_error = e.what();
    return AVSTL_ERR_EVAL;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return AVSTL_ERR_INVALID_ARGUMENT;
  } catch (const std::domain_error& e) {
    g_last_error = e.what();
    return AVSTL_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return AVSTL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AVSTL_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* avstl_status_name(avstl_status status) {
  switch (status) {
    case AVSTL_OK: return "ok";
    case AVSTL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case AVSTL_ERR_PARSE: return "parse error";
    case AVSTL_ERR_IO: return "i/o error";
    case AVSTL_ERR_UNSUPPORTED_FORMULA: return "unsupported formula";
    case AVSTL_ERR_EVAL: return "evaluation error";
    case AVSTL_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* avstl_last_error(void) { return g_last_error.c_str(); }

avstl_status avstl_trace_load_csv(const char* path, avstl_trace** out) {
  if (!path || !out) return fail(AVSTL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::ifstream f(path);
    if (!f) return fail(AVSTL_ERR_IO, "cannot open trace file");
    avstl::Trace t = avstl::Trace::load_csv(f);
    *out = new avstl_trace{std::move(t)};
    return AVSTL_OK;
  });
}

avstl_status avstl_trace_create(const char* const* names, size_t n_vars, const double* times,
                                size_t n_rows, const double* values, avstl_trace** out) {
  if (!names || !times || !values || !out || n_vars == 0 || n_rows == 0)
    return fail(AVSTL_ERR_INVALID_ARGUMENT, "null or empty argument");
  return guarded([&] {
    std::map<std::string, avstl::FplSignal> channels;
    for (size_t v = 0; v < n_vars; ++v) {
      std::vector<std::pair<double, double>> steps;
      steps.reserve(n_rows);
      for (size_t r = 0; r < n_rows; ++r)
        steps.emplace_back(times[r], values[r * n_vars + v]);
      channels.emplace(names[v], avstl::FplSignal::from_steps(steps));
    }
    *out = new avstl_trace{avstl::Trace(std::move(channels))};
    return AVSTL_OK;
  });
}

avstl_status avstl_trace_write_csv(const avstl_trace* trace, const char* path) {
  if (!trace || !path) return fail(AVSTL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::ofstream f(path);
    if (!f) return fail(AVSTL_ERR_IO, "cannot open output file");
    trace->trace.write_csv(f);
    return f ? AVSTL_OK : fail(AVSTL_ERR_IO, "write failed");
  });
}

double avstl_trace_horizon(const avstl_trace* trace) {
  return trace ? trace->trace.horizon() : -1.0;
}

void avstl_trace_free(avstl_trace* trace) { delete trace; }

avstl_status avstl_formula_parse(const char* text, avstl_formula** out) {
  if (!text || !out) return fail(AVSTL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new avstl_formula{avstl::parse_formula(text)};
    return AVSTL_OK;
  });
}

avstl_status avstl_formula_unparse(const avstl_formula* f, char** out) {
  if (!f || !out) return fail(AVSTL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup_string(avstl::unparse(f->formula));
    return AVSTL_OK;
  });
}

int avstl_formula_averaged_depth(const avstl_formula* f) {
  return f ? avstl::averaged_depth(f->formula) : -1;
}

double avstl_formula_horizon(const avstl_formula* f) {
  return f ? avstl::temporal_horizon(f->formula) : -1.0;
}

avstl_status avstl_formula_refine_eventually(const avstl_formula* f, const int* path,
                                             size_t path_len, avstl_formula** out) {
  if (!f || !out || (path_len > 0 && !path))
    return fail(AVSTL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    avstl::NodePath p(path, path + path_len);
    *out = new avstl_formula{avstl::refine_eventually(f->formula, p)};
    return AVSTL_OK;
  });
}

avstl_status avstl_formula_refine_always(const avstl_formula* f, const int* path,
                                         size_t path_len, double delta, avstl_formula** out) {
  if (!f || !out || (path_len > 0 && !path))
    return fail(AVSTL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    avstl::NodePath p(path, path + path_len);
    *out = new avstl_formula{avstl::refine_always(f->formula, p, delta)};
    return AVSTL_OK;
  });
}

void avstl_formula_free(avstl_formula* f) { delete f; }

avstl_status avstl_evaluate(const avstl_trace* trace, const avstl_formula* f, double* pos,
                            double* neg) {
  if (!trace || !f || !pos || !neg) return fail(AVSTL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    avstl::RobustnessPair r = avstl::evaluate(trace->trace, f->formula);
    *pos = r.pos.raw();
    *neg = r.neg.raw();
    return AVSTL_OK;
  });
}

avstl_status avstl_robust_signal(const avstl_trace* trace, const avstl_formula* f,
                                 avstl_robustness_signal** out) {
  if (!trace || !f || !out) return fail(AVSTL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    avstl::RobustnessSignal rs = avstl::robust_signal(trace->trace, f->formula);
    std::vector<double> starts;
    for (const avstl::Segment& s : rs.pos.segments()) starts.push_back(s.start);
    for (const avstl::Segment& s : rs.neg.segments()) starts.push_back(s.start);
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    *out = new avstl_robustness_signal{std::move(rs), std::move(starts)};
    return AVSTL_OK;
  });
}

size_t avstl_robustness_signal_size(const avstl_robustness_signal* sig) {
  return sig ? sig->starts.size() : 0;
}

avstl_status avstl_robustness_signal_segment(const avstl_robustness_signal* sig, size_t index,
                                             double* t, double* pos, double* pos_slope,
                                             double* neg, double* neg_slope) {
  if (!sig || !t || !pos || !pos_slope || !neg || !neg_slope)
    return fail(AVSTL_ERR_INVALID_ARGUMENT, "null argument");
  if (index >= sig->starts.size())
    return fail(AVSTL_ERR_INVALID_ARGUMENT, "segment index out of range");
  return guarded([&] {
    double at = sig->starts[index];
    const avstl::RobustnessSignal& rs = sig->signal;
    const avstl::Segment& ps = rs.pos.segments()[rs.pos.segment_index(at)];
    const avstl::Segment& ns = rs.neg.segments()[rs.neg.segment_index(at)];
    *t = at;
    *pos = rs.pos.value_at(at).raw();
    *pos_slope = ps.slope;
    *neg = rs.neg.value_at(at).raw();
    *neg_slope = ns.slope;
    return AVSTL_OK;
  });
}

avstl_status avstl_robustness_signal_write_csv(const avstl_robustness_signal* sig,
                                               const char* path) {
  if (!sig || !path) return fail(AVSTL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::ofstream f(path);
    if (!f) return fail(AVSTL_ERR_IO, "cannot open output file");
    f << "time,pos,pos_slope,neg,neg_slope\n";
    char buf[64];
    auto emit = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      f << buf;
    };
    for (std::size_t i = 0; i < sig->starts.size(); ++i) {
      double t, pos, ps, neg, ns;
      avstl_robustness_signal_segment(sig, i, &t, &pos, &ps, &neg, &ns);
      emit(t);
      f << ',';
      emit(pos);
      f << ',';
      emit(ps);
      f << ',';
      emit(neg);
      f << ',';
      emit(ns);
      f << '\n';
    }
    return f ? AVSTL_OK : fail(AVSTL_ERR_IO, "write failed");
  });
}

void avstl_robustness_signal_free(avstl_robustness_signal* sig) { delete sig; }

avstl_status avstl_falsify_run_json(const char* config_json, char** report_json) {
  if (!config_json || !report_json) return fail(AVSTL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *report_json = dup_string(avstl::falsify::run_config_json(config_json));
    return AVSTL_OK;
  });
}

void avstl_string_free(char* s) { delete[] s; }

}  // extern "C"
