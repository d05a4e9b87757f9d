#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avstl.h"
#include "avstl/errors.hpp"
#include "avstl/formula.hpp"
#include "avstl/oracle.hpp"
#include "avstl/robustness.hpp"
#include "avstl/signal.hpp"
#include "avstl/testgen.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFalsified = 1;
constexpr int kExitError = 2;

std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct FormulaArgs {
  std::string text;
  std::string file;

  std::string resolve() const {
    if (!text.empty() && !file.empty())
      throw std::runtime_error("--formula and --formula-file are mutually exclusive");
    if (!text.empty()) return text;
    if (file.empty()) throw std::runtime_error("one of --formula/--formula-file is required");
    std::ifstream f(file);
    if (!f) throw std::runtime_error("cannot open formula file '" + file + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    std::string s = ss.str();
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--formula", text, "formula text");
    cmd->add_option("--formula-file", file, "file holding the formula");
  }
};

struct Handles {
  avstl_trace* trace = nullptr;
  avstl_formula* formula = nullptr;
  ~Handles() {
    avstl_trace_free(trace);
    avstl_formula_free(formula);
  }
};

int check(avstl_status st) {
  if (st != AVSTL_OK) {
    std::cerr << "error: " << avstl_last_error() << "\n";
    return kExitError;
  }
  return kExitOk;
}

int load_common(const std::string& trace_path, const FormulaArgs& fargs, Handles& h) {
  if (int rc = check(avstl_trace_load_csv(trace_path.c_str(), &h.trace))) return rc;
  std::string text = fargs.resolve();
  if (int rc = check(avstl_formula_parse(text.c_str(), &h.formula))) return rc;
  double fh = avstl_formula_horizon(h.formula);
  double th = avstl_trace_horizon(h.trace);
  if (fh > th)
    std::cerr << "warning: formula looks " << format_value(fh) << "s ahead but the trace ends"
              << " at " << format_value(th) << "s; the final values are held from there on\n";
  return kExitOk;
}

int cmd_eval(const std::string& trace_path, const FormulaArgs& fargs,
             const std::string& dump_signal) {
  Handles h;
  if (int rc = load_common(trace_path, fargs, h)) return rc;
  double pos, neg;
  if (int rc = check(avstl_evaluate(h.trace, h.formula, &pos, &neg))) return rc;
  std::cout << "pos=" << format_value(pos) << " neg=" << format_value(neg) << "\n";
  if (!dump_signal.empty()) {
    avstl_robustness_signal* sig = nullptr;
    if (int rc = check(avstl_robust_signal(h.trace, h.formula, &sig))) return rc;
    avstl_status st = avstl_robustness_signal_write_csv(sig, dump_signal.c_str());
    avstl_robustness_signal_free(sig);
    if (int rc = check(st)) return rc;
  }
  return pos > 0.0 ? kExitOk : kExitFalsified;
}

int cmd_signal(const std::string& trace_path, const FormulaArgs& fargs,
               const std::string& out_path) {
  Handles h;
  if (int rc = load_common(trace_path, fargs, h)) return rc;
  avstl_robustness_signal* sig = nullptr;
  if (int rc = check(avstl_robust_signal(h.trace, h.formula, &sig))) return rc;
  avstl_status st = avstl_robustness_signal_write_csv(sig, out_path.c_str());
  std::size_t n = avstl_robustness_signal_size(sig);
  avstl_robustness_signal_free(sig);
  if (int rc = check(st)) return rc;
  std::cout << "wrote " << n << " breakpoints to " << out_path << "\n";
  return kExitOk;
}

int cmd_falsify(const std::string& config_path, const std::string& out_path) {
  std::ifstream f(config_path);
  if (!f) {
    std::cerr << "error: cannot open config '" << config_path << "'\n";
    return kExitError;
  }
  std::stringstream ss;
  ss << f.rdbuf();
  char* report = nullptr;
  if (int rc = check(avstl_falsify_run_json(ss.str().c_str(), &report))) return rc;
  std::string report_s = report;
  avstl_string_free(report);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << report_s << "\n";
    if (!out) {
      std::cerr << "error: cannot write report to '" << out_path << "'\n";
      return kExitError;
    }
  }
  // Surface the aligned table; the full JSON goes to the report file.
  auto pos = report_s.find("\"table\"");
  if (pos != std::string::npos) {
    std::string table = report_s.substr(report_s.find(':', pos) + 1);
    table = table.substr(table.find('"') + 1);
    table = table.substr(0, table.rfind('"'));
    std::string unescaped;
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (table[i] == '\\' && i + 1 < table.size() && table[i + 1] == 'n') {
        unescaped += '\n';
        ++i;
      } else {
        unescaped += table[i];
      }
    }
    std::cout << unescaped;
  } else {
    std::cout << report_s << "\n";
  }
  return kExitOk;
}

// --- bench -------------------------------------------------------------------

int cmd_bench(const std::string& sizes_csv, const FormulaArgs& fargs, int repetitions,
              std::uint64_t seed) {
  if (repetitions < 1) {
    std::cerr << "error: --repetitions must be at least 1\n";
    return kExitError;
  }
  std::vector<long> sizes;
  {
    std::stringstream ss(sizes_csv);
    std::string field;
    while (std::getline(ss, field, ',')) sizes.push_back(std::stol(field));
  }
  if (sizes.empty()) {
    std::cerr << "error: --sizes is empty\n";
    return kExitError;
  }
  std::string text = fargs.text.empty() && fargs.file.empty() ? "AvF[0,5] x0 >= 0"
                                                              : fargs.resolve();
  avstl::Formula f = avstl::parse_formula(text);

  // Fixed-size random step signals on a uniform 10ms grid.
  auto make_trace = [](std::uint64_t s, long n) {
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> val(-10.0, 10.0);
    std::vector<std::pair<double, double>> steps;
    steps.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) steps.emplace_back(i * 0.01, val(rng));
    std::map<std::string, avstl::FplSignal> ch;
    ch.emplace("x0", avstl::FplSignal::from_steps(steps));
    return avstl::Trace(std::move(ch));
  };

  std::vector<double> medians;
  for (long n : sizes) {
    std::vector<double> times;
    for (int rep = 0; rep < repetitions; ++rep) {
      avstl::Trace tr = make_trace(seed + static_cast<std::uint64_t>(rep) * 7919u +
                                       static_cast<std::uint64_t>(n),
                                   n);
      auto t0 = std::chrono::steady_clock::now();
      avstl::RobustnessSignal rs = avstl::robust_signal(tr, f);
      auto t1 = std::chrono::steady_clock::now();
      (void)rs;
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    medians.push_back(times[times.size() / 2]);
  }

  std::printf("%12s %14s %10s\n", "segments", "median (ms)", "ratio");
  bool ok = true;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i == 0) {
      std::printf("%12ld %14.3f %10s\n", sizes[i], medians[i] * 1e3, "-");
    } else {
      double size_ratio = static_cast<double>(sizes[i]) / sizes[i - 1];
      double time_ratio = medians[i] / std::max(medians[i - 1], 1e-12);
      std::printf("%12ld %14.3f %10.2f\n", sizes[i], medians[i] * 1e3, time_ratio);
      if (size_ratio == 2.0 && time_ratio > 2.5) ok = false;
    }
  }
  if (!ok) {
    std::printf("FAIL: doubling the signal more than 2.5x'd the median time\n");
    return kExitFalsified;
  }
  return kExitOk;
}

// --- oracle-check -------------------------------------------------------------

struct Mismatch {
  avstl::Trace trace;
  avstl::Formula formula;
  double tol;
};

bool values_match(const avstl::RobustnessPair& a, const avstl::RobustnessPair& b, double tol) {
  auto close = [&](avstl::ExtendedReal x, avstl::ExtendedReal y) {
    if (!x.is_finite() || !y.is_finite()) return x == y;
    return std::abs(x.raw() - y.raw()) <= tol;
  };
  return close(a.pos, b.pos) && close(a.neg, b.neg);
}

bool still_mismatching(const avstl::Trace& tr, const avstl::Formula& f, double tol) {
  try {
    return !values_match(avstl::evaluate(tr, f), avstl::oracle::oracle_evaluate(tr, f), tol);
  } catch (const std::exception&) {
    return false;  // a shrink that breaks evaluability is not a counterexample
  }
}

avstl::Trace truncate_trace(const avstl::Trace& tr, std::size_t keep) {
  std::map<std::string, avstl::FplSignal> channels;
  for (const auto& [name, sig] : tr.channels()) {
    std::vector<avstl::Segment> segs(sig.segments().begin(),
                                     sig.segments().begin() +
                                         std::min(keep, sig.segments().size()));
    channels.emplace(name, avstl::FplSignal(std::move(segs)));
  }
  return avstl::Trace(std::move(channels));
}

Mismatch shrink(Mismatch m) {
  bool progress = true;
  while (progress) {
    progress = false;
    // Fewer trace segments.
    std::size_t n = 0;
    for (const auto& [name, sig] : m.trace.channels()) n = std::max(n, sig.size());
    for (std::size_t keep = 1; keep < n; keep *= 2) {
      avstl::Trace t = truncate_trace(m.trace, keep);
      if (still_mismatching(t, m.formula, m.tol)) {
        m.trace = std::move(t);
        progress = true;
        break;
      }
    }
    // A mismatching subformula is a smaller counterexample.
    for (int c = 0; c < m.formula.arity(); ++c) {
      avstl::Formula child = m.formula.child(c);
      if (still_mismatching(m.trace, child, m.tol)) {
        m.formula = child;
        progress = true;
        break;
      }
    }
  }
  return m;
}

int cmd_oracle_check(int count, int max_depth, std::uint64_t seed, double tol_exact,
                     double tol_avg) {
  avstl::testgen::Rng rng(seed);
  avstl::testgen::TraceOptions topt;
  avstl::testgen::FormulaOptions fopt;
  fopt.max_depth = max_depth;

  int failures = 0;
  for (int i = 0; i < count; ++i) {
    avstl::Trace tr = avstl::testgen::random_trace(rng, topt);
    avstl::Formula f = avstl::testgen::random_formula(rng, fopt);
    double tol = avstl::averaged_depth(f) > 0 ? tol_avg : tol_exact;
    avstl::RobustnessPair engine = avstl::evaluate(tr, f);
    avstl::RobustnessPair reference = avstl::oracle::oracle_evaluate(tr, f);
    if (values_match(engine, reference, tol)) continue;

    ++failures;
    Mismatch m = shrink(Mismatch{tr, f, tol});
    avstl::RobustnessPair e2 = avstl::evaluate(m.trace, m.formula);
    avstl::RobustnessPair o2 = avstl::oracle::oracle_evaluate(m.trace, m.formula);
    std::cout << "MISMATCH at instance " << i << " (tolerance " << tol << ")\n";
    std::cout << "  formula: " << avstl::unparse(m.formula) << "\n";
    std::cout << "  engine:  pos=" << format_value(e2.pos.raw())
              << " neg=" << format_value(e2.neg.raw()) << "\n";
    std::cout << "  oracle:  pos=" << format_value(o2.pos.raw())
              << " neg=" << format_value(o2.neg.raw()) << "\n";
    std::cout << "  trace:\n";
    std::ostringstream csv;
    m.trace.write_csv(csv);
    std::cout << csv.str();
  }
  std::cout << (count - failures) << "/" << count << " instances agree\n";
  return failures == 0 ? kExitOk : kExitFalsified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AvSTL robustness monitoring and falsification"};
  app.require_subcommand(1);

  std::string trace_path, dump_signal, out_path, config_path, sizes = "10000,20000";
  FormulaArgs fargs;
  int count = 1000, max_depth = 4, repetitions = 5;
  std::uint64_t seed = 1;
  double tol_exact = 1e-9, tol_avg = 1e-6;

  CLI::App* eval = app.add_subcommand("eval", "evaluate robustness at time 0");
  eval->add_option("--trace", trace_path, "trace CSV")->required();
  fargs.attach(eval);
  eval->add_option("--dump-signal", dump_signal, "write the robustness signal CSV here");

  CLI::App* signal = app.add_subcommand("signal", "export the robustness signal");
  signal->add_option("--trace", trace_path, "trace CSV")->required();
  signal->add_option("--out", out_path, "output CSV")->required();

  CLI::App* oracle_check =
      app.add_subcommand("oracle-check", "compare the evaluator against the reference");
  oracle_check->add_option("--count", count, "number of random instances");
  oracle_check->add_option("--max-depth", max_depth, "formula depth bound");
  oracle_check->add_option("--seed", seed, "random seed");
  oracle_check->add_option("--tol-exact", tol_exact, "tolerance, averaging-free");
  oracle_check->add_option("--tol-avg", tol_avg, "tolerance, averaged");

  CLI::App* bench = app.add_subcommand("bench", "timing across signal sizes");
  bench->add_option("--sizes", sizes, "comma-separated segment counts");
  bench->add_option("--repetitions", repetitions, "runs per size (median reported)");
  bench->add_option("--seed", seed, "random seed");

  CLI::App* falsify = app.add_subcommand("falsify", "run a falsification experiment");
  falsify->add_option("--config", config_path, "JSON configuration")->required();
  falsify->add_option("--out", out_path, "write the JSON report here");

  FormulaArgs signal_fargs, bench_fargs;
  signal_fargs.attach(signal);
  bench_fargs.attach(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  try {
    if (eval->parsed()) return cmd_eval(trace_path, fargs, dump_signal);
    if (signal->parsed()) return cmd_signal(trace_path, signal_fargs, out_path);
    if (oracle_check->parsed())
      return cmd_oracle_check(count, max_depth, seed, tol_exact, tol_avg);
    if (bench->parsed()) return cmd_bench(sizes, bench_fargs, repetitions, seed);
    if (falsify->parsed()) return cmd_falsify(config_path, out_path);
  } catch (const avstl::ParseError& e) {
    std::cerr << "error: " << e.what() << " (line " << e.line() << ", column " << e.column()
              << ")\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
