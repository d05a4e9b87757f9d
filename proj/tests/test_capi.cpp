#include "avstl.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include <doctest.h>

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = std::string("capi_") + name;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

avstl_trace* make_constant_trace(const char* var, double value) {
  const char* names[] = {var};
  double times[] = {0.0};
  double values[] = {value};
  avstl_trace* t = nullptr;
  REQUIRE(avstl_trace_create(names, 1, times, 1, values, &t) == AVSTL_OK);
  return t;
}

}  // namespace

TEST_CASE("evaluate through the C surface") {
  avstl_trace* trace = make_constant_trace("v", 100.0);
  avstl_formula* f = nullptr;
  REQUIRE(avstl_formula_parse("F[0,10] v >= 80", &f) == AVSTL_OK);
  double pos = -1, neg = -1;
  REQUIRE(avstl_evaluate(trace, f, &pos, &neg) == AVSTL_OK);
  CHECK(pos == 20.0);
  CHECK(neg == 0.0);
  CHECK(avstl_formula_averaged_depth(f) == 0);
  CHECK(avstl_formula_horizon(f) == 10.0);
  CHECK(avstl_trace_horizon(trace) == 0.0);
  avstl_formula_free(f);
  avstl_trace_free(trace);
}

TEST_CASE("infinite values come back as HUGE_VAL") {
  avstl_trace* trace = make_constant_trace("v", 1.0);
  avstl_formula* f = nullptr;
  REQUIRE(avstl_formula_parse("true", &f) == AVSTL_OK);
  double pos = 0, neg = 1;
  REQUIRE(avstl_evaluate(trace, f, &pos, &neg) == AVSTL_OK);
  CHECK(std::isinf(pos));
  CHECK(pos > 0);
  CHECK(neg == 0.0);
  avstl_formula_free(f);
  avstl_trace_free(trace);
}

TEST_CASE("error paths set codes and messages") {
  CHECK(avstl_formula_parse(nullptr, nullptr) == AVSTL_ERR_INVALID_ARGUMENT);

  avstl_formula* f = nullptr;
  CHECK(avstl_formula_parse("F[3,3] x >= 0", &f) == AVSTL_ERR_PARSE);
  CHECK(std::strlen(avstl_last_error()) > 0);

  avstl_trace* t = nullptr;
  CHECK(avstl_trace_load_csv("definitely-not-here.csv", &t) == AVSTL_ERR_IO);

  avstl_trace* trace = make_constant_trace("v", 1.0);
  REQUIRE(avstl_formula_parse("w >= 0", &f) == AVSTL_OK);
  double pos, neg;
  CHECK(avstl_evaluate(trace, f, &pos, &neg) == AVSTL_ERR_EVAL);
  avstl_formula_free(f);

  REQUIRE(avstl_formula_parse("AvF[0,1] AvG[0,1] v >= 0", &f) == AVSTL_OK);
  CHECK(avstl_evaluate(trace, f, &pos, &neg) == AVSTL_ERR_UNSUPPORTED_FORMULA);
  avstl_formula_free(f);
  avstl_trace_free(trace);

  CHECK(std::string(avstl_status_name(AVSTL_ERR_PARSE)) == "parse error");
}

TEST_CASE("unparse round-trips") {
  avstl_formula* f = nullptr;
  REQUIRE(avstl_formula_parse("G (a -> AvF[0,10] b)", &f) == AVSTL_OK);
  char* text = nullptr;
  REQUIRE(avstl_formula_unparse(f, &text) == AVSTL_OK);
  avstl_formula* g = nullptr;
  REQUIRE(avstl_formula_parse(text, &g) == AVSTL_OK);
  char* text2 = nullptr;
  REQUIRE(avstl_formula_unparse(g, &text2) == AVSTL_OK);
  CHECK(std::string(text) == text2);
  avstl_string_free(text);
  avstl_string_free(text2);
  avstl_formula_free(f);
  avstl_formula_free(g);
}

TEST_CASE("refinements through the C surface") {
  avstl_formula* f = nullptr;
  REQUIRE(avstl_formula_parse("G[0,4] !gear4", &f) == AVSTL_OK);
  avstl_formula* r = nullptr;
  REQUIRE(avstl_formula_refine_always(f, nullptr, 0, 6.0, &r) == AVSTL_OK);
  char* text = nullptr;
  REQUIRE(avstl_formula_unparse(r, &text) == AVSTL_OK);
  CHECK(std::string(text).find("AvG[4,10]") != std::string::npos);
  avstl_string_free(text);
  avstl_formula_free(r);

  int path[] = {0};
  CHECK(avstl_formula_refine_eventually(f, path, 1, &r) == AVSTL_ERR_INVALID_ARGUMENT);
  avstl_formula_free(f);

  REQUIRE(avstl_formula_parse("F[0,40] omega >= 2000", &f) == AVSTL_OK);
  REQUIRE(avstl_formula_refine_eventually(f, nullptr, 0, &r) == AVSTL_OK);
  CHECK(avstl_formula_averaged_depth(r) == 1);
  avstl_formula_free(r);
  avstl_formula_free(f);
}

TEST_CASE("robustness signal export") {
  const char* names[] = {"x"};
  double times[] = {0.0, 1.0, 2.0};
  double values[] = {-1.0, 1.0, -1.0};
  avstl_trace* trace = nullptr;
  REQUIRE(avstl_trace_create(names, 1, times, 3, values, &trace) == AVSTL_OK);
  avstl_formula* f = nullptr;
  REQUIRE(avstl_formula_parse("AvF[0,1] x", &f) == AVSTL_OK);

  avstl_robustness_signal* sig = nullptr;
  REQUIRE(avstl_robust_signal(trace, f, &sig) == AVSTL_OK);
  size_t n = avstl_robustness_signal_size(sig);
  CHECK(n >= 2);
  double prev_t = -1.0;
  for (size_t i = 0; i < n; ++i) {
    double t, pos, ps, neg, ns;
    REQUIRE(avstl_robustness_signal_segment(sig, i, &t, &pos, &ps, &neg, &ns) == AVSTL_OK);
    CHECK(t > prev_t);
    CHECK(pos >= -1e-9);
    CHECK(neg <= 1e-9);
    prev_t = t;
  }
  double t, pos, ps, neg, ns;
  CHECK(avstl_robustness_signal_segment(sig, n, &t, &pos, &ps, &neg, &ns) ==
        AVSTL_ERR_INVALID_ARGUMENT);

  TempFile out("signal.csv");
  REQUIRE(avstl_robustness_signal_write_csv(sig, out.path.c_str()) == AVSTL_OK);
  std::ifstream check(out.path);
  std::string header;
  std::getline(check, header);
  CHECK(header == "time,pos,pos_slope,neg,neg_slope");

  avstl_robustness_signal_free(sig);
  avstl_formula_free(f);
  avstl_trace_free(trace);
}

TEST_CASE("trace CSV write and reload through the C surface") {
  const char* names[] = {"a", "b"};
  double times[] = {0.0, 0.5, 2.0};
  double values[] = {1.0, -1.0, 0.25, 3.0, 0.125, -7.5};
  avstl_trace* trace = nullptr;
  REQUIRE(avstl_trace_create(names, 2, times, 3, values, &trace) == AVSTL_OK);
  TempFile out("trace.csv");
  REQUIRE(avstl_trace_write_csv(trace, out.path.c_str()) == AVSTL_OK);
  avstl_trace* back = nullptr;
  REQUIRE(avstl_trace_load_csv(out.path.c_str(), &back) == AVSTL_OK);
  CHECK(avstl_trace_horizon(back) == 2.0);
  avstl_trace_free(back);
  avstl_trace_free(trace);
}

TEST_CASE("falsification from a JSON config") {
  const char* cfg = R"({
    "model": {"name": "gear_automaton"},
    "input": {"horizon": 10.0,
              "channels": [{"name": "throttle", "range": [0.0, 100.0],
                            "control_points": 10}]},
    "formula": "false",
    "optimizer": {"kind": "random", "max_iterations": 5, "seed": 1},
    "trials": 2
  })";
  char* report = nullptr;
  REQUIRE(avstl_falsify_run_json(cfg, &report) == AVSTL_OK);
  std::string s = report;
  CHECK(s.find("\"successes\": 2") != std::string::npos);
  avstl_string_free(report);

  CHECK(avstl_falsify_run_json("{ not json", &report) != AVSTL_OK);
}
