#include "avstl/oracle.hpp"

#include <cmath>
#include <map>

#include <doctest.h>

#include "avstl/errors.hpp"
#include "avstl/robustness.hpp"
#include "avstl/testgen.hpp"

using namespace avstl;
using oracle::OracleConfig;
using oracle::oracle_evaluate;
using oracle::oracle_robust_signal_samples;

namespace {

Trace single(const std::string& name, std::vector<std::pair<double, double>> s) {
  std::map<std::string, FplSignal> ch;
  ch.emplace(name, FplSignal::from_steps(std::move(s)));
  return Trace(std::move(ch));
}

bool close(ExtendedReal a, ExtendedReal b, double tol) {
  if (!a.is_finite() || !b.is_finite()) return a == b;
  return std::abs(a.raw() - b.raw()) <= tol;
}

}  // namespace

TEST_CASE("reference values match the worked evaluation examples") {
  Trace fast = single("v", {{0, 100}});
  RobustnessPair r = oracle_evaluate(fast, parse_formula("F[0,10] v >= 80"));
  CHECK(r.pos.raw() == 20.0);
  CHECK(r.neg.raw() == 0.0);

  RobustnessPair top = oracle_evaluate(fast, parse_formula("true"));
  CHECK(top.pos.is_plus_inf());
  CHECK(top.neg.raw() == 0.0);

  Trace airbag = single("airbag", {{0, -1}, {0.5, 1}});
  RobustnessPair av = oracle_evaluate(airbag, parse_formula("AvF[0,1] airbag"));
  CHECK(av.pos.raw() == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(av.neg.raw() == doctest::Approx(-0.5).epsilon(1e-7));
}

TEST_CASE("trapezoid refinement converges on the delayed step") {
  Trace airbag = single("airbag", {{0, -1}, {0.5, 1}});
  OracleConfig cfg;
  cfg.abs_tolerance = 1e-7;
  RobustnessPair r = oracle_evaluate(airbag, parse_formula("AvF[0,1] airbag"), cfg);
  CHECK(std::abs(r.pos.raw() - 0.5) <= 1e-7);
}

TEST_CASE("last value extends past the trace horizon") {
  Trace tr = single("x", {{0, 3}, {1, 7}});
  RobustnessPair r = oracle_evaluate(tr, parse_formula("F[0,100] x >= 5"));
  CHECK(r.pos.raw() == 2.0);
  RobustnessPair g = oracle_evaluate(tr, parse_formula("G[50,60] x >= 5"));
  CHECK(g.pos.raw() == 2.0);
}

TEST_CASE("sampled robustness signal") {
  Trace tr = single("x", {{0, 1}, {2, 5}, {4, 0}});
  Formula f = parse_formula("F[0,1] x >= 2");
  SUBCASE("time zero sample equals the plain evaluation") {
    std::vector<double> ts{0.0};
    auto samples = oracle_robust_signal_samples(tr, f, ts);
    RobustnessPair direct = oracle_evaluate(tr, f);
    CHECK(samples[0].pos == direct.pos);
    CHECK(samples[0].neg == direct.neg);
  }
  SUBCASE("sampling commutes with shifting the trace") {
    testgen::Rng rng(97);
    std::uniform_real_distribution<double> dt(0.0, 8.0);
    for (int i = 0; i < 20; ++i) {
      double t = dt(rng);
      std::vector<double> ts{t};
      auto sample = oracle_robust_signal_samples(tr, f, ts)[0];
      std::map<std::string, FplSignal> ch;
      ch.emplace("x", tr.channel("x").shifted(t));
      Trace shifted(std::move(ch));
      RobustnessPair at0 = oracle_evaluate(shifted, f);
      CHECK(close(sample.pos, at0.pos, 1e-9));
      CHECK(close(sample.neg, at0.neg, 1e-9));
    }
  }
}

TEST_CASE("reference is deterministic") {
  testgen::Rng rng(103);
  Trace tr = testgen::random_trace(rng);
  Formula f = parse_formula("AvF[0,3] (x0 >= 1 & F[0,2] x1 <= 0)");
  RobustnessPair a = oracle_evaluate(tr, f);
  RobustnessPair b = oracle_evaluate(tr, f);
  CHECK(a.pos == b.pos);
  CHECK(a.neg == b.neg);
}

TEST_CASE("engine and reference agree on random instances") {
  testgen::Rng rng(107);
  testgen::TraceOptions topt;
  testgen::FormulaOptions fopt;
  int averaged_seen = 0;
  for (int i = 0; i < 150; ++i) {
    Trace tr = testgen::random_trace(rng, topt);
    Formula f = testgen::random_formula(rng, fopt);
    double tol = averaged_depth(f) > 0 ? 1e-6 : 1e-9;
    averaged_seen += averaged_depth(f) > 0;
    RobustnessPair engine = evaluate(tr, f);
    RobustnessPair reference = oracle_evaluate(tr, f);
    CAPTURE(unparse(f));
    CAPTURE(i);
    CHECK(close(engine.pos, reference.pos, tol));
    CHECK(close(engine.neg, reference.neg, tol));
  }
  CHECK(averaged_seen > 10);
}

TEST_CASE("engine robustness signals spot-checked at random times") {
  testgen::Rng rng(109);
  testgen::FormulaOptions fopt;
  fopt.max_depth = 3;
  for (int i = 0; i < 12; ++i) {
    Trace tr = testgen::random_trace(rng);
    Formula f = testgen::random_formula(rng, fopt);
    RobustnessSignal rs = robust_signal(tr, f);
    std::uniform_real_distribution<double> dt(0.0, 12.0);
    std::vector<double> ts;
    for (int k = 0; k < 50; ++k) ts.push_back(dt(rng));
    auto samples = oracle_robust_signal_samples(tr, f, ts);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      CAPTURE(unparse(f));
      CAPTURE(ts[k]);
      CHECK(close(rs.pos.value_at(ts[k]), samples[k].pos, 1e-6));
      CHECK(close(rs.neg.value_at(ts[k]), samples[k].neg, 1e-6));
    }
  }
}

TEST_CASE("nested averaged operators are rejected") {
  Trace tr = single("x", {{0, 1}});
  CHECK_THROWS_AS(oracle_evaluate(tr, parse_formula("AvG[0,1] AvF[0,1] x >= 0")),
                  UnsupportedFormulaError);
}
