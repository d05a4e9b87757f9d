#include "avstl/falsify.hpp"

#include <cmath>
#include <map>

#include <doctest.h>

#include "avstl/robustness.hpp"

using namespace avstl;
using namespace avstl::falsify;

namespace {

InputSpec throttle_spec(double lo, double hi, int points, double horizon) {
  InputSpec spec;
  spec.horizon = horizon;
  spec.channels.push_back(InputChannelSpec{"throttle", lo, hi, points});
  return spec;
}

Trace constant_throttle(double value, double horizon) {
  (void)horizon;
  std::map<std::string, FplSignal> ch;
  ch.emplace("throttle", FplSignal::from_steps({{0.0, value}}));
  return Trace(std::move(ch));
}

}  // namespace

TEST_CASE("engine lag at rest stays at rest") {
  auto model = make_engine_lag();
  Trace out = model->simulate(constant_throttle(0.0, 10.0), 10.0);
  for (double t : {0.0, 2.0, 5.0, 10.0}) CHECK(out.channel("omega").value_at(t).raw() == 0.0);
}

TEST_CASE("engine lag follows the first-order response") {
  EngineLagParams p;
  auto model = make_engine_lag(p);
  Trace out = model->simulate(constant_throttle(1.0, 10.0), 10.0);
  const double K = p.gain, tau = p.time_constant;
  for (double t = 0.0; t <= 10.0; t += 0.25) {
    double expected = K * (1.0 - std::exp(-t / tau));
    CHECK(std::abs(out.channel("omega").value_at(t).raw() - expected) <= 1e-3 * K);
  }
  CHECK(out.channel("v").value_at(8.0).raw() ==
        doctest::Approx(p.speed_scale * out.channel("omega").value_at(8.0).raw()));
}

TEST_CASE("gear box climbs through the gears under full throttle") {
  GearAutomatonParams p;
  auto model = make_gear_automaton(p);
  Trace out = model->simulate(constant_throttle(100.0, 10.0), 10.0);
  double d = p.dwell[0];
  auto gear_at = [&](double t) {
    for (int g = 1; g <= 4; ++g)
      if (out.channel("gear" + std::to_string(g)).value_at(t).raw() > 0) return g;
    return 0;
  };
  CHECK(gear_at(0.0) == 1);
  CHECK(gear_at(d - 1e-6) == 1);
  CHECK(gear_at(d + 1e-6) == 2);
  CHECK(gear_at(2 * d + 1e-6) == 3);
  CHECK(gear_at(3 * d + 1e-6) == 4);
  CHECK(gear_at(9.9) == 4);

  SUBCASE("exactly one gear channel is active at any time") {
    for (double t = 0.0; t < 10.0; t += 0.05) {
      int active = 0;
      for (int g = 1; g <= 4; ++g)
        active += out.channel("gear" + std::to_string(g)).value_at(t).raw() > 0;
      CHECK(active == 1);
    }
  }
}

TEST_CASE("gear box shifts down on low throttle") {
  GearAutomatonParams p;
  auto model = make_gear_automaton(p);
  std::map<std::string, FplSignal> ch;
  ch.emplace("throttle", FplSignal::from_steps({{0.0, 100.0}, {3.0, 0.0}}));
  Trace out = model->simulate(Trace(std::move(ch)), 10.0);
  CHECK(out.channel("gear1").value_at(9.9).raw() > 0);
}

TEST_CASE("falsifying the trivial specifications") {
  auto model = make_engine_lag();
  InputSpec spec = throttle_spec(0.0, 100.0, 3, 5.0);
  OptimizerConfig opt;
  opt.seed = 7;

  SUBCASE("false succeeds immediately") {
    FalsifyResult r = falsification_loop(*model, parse_formula("false"), spec, opt);
    CHECK(r.success);
    CHECK(r.iterations_used == 1);
    CHECK(r.robustness_history.size() == 1);
  }
  SUBCASE("true exhausts the budget") {
    opt.max_iterations = 50;
    FalsifyResult r = falsification_loop(*model, parse_formula("true"), spec, opt);
    CHECK_FALSE(r.success);
    CHECK(r.iterations_used == 50);
    CHECK(std::isinf(r.robustness_history.back()));
  }
}

TEST_CASE("falsification results are deterministic and self-verifying") {
  auto model = make_gear_automaton();
  InputSpec spec = throttle_spec(0.0, 100.0, 10, 10.0);
  Formula f = parse_formula("G[0,3] !gear4 & AvG[3,10] !gear4");
  OptimizerConfig opt;
  opt.max_iterations = 150;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    opt.seed = seed;
    FalsifyResult a = falsification_loop(*model, f, spec, opt);
    FalsifyResult b = falsification_loop(*model, f, spec, opt);
    CHECK(a.success == b.success);
    CHECK(a.iterations_used == b.iterations_used);
    CHECK(a.robustness_history == b.robustness_history);
    CHECK(static_cast<int>(a.robustness_history.size()) == a.iterations_used);
    if (a.success) {
      CHECK(a.robustness_history.back() <= 0.0);
      Trace out = model->simulate(*a.falsifying_input, spec.horizon);
      CHECK(evaluate(out, f).pos.raw() <= 0.0);
    } else {
      CHECK(a.robustness_history.back() > 0.0);
    }
  }
}

TEST_CASE("best-so-far robustness is nonincreasing") {
  auto model = make_engine_lag();
  InputSpec spec = throttle_spec(0.0, 100.0, 5, 10.0);
  OptimizerConfig opt;
  opt.max_iterations = 200;
  opt.seed = 11;
  FalsifyResult r =
      falsification_loop(*model, parse_formula("G[0,10] omega <= 4000"), spec, opt);
  double best = std::numeric_limits<double>::infinity();
  for (double v : r.robustness_history) {
    double next = std::min(best, v);
    CHECK(next <= best);
    best = next;
  }
}

TEST_CASE("identical refinement gives identical paired trials") {
  auto model = make_gear_automaton();
  ExperimentProblem prob;
  prob.name = "identity";
  prob.model = std::move(model);
  prob.plain = parse_formula("G[0,3] !gear4");
  prob.refined = prob.plain;
  prob.input = throttle_spec(0.0, 100.0, 10, 10.0);
  OptimizerConfig base;
  base.max_iterations = 60;
  ExperimentReport rep = run_experiment({prob}, 6, {}, base);
  REQUIRE(rep.problems.size() == 1);
  const ProblemReport& p = rep.problems[0];
  CHECK(p.plain.successes == p.refined.successes);
  CHECK(p.plain.mean_iterations == p.refined.mean_iterations);
  CHECK(p.refined_successes_verified_on_plain == p.refined.successes);
}

TEST_CASE("zero trials produce an empty report") {
  ExperimentProblem prob;
  prob.name = "empty";
  prob.model = make_engine_lag();
  prob.plain = parse_formula("false");
  prob.refined = prob.plain;
  prob.input = throttle_spec(0.0, 100.0, 2, 5.0);
  ExperimentReport rep = run_experiment({prob}, 0, {}, OptimizerConfig{});
  CHECK(rep.problems[0].plain.successes == 0);
  CHECK(rep.problems[0].trials == 0);
}

TEST_CASE("refined specification finds violations at least as often") {
  auto model = make_gear_automaton();
  ExperimentProblem prob;
  prob.name = "reach fourth gear quickly";
  prob.model = std::move(model);
  prob.plain = parse_formula("G[0,3] !gear4");
  prob.refined = refine_always(prob.plain, {}, 7.0);
  prob.input = throttle_spec(0.0, 100.0, 10, 10.0);
  OptimizerConfig base;
  base.max_iterations = 60;
  ExperimentReport rep = run_experiment({prob}, 8, {}, base);
  const ProblemReport& p = rep.problems[0];
  CHECK(p.refined.successes >= p.plain.successes);
  CHECK(p.refined_successes_verified_on_plain == p.refined.successes);
}

TEST_CASE("json round trip") {
  std::string cfg = R"({
    "model": {"name": "gear_automaton"},
    "input": {"horizon": 10.0,
              "channels": [{"name": "throttle", "range": [0.0, 100.0], "control_points": 10}]},
    "problems": [{"name": "p3", "plain": "G[0,3] !gear4",
                  "refined": "G[0,3] !gear4 & AvG[3,10] !gear4"}],
    "optimizer": {"kind": "anneal", "max_iterations": 40, "seed": 5},
    "trials": 3
  })";
  std::string report = run_config_json(cfg);
  CHECK(report.find("\"problems\"") != std::string::npos);
  CHECK(report.find("p3") != std::string::npos);
  CHECK(report.find("table") != std::string::npos);
}

TEST_CASE("input validation") {
  auto model = make_engine_lag();
  OptimizerConfig opt;
  SUBCASE("wrong channel name") {
    InputSpec spec = throttle_spec(0.0, 1.0, 2, 5.0);
    spec.channels[0].name = "steering";
    CHECK_THROWS_AS(falsification_loop(*model, parse_formula("false"), spec, opt),
                    std::invalid_argument);
  }
  SUBCASE("empty range") {
    InputSpec spec = throttle_spec(1.0, 1.0, 2, 5.0);
    CHECK_THROWS_AS(falsification_loop(*model, parse_formula("false"), spec, opt),
                    std::invalid_argument);
  }
  SUBCASE("zero iterations") {
    InputSpec spec = throttle_spec(0.0, 1.0, 2, 5.0);
    opt.max_iterations = 0;
    CHECK_THROWS_AS(falsification_loop(*model, parse_formula("false"), spec, opt),
                    std::invalid_argument);
  }
}
