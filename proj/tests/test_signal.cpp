#include "avstl/signal.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "avstl/errors.hpp"
#include "avstl/testgen.hpp"

using namespace avstl;

namespace {

FplSignal fpl(std::vector<Segment> segs) { return FplSignal(std::move(segs)); }

FplSignal steps(std::vector<std::pair<double, double>> s) {
  return FplSignal::from_steps(s);
}

}  // namespace

TEST_CASE("construction validates the segment list") {
  CHECK_THROWS_AS(fpl({}), std::invalid_argument);
  CHECK_THROWS_AS(fpl({{1.0, 2.0, 0.0}}), std::invalid_argument);  // must start at 0
  CHECK_THROWS_AS(fpl({{0.0, 1.0, 0.0}, {0.0, 2.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(fpl({{0.0, ExtendedReal::plus_inf(), 1.0}}), std::invalid_argument);
  CHECK_NOTHROW(fpl({{0.0, ExtendedReal::plus_inf(), 0.0}}));
}

TEST_CASE("adjacent collinear segments merge") {
  FplSignal s = fpl({{0.0, 1.0, 0.0}, {2.0, 1.0, 0.0}, {3.0, 5.0, 0.0}});
  CHECK(s.size() == 2);
  FplSignal ramp = fpl({{0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}});
  CHECK(ramp.size() == 1);
}

TEST_CASE("value_at") {
  CHECK(fpl({{0, 5, 0}}).value_at(100.0).raw() == 5.0);
  CHECK(fpl({{0, 0, 1}, {2, 2, 0}}).value_at(1.5).raw() == 1.5);
  // Segments are left-closed: the breakpoint belongs to the new segment.
  CHECK(steps({{0, -1}, {0.5, 1}}).value_at(0.5).raw() == 1.0);
  CHECK_THROWS_AS(fpl({{0, 5, 0}}).value_at(-0.1), std::domain_error);
}

TEST_CASE("shift") {
  FplSignal s = steps({{0, 1}, {3, 2}});
  SUBCASE("identity") {
    FplSignal z = s.shifted(0.0);
    CHECK(z.size() == 2);
    CHECK(z.value_at(0).raw() == 1.0);
  }
  SUBCASE("past a breakpoint") {
    FplSignal z = s.shifted(3.0);
    CHECK(z.size() == 1);
    CHECK(z.value_at(0).raw() == 2.0);
  }
  SUBCASE("inside a ramp") {
    FplSignal z = fpl({{0, 0, 1}, {2, 2, 0}}).shifted(1.0);
    REQUIRE(z.size() == 2);
    CHECK(z.segments()[0].value.raw() == 1.0);
    CHECK(z.segments()[0].slope == 1.0);
    CHECK(z.segments()[1].start == 1.0);
    CHECK(z.segments()[1].value.raw() == 2.0);
  }
  CHECK_THROWS_AS(s.shifted(-1.0), std::domain_error);
}

TEST_CASE("shift and value_at commute") {
  testgen::Rng rng(7);
  std::uniform_real_distribution<double> dt(0.0, 12.0);
  for (int i = 0; i < 50; ++i) {
    Trace tr = testgen::random_trace(rng);
    const FplSignal& s = tr.channels().begin()->second;
    double d = dt(rng), t = dt(rng);
    CHECK(s.shifted(d).value_at(t).raw() == doctest::Approx(s.value_at(t + d).raw()));
  }
}

TEST_CASE("pointwise extrema") {
  SUBCASE("constant dominance") {
    FplSignal m = pointwise(steps({{0, 1}}), steps({{0, 2}}), Extremum::Max);
    CHECK(m.is_constant());
    CHECK(m.value_at(0).raw() == 2.0);
  }
  SUBCASE("ramp crossing a constant") {
    FplSignal m = pointwise(fpl({{0, 0, 1}}), steps({{0, 1}}), Extremum::Min);
    REQUIRE(m.size() == 2);
    CHECK(m.segments()[0].slope == 1.0);
    CHECK(m.segments()[1].start == doctest::Approx(1.0));
    CHECK(m.segments()[1].value.raw() == 1.0);
    CHECK(m.segments()[1].slope == 0.0);
  }
  SUBCASE("idempotence") {
    testgen::Rng rng(3);
    Trace tr = testgen::random_trace(rng);
    const FplSignal& s = tr.channels().begin()->second;
    FplSignal m = pointwise(s, s, Extremum::Max);
    for (double t = 0.0; t < 11.0; t += 0.37)
      CHECK(m.value_at(t).raw() == s.value_at(t).raw());
  }
}

TEST_CASE("pointwise is commutative, associative and lattice-idempotent") {
  testgen::Rng rng(11);
  std::uniform_real_distribution<double> dt(0.0, 12.0);
  for (int round = 0; round < 10; ++round) {
    testgen::TraceOptions opt;
    opt.variables = 3;
    Trace tr = testgen::random_trace(rng, opt);
    const FplSignal& a = tr.channel("x0");
    const FplSignal& b = tr.channel("x1");
    const FplSignal& c = tr.channel("x2");
    for (Extremum mode : {Extremum::Min, Extremum::Max}) {
      FplSignal ab = pointwise(a, b, mode), ba = pointwise(b, a, mode);
      FplSignal ab_c = pointwise(ab, c, mode), a_bc = pointwise(a, pointwise(b, c, mode), mode);
      for (int i = 0; i < 100; ++i) {
        double t = dt(rng);
        CHECK(ab.value_at(t).raw() == ba.value_at(t).raw());
        CHECK(ab_c.value_at(t).raw() == a_bc.value_at(t).raw());
      }
    }
  }
}

TEST_CASE("pointwise of step signals stays piecewise-constant") {
  testgen::Rng rng(13);
  for (int round = 0; round < 20; ++round) {
    Trace tr = testgen::random_trace(rng);
    FplSignal m = pointwise(tr.channel("x0"), tr.channel("x1"), Extremum::Max);
    CHECK(m.is_piecewise_constant());
  }
}

TEST_CASE("clamp") {
  SUBCASE("negative constant clips to zero") {
    FplSignal c = steps({{0, -3}}).clamped(ClampMode::NonNegative);
    CHECK(c.is_constant());
    CHECK(c.value_at(0).raw() == 0.0);
  }
  SUBCASE("ramp crossing zero") {
    FplSignal c = fpl({{0, -1, 1}}).clamped(ClampMode::NonNegative);
    REQUIRE(c.size() == 2);
    CHECK(c.segments()[0].value.raw() == 0.0);
    CHECK(c.segments()[0].slope == 0.0);
    CHECK(c.segments()[1].start == doctest::Approx(1.0));
    CHECK(c.segments()[1].slope == 1.0);
  }
  SUBCASE("positive constant clips to zero from above") {
    FplSignal c = steps({{0, 2}}).clamped(ClampMode::NonPositive);
    CHECK(c.value_at(5).raw() == 0.0);
  }
}

TEST_CASE("negate") {
  CHECK(steps({{0, 1}}).negated().value_at(0).raw() == -1.0);
  FplSignal s = fpl({{0, 0, 2}});
  CHECK(s.negated().segments()[0].slope == -2.0);
  testgen::Rng rng(17);
  Trace tr = testgen::random_trace(rng);
  const FplSignal& x = tr.channel("x0");
  FplSignal back = x.negated().negated();
  for (double t = 0.0; t < 11.0; t += 0.29)
    CHECK(back.value_at(t).raw() == x.value_at(t).raw());
}

TEST_CASE("area") {
  CHECK(steps({{0, 2}}).area(0, 3).raw() == doctest::Approx(6.0));
  CHECK(fpl({{0, 0, 1}}).area(0, 2).raw() == doctest::Approx(2.0));
  CHECK(steps({{0, 0}, {1, 1}}).area(0, 2).raw() == doctest::Approx(1.0));
  CHECK_THROWS_AS(steps({{0, 1}}).area(2, 1), std::domain_error);

  SUBCASE("all-infinite window yields the pole, mixed is rejected") {
    FplSignal inf = FplSignal::constant(ExtendedReal::plus_inf());
    CHECK(inf.area(0, 5).is_plus_inf());
    FplSignal mixed = fpl({{0.0, 1.0, 0.0}, {1.0, ExtendedReal::plus_inf(), 0.0}});
    CHECK_THROWS_AS(mixed.area(0, 2), EvaluationError);
    CHECK(mixed.area(0, 1).raw() == doctest::Approx(1.0));  // finite part only
  }
}

TEST_CASE("area is additive and bounded by the range") {
  testgen::Rng rng(23);
  std::uniform_real_distribution<double> dt(0.0, 12.0);
  for (int round = 0; round < 30; ++round) {
    Trace tr = testgen::random_trace(rng);
    const FplSignal& s = tr.channel("x0");
    double x[3] = {dt(rng), dt(rng), dt(rng)};
    std::sort(x, x + 3);
    double whole = s.area(x[0], x[2]).raw();
    CHECK(whole ==
          doctest::Approx(s.area(x[0], x[1]).raw() + s.area(x[1], x[2]).raw()).epsilon(1e-12));
    if (x[2] > x[0]) {
      double lo = 1e300, hi = -1e300;
      for (double t = x[0]; t <= x[2]; t += (x[2] - x[0]) / 512.0) {
        lo = std::min(lo, s.value_at(t).raw());
        hi = std::max(hi, s.value_at(t).raw());
      }
      CHECK(whole >= (x[2] - x[0]) * lo - 1e-9);
      CHECK(whole <= (x[2] - x[0]) * hi + 1e-9);
    }
  }
}

TEST_CASE("trace CSV round-trip") {
  std::map<std::string, FplSignal> ch;
  ch.emplace("v", steps({{0, 99.25}, {1.5, 0.1 + 0.2}}));
  ch.emplace("w", steps({{0, -1}, {2.25, 1}}));
  Trace tr(std::move(ch));
  std::stringstream buf;
  tr.write_csv(buf);
  Trace back = Trace::load_csv(buf);
  CHECK(back.horizon() == tr.horizon());
  for (double t : {0.0, 1.0, 1.5, 2.25, 3.0}) {
    CHECK(back.channel("v").value_at(t).raw() == tr.channel("v").value_at(t).raw());
    CHECK(back.channel("w").value_at(t).raw() == tr.channel("w").value_at(t).raw());
  }
}

TEST_CASE("trace CSV rejects malformed input") {
  auto parse = [](const std::string& text) {
    std::stringstream ss(text);
    return Trace::load_csv(ss);
  };
  CHECK_THROWS(parse(""));
  CHECK_THROWS(parse("time,v\n1,2\n"));          // must start at 0
  CHECK_THROWS(parse("time,v\n0,1\n0,2\n"));     // strictly increasing
  CHECK_THROWS(parse("time,v\n0,banana\n"));
  CHECK_THROWS(parse("speed,v\n0,1\n"));         // header must start with time
  CHECK_NOTHROW(parse("time,v\n0,1\n2,3\n"));
}
