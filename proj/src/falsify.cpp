#include "avstl/falsify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "avstl/errors.hpp"
#include "avstl/robustness.hpp"

namespace avstl::falsify {

namespace {

using json = nlohmann::json;

// --- engine lag ------------------------------------------------------------

class EngineLagModel final : public Model {
 public:
  explicit EngineLagModel(const EngineLagParams& p) : p_(p) {
    if (!(p_.time_constant > 0.0) || !(p_.step_fraction > 0.0))
      throw std::invalid_argument("engine lag needs positive time constant and step");
  }

  std::vector<std::string> input_names() const override { return {"throttle"}; }

  Trace simulate(const Trace& input, double horizon) const override {
    const FplSignal& throttle = input.channel("throttle");
    double h = p_.step_fraction * p_.time_constant;
    int steps = static_cast<int>(std::ceil(horizon / h));

    std::vector<std::pair<double, double>> omega_steps, v_steps;
    double omega = 0.0;
    auto deriv = [&](double w, double u) { return (p_.gain * u - w) / p_.time_constant; };
    for (int k = 0; k <= steps; ++k) {
      double t = k * h;
      if (!std::isfinite(omega)) throw EvaluationError("model state diverged");
      omega_steps.emplace_back(t, omega);
      v_steps.emplace_back(t, p_.speed_scale * omega);
      double u0 = throttle.value_at(t).raw();
      double u1 = throttle.value_at(std::min((k + 1) * h, horizon)).raw();
      double k1 = deriv(omega, u0);
      double k2 = deriv(omega + h * k1, u1);
      omega += 0.5 * h * (k1 + k2);
    }
    std::map<std::string, FplSignal> out;
    out.emplace("omega", FplSignal::from_steps(omega_steps));
    out.emplace("v", FplSignal::from_steps(v_steps));
    return Trace(std::move(out));
  }

 private:
  EngineLagParams p_;
};

// --- gear automaton ----------------------------------------------------------

class GearAutomatonModel final : public Model {
 public:
  explicit GearAutomatonModel(const GearAutomatonParams& p) : p_(p) {
    for (double d : p_.dwell)
      if (!(d > 0.0)) throw std::invalid_argument("gear dwell times must be positive");
  }

  std::vector<std::string> input_names() const override { return {"throttle"}; }

  Trace simulate(const Trace& input, double horizon) const override {
    const FplSignal& throttle = input.channel("throttle");

    std::vector<std::pair<double, int>> shifts{{0.0, 1}};  // (time, gear)
    int gear = 1;
    double entered = 0.0;
    double t = 0.0;
    while (t < horizon) {
      double ready = entered + p_.dwell[gear - 1];
      if (ready >= horizon) break;
      // First time >= ready where a shift condition holds; conditions only
      // change at input breakpoints, so walk the input segments.
      double when = ready;
      int next_gear = 0;
      while (when < horizon) {
        double u = throttle.value_at(when).raw();
        if (gear < 4 && u >= p_.up_threshold[gear - 1]) {
          next_gear = gear + 1;
          break;
        }
        if (gear > 1 && u <= p_.down_threshold[gear - 2]) {
          next_gear = gear - 1;
          break;
        }
        double nxt = next_breakpoint(throttle, when);
        if (nxt <= when) break;
        when = nxt;
      }
      if (next_gear == 0 || when >= horizon) break;
      gear = next_gear;
      entered = when;
      shifts.emplace_back(when, gear);
      t = when;
    }

    std::map<std::string, FplSignal> out;
    for (int g = 1; g <= 4; ++g) {
      std::vector<std::pair<double, double>> steps;
      for (const auto& [time, cur] : shifts) {
        double v = cur == g ? 1.0 : -1.0;
        if (!steps.empty() && steps.back().second == v) continue;
        steps.emplace_back(time, v);
      }
      out.emplace("gear" + std::to_string(g), FplSignal::from_steps(steps));
    }
    return Trace(std::move(out));
  }

 private:
  static double next_breakpoint(const FplSignal& s, double t) {
    for (const Segment& seg : s.segments())
      if (seg.start > t) return seg.start;
    return std::numeric_limits<double>::infinity();
  }

  GearAutomatonParams p_;
};

}  // namespace

std::unique_ptr<Model> make_engine_lag(const EngineLagParams& p) {
  return std::make_unique<EngineLagModel>(p);
}

std::unique_ptr<Model> make_gear_automaton(const GearAutomatonParams& p) {
  return std::make_unique<GearAutomatonModel>(p);
}

// --- search loop -------------------------------------------------------------

namespace {

struct SearchSpace {
  const InputSpec& spec;
  std::size_t dimensions() const {
    std::size_t n = 0;
    for (const auto& ch : spec.channels) n += static_cast<std::size_t>(ch.control_points);
    return n;
  }

  Trace build(const std::vector<double>& x) const {
    std::map<std::string, FplSignal> channels;
    std::size_t at = 0;
    for (const auto& ch : spec.channels) {
      std::vector<std::pair<double, double>> steps;
      for (int i = 0; i < ch.control_points; ++i)
        steps.emplace_back(i * spec.horizon / ch.control_points, x[at++]);
      channels.emplace(ch.name, FplSignal::from_steps(steps));
    }
    return Trace(std::move(channels));
  }

  std::vector<double> sample(std::mt19937_64& rng) const {
    std::vector<double> x;
    x.reserve(dimensions());
    for (const auto& ch : spec.channels)
      for (int i = 0; i < ch.control_points; ++i)
        x.push_back(std::uniform_real_distribution<double>(ch.lo, ch.hi)(rng));
    return x;
  }

  std::vector<double> perturb(std::mt19937_64& rng, const std::vector<double>& x,
                              double stddev_fraction) const {
    std::vector<double> y = x;
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::size_t at = 0;
    for (const auto& ch : spec.channels) {
      double sd = stddev_fraction * (ch.hi - ch.lo);
      for (int i = 0; i < ch.control_points; ++i, ++at)
        y[at] = std::clamp(y[at] + sd * gauss(rng), ch.lo, ch.hi);
    }
    return y;
  }
};

void validate_input_spec(const Model& model, const InputSpec& spec) {
  if (!(spec.horizon > 0.0)) throw std::invalid_argument("input horizon must be positive");
  std::vector<std::string> wanted = model.input_names();
  if (spec.channels.size() != wanted.size())
    throw std::invalid_argument("input spec channel count does not match the model");
  for (const auto& ch : spec.channels) {
    if (!(ch.lo < ch.hi)) throw std::invalid_argument("input range must satisfy lo < hi");
    if (ch.control_points < 1)
      throw std::invalid_argument("input needs at least one control point");
    if (std::find(wanted.begin(), wanted.end(), ch.name) == wanted.end())
      throw std::invalid_argument("model does not take input '" + ch.name + "'");
  }
}

}  // namespace

FalsifyResult falsification_loop(const Model& model, const Formula& spec,
                                 const InputSpec& input, const OptimizerConfig& opt) {
  if (opt.max_iterations < 1) throw std::invalid_argument("need at least one iteration");
  validate_input_spec(model, input);

  auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(opt.seed);
  SearchSpace space{input};

  FalsifyResult result;
  std::vector<double> current = space.sample(rng);
  double current_energy = std::numeric_limits<double>::infinity();
  double best_energy = std::numeric_limits<double>::infinity();
  double temperature = opt.anneal.initial_temperature;
  int since_improvement = 0;
  bool have_current = false;
  std::vector<double> candidate = current;

  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    Trace in = space.build(candidate);
    Trace out = model.simulate(in, input.horizon);
    double pos = evaluate(out, spec).pos.raw();
    result.robustness_history.push_back(pos);
    result.iterations_used = iter;

    if (pos <= 0.0) {
      result.success = true;
      result.falsifying_input = std::move(in);
      break;
    }

    if (opt.kind == OptimizerKind::Random) {
      candidate = space.sample(rng);
      continue;
    }

    // Metropolis step on the positive robustness.
    bool accept;
    if (!have_current || pos <= current_energy) {
      accept = true;
    } else if (std::isinf(pos)) {
      accept = false;
    } else if (std::isinf(current_energy)) {
      accept = true;
    } else {
      double ratio = std::exp(-(pos - current_energy) / std::max(temperature, 1e-12));
      accept = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < ratio;
    }
    if (accept) {
      current = candidate;
      current_energy = pos;
      have_current = true;
    }
    if (pos < best_energy) {
      best_energy = pos;
      since_improvement = 0;
    } else if (++since_improvement >= opt.anneal.restart_after) {
      current = space.sample(rng);
      current_energy = std::numeric_limits<double>::infinity();
      have_current = false;
      since_improvement = 0;
      candidate = current;
      temperature = opt.anneal.initial_temperature;
      continue;
    }
    temperature *= opt.anneal.cooling;
    candidate = space.perturb(rng, current, opt.anneal.proposal_stddev);
  }

  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// --- experiments -------------------------------------------------------------

namespace {

VariantStats summarize(const std::string& text, const std::vector<FalsifyResult>& runs) {
  VariantStats s;
  s.formula_text = text;
  double it_all = 0.0, it_succ = 0.0, t_all = 0.0, t_succ = 0.0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const FalsifyResult& r = runs[k];
    it_all += r.iterations_used;
    t_all += r.wall_time_s;
    if (r.success) {
      ++s.successes;
      it_succ += r.iterations_used;
      t_succ += r.wall_time_s;
      s.success_trials.push_back(static_cast<int>(k));
    }
  }
  double n = static_cast<double>(runs.size());
  s.mean_iterations = runs.empty() ? 0.0 : it_all / n;
  s.mean_time_s = runs.empty() ? 0.0 : t_all / n;
  s.mean_iterations_success =
      s.successes > 0 ? it_succ / s.successes : std::numeric_limits<double>::quiet_NaN();
  s.mean_time_success_s =
      s.successes > 0 ? t_succ / s.successes : std::numeric_limits<double>::quiet_NaN();
  return s;
}

}  // namespace

ExperimentReport run_experiment(const std::vector<ExperimentProblem>& problems, int trials,
                                const std::vector<std::uint64_t>& seeds,
                                const OptimizerConfig& base) {
  if (trials < 0) throw std::invalid_argument("trial count must be nonnegative");
  ExperimentReport report;
  for (const ExperimentProblem& prob : problems) {
    ProblemReport pr;
    pr.name = prob.name;
    pr.trials = trials;
    std::vector<FalsifyResult> plain_runs, refined_runs;
    for (int k = 0; k < trials; ++k) {
      OptimizerConfig opt = base;
      opt.seed = k < static_cast<int>(seeds.size())
                     ? seeds[k]
                     : base.seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(k + 1);
      plain_runs.push_back(falsification_loop(*prob.model, prob.plain, prob.input, opt));
      refined_runs.push_back(falsification_loop(*prob.model, prob.refined, prob.input, opt));
    }
    pr.plain = summarize(unparse(prob.plain), plain_runs);
    pr.refined = summarize(unparse(prob.refined), refined_runs);
    for (const FalsifyResult& r : refined_runs) {
      if (!r.success) continue;
      Trace out = prob.model->simulate(*r.falsifying_input, prob.input.horizon);
      if (evaluate(out, prob.plain).pos.raw() <= 0.0) ++pr.refined_successes_verified_on_plain;
    }
    report.problems.push_back(std::move(pr));
  }
  return report;
}

// --- JSON front end -----------------------------------------------------------

namespace {

InputSpec parse_input_spec(const json& j) {
  InputSpec spec;
  spec.horizon = j.at("horizon").get<double>();
  for (const json& c : j.at("channels")) {
    InputChannelSpec ch;
    ch.name = c.at("name").get<std::string>();
    ch.lo = c.at("range").at(0).get<double>();
    ch.hi = c.at("range").at(1).get<double>();
    ch.control_points = c.at("control_points").get<int>();
    spec.channels.push_back(std::move(ch));
  }
  return spec;
}

std::shared_ptr<Model> parse_model(const json& j) {
  std::string name = j.at("name").get<std::string>();
  json params = j.value("params", json::object());
  if (name == "engine_lag") {
    EngineLagParams p;
    p.gain = params.value("gain", p.gain);
    p.time_constant = params.value("time_constant", p.time_constant);
    p.speed_scale = params.value("speed_scale", p.speed_scale);
    p.step_fraction = params.value("step_fraction", p.step_fraction);
    return make_engine_lag(p);
  }
  if (name == "gear_automaton") {
    GearAutomatonParams p;
    if (params.contains("dwell"))
      for (int i = 0; i < 4; ++i) p.dwell[i] = params["dwell"].at(i).get<double>();
    if (params.contains("up_threshold"))
      for (int i = 0; i < 3; ++i) p.up_threshold[i] = params["up_threshold"].at(i).get<double>();
    if (params.contains("down_threshold"))
      for (int i = 0; i < 3; ++i)
        p.down_threshold[i] = params["down_threshold"].at(i).get<double>();
    return make_gear_automaton(p);
  }
  throw std::invalid_argument("unknown model '" + name + "'");
}

OptimizerConfig parse_optimizer(const json& j) {
  OptimizerConfig opt;
  std::string kind = j.value("kind", "anneal");
  if (kind == "random") {
    opt.kind = OptimizerKind::Random;
  } else if (kind == "anneal") {
    opt.kind = OptimizerKind::Anneal;
  } else {
    throw std::invalid_argument("unknown optimizer kind '" + kind + "'");
  }
  opt.max_iterations = j.value("max_iterations", opt.max_iterations);
  opt.seed = j.value("seed", opt.seed);
  if (j.contains("anneal")) {
    const json& a = j["anneal"];
    opt.anneal.initial_temperature =
        a.value("initial_temperature", opt.anneal.initial_temperature);
    opt.anneal.cooling = a.value("cooling", opt.anneal.cooling);
    opt.anneal.proposal_stddev = a.value("proposal_stddev", opt.anneal.proposal_stddev);
    opt.anneal.restart_after = a.value("restart_after", opt.anneal.restart_after);
  }
  if (!(opt.anneal.cooling > 0.0 && opt.anneal.cooling < 1.0))
    throw std::invalid_argument("cooling rate must lie in (0,1)");
  return opt;
}

json variant_to_json(const VariantStats& v) {
  json j;
  j["formula"] = v.formula_text;
  j["successes"] = v.successes;
  j["mean_iterations"] = v.mean_iterations;
  if (v.successes > 0) {
    j["mean_iterations_over_successes"] = v.mean_iterations_success;
    j["mean_time_over_successes_s"] = v.mean_time_success_s;
  }
  j["mean_time_s"] = v.mean_time_s;
  j["success_trials"] = v.success_trials;
  return j;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  json j;
  j["problems"] = json::array();
  for (const ProblemReport& p : report.problems) {
    json pj;
    pj["name"] = p.name;
    pj["trials"] = p.trials;
    pj["plain"] = variant_to_json(p.plain);
    pj["refined"] = variant_to_json(p.refined);
    pj["refined_successes_verified_on_plain"] = p.refined_successes_verified_on_plain;
    j["problems"].push_back(std::move(pj));
  }
  return j.dump(2);
}

std::string report_to_table(const ExperimentReport& report) {
  std::ostringstream out;
  char line[256];
  for (const ProblemReport& p : report.problems) {
    out << p.name << "  (" << p.trials << " trials)\n";
    std::snprintf(line, sizeof line, "  %-12s %8s %10s %10s\n", "spec", "Succ.", "Iter.",
                  "Time");
    out << line;
    auto row = [&](const char* label, const VariantStats& v) {
      std::snprintf(line, sizeof line, "  %-12s %5d/%-2d %10.1f %9.2fs\n", label, v.successes,
                    p.trials, v.mean_iterations, v.mean_time_s);
      out << line;
      if (v.successes > 0) {
        std::snprintf(line, sizeof line, "  %-12s %8s %10.1f %9.2fs\n", "", "(succ.)",
                      v.mean_iterations_success, v.mean_time_success_s);
        out << line;
      }
    };
    row("plain", p.plain);
    row("refined", p.refined);
    out << "  refined successes verified on plain spec: "
        << p.refined_successes_verified_on_plain << "/" << p.refined.successes << "\n";
  }
  return out.str();
}

std::string run_config_json(const std::string& config_json) {
  json cfg = json::parse(config_json);
  auto model = parse_model(cfg.at("model"));
  InputSpec input = parse_input_spec(cfg.at("input"));
  OptimizerConfig opt = parse_optimizer(cfg.value("optimizer", json::object()));
  int trials = cfg.value("trials", 1);
  std::vector<std::uint64_t> seeds;
  if (cfg.contains("seeds"))
    for (const json& s : cfg["seeds"]) seeds.push_back(s.get<std::uint64_t>());

  std::vector<ExperimentProblem> problems;
  if (cfg.contains("problems")) {
    for (const json& p : cfg["problems"]) {
      ExperimentProblem prob;
      prob.name = p.value("name", "problem");
      prob.model = model;
      prob.plain = parse_formula(p.at("plain").get<std::string>());
      prob.refined = p.contains("refined") ? parse_formula(p.at("refined").get<std::string>())
                                           : prob.plain;
      prob.input = input;
      problems.push_back(std::move(prob));
    }
  } else {
    ExperimentProblem prob;
    prob.name = cfg.value("name", "falsification");
    prob.model = model;
    prob.plain = parse_formula(cfg.at("formula").get<std::string>());
    prob.refined = prob.plain;
    prob.input = input;
    problems.push_back(std::move(prob));
  }

  ExperimentReport report = run_experiment(problems, trials, seeds, opt);
  json out = json::parse(report_to_json(report));
  out["table"] = report_to_table(report);
  return out.dump(2);
}

}  // namespace avstl::falsify
