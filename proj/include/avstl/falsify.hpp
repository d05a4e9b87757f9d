#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "avstl/formula.hpp"
#include "avstl/signal.hpp"

namespace avstl::falsify {

/// Search space: per input channel a range and a number of piecewise-constant
/// control points spread uniformly over the horizon.
struct InputChannelSpec {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  int control_points = 1;
};

struct InputSpec {
  std::vector<InputChannelSpec> channels;
  double horizon = 10.0;
};

/// A deterministic black-box system: input trace in, output trace out.
class Model {
 public:
  virtual ~Model() = default;
  virtual std::vector<std::string> input_names() const = 0;
  virtual Trace simulate(const Trace& input, double horizon) const = 0;
};

/// First-order lag: omega' = (K * throttle - omega) / tau_c, integrated with
/// a fixed-step explicit scheme (Heun), emitting piecewise-constant samples.
/// Outputs: `omega` and the scaled speed `v`.
struct EngineLagParams {
  double gain = 45.0;          // steady-state omega per unit throttle
  double time_constant = 2.0;  // tau_c, seconds
  double speed_scale = 0.02;   // v = speed_scale * omega
  double step_fraction = 0.01; // integration step as a fraction of tau_c
};
std::unique_ptr<Model> make_engine_lag(const EngineLagParams& p = {});

/// Four-state gear box driven by throttle: a shift is considered once the
/// per-state dwell time has elapsed, moving up when throttle sits at or
/// above the up-threshold and down when at or below the down-threshold.
/// Outputs gear1..gear4 as +/-1 channels.
struct GearAutomatonParams {
  double dwell[4] = {0.95, 0.95, 0.95, 0.95};
  double up_threshold[3] = {70.0, 70.0, 70.0};    // gear i -> i+1
  double down_threshold[3] = {25.0, 25.0, 25.0};  // gear i+1 -> i
};
std::unique_ptr<Model> make_gear_automaton(const GearAutomatonParams& p = {});

enum class OptimizerKind { Random, Anneal };

struct AnnealParams {
  double initial_temperature = 1.0;
  double cooling = 0.97;          // geometric, per iteration
  double proposal_stddev = 0.15;  // fraction of each coordinate's range
  int restart_after = 200;        // non-improving iterations before a restart
};

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Anneal;
  int max_iterations = 1000;
  std::uint64_t seed = 0;
  AnnealParams anneal;
};

struct FalsifyResult {
  bool success = false;
  std::optional<Trace> falsifying_input;
  int iterations_used = 0;
  std::vector<double> robustness_history;  // positive robustness per iteration
  double wall_time_s = 0.0;
};

/// The search loop: sample or propose a control-point vector, build the
/// piecewise-constant input, simulate, evaluate the positive robustness,
/// stop at <= 0 or when the iteration budget runs out.
FalsifyResult falsification_loop(const Model& model, const Formula& spec,
                                 const InputSpec& input, const OptimizerConfig& opt);

struct ExperimentProblem {
  std::string name;
  std::shared_ptr<Model> model;
  Formula plain;
  Formula refined;
  InputSpec input;
};

struct VariantStats {
  std::string formula_text;
  int successes = 0;
  double mean_iterations = 0.0;
  double mean_iterations_success = 0.0;  // NaN when no successes
  double mean_time_s = 0.0;
  double mean_time_success_s = 0.0;
  std::vector<int> success_trials;  // indices of successful trials
};

struct ProblemReport {
  std::string name;
  int trials = 0;
  VariantStats plain;
  VariantStats refined;
  /// Refined-success inputs re-checked against the plain specification.
  int refined_successes_verified_on_plain = 0;
};

struct ExperimentReport {
  std::vector<ProblemReport> problems;
};

/// Paired trials: trial k of both variants starts from the same seed.
ExperimentReport run_experiment(const std::vector<ExperimentProblem>& problems, int trials,
                                const std::vector<std::uint64_t>& seeds,
                                const OptimizerConfig& base);

/// JSON front end: parses a configuration (model, input spec, formula or
/// problem list, optimizer, trials, seeds), runs it, and renders the report
/// as JSON and as an aligned text table.
std::string run_config_json(const std::string& config_json);
std::string report_to_json(const ExperimentReport& report);
std::string report_to_table(const ExperimentReport& report);

}  // namespace avstl::falsify
