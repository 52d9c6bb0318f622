// Experiment presets and the repetition runner that turns them into rows.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "adrsim/metrics.hpp"
#include "adrsim/results.hpp"
#include "adrsim/sim.hpp"

namespace adrsim::cli {

/// One swept parameter: a label, its values and how to build a scenario for
/// each value.
struct Sweep {
  std::string param;
  std::vector<double> values;
  std::function<sim::Scenario(double)> make;
};

struct ExperimentPreset {
  std::string name;
  std::string description;
  std::vector<Sweep> sweeps;
  int repetitions = 30;

  void validate() const;
};

const std::vector<ExperimentPreset>& presets();
/// Throws std::out_of_range for unknown names.
const ExperimentPreset& find_preset(const std::string& name);

/// Mean path-loss offset that puts an unshadowed device at the cell edge
/// exactly on SF12 sensitivity at the highest power level.
double edge_link_offset(const sim::Scenario& s);

/// Base scenarios the presets are built from.
sim::Scenario network_scenario(int n_devices, double sigma_db);
sim::Scenario degraded_link_scenario(double delta_db = 20.0);
sim::Scenario improving_link_scenario(double delta_db = -8.0);

/// Per-run metrics for the tracked devices of a trace. Convergence and
/// energy average over converged devices only; non-converged devices are
/// counted separately.
struct RunSummary {
  double convergence_min = 0.0;
  double convergence_applied_min = 0.0;
  double energy_mj = 0.0;
  int tracked = 0;
  int converged = 0;
  metrics::LossBreakdown loss;
};

RunSummary summarize(const RunTrace& trace, const metrics::EnergyModel& model = {});

/// Metric name/value pairs written for one run.
std::vector<std::pair<std::string, double>> summary_metrics(const RunSummary& s);

/// Stable seed for (base, preset, param, value, rep): FNV-1a over
/// "preset|param|value|rep" with value printed as %.6g, mixed with the base
/// through splitmix64.
std::uint64_t run_seed(std::uint64_t base_seed, const std::string& preset,
                       const std::string& param, double value, int rep);

struct PresetRunOptions {
  std::uint64_t base_seed = 1;
  int parallelism = 1;
  std::optional<int> repetitions;
  /// Restrict to these sweep params (all when empty).
  std::vector<std::string> params;
  /// Restrict to these values (all when empty).
  std::vector<double> values;
};

using AggregateKey = std::tuple<std::string, double, std::string>;  // param, value, metric

struct PresetResult {
  std::vector<ResultRow> rows;  // sorted
  std::map<AggregateKey, metrics::Aggregate> aggregates;
};

/// Runs every (sweep value, repetition) pair; rows are sorted, so the result
/// does not depend on the parallelism level. NaN metric values are kept in
/// rows but left out of aggregates.
PresetResult run_preset(const ExperimentPreset& preset, const PresetRunOptions& options);

}  // namespace adrsim::cli
