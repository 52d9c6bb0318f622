#include "adrsim/presets.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace adrsim::cli {

void ExperimentPreset::validate() const {
  if (name.empty()) throw std::invalid_argument("preset without a name");
  if (sweeps.empty()) throw std::invalid_argument(name + ": no sweeps");
  for (const auto& s : sweeps) {
    if (s.values.empty()) throw std::invalid_argument(name + "/" + s.param + ": empty value list");
    if (!s.make) throw std::invalid_argument(name + "/" + s.param + ": no scenario builder");
  }
  if (repetitions < 1) throw std::invalid_argument(name + ": repetitions must be >= 1");
}

double edge_link_offset(const sim::Scenario& s) {
  const phy::LinkModel plain{s.link.d0_m, s.link.gamma, s.link.lpl_d0_db, 0.0, 0.0};
  const double budget = phy::kTxPowerLevels.back() - s.phy.sensitivity(phy::SpreadingFactor{phy::kMaxSf});
  return budget - phy::path_loss(s.radius_m, plain, 0.0);
}

sim::Scenario network_scenario(int n_devices, double sigma_db) {
  sim::Scenario s;
  s.n_devices = n_devices;
  s.sigma_db = sigma_db;
  // The cell radius is the communication range: an unshadowed device on the
  // edge is heard at SF12 and full power.
  s.link.mean_offset_db = edge_link_offset(s);
  s.trace_scope = sim::TraceScope::tracked;
  sim::Injection measured;
  measured.kind = sim::Injection::Kind::add_devices;
  measured.add_devices = 100;
  s.injections.push_back(measured);
  return s;
}

// A device close to the gateway with a clear line of sight settles at SF7
// and 5 dBm before its path loss jumps by `delta_db`.
sim::Scenario degraded_link_scenario(double delta_db) {
  sim::Scenario s;
  s.n_devices = 1;
  s.device_distance_m = 40.0;
  s.link.mean_offset_db = -10.0;
  sim::Injection change;
  change.time_s = 2 * sim::kDay;
  change.devices = {0};
  change.delta_db = delta_db;
  s.injections.push_back(change);
  return s;
}

// A device at the edge of the cell, mostly out of reach at SF12 and 14 dBm,
// whose path loss drops by |delta_db|.
sim::Scenario improving_link_scenario(double delta_db) {
  sim::Scenario s;
  s.n_devices = 1;
  s.device_distance_m = 670.0;
  s.sigma_db = 3.57;
  sim::Injection change;
  change.time_s = 2 * sim::kDay;
  change.devices = {0};
  change.delta_db = delta_db;
  s.injections.push_back(change);
  return s;
}

namespace {

std::vector<ExperimentPreset> build_presets() {
  std::vector<ExperimentPreset> out;

  out.push_back({"network-size",
                 "100 devices join networks of growing size after warm-up",
                 {{"n_devices",
                   {100, 500, 1000, 2000, 3000, 4000},
                   [](double n) { return network_scenario(static_cast<int>(n), 0.0); }}}});

  auto channel_sweep = [](int n) {
    return Sweep{"sigma_db[n_devices=" + std::to_string(n) + "]",
                 {0.0, 1.785, 3.57},
                 [n](double sigma) { return network_scenario(n, sigma); }};
  };
  out.push_back({"channel-variation",
                 "shadowing level at small and large network size",
                 {channel_sweep(100), channel_sweep(3000)}});

  out.push_back({"link-increase",
                 "path loss of a converged device rises by delta_db",
                 {{"delta_db", {5, 10, 15, 20, 25}, [](double d) { return degraded_link_scenario(d); }}}});

  out.push_back({"link-decrease",
                 "path loss of an edge device falls by |delta_db|",
                 {{"delta_db", {-4, -6, -8, -10, -12},
                   [](double d) { return improving_link_scenario(d); }}}});

  out.push_back({"traffic-type",
                 "share of confirmed uplinks on a degraded link",
                 {{"confirmed_fraction", {0.0, 0.25, 0.5, 0.75, 1.0}, [](double f) {
                     auto s = degraded_link_scenario();
                     s.confirmed_fraction = f;
                     return s;
                   }}}});

  out.push_back({"n-frames",
                 "network ADR window size N on a degraded link",
                 {{"n", {5, 10, 15, 20, 25, 30}, [](double n) {
                     auto s = degraded_link_scenario();
                     s.adr.n = static_cast<int>(n);
                     return s;
                   }}}});

  out.push_back({"ack-limit",
                 "ADR_ACK_LIMIT on a degraded link",
                 {{"ack_limit", {16, 32, 64, 128}, [](double v) {
                     auto s = degraded_link_scenario();
                     s.adr.ack_limit = static_cast<int>(v);
                     return s;
                   }}}});

  out.push_back({"ack-delay",
                 "ADR_ACK_DELAY on a degraded link",
                 {{"ack_delay", {8, 16, 32, 64}, [](double v) {
                     auto s = degraded_link_scenario();
                     s.adr.ack_delay = static_cast<int>(v);
                     return s;
                   }}}});

  std::set<std::string> names;
  for (const auto& p : out) {
    p.validate();
    if (!names.insert(p.name).second) throw std::logic_error("duplicate preset " + p.name);
  }
  return out;
}

}  // namespace

const std::vector<ExperimentPreset>& presets() {
  static const std::vector<ExperimentPreset> all = build_presets();
  return all;
}

const ExperimentPreset& find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("unknown preset '" + name + "'");
}

RunSummary summarize(const RunTrace& trace, const metrics::EnergyModel& model) {
  std::unordered_map<std::uint32_t, double> anchors;
  for (const auto& r : trace.records) {
    if (r.kind == RecordKind::device_arrival || r.kind == RecordKind::link_change) {
      anchors[r.device] = r.time_s;
    }
  }

  RunSummary out;
  std::set<std::uint32_t> tracked;
  double first_anchor = std::numeric_limits<double>::infinity();
  double conv_sum = 0.0, applied_sum = 0.0, energy_sum = 0.0;
  int applied_n = 0;
  for (const auto& d : trace.devices) {
    auto it = anchors.find(d.id);
    if (!d.tracked || it == anchors.end()) continue;
    tracked.insert(d.id);
    first_anchor = std::min(first_anchor, it->second);
    const auto c = metrics::convergence_time(trace, d.id, it->second);
    if (!c.converged()) continue;
    ++out.converged;
    conv_sum += *c.minutes();
    if (c.converged_applied_s) {
      applied_sum += *c.applied_minutes();
      ++applied_n;
    }
    energy_sum += metrics::energy(trace, d.id, {c.anchor_s, *c.converged_rx_s}, model).joules;
  }
  out.tracked = static_cast<int>(tracked.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.convergence_min = out.converged ? conv_sum / out.converged : nan;
  out.convergence_applied_min = applied_n ? applied_sum / applied_n : nan;
  out.energy_mj = out.converged ? 1000.0 * energy_sum / out.converged : nan;
  if (!tracked.empty()) {
    out.loss = metrics::loss_breakdown(trace, tracked, {first_anchor, trace.end_s});
  }
  return out;
}

std::vector<std::pair<std::string, double>> summary_metrics(const RunSummary& s) {
  return {
      {"convergence_min", s.convergence_min},
      {"convergence_applied_min", s.convergence_applied_min},
      {"energy_mj", s.energy_mj},
      {"tracked_devices", static_cast<double>(s.tracked)},
      {"converged_devices", static_cast<double>(s.converged)},
      {"received_pct", s.loss.received_pct()},
      {"loss_collision_pct", s.loss.collision_pct()},
      {"loss_under_sensitivity_pct", s.loss.under_sensitivity_pct()},
      {"loss_gateway_busy_pct", s.loss.gateway_busy_pct()},
      {"loss_no_ack_pct", s.loss.no_ack_pct()},
  };
}

std::uint64_t run_seed(std::uint64_t base_seed, const std::string& preset,
                       const std::string& param, double value, int rep) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  const std::string key = preset + "|" + param + "|" + buf + "|" + std::to_string(rep);
  return splitmix64(base_seed ^ fnv1a(key));
}

PresetResult run_preset(const ExperimentPreset& preset, const PresetRunOptions& options) {
  preset.validate();
  const int reps = options.repetitions.value_or(preset.repetitions);
  if (reps < 1) throw std::invalid_argument("repetitions must be >= 1");

  struct Job {
    const Sweep* sweep;
    double value;
    int rep;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& sweep : preset.sweeps) {
    if (!options.params.empty() &&
        std::find(options.params.begin(), options.params.end(), sweep.param) == options.params.end()) {
      continue;
    }
    for (double v : sweep.values) {
      if (!options.values.empty() &&
          std::find(options.values.begin(), options.values.end(), v) == options.values.end()) {
        continue;
      }
      for (int r = 0; r < reps; ++r) {
        jobs.push_back({&sweep, v, r, run_seed(options.base_seed, preset.name, sweep.param, v, r)});
      }
    }
  }
  // Validate every scenario up front so errors surface before any run.
  for (const auto& job : jobs) job.sweep->make(job.value).validate();

  std::vector<std::vector<ResultRow>> per_job(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size() && !failed; i = next++) {
      try {
        const Job& job = jobs[i];
        sim::Scenario sc = job.sweep->make(job.value);
        sc.seed = job.seed;
        const auto summary = summarize(sim::run(sc));
        for (const auto& [metric, value] : summary_metrics(summary)) {
          per_job[i].push_back({preset.name, job.sweep->param, job.value, job.rep, job.seed, metric, value});
        }
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(options.parallelism, static_cast<int>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  PresetResult result;
  for (auto& rows : per_job) {
    for (auto& row : rows) result.rows.push_back(std::move(row));
  }
  std::sort(result.rows.begin(), result.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.param, a.value, a.metric, a.rep) < std::tie(b.param, b.value, b.metric, b.rep);
  });

  std::map<AggregateKey, std::vector<double>> grouped;
  for (const auto& row : result.rows) {
    auto& bucket = grouped[{row.param, row.value, row.metric}];
    if (!std::isnan(row.metric_value)) bucket.push_back(row.metric_value);
  }
  for (const auto& [key, values] : grouped) {
    if (!values.empty()) result.aggregates[key] = metrics::aggregate(values);
  }
  return result;
}

}  // namespace adrsim::cli
