// Discrete-event engine for a single-gateway LoRaWAN network running ADR.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "adrsim/adr.hpp"
#include "adrsim/mac.hpp"
#include "adrsim/phy.hpp"
#include "adrsim/rng.hpp"
#include "adrsim/trace.hpp"

namespace adrsim::sim {

inline constexpr double kDay = 86400.0;

struct Position {
  double x = 0.0;
  double y = 0.0;

  double distance() const;
};

/// Area-uniform placement over a disk centred on the gateway.
std::vector<Position> place_devices(int n, double radius_m, RandomStream& rng);
Position place_device(double radius_m, RandomStream& rng);

/// Exponential gap after `now_s`, pushed back to the duty-cycle clearance.
double next_uplink_time(RandomStream& rng, double mean_interarrival_s, double now_s,
                        double duty_clearance_s);

struct AdrParams {
  int n = 20;
  int ack_limit = 64;
  int ack_delay = 32;
  double margin_db = 10.0;
};

struct Injection {
  enum class Kind : std::uint8_t { link_change, add_devices };

  Kind kind = Kind::link_change;
  /// Absent means "as soon as the warm-up ends".
  std::optional<double> time_s;
  /// Link change targets; `all_devices` selects every device present at
  /// injection time.
  std::vector<std::uint32_t> devices;
  bool all_devices = false;
  double delta_db = 0.0;
  int add_devices = 0;
};

enum class TraceScope : std::uint8_t { all, tracked };

struct Scenario {
  int n_devices = 100;
  double radius_m = 670.0;
  /// When set, every initial device sits at this distance from the gateway.
  std::optional<double> device_distance_m;
  double sim_duration_s = 12 * kDay;
  double mean_interarrival_s = 600.0;
  double sigma_db = 0.0;
  int payload_bytes = 20;
  double confirmed_fraction = 0.0;
  int sf_init = 12;
  int tp_init = 14;
  AdrParams adr;
  mac::RetxPolicy retx;
  phy::PhyConfig phy;
  phy::LinkModel link;  // sigma_db above overrides link.sigma_db
  double duty_cycle = 0.01;
  int gateway_tp_dbm = 14;
  /// Upper bound on the warm-up that precedes after-warm-up injections.
  double warmup_max_s = 2 * kDay;
  std::vector<Injection> injections;
  TraceScope trace_scope = TraceScope::all;
  std::uint64_t seed = 1;

  /// Throws DomainError describing the first invalid field.
  void validate() const;
};

/// One simulation run. Injections from the scenario are scheduled on
/// construction; more can be added before run().
class Simulator {
public:
  explicit Simulator(const Scenario& scenario);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  /// Shifts the mean path loss of `device` by `delta_db` for transmissions
  /// starting at or after `at_s`. Throws for unknown devices or times outside
  /// the run.
  void inject_link_change(std::uint32_t device, double delta_db, double at_s);
  /// Adds `k` fresh devices at `at_s`; their arrival anchors convergence.
  void inject_new_devices(int k, double at_s);

  RunTrace run();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunTrace run(const Scenario& scenario);

}  // namespace adrsim::sim
