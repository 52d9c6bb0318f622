// Evaluation quantities computed from run traces.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>

#include "adrsim/trace.hpp"

namespace adrsim::metrics {

struct Interval {
  double begin_s = 0.0;
  double end_s = 0.0;

  bool contains(double t) const { return t >= begin_s && t < end_s; }
};

struct ConvergenceRecord {
  std::uint32_t device = 0;
  double anchor_s = 0.0;
  /// Time the network holds the N-th uplink received after the anchor.
  std::optional<double> converged_rx_s;
  /// Time the device applies the first LinkADRReq at or after converged_rx_s.
  std::optional<double> converged_applied_s;

  bool converged() const { return converged_rx_s.has_value(); }
  std::optional<double> minutes() const;
  std::optional<double> applied_minutes() const;
};

/// Throws std::invalid_argument when the trace holds no anchor (arrival or
/// link change) for `device` at `anchor_s`.
ConvergenceRecord convergence_time(const RunTrace& trace, std::uint32_t device, double anchor_s);

struct EnergyModel {
  /// Transmit current in mA at 2, 5, 8, 11, 14 dBm.
  std::array<double, 5> tx_current_ma{24.0, 27.0, 30.0, 35.0, 44.0};
  double supply_v = 3.3;

  double current_a(int tp_dbm) const;
};

struct EnergyRecord {
  std::uint32_t device = 0;
  double joules = 0.0;
  int transmissions = 0;
};

/// Transmit energy of every uplink attempt that starts inside `interval`.
EnergyRecord energy(const RunTrace& trace, std::uint32_t device, Interval interval,
                    const EnergyModel& model = {});

struct LossBreakdown {
  std::int64_t generated = 0;
  std::int64_t received = 0;
  std::int64_t collision = 0;
  std::int64_t under_sensitivity = 0;
  std::int64_t gateway_busy = 0;
  std::int64_t no_ack = 0;

  double pct(std::int64_t count) const;
  double received_pct() const { return pct(received); }
  double collision_pct() const { return pct(collision); }
  double under_sensitivity_pct() const { return pct(under_sensitivity); }
  double gateway_busy_pct() const { return pct(gateway_busy); }
  double no_ack_pct() const { return pct(no_ack); }
};

/// Classifies every frame generated by `devices` whose first attempt starts
/// inside `interval`. A frame counts as received if any attempt got through;
/// a confirmed frame with no successful attempt is no_ack; an unconfirmed
/// lost frame carries the reason of its single attempt.
LossBreakdown loss_breakdown(const RunTrace& trace, const std::set<std::uint32_t>& devices,
                             Interval interval);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

/// Sample mean and (n - 1) standard deviation; stddev is 0 for one value.
Aggregate aggregate(std::span<const double> values);

}  // namespace adrsim::metrics
