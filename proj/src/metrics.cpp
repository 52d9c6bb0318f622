#include "adrsim/metrics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace adrsim::metrics {

std::optional<double> ConvergenceRecord::minutes() const {
  if (!converged_rx_s) return std::nullopt;
  return (*converged_rx_s - anchor_s) / 60.0;
}

std::optional<double> ConvergenceRecord::applied_minutes() const {
  if (!converged_applied_s) return std::nullopt;
  return (*converged_applied_s - anchor_s) / 60.0;
}

ConvergenceRecord convergence_time(const RunTrace& trace, std::uint32_t device, double anchor_s) {
  bool anchored = false;
  for (const auto& r : trace.records) {
    if (r.device == device && r.time_s == anchor_s &&
        (r.kind == RecordKind::device_arrival || r.kind == RecordKind::link_change)) {
      anchored = true;
      break;
    }
  }
  if (!anchored) {
    throw std::invalid_argument("no anchor for device " + std::to_string(device) + " at t=" +
                                std::to_string(anchor_s));
  }

  ConvergenceRecord out;
  out.device = device;
  out.anchor_s = anchor_s;
  int received = 0;
  for (const auto& r : trace.records) {
    if (r.device != device) continue;
    if (!out.converged_rx_s) {
      // Uplinks are logged at their end; count those that started after
      // the anchor so the link change applies to them.
      if (r.kind == RecordKind::uplink && r.start_s >= anchor_s && r.received() &&
          ++received == trace.n_required) {
        out.converged_rx_s = r.time_s;
      }
    } else if (r.kind == RecordKind::adr_command) {
      out.converged_applied_s = r.time_s;
      break;
    }
  }
  return out;
}

double EnergyModel::current_a(int tp_dbm) const {
  static constexpr std::array<int, 5> levels{2, 5, 8, 11, 14};
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == tp_dbm) return tx_current_ma[i] / 1000.0;
  }
  throw std::invalid_argument("no transmit current for " + std::to_string(tp_dbm) + " dBm");
}

EnergyRecord energy(const RunTrace& trace, std::uint32_t device, Interval interval,
                    const EnergyModel& model) {
  EnergyRecord out;
  out.device = device;
  for (const auto& r : trace.records) {
    if (r.kind != RecordKind::uplink || r.device != device || !interval.contains(r.start_s)) continue;
    out.joules += r.airtime_s * model.current_a(r.tp_dbm) * model.supply_v;
    ++out.transmissions;
  }
  return out;
}

double LossBreakdown::pct(std::int64_t count) const {
  return generated == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(generated);
}

LossBreakdown loss_breakdown(const RunTrace& trace, const std::set<std::uint32_t>& devices,
                             Interval interval) {
  struct FrameState {
    bool confirmed = false;
    bool received = false;
    bool in_interval = false;
    phy::LossReason last = phy::LossReason::none;
  };
  std::map<std::pair<std::uint32_t, std::uint32_t>, FrameState> frames;
  for (const auto& r : trace.records) {
    if (r.kind != RecordKind::uplink || !devices.contains(r.device)) continue;
    auto [it, fresh] = frames.try_emplace({r.device, r.fcnt});
    FrameState& f = it->second;
    if (fresh) {
      f.confirmed = r.has(record_flag::confirmed);
      f.in_interval = interval.contains(r.start_s);
    }
    if (r.received()) f.received = true;
    f.last = r.reason;
  }

  LossBreakdown out;
  for (const auto& [key, f] : frames) {
    if (!f.in_interval) continue;
    ++out.generated;
    if (f.received) {
      ++out.received;
    } else if (f.confirmed) {
      ++out.no_ack;
    } else {
      switch (f.last) {
        case phy::LossReason::collision: ++out.collision; break;
        case phy::LossReason::under_sensitivity: ++out.under_sensitivity; break;
        case phy::LossReason::gateway_busy: ++out.gateway_busy; break;
        case phy::LossReason::none: break;
      }
    }
  }
  return out;
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate of an empty sequence");
  Aggregate out;
  out.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace adrsim::metrics
