// Run trace: the timestamped event log every metric is derived from.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "adrsim/phy.hpp"

namespace adrsim {

enum class RecordKind : std::uint8_t {
  uplink,            // one transmission attempt, logged when it ends
  downlink,          // a gateway transmission, logged when the device has it
  downlink_dropped,  // no window available at the gateway
  adr_step,          // device-side TP/SF escalation
  adr_command,       // device applied a LinkADRReq
  net_command,       // network computed a new setting for the device
  link_change,       // mean path loss offset changed
  device_arrival,    // device joined the network
};

std::string to_string(RecordKind k);

namespace record_flag {
inline constexpr std::uint8_t confirmed = 1u << 0;
inline constexpr std::uint8_t adr_ack_req = 1u << 1;
inline constexpr std::uint8_t ack = 1u << 2;
inline constexpr std::uint8_t link_adr = 1u << 3;
inline constexpr std::uint8_t rx2 = 1u << 4;
}  // namespace record_flag

struct TraceRecord {
  double time_s = 0.0;
  double start_s = 0.0;
  double airtime_s = 0.0;
  /// Received power for uplinks/downlinks, delta for link changes.
  double value = 0.0;
  double snr_db = 0.0;
  std::uint32_t device = 0;
  std::uint32_t fcnt = 0;
  RecordKind kind = RecordKind::uplink;
  std::uint8_t attempt = 0;
  std::uint8_t sf = 0;
  std::int8_t tp_dbm = 0;
  std::uint8_t channel = 0;
  phy::LossReason reason = phy::LossReason::none;
  std::uint8_t flags = 0;

  bool has(std::uint8_t flag) const { return (flags & flag) != 0; }
  bool received() const { return reason == phy::LossReason::none; }
};

struct DeviceInfo {
  std::uint32_t id = 0;
  double distance_m = 0.0;
  double arrival_s = 0.0;
  bool tracked = false;
};

struct RunTrace {
  std::vector<TraceRecord> records;
  std::vector<DeviceInfo> devices;
  int n_required = 20;
  double end_s = 0.0;
  std::uint64_t seed = 0;
};

/// Full-precision CSV dump, one line per record. Byte-identical output for
/// identical traces.
void write_trace_csv(const RunTrace& trace, std::ostream& os);

}  // namespace adrsim
