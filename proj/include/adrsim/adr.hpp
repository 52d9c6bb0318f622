// Adaptive Data Rate, both halves: the device-side ADR_ACK_CNT state machine
// and the network-side SF/TP assignment over the last N received packets.
#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>

#include "adrsim/mac.hpp"
#include "adrsim/phy.hpp"

namespace adrsim::adr {

struct RadioSetting {
  phy::SpreadingFactor sf{12};
  phy::TxPower tp{14};

  friend bool operator==(const RadioSetting&, const RadioSetting&) = default;
};

struct EdAdrState {
  phy::SpreadingFactor sf{12};
  phy::TxPower tp{14};
  int adr_ack_cnt = 0;
  int adr_ack_limit = 64;
  int adr_ack_delay = 32;

  RadioSetting setting() const { return {sf, tp}; }
};

enum class AdrStepAction : std::uint8_t { none, set_adr_ack_req, step_up_tp, step_up_sf };

struct UplinkStep {
  EdAdrState state;
  bool adr_ack_req = false;
  AdrStepAction action = AdrStepAction::none;
};

/// Device bookkeeping before each uplink attempt. The counter is bumped, the
/// ADRACKReq bit is raised from ADR_ACK_LIMIT on, and every ADR_ACK_DELAY
/// further uplinks one robustness step is taken: TP first, then SF.
UplinkStep ed_before_uplink(const EdAdrState& state);

struct DownlinkStep {
  EdAdrState state;
  bool command_applied = false;
  bool command_rejected = false;
};

DownlinkStep ed_on_downlink(const EdAdrState& state, const mac::DownlinkFrame& frame);

struct NetAdrConfig {
  int n_required = 20;
  double margin_db = 10.0;
  /// Demodulation floor SNR for SF7..SF12.
  std::array<double, 6> required_snr_db{-7.5, -10.0, -12.5, -15.0, -17.5, -20.0};
  double step_db = 3.0;

  double required_snr(phy::SpreadingFactor sf) const {
    return required_snr_db[sf.value() - phy::kMinSf];
  }
  void validate() const;
};

/// Network-server ADR state: a bounded SNR history per device.
class NetAdrState {
public:
  explicit NetAdrState(NetAdrConfig cfg = {});

  const NetAdrConfig& config() const { return cfg_; }

  void record(std::uint32_t dev, double snr_db);
  /// Returns a new setting when the window holds N samples and the step rule
  /// moves away from `current`. Emitting a setting clears the window.
  std::optional<RadioSetting> compute(std::uint32_t dev, RadioSetting current);

  std::size_t window_size(std::uint32_t dev) const;
  const std::deque<double>* window(std::uint32_t dev) const;

private:
  NetAdrConfig cfg_;
  std::unordered_map<std::uint32_t, std::deque<double>> windows_;
};

inline void net_record(NetAdrState& state, std::uint32_t dev, double snr_db) {
  state.record(dev, snr_db);
}

inline std::optional<RadioSetting> net_compute(NetAdrState& state, std::uint32_t dev,
                                               RadioSetting current) {
  return state.compute(dev, current);
}

/// Applies the margin step rule to a window maximum, ignoring window length.
/// Exposed so that callers can evaluate the rule without mutating state.
RadioSetting apply_step_rule(double snr_max_db, RadioSetting current, const NetAdrConfig& cfg);

}  // namespace adrsim::adr
