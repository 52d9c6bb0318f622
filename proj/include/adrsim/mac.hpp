// LoRaWAN Class A MAC: frames, receive windows, confirmed-traffic
// retransmission and duty-cycle bookkeeping for devices and the gateway.
#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>

#include "adrsim/phy.hpp"
#include "adrsim/rng.hpp"

namespace adrsim::mac {

inline constexpr double kRx1Delay = 1.0;
inline constexpr double kRx2Delay = 2.0;
inline constexpr int kEmptyDownlinkBytes = 12;  // MHDR + FHDR + MIC
inline constexpr int kLinkAdrReqBytes = 5;

struct UplinkFrame {
  std::uint32_t dev_id = 0;
  std::uint32_t fcnt = 0;
  bool confirmed = false;
  bool adr_enabled = true;
  bool adr_ack_req = false;
  int payload_bytes = 20;
};

/// LinkADRReq payload. Values are carried raw so that a device can reject an
/// out-of-domain command.
struct LinkAdrCommand {
  int sf = 12;
  int tx_power_dbm = 14;

  bool valid() const { return phy::SpreadingFactor::valid(sf) && phy::TxPower::valid(tx_power_dbm); }
  friend bool operator==(const LinkAdrCommand&, const LinkAdrCommand&) = default;
};

struct DownlinkFrame {
  std::uint32_t dev_id = 0;
  bool ack = false;
  std::optional<LinkAdrCommand> link_adr_cmd;

  int payload_bytes() const {
    return kEmptyDownlinkBytes + (link_adr_cmd ? kLinkAdrReqBytes : 0);
  }
};

/// Per-sub-band off-time enforcement: after a transmission of airtime T
/// ending at t the sub-band stays closed until t + T * (1/limit - 1).
class DutyCycleTracker {
public:
  explicit DutyCycleTracker(double limit = 0.01);

  double limit() const { return limit_; }
  double earliest_next_tx(phy::SubBand band) const;
  void record(phy::SubBand band, double start_s, double airtime_s);

private:
  double limit_;
  std::map<phy::SubBand, double> earliest_;
};

double next_allowed_tx(const DutyCycleTracker& tracker, phy::SubBand band, double now);

struct WindowParams {
  double time_s = 0.0;
  phy::Channel channel = phy::Channel::uplink(0);
  phy::SpreadingFactor sf{12};
};

struct RxWindows {
  WindowParams rx1;
  WindowParams rx2;
};

RxWindows rx_window_times(double uplink_end_s, phy::Channel uplink_channel,
                          phy::SpreadingFactor uplink_sf);

struct RetxPolicy {
  int max_attempts = 8;
  double backoff_min_s = 1.0;
  double backoff_max_s = 3.0;

  void validate() const;
};

struct AckTimeoutAction {
  enum class Kind { retransmit, give_up };
  Kind kind = Kind::give_up;
  double at_s = 0.0;  // only meaningful for retransmit
};

/// Decides what a device does when the RX windows of confirmed attempt
/// `attempt` (1-based) close without an ACK. A retransmission is placed after
/// a uniform backoff and no earlier than `duty_clearance_s`.
AckTimeoutAction handle_ack_timeout(const UplinkFrame& frame, const RetxPolicy& policy,
                                    int attempt, double now_s, double duty_clearance_s,
                                    RandomStream& rng);

struct Interval {
  double start_s;
  double end_s;
};

/// The gateway's own transmissions. The radio is half-duplex, so these
/// intervals also block reception.
class GatewayRadio {
public:
  bool transmitting_during(double start_s, double end_s) const;
  void add(double start_s, double end_s);
  /// Drops intervals that ended before `t`.
  void forget_before(double t);
  const std::deque<Interval>& intervals() const { return tx_; }

private:
  std::deque<Interval> tx_;
};

enum class DownlinkWindow : std::uint8_t { rx1, rx2, dropped };

struct DownlinkDecision {
  DownlinkWindow window = DownlinkWindow::dropped;
  WindowParams params;
  double airtime_s = 0.0;
};

/// Picks RX1 when its sub-band is clear and the radio is free, otherwise RX2,
/// otherwise drops the downlink. A chosen window is committed to the tracker
/// and the radio.
DownlinkDecision gateway_schedule_downlink(const DownlinkFrame& frame, const RxWindows& windows,
                                           DutyCycleTracker& tracker, GatewayRadio& radio);

}  // namespace adrsim::mac
