#include "adrsim/mac.hpp"

#include <algorithm>

namespace adrsim::mac {

DutyCycleTracker::DutyCycleTracker(double limit) : limit_(limit) {
  if (!(limit > 0.0 && limit <= 1.0)) throw DomainError("duty-cycle limit must be in (0, 1]");
}

double DutyCycleTracker::earliest_next_tx(phy::SubBand band) const {
  auto it = earliest_.find(band);
  return it == earliest_.end() ? 0.0 : it->second;
}

void DutyCycleTracker::record(phy::SubBand band, double start_s, double airtime_s) {
  const double end = start_s + airtime_s;
  const double off = airtime_s * (1.0 / limit_ - 1.0);
  double& slot = earliest_[band];
  slot = std::max(slot, end + off);
}

double next_allowed_tx(const DutyCycleTracker& tracker, phy::SubBand band, double now) {
  return std::max(now, tracker.earliest_next_tx(band));
}

RxWindows rx_window_times(double uplink_end_s, phy::Channel uplink_channel,
                          phy::SpreadingFactor uplink_sf) {
  RxWindows w;
  w.rx1 = {uplink_end_s + kRx1Delay, uplink_channel, uplink_sf};
  w.rx2 = {uplink_end_s + kRx2Delay, phy::Channel::rx2(), phy::SpreadingFactor(12)};
  return w;
}

void RetxPolicy::validate() const {
  if (max_attempts < 1) throw DomainError("max_attempts must be at least 1");
  if (!(backoff_min_s >= 0.0 && backoff_max_s >= backoff_min_s)) {
    throw DomainError("retransmission backoff window must satisfy 0 <= min <= max");
  }
}

AckTimeoutAction handle_ack_timeout(const UplinkFrame& frame, const RetxPolicy& policy,
                                    int attempt, double now_s, double duty_clearance_s,
                                    RandomStream& rng) {
  if (!frame.confirmed) {
    throw std::invalid_argument("ack timeout handled for an unconfirmed frame");
  }
  if (attempt >= policy.max_attempts) return {AckTimeoutAction::Kind::give_up, now_s};
  const double backoff = rng.uniform(policy.backoff_min_s, policy.backoff_max_s);
  return {AckTimeoutAction::Kind::retransmit, std::max(now_s + backoff, duty_clearance_s)};
}

bool GatewayRadio::transmitting_during(double start_s, double end_s) const {
  return std::any_of(tx_.begin(), tx_.end(), [&](const Interval& iv) {
    return iv.start_s < end_s && start_s < iv.end_s;
  });
}

void GatewayRadio::add(double start_s, double end_s) {
  auto it = std::upper_bound(tx_.begin(), tx_.end(), start_s,
                             [](double s, const Interval& iv) { return s < iv.start_s; });
  tx_.insert(it, Interval{start_s, end_s});
}

void GatewayRadio::forget_before(double t) {
  // Intervals are sorted by start and cannot overlap, so ends are sorted too.
  while (!tx_.empty() && tx_.front().end_s < t) tx_.pop_front();
}

DownlinkDecision gateway_schedule_downlink(const DownlinkFrame& frame, const RxWindows& windows,
                                           DutyCycleTracker& tracker, GatewayRadio& radio) {
  for (const WindowParams* w : {&windows.rx1, &windows.rx2}) {
    const double air = phy::airtime(w->sf, frame.payload_bytes());
    const auto band = w->channel.sub_band();
    if (tracker.earliest_next_tx(band) > w->time_s) continue;
    if (radio.transmitting_during(w->time_s, w->time_s + air)) continue;
    tracker.record(band, w->time_s, air);
    radio.add(w->time_s, w->time_s + air);
    return {w == &windows.rx1 ? DownlinkWindow::rx1 : DownlinkWindow::rx2, *w, air};
  }
  return {};
}

}  // namespace adrsim::mac
