#include "adrsim/adr.hpp"

#include <algorithm>
#include <cmath>

namespace adrsim::adr {

UplinkStep ed_before_uplink(const EdAdrState& state) {
  UplinkStep out{state};
  EdAdrState& s = out.state;
  ++s.adr_ack_cnt;
  out.adr_ack_req = s.adr_ack_cnt >= s.adr_ack_limit;

  const int past_limit = s.adr_ack_cnt - s.adr_ack_limit;
  if (past_limit > 0 && past_limit % s.adr_ack_delay == 0) {
    if (!s.tp.is_max()) {
      s.tp = s.tp.raised();
      out.action = AdrStepAction::step_up_tp;
    } else if (!s.sf.is_max()) {
      s.sf = s.sf.raised();
      out.action = AdrStepAction::step_up_sf;
    }
  }
  return out;
}

DownlinkStep ed_on_downlink(const EdAdrState& state, const mac::DownlinkFrame& frame) {
  DownlinkStep out{state};
  out.state.adr_ack_cnt = 0;
  if (frame.link_adr_cmd) {
    if (frame.link_adr_cmd->valid()) {
      out.state.sf = phy::SpreadingFactor(frame.link_adr_cmd->sf);
      out.state.tp = phy::TxPower(frame.link_adr_cmd->tx_power_dbm);
      out.command_applied = true;
    } else {
      out.command_rejected = true;
    }
  }
  return out;
}

void NetAdrConfig::validate() const {
  if (n_required < 1) throw DomainError("ADR window size N must be at least 1");
  if (!(step_db > 0.0)) throw DomainError("ADR step size must be positive");
}

NetAdrState::NetAdrState(NetAdrConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void NetAdrState::record(std::uint32_t dev, double snr_db) {
  auto& w = windows_[dev];
  w.push_back(snr_db);
  while (w.size() > static_cast<std::size_t>(cfg_.n_required)) w.pop_front();
}

RadioSetting apply_step_rule(double snr_max_db, RadioSetting current, const NetAdrConfig& cfg) {
  const double margin = snr_max_db - cfg.required_snr(current.sf) - cfg.margin_db;
  int n_step = static_cast<int>(std::floor(margin / cfg.step_db));
  RadioSetting next = current;
  while (n_step > 0 && !next.sf.is_min()) {
    next.sf = next.sf.lowered();
    --n_step;
  }
  while (n_step > 0 && !next.tp.is_min()) {
    next.tp = next.tp.lowered();
    --n_step;
  }
  while (n_step < 0 && !next.tp.is_max()) {
    next.tp = next.tp.raised();
    ++n_step;
  }
  return next;
}

std::optional<RadioSetting> NetAdrState::compute(std::uint32_t dev, RadioSetting current) {
  auto it = windows_.find(dev);
  if (it == windows_.end() || it->second.size() < static_cast<std::size_t>(cfg_.n_required)) {
    return std::nullopt;
  }
  const double snr_max = *std::max_element(it->second.begin(), it->second.end());
  const RadioSetting next = apply_step_rule(snr_max, current, cfg_);
  if (next == current) return std::nullopt;
  it->second.clear();
  return next;
}

std::size_t NetAdrState::window_size(std::uint32_t dev) const {
  auto it = windows_.find(dev);
  return it == windows_.end() ? 0 : it->second.size();
}

const std::deque<double>* NetAdrState::window(std::uint32_t dev) const {
  auto it = windows_.find(dev);
  return it == windows_.end() ? nullptr : &it->second;
}

}  // namespace adrsim::adr
