#include "adrsim/phy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adrsim::phy {

namespace {

constexpr std::array<double, 4> kChannelHz{868.1e6, 868.3e6, 868.5e6, 869.525e6};

}  // namespace

SpreadingFactor::SpreadingFactor(int value) : value_(value) {
  if (!valid(value)) {
    throw DomainError("spreading factor " + std::to_string(value) + " outside 7..12");
  }
}

SpreadingFactor SpreadingFactor::raised() const {
  return is_max() ? *this : SpreadingFactor(value_ + 1);
}

SpreadingFactor SpreadingFactor::lowered() const {
  return is_min() ? *this : SpreadingFactor(value_ - 1);
}

bool TxPower::valid(int dbm) {
  return std::find(kTxPowerLevels.begin(), kTxPowerLevels.end(), dbm) != kTxPowerLevels.end();
}

TxPower::TxPower(int dbm) {
  auto it = std::find(kTxPowerLevels.begin(), kTxPowerLevels.end(), dbm);
  if (it == kTxPowerLevels.end()) {
    throw DomainError("transmit power " + std::to_string(dbm) +
                      " dBm not in {2, 5, 8, 11, 14}");
  }
  level_ = static_cast<int>(it - kTxPowerLevels.begin());
}

TxPower TxPower::raised() const {
  return is_max() ? *this : TxPower(kTxPowerLevels[level_ + 1]);
}

TxPower TxPower::lowered() const {
  return is_min() ? *this : TxPower(kTxPowerLevels[level_ - 1]);
}

Channel Channel::uplink(int index) {
  if (index < 0 || index >= kUplinkCount) {
    throw DomainError("uplink channel index " + std::to_string(index) + " outside 0..2");
  }
  return Channel(index);
}

Channel Channel::rx2() { return Channel(kUplinkCount); }

Channel Channel::from_frequency(double center_hz) {
  for (std::size_t i = 0; i < kChannelHz.size(); ++i) {
    if (std::abs(kChannelHz[i] - center_hz) < 1.0) return Channel(static_cast<int>(i));
  }
  throw DomainError("frequency " + std::to_string(center_hz) + " Hz is not a known channel");
}

double Channel::center_hz() const { return kChannelHz[static_cast<std::size_t>(index_)]; }

void LinkModel::validate() const {
  if (!(d0_m > 0.0)) throw DomainError("link model d0 must be positive");
  if (!(sigma_db >= 0.0)) throw DomainError("link model sigma must be non-negative");
}

double path_loss(double distance_m, const LinkModel& link, double shadow_sample_db) {
  if (!(distance_m >= link.d0_m)) {
    throw DomainError("distance " + std::to_string(distance_m) +
                      " m is below the reference distance");
  }
  return link.lpl_d0_db + 10.0 * link.gamma * std::log10(distance_m / link.d0_m) +
         shadow_sample_db + link.mean_offset_db;
}

double airtime(const AirtimeParams& p) {
  const double t_sym = std::ldexp(1.0, p.sf) / p.bandwidth_hz;
  const int ih = p.explicit_header ? 0 : 1;
  const int de = p.low_data_rate_opt ? 1 : 0;
  const double num = 8.0 * p.payload_bytes - 4.0 * p.sf + 28 + 16 - 20 * ih;
  const double den = 4.0 * (p.sf - 2 * de);
  const double n_payload =
      8.0 + std::max(std::ceil(num / den) * p.coding_rate_denominator, 0.0);
  return (p.preamble_symbols + 4.25) * t_sym + n_payload * t_sym;
}

double airtime(SpreadingFactor sf, int payload_bytes) {
  AirtimeParams p;
  p.sf = sf.value();
  p.payload_bytes = payload_bytes;
  p.low_data_rate_opt = sf.value() >= 11;
  return airtime(p);
}

double PhyConfig::noise_floor_dbm() const {
  return -174.0 + 10.0 * std::log10(kBandwidthHz) + noise_figure_db;
}

void PhyConfig::validate() const {
  if (!(capture_threshold_db >= 0.0)) throw DomainError("capture threshold must be >= 0 dB");
  for (std::size_t i = 1; i < sensitivity_dbm.size(); ++i) {
    if (sensitivity_dbm[i] > sensitivity_dbm[i - 1]) {
      throw DomainError("sensitivity must not increase with spreading factor");
    }
  }
}

double snr(double rx_power_dbm, const PhyConfig& cfg) {
  return rx_power_dbm - cfg.noise_floor_dbm();
}

std::string to_string(LossReason r) {
  switch (r) {
    case LossReason::none: return "none";
    case LossReason::collision: return "collision";
    case LossReason::under_sensitivity: return "under_sensitivity";
    case LossReason::gateway_busy: return "gateway_busy";
  }
  return "unknown";
}

bool captures(double rx_power_dbm, double strongest_interferer_dbm, const PhyConfig& cfg) {
  return rx_power_dbm - strongest_interferer_dbm >= cfg.capture_threshold_db;
}

std::vector<ReceptionOutcome> resolve_receptions(std::span<const Transmission> txs,
                                                 const PhyConfig& cfg) {
  std::vector<ReceptionOutcome> out(txs.size());
  std::vector<bool> audible(txs.size());
  for (std::size_t i = 0; i < txs.size(); ++i) {
    audible[i] = txs[i].rx_power_dbm >= cfg.sensitivity(txs[i].sf);
  }
  for (std::size_t i = 0; i < txs.size(); ++i) {
    if (!audible[i]) {
      out[i].reason = LossReason::under_sensitivity;
      continue;
    }
    double strongest = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < txs.size(); ++j) {
      if (j == i || txs[j].sf != txs[i].sf || txs[j].channel != txs[i].channel) continue;
      if (!txs[i].overlaps(txs[j])) continue;
      if (!audible[j] && !cfg.sub_sensitivity_interferes) continue;
      strongest = std::max(strongest, txs[j].rx_power_dbm);
    }
    if (!captures(txs[i].rx_power_dbm, strongest, cfg)) out[i].reason = LossReason::collision;
  }
  return out;
}

}  // namespace adrsim::phy
