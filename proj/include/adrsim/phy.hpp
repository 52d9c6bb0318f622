// LoRa physical layer: radio parameter domains, propagation, airtime and
// the collision/capture model used by the gateway receiver.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adrsim {

/// Raised when a value falls outside the domain of a radio or model type.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

namespace phy {

inline constexpr int kMinSf = 7;
inline constexpr int kMaxSf = 12;
inline constexpr std::array<int, 5> kTxPowerLevels{2, 5, 8, 11, 14};
inline constexpr double kBandwidthHz = 125000.0;

class SpreadingFactor {
public:
  explicit SpreadingFactor(int value);

  static bool valid(int value) { return value >= kMinSf && value <= kMaxSf; }

  int value() const { return value_; }
  bool is_max() const { return value_ == kMaxSf; }
  bool is_min() const { return value_ == kMinSf; }
  SpreadingFactor raised() const;
  SpreadingFactor lowered() const;

  friend auto operator<=>(const SpreadingFactor&, const SpreadingFactor&) = default;

private:
  int value_;
};

/// Transmit power restricted to the EU868 grid {2, 5, 8, 11, 14} dBm.
class TxPower {
public:
  explicit TxPower(int dbm);

  static bool valid(int dbm);

  int dbm() const { return kTxPowerLevels[level_]; }
  /// Index into kTxPowerLevels, 0 for 2 dBm.
  int level() const { return level_; }
  bool is_max() const { return level_ + 1 == static_cast<int>(kTxPowerLevels.size()); }
  bool is_min() const { return level_ == 0; }
  TxPower raised() const;
  TxPower lowered() const;

  friend auto operator<=>(const TxPower&, const TxPower&) = default;

private:
  int level_;
};

enum class SubBand : std::uint8_t { g1, g3 };

/// A LoRa channel. Uplinks use the three g1 channels (indices 0..2); the
/// RX2 downlink channel at 869.525 MHz sits in g3.
class Channel {
public:
  static constexpr int kUplinkCount = 3;

  static Channel uplink(int index);
  static Channel rx2();
  static Channel from_frequency(double center_hz);

  double center_hz() const;
  double bandwidth_hz() const { return kBandwidthHz; }
  SubBand sub_band() const { return index_ < kUplinkCount ? SubBand::g1 : SubBand::g3; }
  int index() const { return index_; }

  friend bool operator==(const Channel&, const Channel&) = default;

private:
  explicit Channel(int index) : index_(index) {}
  int index_;
};

struct LinkModel {
  double d0_m = 40.0;
  double gamma = 2.08;
  double lpl_d0_db = 127.41;
  double sigma_db = 0.0;
  double mean_offset_db = 0.0;

  void validate() const;
};

/// Log-distance path loss. Throws DomainError for distances below d0.
double path_loss(double distance_m, const LinkModel& link, double shadow_sample_db);

struct AirtimeParams {
  int sf = 7;
  double bandwidth_hz = kBandwidthHz;
  int coding_rate_denominator = 5;  // 4/5
  int payload_bytes = 20;
  int preamble_symbols = 8;
  bool explicit_header = true;
  bool low_data_rate_opt = false;
};

/// Time on air in seconds (Semtech SX127x formula, CRC on).
double airtime(const AirtimeParams& p);

/// Airtime with the default modulation for a given SF and payload; low data
/// rate optimisation is enabled for SF11 and SF12.
double airtime(SpreadingFactor sf, int payload_bytes);

inline double received_power(TxPower tx, double loss_db) { return tx.dbm() - loss_db; }
inline double received_power(double tx_dbm, double loss_db) { return tx_dbm - loss_db; }

struct PhyConfig {
  /// Receiver sensitivity in dBm for SF7..SF12 at 125 kHz.
  std::array<double, 6> sensitivity_dbm{-123.0, -126.0, -129.0, -132.0, -134.5, -137.0};
  double capture_threshold_db = 6.0;
  double noise_figure_db = 6.0;
  /// When false, signals below the receiver sensitivity are never locked
  /// onto and so cannot destroy another reception.
  bool sub_sensitivity_interferes = false;

  double sensitivity(SpreadingFactor sf) const { return sensitivity_dbm[sf.value() - kMinSf]; }
  double noise_floor_dbm() const;

  void validate() const;
};

double snr(double rx_power_dbm, const PhyConfig& cfg = {});

enum class Direction : std::uint8_t { uplink, downlink };

struct Transmission {
  std::uint32_t source = 0;
  double start_s = 0.0;
  double airtime_s = 0.0;
  Channel channel = Channel::uplink(0);
  SpreadingFactor sf{7};
  TxPower tx_power{14};
  double rx_power_dbm = 0.0;
  int payload_bytes = 20;
  Direction direction = Direction::uplink;

  double end_s() const { return start_s + airtime_s; }
  bool overlaps(const Transmission& o) const {
    return start_s < o.end_s() && o.start_s < end_s();
  }
};

enum class LossReason : std::uint8_t { none, collision, under_sensitivity, gateway_busy };

struct ReceptionOutcome {
  LossReason reason = LossReason::none;

  bool received() const { return reason == LossReason::none; }
  friend bool operator==(const ReceptionOutcome&, const ReceptionOutcome&) = default;
};

std::string to_string(LossReason r);

/// Capture decision for one signal given the strongest overlapping
/// same-SF same-channel interferer (if any).
bool captures(double rx_power_dbm, double strongest_interferer_dbm, const PhyConfig& cfg);

/// Resolves a set of transmissions sharing one receiver. The result is
/// indexed like the input and does not depend on input order.
std::vector<ReceptionOutcome> resolve_receptions(std::span<const Transmission> txs,
                                                 const PhyConfig& cfg = {});

}  // namespace phy
}  // namespace adrsim
