// Independent oracles and trace auditors shared by the unit and acceptance
// tests. Nothing here calls into the code it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "adrsim/trace.hpp"

namespace testsupport {

// LoRa time on air, counted in symbols with integer arithmetic and converted
// once at the end.
inline double airtime_oracle(int sf, int payload, bool low_dr, int preamble = 8, int cr_den = 5,
                             double bw = 125000.0) {
  const int de = low_dr ? 1 : 0;
  const long num = 8L * payload - 4L * sf + 28 + 16;
  const long den = 4L * (sf - 2 * de);
  long blocks = 0;
  if (num > 0) blocks = (num + den - 1) / den;
  const long payload_syms = 8 + blocks * cr_den;
  // 4.25 symbols = 17 quarter symbols.
  const long quarter_syms = 4L * preamble + 17 + 4L * payload_syms;
  return static_cast<double>(quarter_syms) * static_cast<double>(1L << sf) / (4.0 * bw);
}

struct OracleSetting {
  int sf;
  int tp;
  bool operator==(const OracleSetting&) const = default;
};

// Enumerates every reachable (sf, tp) and keeps the one that spends the most
// adaptation steps without exceeding the budget. Downward moves may lower TP
// only once SF sits at 7; upward moves touch TP only.
inline std::optional<OracleSetting> net_compute_oracle(const std::vector<double>& window, int n_required,
                                                       OracleSetting current, double margin_db = 10.0) {
  if (static_cast<int>(window.size()) < n_required) return std::nullopt;
  static const double required[6] = {-7.5, -10.0, -12.5, -15.0, -17.5, -20.0};
  static const int levels[5] = {2, 5, 8, 11, 14};
  auto level_of = [](int tp) {
    for (int i = 0; i < 5; ++i) {
      if (levels[i] == tp) return i;
    }
    return -1;
  };
  const double best = *std::max_element(window.begin(), window.end());
  const double margin = best - required[current.sf - 7] - margin_db;
  const int steps = static_cast<int>(std::floor(margin / 3.0));
  const int cur_level = level_of(current.tp);

  OracleSetting chosen = current;
  int chosen_cost = 0;
  for (int sf = 7; sf <= 12; ++sf) {
    for (int l = 0; l < 5; ++l) {
      int cost = 0;
      if (steps >= 0) {
        if (sf > current.sf || l > cur_level) continue;
        if (l < cur_level && sf != 7) continue;
        cost = (current.sf - sf) + (cur_level - l);
        if (cost > steps) continue;
      } else {
        if (sf != current.sf || l < cur_level) continue;
        cost = l - cur_level;
        if (cost > -steps) continue;
      }
      if (cost > chosen_cost) {
        chosen_cost = cost;
        chosen = {sf, levels[l]};
      }
    }
  }
  if (chosen == current) return std::nullopt;
  return chosen;
}

struct AuditResult {
  bool ok = true;
  std::string message;

  void fail(std::string m) {
    if (ok) message = std::move(m);
    ok = false;
  }
};

// Every transmission, per transmitter and sub-band, starts no earlier than
// the off-time left by the previous one. Downlinks on channel index 3 use g3.
inline AuditResult audit_duty_cycle(const adrsim::RunTrace& trace, double limit = 0.01) {
  AuditResult out;
  const double factor = 1.0 / limit - 1.0;
  // key: (transmitter, band); transmitter UINT32_MAX is the gateway.
  std::map<std::pair<std::uint32_t, int>, std::vector<std::pair<double, double>>> tx;
  for (const auto& r : trace.records) {
    if (r.kind == adrsim::RecordKind::uplink) {
      tx[{r.device, 1}].push_back({r.start_s, r.airtime_s});
    } else if (r.kind == adrsim::RecordKind::downlink) {
      tx[{UINT32_MAX, r.channel >= 3 ? 3 : 1}].push_back({r.start_s, r.airtime_s});
    }
  }
  for (auto& [key, list] : tx) {
    std::sort(list.begin(), list.end());
    for (std::size_t i = 1; i < list.size(); ++i) {
      const auto [s0, a0] = list[i - 1];
      const double bound = s0 + a0 + a0 * factor;
      if (list[i].first < bound - 1e-9) {
        out.fail("transmitter " + std::to_string(key.first) + " band " + std::to_string(key.second) +
                 " sent at " + std::to_string(list[i].first) + " before " + std::to_string(bound));
        return out;
      }
    }
  }
  return out;
}

// Attempts of a frame are numbered 1..k with no gaps or repeats, unconfirmed
// frames have a single attempt and no frame exceeds max_attempts.
inline AuditResult audit_attempts(const adrsim::RunTrace& trace, int max_attempts) {
  AuditResult out;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<int>> attempts;
  std::map<std::pair<std::uint32_t, std::uint32_t>, bool> confirmed;
  for (const auto& r : trace.records) {
    if (r.kind != adrsim::RecordKind::uplink) continue;
    attempts[{r.device, r.fcnt}].push_back(r.attempt);
    confirmed[{r.device, r.fcnt}] = r.has(adrsim::record_flag::confirmed);
  }
  for (const auto& [key, list] : attempts) {
    const std::string id = std::to_string(key.first) + "/" + std::to_string(key.second);
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i] != static_cast<int>(i) + 1) out.fail("frame " + id + " attempts out of sequence");
    }
    if (static_cast<int>(list.size()) > max_attempts) out.fail("frame " + id + " exceeds max attempts");
    if (!confirmed[key] && list.size() != 1) out.fail("unconfirmed frame " + id + " repeated");
  }
  return out;
}

// A downlink starts exactly 1 s or 2 s after the end of the latest uplink
// of its device, and no uplink the gateway received overlaps a gateway
// transmission.
inline AuditResult audit_downlinks(const adrsim::RunTrace& trace) {
  AuditResult out;
  std::map<std::uint32_t, double> last_uplink_end;
  std::vector<std::pair<double, double>> gw_tx;
  for (const auto& r : trace.records) {
    if (r.kind == adrsim::RecordKind::uplink) {
      last_uplink_end[r.device] = r.start_s + r.airtime_s;
    } else if (r.kind == adrsim::RecordKind::downlink) {
      auto it = last_uplink_end.find(r.device);
      if (it == last_uplink_end.end()) {
        out.fail("downlink without an uplink for device " + std::to_string(r.device));
        continue;
      }
      const double d = r.start_s - it->second;
      if (std::abs(d - 1.0) > 1e-6 && std::abs(d - 2.0) > 1e-6) {
        out.fail("downlink outside RX windows for device " + std::to_string(r.device));
      }
      if (r.time_s < it->second) out.fail("downlink logged before its uplink ended");
      gw_tx.push_back({r.start_s, r.start_s + r.airtime_s});
    }
  }
  std::sort(gw_tx.begin(), gw_tx.end());
  for (const auto& r : trace.records) {
    if (r.kind != adrsim::RecordKind::uplink || !r.received()) continue;
    const double s = r.start_s, e = r.start_s + r.airtime_s;
    auto it = std::lower_bound(gw_tx.begin(), gw_tx.end(), std::make_pair(e, e));
    while (it != gw_tx.begin()) {
      --it;
      if (it->second <= s) {
        if (it->second + 10.0 < s) break;
        continue;
      }
      if (it->first < e) {
        out.fail("uplink received while the gateway transmitted");
        break;
      }
    }
  }
  return out;
}

inline AuditResult audit_timestamps(const adrsim::RunTrace& trace) {
  AuditResult out;
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    if (trace.records[i].time_s < trace.records[i - 1].time_s) {
      out.fail("trace time goes backwards at record " + std::to_string(i));
      break;
    }
  }
  return out;
}

}  // namespace testsupport
