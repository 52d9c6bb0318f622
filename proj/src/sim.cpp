#include "adrsim/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

namespace adrsim::sim {

double Position::distance() const { return std::hypot(x, y); }

Position place_device(double radius_m, RandomStream& rng) {
  const double r = radius_m * std::sqrt(rng.uniform01());
  const double theta = 2.0 * std::numbers::pi * rng.uniform01();
  return {r * std::cos(theta), r * std::sin(theta)};
}

std::vector<Position> place_devices(int n, double radius_m, RandomStream& rng) {
  if (n < 1) throw DomainError("place_devices needs at least one device");
  std::vector<Position> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(place_device(radius_m, rng));
  return out;
}

double next_uplink_time(RandomStream& rng, double mean_interarrival_s, double now_s,
                        double duty_clearance_s) {
  return std::max(now_s + rng.exponential(mean_interarrival_s), duty_clearance_s);
}

void Scenario::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw DomainError(field + ": " + why);
  };
  if (n_devices < 1) fail("n_devices", "must be at least 1");
  if (!(radius_m > 0.0)) fail("radius_m", "must be positive");
  if (device_distance_m && !(*device_distance_m > 0.0)) fail("device_distance_m", "must be positive");
  if (!(sim_duration_s > 0.0)) fail("sim_duration_s", "must be positive");
  if (!(mean_interarrival_s > 0.0)) fail("mean_interarrival_s", "must be positive");
  if (!(sigma_db >= 0.0)) fail("sigma_db", "must be non-negative");
  if (payload_bytes < 1 || payload_bytes > 255) fail("payload_bytes", "must be in 1..255");
  if (!(confirmed_fraction >= 0.0 && confirmed_fraction <= 1.0)) {
    fail("confirmed_fraction", "must be in [0, 1]");
  }
  if (!phy::SpreadingFactor::valid(sf_init)) fail("sf_init", "must be in 7..12");
  if (!phy::TxPower::valid(tp_init)) fail("tp_init", "must be one of 2, 5, 8, 11, 14");
  if (adr.n < 1) fail("adr.n", "must be at least 1");
  if (adr.ack_limit < 1) fail("adr.ack_limit", "must be at least 1");
  if (adr.ack_delay < 1) fail("adr.ack_delay", "must be at least 1");
  if (!(duty_cycle > 0.0 && duty_cycle <= 1.0)) fail("duty_cycle", "must be in (0, 1]");
  if (!(warmup_max_s >= 0.0)) fail("warmup_max_s", "must be non-negative");
  retx.validate();
  phy.validate();
  link.validate();
  for (std::size_t i = 0; i < injections.size(); ++i) {
    const auto& inj = injections[i];
    const std::string where = "injections[" + std::to_string(i) + "]";
    if (inj.time_s && !(*inj.time_s >= 0.0 && *inj.time_s < sim_duration_s)) {
      fail(where + ".time_s", "must lie within the simulated duration");
    }
    if (inj.kind == Injection::Kind::add_devices && inj.add_devices < 0) {
      fail(where + ".add_devices", "must be non-negative");
    }
  }
}

namespace {

enum class EventKind : std::uint8_t {
  injection,
  warmup_cap,
  frame_ready,
  uplink_start,
  uplink_end,
  downlink_end,
  rx_close,  // RX windows over; ACK timeout for confirmed frames
};

struct Event {
  double t;
  std::uint64_t seq;
  EventKind kind;
  std::uint32_t target;  // device id, or injection index

  bool operator>(const Event& o) const { return t != o.t ? t > o.t : seq > o.seq; }
};

struct AirEntry {
  double start;
  double end;
  double power;
  std::uint64_t tx_id;
  bool audible;
};

struct PendingDownlink {
  mac::DownlinkFrame frame;
  mac::DownlinkDecision decision;
};

struct Device {
  std::uint32_t id = 0;
  double distance_m = 0.0;
  RandomStream rng{0};
  adr::EdAdrState adr;
  double offset_db = 0.0;
  mac::DutyCycleTracker duty;
  bool tracked = false;
  bool background = false;  // present from t = 0
  bool evaluated = false;    // network ADR has seen a full window
  double arrival_s = 0.0;

  std::uint32_t fcnt = 0;
  bool confirmed = false;
  int attempt = 0;
  bool busy = false;
  bool pending_frame = false;
  bool ack_received = false;

  // Current attempt.
  std::uint64_t tx_id = 0;
  double tx_start = 0.0;
  double tx_air = 0.0;
  int channel = 0;
  phy::SpreadingFactor sf{12};
  phy::TxPower tp{14};
  double rx_power = 0.0;
  bool audible = false;
  bool adr_ack_req = false;

  std::optional<PendingDownlink> downlink;
};

}  // namespace

struct Simulator::Impl {
  Scenario sc;
  phy::LinkModel link;
  adr::NetAdrState net;
  mac::DutyCycleTracker gw_duty;
  mac::GatewayRadio gw_radio;
  std::vector<Device> devices;
  std::vector<std::optional<adr::RadioSetting>> pending_cmd;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::uint64_t seq = 0;
  std::uint64_t next_tx_id = 0;
  std::array<std::array<std::deque<AirEntry>, 6>, phy::Channel::kUplinkCount> air;
  double max_uplink_air = 0.0;
  double rx_close_delay = 0.0;
  std::vector<Injection> injections;
  std::vector<std::size_t> warmup_injections;
  std::uint32_t planned_devices = 0;
  int unsettled = 0;
  bool warmup_done = false;
  bool ran = false;
  RunTrace trace;

  explicit Impl(const Scenario& s)
      : sc((s.validate(), s)),
        net(adr::NetAdrConfig{s.adr.n, s.adr.margin_db}),
        gw_duty(s.duty_cycle) {
    link = sc.link;
    link.sigma_db = sc.sigma_db;
    max_uplink_air = phy::airtime(phy::SpreadingFactor(12), sc.payload_bytes);
    rx_close_delay = mac::kRx2Delay +
                     phy::airtime(phy::SpreadingFactor(12),
                                  mac::kEmptyDownlinkBytes + mac::kLinkAdrReqBytes);
    trace.n_required = sc.adr.n;
    trace.seed = sc.seed;
    trace.end_s = sc.sim_duration_s;
    planned_devices = static_cast<std::uint32_t>(sc.n_devices);
    for (int i = 0; i < sc.n_devices; ++i) add_device(0.0, true);
    unsettled = sc.n_devices;
    for (const auto& inj : sc.injections) schedule_injection(inj);
  }

  void push(double t, EventKind kind, std::uint32_t target) {
    queue.push(Event{t, seq++, kind, target});
  }

  void log(const TraceRecord& r, const Device* dev) {
    if (sc.trace_scope == TraceScope::tracked && dev && !dev->tracked) return;
    trace.records.push_back(r);
  }

  TraceRecord base_record(const Device& d, RecordKind kind, double now) const {
    TraceRecord r;
    r.time_s = now;
    r.kind = kind;
    r.device = d.id;
    r.fcnt = d.fcnt;
    r.attempt = static_cast<std::uint8_t>(d.attempt);
    r.sf = static_cast<std::uint8_t>(d.adr.sf.value());
    r.tp_dbm = static_cast<std::int8_t>(d.adr.tp.dbm());
    return r;
  }

  Device& add_device(double now, bool background) {
    Device d;
    d.id = static_cast<std::uint32_t>(devices.size());
    d.rng = RandomStream(derive_seed(sc.seed, d.id));
    const Position pos = place_device(sc.radius_m, d.rng);
    d.distance_m = sc.device_distance_m.value_or(pos.distance());
    d.adr.sf = phy::SpreadingFactor(sc.sf_init);
    d.adr.tp = phy::TxPower(sc.tp_init);
    d.adr.adr_ack_limit = sc.adr.ack_limit;
    d.adr.adr_ack_delay = sc.adr.ack_delay;
    d.duty = mac::DutyCycleTracker(sc.duty_cycle);
    d.background = background;
    d.tracked = !background;
    d.arrival_s = now;
    d.offset_db = sc.link.mean_offset_db;
    const double first = now + d.rng.exponential(sc.mean_interarrival_s);
    devices.push_back(std::move(d));
    pending_cmd.emplace_back();
    push(first, EventKind::frame_ready, devices.back().id);
    return devices.back();
  }

  void schedule_injection(const Injection& inj) {
    if (inj.time_s && !(*inj.time_s >= 0.0 && *inj.time_s < sc.sim_duration_s)) {
      throw DomainError("injection time outside the simulated duration");
    }
    if (inj.kind == Injection::Kind::link_change && !inj.all_devices) {
      for (auto dev : inj.devices) {
        if (dev >= planned_devices) {
          throw DomainError("link change targets unknown device " + std::to_string(dev));
        }
      }
    }
    if (inj.kind == Injection::Kind::add_devices) {
      if (inj.add_devices < 0) throw DomainError("cannot add a negative number of devices");
      planned_devices += static_cast<std::uint32_t>(inj.add_devices);
    }
    // Link-change targets are tracked from the start so that their whole
    // history lands in a tracked-scope trace.
    if (inj.kind == Injection::Kind::link_change) {
      if (inj.all_devices) {
        for (auto& d : devices) d.tracked = true;
      } else {
        for (auto dev : inj.devices) {
          if (dev < devices.size()) devices[dev].tracked = true;
        }
      }
    }
    const auto index = static_cast<std::uint32_t>(injections.size());
    injections.push_back(inj);
    if (inj.time_s) {
      push(*inj.time_s, EventKind::injection, index);
    } else {
      if (warmup_injections.empty()) push(sc.warmup_max_s, EventKind::warmup_cap, 0);
      warmup_injections.push_back(index);
    }
  }

  void end_warmup(double now) {
    if (warmup_done) return;
    warmup_done = true;
    for (auto idx : warmup_injections) push(now, EventKind::injection, static_cast<std::uint32_t>(idx));
  }

  void apply_injection(const Injection& inj, double now) {
    if (inj.kind == Injection::Kind::add_devices) {
      for (int i = 0; i < inj.add_devices; ++i) {
        Device& d = add_device(now, false);
        d.tracked = true;
        TraceRecord r = base_record(d, RecordKind::device_arrival, now);
        r.start_s = now;
        r.value = d.distance_m;
        log(r, nullptr);
      }
      return;
    }
    auto shift = [&](Device& d) {
      d.offset_db += inj.delta_db;
      TraceRecord r = base_record(d, RecordKind::link_change, now);
      r.start_s = now;
      r.value = inj.delta_db;
      log(r, nullptr);
    };
    if (inj.all_devices) {
      for (auto& d : devices) shift(d);
    } else {
      for (auto dev : inj.devices) {
        if (dev >= devices.size()) throw DomainError("link change targets unknown device");
        shift(devices[dev]);
      }
    }
  }

  double loss_to(Device& d) {
    phy::LinkModel l = link;
    l.mean_offset_db = d.offset_db;
    const double shadow = sc.sigma_db > 0.0 ? d.rng.normal(0.0, sc.sigma_db) : 0.0;
    // Devices placed inside the reference distance use the loss at d0.
    return phy::path_loss(std::max(d.distance_m, l.d0_m), l, shadow);
  }

  void begin_frame(Device& d, double now) {
    ++d.fcnt;
    d.attempt = 1;
    d.confirmed = d.rng.bernoulli(sc.confirmed_fraction);
    d.ack_received = false;
    d.busy = true;
    push(mac::next_allowed_tx(d.duty, phy::SubBand::g1, now), EventKind::uplink_start, d.id);
  }

  void on_frame_ready(Device& d, double now) {
    if (d.busy) {
      d.pending_frame = true;
      return;
    }
    begin_frame(d, now);
  }

  void on_uplink_start(Device& d, double now) {
    const auto step = adr::ed_before_uplink(d.adr);
    d.adr = step.state;
    d.adr_ack_req = step.adr_ack_req;
    if (step.action == adr::AdrStepAction::step_up_tp || step.action == adr::AdrStepAction::step_up_sf) {
      TraceRecord r = base_record(d, RecordKind::adr_step, now);
      r.start_s = now;
      log(r, &d);
    }

    d.channel = static_cast<int>(d.rng.index(phy::Channel::kUplinkCount));
    d.sf = d.adr.sf;
    d.tp = d.adr.tp;
    d.tx_start = now;
    d.tx_air = phy::airtime(d.sf, sc.payload_bytes);
    d.rx_power = phy::received_power(d.tp, loss_to(d));
    d.audible = d.rx_power >= sc.phy.sensitivity(d.sf);
    d.tx_id = next_tx_id++;
    air[static_cast<std::size_t>(d.channel)][static_cast<std::size_t>(d.sf.value() - phy::kMinSf)]
        .push_back(AirEntry{now, now + d.tx_air, d.rx_power, d.tx_id, d.audible});
    d.duty.record(phy::SubBand::g1, now, d.tx_air);

    if (d.attempt == 1) {
      push(now + d.rng.exponential(sc.mean_interarrival_s), EventKind::frame_ready, d.id);
    }
    push(now + d.tx_air, EventKind::uplink_end, d.id);
  }

  phy::LossReason resolve(const Device& d, double now) {
    if (!d.audible) return phy::LossReason::under_sensitivity;
    if (gw_radio.transmitting_during(d.tx_start, now)) return phy::LossReason::gateway_busy;
    auto& bucket =
        air[static_cast<std::size_t>(d.channel)][static_cast<std::size_t>(d.sf.value() - phy::kMinSf)];
    while (!bucket.empty() && bucket.front().end < now - max_uplink_air) bucket.pop_front();
    double strongest = -std::numeric_limits<double>::infinity();
    for (const auto& e : bucket) {
      if (e.tx_id == d.tx_id) continue;
      if (!(e.start < now && d.tx_start < e.end)) continue;
      if (!e.audible && !sc.phy.sub_sensitivity_interferes) continue;
      strongest = std::max(strongest, e.power);
    }
    return phy::captures(d.rx_power, strongest, sc.phy) ? phy::LossReason::none
                                                       : phy::LossReason::collision;
  }

  void on_uplink_end(Device& d, double now) {
    const auto reason = resolve(d, now);
    const double snr = phy::snr(d.rx_power, sc.phy);

    TraceRecord r = base_record(d, RecordKind::uplink, now);
    r.start_s = d.tx_start;
    r.airtime_s = d.tx_air;
    r.sf = static_cast<std::uint8_t>(d.sf.value());
    r.tp_dbm = static_cast<std::int8_t>(d.tp.dbm());
    r.channel = static_cast<std::uint8_t>(d.channel);
    r.value = d.rx_power;
    r.snr_db = snr;
    r.reason = reason;
    if (d.confirmed) r.flags |= record_flag::confirmed;
    if (d.adr_ack_req) r.flags |= record_flag::adr_ack_req;
    log(r, &d);

    push(now + rx_close_delay, EventKind::rx_close, d.id);
    if (reason != phy::LossReason::none) return;

    net.record(d.id, snr);
    auto& cmd = pending_cmd[d.id];
    if (!cmd && net.window_size(d.id) >= static_cast<std::size_t>(sc.adr.n)) {
      if (!d.evaluated) {
        d.evaluated = true;
        if (d.background && --unsettled == 0 && !warmup_injections.empty()) end_warmup(now);
      }
      cmd = net.compute(d.id, adr::RadioSetting{d.sf, d.tp});
      if (cmd) {
        TraceRecord c = base_record(d, RecordKind::net_command, now);
        c.sf = static_cast<std::uint8_t>(cmd->sf.value());
        c.tp_dbm = static_cast<std::int8_t>(cmd->tp.dbm());
        log(c, &d);
      }
    }

    if (!(d.confirmed || d.adr_ack_req || cmd)) return;
    mac::DownlinkFrame frame;
    frame.dev_id = d.id;
    frame.ack = d.confirmed;
    if (cmd) frame.link_adr_cmd = mac::LinkAdrCommand{cmd->sf.value(), cmd->tp.dbm()};

    gw_radio.forget_before(now - 10.0);
    const auto windows = mac::rx_window_times(now, phy::Channel::uplink(d.channel), d.sf);
    const auto decision = mac::gateway_schedule_downlink(frame, windows, gw_duty, gw_radio);
    if (decision.window == mac::DownlinkWindow::dropped) {
      TraceRecord dr = base_record(d, RecordKind::downlink_dropped, now);
      if (frame.ack) dr.flags |= record_flag::ack;
      if (frame.link_adr_cmd) dr.flags |= record_flag::link_adr;
      log(dr, &d);
      return;
    }
    cmd.reset();
    d.downlink = PendingDownlink{frame, decision};
    push(decision.params.time_s + decision.airtime_s, EventKind::downlink_end, d.id);
  }

  void on_downlink_end(Device& d, double now) {
    if (!d.downlink) return;
    const PendingDownlink dl = *d.downlink;
    d.downlink.reset();
    const double rx = phy::received_power(static_cast<double>(sc.gateway_tp_dbm), loss_to(d));
    const bool heard = rx >= sc.phy.sensitivity(dl.decision.params.sf);

    TraceRecord r = base_record(d, RecordKind::downlink, now);
    r.start_s = dl.decision.params.time_s;
    r.airtime_s = dl.decision.airtime_s;
    r.sf = static_cast<std::uint8_t>(dl.decision.params.sf.value());
    r.tp_dbm = static_cast<std::int8_t>(sc.gateway_tp_dbm);
    r.channel = static_cast<std::uint8_t>(dl.decision.params.channel.index());
    r.value = rx;
    r.snr_db = phy::snr(rx, sc.phy);
    r.reason = heard ? phy::LossReason::none : phy::LossReason::under_sensitivity;
    if (dl.frame.ack) r.flags |= record_flag::ack;
    if (dl.frame.link_adr_cmd) r.flags |= record_flag::link_adr;
    if (dl.decision.window == mac::DownlinkWindow::rx2) r.flags |= record_flag::rx2;
    log(r, &d);
    if (!heard) return;

    const auto step = adr::ed_on_downlink(d.adr, dl.frame);
    d.adr = step.state;
    if (dl.frame.ack) d.ack_received = true;
    if (step.command_applied) {
      TraceRecord c = base_record(d, RecordKind::adr_command, now);
      c.start_s = now;
      log(c, &d);
    }
  }

  void finish_frame(Device& d, double now) {
    d.busy = false;
    if (d.pending_frame) {
      d.pending_frame = false;
      begin_frame(d, now);
    }
  }

  void on_rx_close(Device& d, double now) {
    if (d.confirmed && !d.ack_received) {
      mac::UplinkFrame frame{d.id, d.fcnt, true, true, d.adr_ack_req, sc.payload_bytes};
      const auto action = mac::handle_ack_timeout(
          frame, sc.retx, d.attempt, now, mac::next_allowed_tx(d.duty, phy::SubBand::g1, now), d.rng);
      if (action.kind == mac::AckTimeoutAction::Kind::retransmit) {
        ++d.attempt;
        push(action.at_s, EventKind::uplink_start, d.id);
        return;
      }
    }
    finish_frame(d, now);
  }

  RunTrace run() {
    if (ran) throw std::logic_error("Simulator::run called twice");
    ran = true;
    const double horizon = sc.sim_duration_s;
    while (!queue.empty()) {
      const Event ev = queue.top();
      queue.pop();
      const bool starts_activity = ev.kind == EventKind::frame_ready ||
                                   ev.kind == EventKind::uplink_start ||
                                   ev.kind == EventKind::injection ||
                                   ev.kind == EventKind::warmup_cap;
      if (ev.t >= horizon && starts_activity) continue;
      switch (ev.kind) {
        case EventKind::injection: apply_injection(injections[ev.target], ev.t); break;
        case EventKind::warmup_cap: end_warmup(ev.t); break;
        case EventKind::frame_ready: on_frame_ready(devices[ev.target], ev.t); break;
        case EventKind::uplink_start: on_uplink_start(devices[ev.target], ev.t); break;
        case EventKind::uplink_end: on_uplink_end(devices[ev.target], ev.t); break;
        case EventKind::downlink_end: on_downlink_end(devices[ev.target], ev.t); break;
        case EventKind::rx_close: on_rx_close(devices[ev.target], ev.t); break;
      }
    }
    trace.devices.reserve(devices.size());
    for (const auto& d : devices) {
      trace.devices.push_back(DeviceInfo{d.id, d.distance_m, d.arrival_s, d.tracked});
    }
    return std::move(trace);
  }
};

Simulator::Simulator(const Scenario& scenario) : impl_(std::make_unique<Impl>(scenario)) {}
Simulator::~Simulator() = default;

void Simulator::inject_link_change(std::uint32_t device, double delta_db, double at_s) {
  Injection inj;
  inj.kind = Injection::Kind::link_change;
  inj.time_s = at_s;
  inj.devices = {device};
  inj.delta_db = delta_db;
  impl_->schedule_injection(inj);
}

void Simulator::inject_new_devices(int k, double at_s) {
  Injection inj;
  inj.kind = Injection::Kind::add_devices;
  inj.time_s = at_s;
  inj.add_devices = k;
  impl_->schedule_injection(inj);
}

RunTrace Simulator::run() { return impl_->run(); }

RunTrace run(const Scenario& scenario) {
  if (scenario.sim_duration_s == 0.0) {
    Scenario probe = scenario;
    probe.sim_duration_s = 1.0;
    probe.injections.clear();
    probe.validate();
    RunTrace empty;
    empty.n_required = scenario.adr.n;
    empty.seed = scenario.seed;
    return empty;
  }
  Simulator sim(scenario);
  return sim.run();
}

}  // namespace adrsim::sim
