#include <cmath>
#include <vector>

#include "adrsim/metrics.hpp"
#include "adrsim/sim.hpp"
#include "doctest.h"

using namespace adrsim;
using namespace adrsim::metrics;

namespace {

TraceRecord uplink(std::uint32_t dev, std::uint32_t fcnt, double start, phy::LossReason reason,
                   int attempt = 1, bool confirmed = false, int tp = 14, double air = 0.056576) {
  TraceRecord r;
  r.kind = RecordKind::uplink;
  r.device = dev;
  r.fcnt = fcnt;
  r.start_s = start;
  r.airtime_s = air;
  r.time_s = start + air;
  r.reason = reason;
  r.attempt = static_cast<std::uint8_t>(attempt);
  r.tp_dbm = static_cast<std::int8_t>(tp);
  if (confirmed) r.flags |= record_flag::confirmed;
  return r;
}

TraceRecord anchor(std::uint32_t dev, double t, RecordKind kind = RecordKind::link_change) {
  TraceRecord r;
  r.kind = kind;
  r.device = dev;
  r.time_s = t;
  r.start_s = t;
  return r;
}

// Anchor at 1000 s, then `n` received uplinks 600 s apart for device 0, with
// a lost one and another device's traffic mixed in.
RunTrace synthetic(int n, double shift = 0.0) {
  RunTrace t;
  t.n_required = 20;
  t.records.push_back(uplink(0, 1, 400.0 + shift, phy::LossReason::none));
  t.records.push_back(anchor(0, 1000.0 + shift));
  std::uint32_t fcnt = 2;
  for (int i = 0; i < n; ++i) {
    const double s = 1000.0 + shift + 600.0 * (i + 1);
    if (i == 4) t.records.push_back(uplink(0, fcnt++, s - 300.0, phy::LossReason::collision));
    t.records.push_back(uplink(1, fcnt, s - 10.0, phy::LossReason::none));
    t.records.push_back(uplink(0, fcnt++, s, phy::LossReason::none));
  }
  TraceRecord cmd;
  cmd.kind = RecordKind::adr_command;
  cmd.device = 0;
  cmd.time_s = 1000.0 + shift + 600.0 * (n + 1);
  t.records.push_back(cmd);
  t.end_s = cmd.time_s + 10.0;
  return t;
}

}  // namespace

TEST_CASE("convergence is the N-th received uplink after the anchor") {
  const auto t = synthetic(25);
  const auto c = convergence_time(t, 0, 1000.0);
  REQUIRE(c.converged());
  CHECK(*c.converged_rx_s == doctest::Approx(1000.0 + 600.0 * 20 + 0.056576));
  CHECK(*c.minutes() == doctest::Approx((600.0 * 20 + 0.056576) / 60.0));
  REQUIRE(c.converged_applied_s);
  CHECK(*c.converged_applied_s >= *c.converged_rx_s);
}

TEST_CASE("19 receptions do not converge") {
  const auto t = synthetic(19);
  const auto c = convergence_time(t, 0, 1000.0);
  CHECK_FALSE(c.converged());
  CHECK_FALSE(c.minutes());
  CHECK_FALSE(c.converged_applied_s);
}

TEST_CASE("anchor at trace end does not converge") {
  auto t = synthetic(25);
  t.records.push_back(anchor(0, t.end_s));
  CHECK_FALSE(convergence_time(t, 0, t.end_s).converged());
}

TEST_CASE("unknown anchor or device throws") {
  const auto t = synthetic(25);
  CHECK_THROWS_AS(convergence_time(t, 0, 999.0), std::invalid_argument);
  CHECK_THROWS_AS(convergence_time(t, 7, 1000.0), std::invalid_argument);
}

TEST_CASE("convergence is translation invariant") {
  for (double shift : {0.0, 123.25, 86400.0 * 3}) {
    const auto t = synthetic(25, shift);
    const auto c = convergence_time(t, 0, 1000.0 + shift);
    REQUIRE(c.converged());
    CHECK(*c.minutes() == doctest::Approx((600.0 * 20 + 0.056576) / 60.0).epsilon(1e-9));
  }
}

TEST_CASE("lone device on a perfect link converges near 200 minutes") {
  sim::Scenario s;
  s.n_devices = 1;
  s.device_distance_m = 100.0;
  s.sim_duration_s = 3 * sim::kDay;
  s.sf_init = 7;
  s.tp_init = 14;
  s.seed = 3;
  sim::Simulator simulator(s);
  simulator.inject_link_change(0, 0.0, 0.5 * sim::kDay);
  const auto t = simulator.run();
  const auto c = convergence_time(t, 0, 0.5 * sim::kDay);
  REQUIRE(c.converged());
  // 20 exponential gaps of 600 s: mean 200 min, sd about 45 min
  CHECK(*c.minutes() > 80.0);
  CHECK(*c.minutes() < 350.0);
}

TEST_CASE("energy of uplink attempts") {
  RunTrace t;
  t.records.push_back(uplink(0, 1, 10.0, phy::LossReason::none));
  auto e = energy(t, 0, {0.0, 100.0});
  CHECK(e.joules * 1000.0 == doctest::Approx(8.215).epsilon(1e-3));
  CHECK(e.joules == doctest::Approx(0.056576 * 0.044 * 3.3));
  CHECK(e.transmissions == 1);

  CHECK(energy(t, 0, {20.0, 100.0}).joules == 0.0);
  CHECK(energy(t, 1, {0.0, 100.0}).joules == 0.0);

  t.records.push_back(uplink(0, 2, 50.0, phy::LossReason::collision));
  CHECK(energy(t, 0, {0.0, 100.0}).joules == doctest::Approx(2 * e.joules));

  // additive over disjoint intervals, and lower power costs less
  t.records.push_back(uplink(0, 3, 70.0, phy::LossReason::none, 1, false, 2, 1.318912));
  const double whole = energy(t, 0, {0.0, 100.0}).joules;
  const double parts = energy(t, 0, {0.0, 40.0}).joules + energy(t, 0, {40.0, 100.0}).joules;
  CHECK(whole == doctest::Approx(parts));
  CHECK(energy(t, 0, {60.0, 100.0}).joules == doctest::Approx(1.318912 * 0.024 * 3.3));

  CHECK_THROWS_AS(EnergyModel{}.current_a(10), std::invalid_argument);
}

TEST_CASE("loss breakdown partitions generated frames") {
  RunTrace t;
  using R = phy::LossReason;
  t.records = {
      uplink(0, 1, 10.0, R::none),
      uplink(0, 2, 20.0, R::collision),
      uplink(0, 3, 30.0, R::under_sensitivity),
      uplink(0, 4, 40.0, R::gateway_busy),
      // confirmed, lost twice then received
      uplink(0, 5, 50.0, R::collision, 1, true),
      uplink(0, 5, 55.0, R::collision, 2, true),
      uplink(0, 5, 60.0, R::none, 3, true),
      // confirmed, never received
      uplink(0, 6, 70.0, R::collision, 1, true),
      uplink(0, 6, 75.0, R::under_sensitivity, 2, true),
      // another device, and a frame outside the interval
      uplink(1, 1, 15.0, R::collision),
      uplink(0, 7, 500.0, R::collision),
  };
  const auto b = loss_breakdown(t, {0}, {0.0, 100.0});
  CHECK(b.generated == 6);
  CHECK(b.received == 2);
  CHECK(b.collision == 1);
  CHECK(b.under_sensitivity == 1);
  CHECK(b.gateway_busy == 1);
  CHECK(b.no_ack == 1);
  CHECK(b.received + b.collision + b.under_sensitivity + b.gateway_busy + b.no_ack == b.generated);
  CHECK(b.received_pct() + b.collision_pct() + b.under_sensitivity_pct() + b.gateway_busy_pct() +
            b.no_ack_pct() ==
        doctest::Approx(100.0));

  const auto both = loss_breakdown(t, {0, 1}, {0.0, 100.0});
  CHECK(both.generated == 7);
  CHECK(both.collision == 2);

  const auto none = loss_breakdown(t, {5}, {0.0, 100.0});
  CHECK(none.generated == 0);
  CHECK(none.collision_pct() == 0.0);
}

TEST_CASE("lone device on a good link loses nothing") {
  sim::Scenario s;
  s.n_devices = 1;
  s.device_distance_m = 150.0;
  s.sim_duration_s = 2 * sim::kDay;
  s.tp_init = 14;
  s.sf_init = 12;
  s.adr.ack_limit = 100000;  // keep the link where it is
  s.adr.n = 100000;
  const auto t = sim::run(s);
  const auto b = loss_breakdown(t, {0}, {0.0, t.end_s});
  CHECK(b.generated > 200);
  CHECK(b.received == b.generated);
}

TEST_CASE("aggregate") {
  const std::vector<double> same{5, 5, 5};
  auto a = aggregate(same);
  CHECK(a.mean == 5.0);
  CHECK(a.stddev == 0.0);
  CHECK(a.count == 3);

  const std::vector<double> two{1, 3};
  a = aggregate(two);
  CHECK(a.mean == 2.0);
  CHECK(a.stddev == doctest::Approx(std::sqrt(2.0)));

  const std::vector<double> one{7.5};
  a = aggregate(one);
  CHECK(a.mean == 7.5);
  CHECK(a.stddev == 0.0);
  CHECK(a.count == 1);

  CHECK_THROWS_AS(aggregate(std::vector<double>{}), std::invalid_argument);
}
