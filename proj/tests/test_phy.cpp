#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "adrsim/phy.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace adrsim;
using namespace adrsim::phy;

TEST_CASE("path loss at reference points") {
  const LinkModel link;
  CHECK(path_loss(40.0, link, 0.0) == doctest::Approx(127.41).epsilon(1e-9));
  CHECK(path_loss(400.0, link, 0.0) == doctest::Approx(148.21).epsilon(1e-9));
  CHECK(path_loss(670.0, link, 0.0) == doctest::Approx(152.87).epsilon(1e-4));
  // hand value: 127.41 + 20.8 * log10(16.75)
  CHECK(path_loss(670.0, link, 0.0) == doctest::Approx(127.41 + 20.8 * std::log10(16.75)));
}

TEST_CASE("path loss adds shadowing and offset, rejects d < d0") {
  LinkModel link;
  link.mean_offset_db = 4.0;
  CHECK(path_loss(40.0, link, -1.5) == doctest::Approx(129.91));
  CHECK_THROWS_AS(path_loss(39.9, link, 0.0), DomainError);
  CHECK_THROWS_AS(path_loss(0.0, link, 0.0), DomainError);
}

TEST_CASE("path loss strictly increases with distance") {
  const LinkModel link;
  double prev = path_loss(40.0, link, 0.0);
  for (double d = 41.0; d <= 2000.0; d += 7.3) {
    const double l = path_loss(d, link, 0.0);
    CHECK(l > prev);
    prev = l;
  }
}

TEST_CASE("airtime reference values") {
  CHECK(airtime(SpreadingFactor{7}, 20) == doctest::Approx(0.056576).epsilon(1e-9));
  CHECK(airtime(SpreadingFactor{12}, 20) == doctest::Approx(1.318912).epsilon(1e-9));
  AirtimeParams p;
  p.sf = 12;
  p.low_data_rate_opt = true;
  CHECK(airtime(p) == doctest::Approx(1.318912).epsilon(1e-9));
}

TEST_CASE("airtime matches the symbol-count oracle on a 50-case grid") {
  const int payloads[] = {1, 7, 13, 20, 51, 64, 100, 128, 222};
  int cases = 0;
  for (int sf = 7; sf <= 12 && cases < 50; ++sf) {
    for (int pl : payloads) {
      if (cases == 50) break;
      const bool ldro = sf >= 11;
      AirtimeParams p;
      p.sf = sf;
      p.payload_bytes = pl;
      p.low_data_rate_opt = ldro;
      CHECK(std::abs(airtime(p) - testsupport::airtime_oracle(sf, pl, ldro)) < 1e-6);
      ++cases;
    }
  }
  CHECK(cases == 50);
}

TEST_CASE("airtime grows with SF and payload") {
  for (int pl : {1, 20, 100}) {
    for (int sf = 7; sf < 12; ++sf) {
      CHECK(airtime(SpreadingFactor{sf + 1}, pl) > airtime(SpreadingFactor{sf}, pl));
    }
  }
  for (int sf = 7; sf <= 12; ++sf) {
    double prev = 0.0;
    for (int pl = 1; pl <= 200; pl += 9) {
      const double t = airtime(SpreadingFactor{sf}, pl);
      CHECK(t >= prev);
      prev = t;
    }
    // one full coding block more always costs airtime
    CHECK(airtime(SpreadingFactor{sf}, 60) > airtime(SpreadingFactor{sf}, 20));
  }
}

TEST_CASE("received power") {
  CHECK(received_power(TxPower{14}, 145.61) == doctest::Approx(-131.61));
  CHECK(received_power(TxPower{14}, 0.0) == doctest::Approx(14.0));
  CHECK(received_power(TxPower{2}, 127.41) == doctest::Approx(-125.41));
}

TEST_CASE("snr relative to the thermal noise floor") {
  const PhyConfig cfg;
  const double floor = -174.0 + 10.0 * std::log10(125000.0) + 6.0;
  CHECK(cfg.noise_floor_dbm() == doctest::Approx(floor));
  CHECK(snr(floor, cfg) == doctest::Approx(0.0));
  // Rounded examples, within the 0.04 dB difference of the rounded floor.
  CHECK(std::abs(snr(-117.07, cfg) - 0.0) < 0.05);
  CHECK(std::abs(snr(-131.61, cfg) - (-14.54)) < 0.05);
  CHECK(std::abs(snr(-97.07, cfg) - 20.0) < 0.05);
}

TEST_CASE("domain types reject values off the grid") {
  CHECK_THROWS_AS(SpreadingFactor{6}, DomainError);
  CHECK_THROWS_AS(SpreadingFactor{13}, DomainError);
  CHECK_THROWS_AS(TxPower{10}, DomainError);
  CHECK_NOTHROW(TxPower{11});
  CHECK(TxPower{11}.raised() == TxPower{14});
  CHECK(SpreadingFactor{9}.raised() == SpreadingFactor{10});
  CHECK(Channel::from_frequency(868.3e6).index() == 1);
  CHECK(Channel::rx2().sub_band() == SubBand::g3);
  CHECK(Channel::uplink(2).sub_band() == SubBand::g1);
}

namespace {

Transmission tx(std::uint32_t id, double start, int sf, double rx, int ch = 0, double air = 0.1) {
  Transmission t;
  t.source = id;
  t.start_s = start;
  t.airtime_s = air;
  t.sf = SpreadingFactor{sf};
  t.channel = Channel::uplink(ch);
  t.rx_power_dbm = rx;
  return t;
}

}  // namespace

TEST_CASE("resolve_receptions examples") {
  SUBCASE("lone packet above sensitivity") {
    std::vector<Transmission> v{tx(0, 0, 7, -120)};
    CHECK(resolve_receptions(v)[0].received());
  }
  SUBCASE("lone packet below sensitivity") {
    std::vector<Transmission> v{tx(0, 0, 7, -124)};
    CHECK(resolve_receptions(v)[0].reason == LossReason::under_sensitivity);
  }
  SUBCASE("7 dB apart: stronger captures") {
    std::vector<Transmission> v{tx(0, 0, 7, -100), tx(1, 0.05, 7, -107)};
    const auto out = resolve_receptions(v);
    CHECK(out[0].received());
    CHECK(out[1].reason == LossReason::collision);
  }
  SUBCASE("3 dB apart: both lost") {
    std::vector<Transmission> v{tx(0, 0, 7, -100), tx(1, 0.05, 7, -103)};
    const auto out = resolve_receptions(v);
    CHECK(out[0].reason == LossReason::collision);
    CHECK(out[1].reason == LossReason::collision);
  }
  SUBCASE("different SF on one channel: both received") {
    std::vector<Transmission> v{tx(0, 0, 7, -100), tx(1, 0, 9, -100)};
    const auto out = resolve_receptions(v);
    CHECK(out[0].received());
    CHECK(out[1].received());
  }
  SUBCASE("different channel, same SF: both received") {
    std::vector<Transmission> v{tx(0, 0, 7, -100, 0), tx(1, 0, 7, -100, 1)};
    const auto out = resolve_receptions(v);
    CHECK(out[0].received());
    CHECK(out[1].received());
  }
  SUBCASE("back-to-back packets do not overlap") {
    std::vector<Transmission> v{tx(0, 0, 7, -100, 0, 0.1), tx(1, 0.1, 7, -100, 0, 0.1)};
    const auto out = resolve_receptions(v);
    CHECK(out[0].received());
    CHECK(out[1].received());
  }
  SUBCASE("inaudible interferer does not destroy a reception") {
    std::vector<Transmission> v{tx(0, 0, 7, -121), tx(1, 0, 7, -125)};
    const auto out = resolve_receptions(v);
    CHECK(out[0].received());
    CHECK(out[1].reason == LossReason::under_sensitivity);
  }
}

TEST_CASE("resolve_receptions is order independent and conserves count") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> start(0.0, 2.0), power(-140.0, -90.0);
  std::uniform_int_distribution<int> sf(7, 9), ch(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Transmission> v;
    const int n = 1 + trial % 12;
    for (int i = 0; i < n; ++i) {
      v.push_back(tx(static_cast<std::uint32_t>(i), start(gen), sf(gen), power(gen), ch(gen), 0.2));
    }
    const auto base = resolve_receptions(v);
    REQUIRE(base.size() == v.size());
    const auto received = std::count_if(base.begin(), base.end(), [](auto o) { return o.received(); });
    const auto lost = std::count_if(base.begin(), base.end(), [](auto o) { return !o.received(); });
    CHECK(received + lost == n);

    std::vector<std::size_t> perm(v.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<Transmission> shuffled;
    for (auto i : perm) shuffled.push_back(v[i]);
    const auto out = resolve_receptions(shuffled);
    for (std::size_t k = 0; k < perm.size(); ++k) CHECK(out[k] == base[perm[k]]);
  }
}

TEST_CASE("single transmitter without shadowing is a function of distance, SF and TP") {
  const LinkModel link;
  const PhyConfig cfg;
  for (double d : {100.0, 400.0, 540.0, 560.0, 670.0}) {
    for (int sf = 7; sf <= 12; ++sf) {
      const double rx = received_power(TxPower{14}, path_loss(d, link, 0.0));
      std::vector<Transmission> v{tx(0, 0, sf, rx)};
      const bool expect = rx >= cfg.sensitivity(SpreadingFactor{sf});
      CHECK(resolve_receptions(v, cfg)[0].received() == expect);
    }
  }
}
