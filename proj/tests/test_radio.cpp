#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "uavsim/radio.hpp"
#include "uavsim/rng.hpp"

using namespace uavsim;

namespace {

const double LOG2 = std::log10(2.0);

RadioConfig default_radio() { return RadioConfig{}; }

Scenario one_gbs_scenario(GbsClass cls, const Vec3& pos, double base_az = 0.0) {
  Scenario s;
  s.area_w = s.area_h = 2000.0;
  s.z_min = 1.5;
  s.z_max = 300.0;
  s.time_limit_steps = 10;
  s.source = {10, 10, 50};
  s.destination = {1990, 1990, 50};
  s.gbs.push_back({0, pos, cls, {base_az, base_az + 120, base_az + 240}});
  return s;
}

}  // namespace

TEST_CASE("element gain pattern") {
  const RadioConfig cfg = default_radio();
  CHECK(element_gain_db({90, 0}, cfg) == doctest::Approx(8.0).epsilon(1e-12));
  // horizontal pattern at one 3 dB beamwidth: 12*(65/65)^2 = 12 dB down
  CHECK(element_gain_db({90, 65}, cfg) == doctest::Approx(-4.0).epsilon(1e-12));
  // far sidelobe capped by the 30 dB front-back ratio
  CHECK(element_gain_db({90, 180}, cfg) ==
        doctest::Approx(-22.0).epsilon(1e-12));

  SUBCASE("bounded everywhere, max at boresight") {
    Rng rng(5);
    for (int i = 0; i < 20000; ++i) {
      const AnglePair a{rng.uniform(0, 180), rng.uniform(-180.0, 180.0)};
      const double g = element_gain_db(a, cfg);
      CHECK(g <= 8.0 + 1e-12);
      CHECK(g >= -22.0 - 1e-12);
    }
  }
}

TEST_CASE("array factor") {
  RadioConfig cfg = default_radio();

  SUBCASE("single element is flat zero") {
    cfg.n_elements = 1;
    Rng rng(2);
    for (int i = 0; i < 100; ++i)
      CHECK(array_factor_db({rng.uniform(0, 180), 0}, cfg) == 0.0);
  }
  SUBCASE("coherent sum at the steering angle") {
    CHECK(array_factor_db({90.0 + cfg.downtilt_deg, 0}, cfg) ==
          doctest::Approx(10.0 * std::log10(8.0)).epsilon(1e-12));
  }
  SUBCASE("first null floor-clamps at -30 dB") {
    // psi = 2*pi/n  =>  cos(theta) = cos(steer) + 2/n with half-wave spacing
    const double steer = (90.0 + cfg.downtilt_deg) * M_PI / 180.0;
    const double ct = std::cos(steer) + 2.0 / cfg.n_elements;
    const double theta = std::acos(ct) * 180.0 / M_PI;
    CHECK(array_factor_db({theta, 0}, cfg) == doctest::Approx(-30.0));
  }
  SUBCASE("never exceeds 10*log10(n)") {
    Rng rng(3);
    for (int i = 0; i < 20000; ++i) {
      const double af = array_factor_db({rng.uniform(0, 180), 0}, cfg);
      CHECK(af <= 10.0 * std::log10(8.0) + 1e-12);
      CHECK(af >= -30.0);
    }
  }
}

TEST_CASE("antenna gain over sectors") {
  RadioConfig cfg = default_radio();

  SUBCASE("boresight with zero downtilt reaches both maxima") {
    cfg.downtilt_deg = 0.0;
    const GbsConfig g{0, {0, 0, 50}, GbsClass::macro, {0, 120, 240}};
    // on the 0 deg sector boresight at antenna height: theta=90, phi=0
    const double gain = antenna_gain_db(g, cfg, {100, 0, 50});
    CHECK(gain == doctest::Approx(8.0 + 10.0 * std::log10(8.0)).epsilon(1e-12));
  }
  SUBCASE("upper bound holds everywhere") {
    const GbsConfig g{0, {500, 500, 30}, GbsClass::macro, {10, 130, 250}};
    Rng rng(4);
    const double bound = 8.0 + 10.0 * std::log10(8.0);
    for (int i = 0; i < 5000; ++i) {
      const Vec3 p{rng.uniform(0, 1000), rng.uniform(0, 1000),
                   rng.uniform(1, 300)};
      if (distance_3d(p, g.position) < 1e-9) continue;
      CHECK(antenna_gain_db(g, cfg, p) <= bound + 1e-12);
    }
  }
  SUBCASE("directly above is no better than the bound") {
    const GbsConfig g{0, {0, 0, 50}, GbsClass::macro, {0, 120, 240}};
    CHECK(antenna_gain_db(g, cfg, {0, 0, 150}) <=
          8.0 + 10.0 * std::log10(8.0));
  }
  SUBCASE("120 degree rotation symmetry") {
    const GbsConfig g{0, {0, 0, 50}, GbsClass::macro, {0, 120, 240}};
    const double r = 173.0;
    for (double az = 0.0; az < 360.0; az += 17.0) {
      const double a1 = az * M_PI / 180.0;
      const double a2 = (az + 120.0) * M_PI / 180.0;
      const Vec3 p1{r * std::cos(a1), r * std::sin(a1), 80.0};
      const Vec3 p2{r * std::cos(a2), r * std::sin(a2), 80.0};
      CHECK(antenna_gain_db(g, cfg, p1) ==
            doctest::Approx(antenna_gain_db(g, cfg, p2)).epsilon(1e-9));
    }
  }
  SUBCASE("coincident position is an error") {
    const GbsConfig g{0, {5, 5, 5}, GbsClass::macro, {0, 120, 240}};
    CHECK_THROWS_AS(antenna_gain_db(g, cfg, {5, 5, 5}), std::invalid_argument);
  }
}

TEST_CASE("free-space path loss") {
  CHECK(fspl_db(100, 2) ==
        doctest::Approx(32.4 + 40.0 + 20.0 * LOG2).epsilon(1e-12));
  CHECK(fspl_db(1, 1) == doctest::Approx(32.4).epsilon(1e-12));
  CHECK(fspl_db(1000, 2) ==
        doctest::Approx(32.4 + 60.0 + 20.0 * LOG2).epsilon(1e-12));
  // below 1 m clamps to 1 m
  CHECK(fspl_db(0.2, 2) == fspl_db(1.0, 2));
}

TEST_CASE("LoS path loss branches") {
  SUBCASE("micro low: w1") {
    CHECK(path_loss_los_db(GbsClass::micro, 100, 10, 2) ==
          doctest::Approx(32.4 + 21.0 * 2.0 + 20.0 * LOG2).epsilon(1e-12));
  }
  SUBCASE("macro low: w3") {
    CHECK(path_loss_los_db(GbsClass::macro, 1000, 10, 2) ==
          doctest::Approx(32.4 + 20.0 * 3.0 + 20.0 * LOG2).epsilon(1e-12));
  }
  SUBCASE("macro high: w4") {
    CHECK(path_loss_los_db(GbsClass::macro, 500, 100, 2) ==
          doctest::Approx(28.0 + 22.0 * std::log10(500.0) + 20.0 * LOG2)
              .epsilon(1e-12));
  }
  SUBCASE("micro high takes max of FSPL and w2") {
    const double z = 100, d = 500, fc = 2;
    const double w2 =
        30.9 + (22.25 - 0.5 * std::log10(z)) * std::log10(d) + 20.0 * LOG2;
    CHECK(path_loss_los_db(GbsClass::micro, d, z, fc) ==
          doctest::Approx(std::max(fspl_db(d, fc), w2)).epsilon(1e-12));
  }
  SUBCASE("bracket boundary at exactly 22.5 m") {
    // z = 22.5 stays in the low bracket, the next representable point above
    // switches branches
    const double low = path_loss_los_db(GbsClass::micro, 200, 22.5, 2);
    const double w1 = 32.4 + 21.0 * std::log10(200.0) + 20.0 * LOG2;
    CHECK(low == doctest::Approx(w1).epsilon(1e-12));
    const double high = path_loss_los_db(GbsClass::micro, 200, 22.5 + 1e-9, 2);
    const double w2 = 30.9 +
                      (22.25 - 0.5 * std::log10(22.5 + 1e-9)) *
                          std::log10(200.0) +
                      20.0 * LOG2;
    CHECK(high == doctest::Approx(std::max(fspl_db(200, 2), w2)).epsilon(1e-12));
    const double mlow = path_loss_los_db(GbsClass::macro, 200, 22.5, 2);
    CHECK(mlow ==
          doctest::Approx(32.4 + 20.0 * std::log10(200.0) + 20.0 * LOG2));
    const double mhigh = path_loss_los_db(GbsClass::macro, 200, 22.5 + 1e-9, 2);
    CHECK(mhigh ==
          doctest::Approx(28.0 + 22.0 * std::log10(200.0) + 20.0 * LOG2));
  }
  SUBCASE("altitude outside the modeled band") {
    CHECK_THROWS_AS(path_loss_los_db(GbsClass::micro, 100, 1.0, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(path_loss_los_db(GbsClass::macro, 100, 300.5, 2),
                    std::invalid_argument);
  }
  SUBCASE("strictly increasing in d per branch") {
    for (const auto cls : {GbsClass::micro, GbsClass::macro}) {
      for (const double z : {5.0, 22.5, 60.0, 200.0}) {
        double prev = -1e9;
        for (double d = 10.0; d <= 2000.0; d += 10.0) {
          const double v = path_loss_los_db(cls, d, z, 2.0);
          CHECK(v > prev);
          prev = v;
        }
      }
    }
  }
}

TEST_CASE("NLoS path loss branches") {
  SUBCASE("micro low: guarded w5") {
    const double w5 = 22.4 + 35.3 * 2.0 + 21.3 * LOG2 - 0.3 * 8.5;
    const auto r = path_loss_nlos_db(GbsClass::micro, 100, 10, 2);
    CHECK(r.db == doctest::Approx(w5).epsilon(1e-12));
    CHECK_FALSE(r.z_clamped);
    // and it is indeed the max against the LoS branch
    CHECK(r.db >= path_loss_los_db(GbsClass::micro, 100, 10, 2));
  }
  SUBCASE("macro low: guarded w7") {
    const double w7 = 13.54 + 39.08 * 2.0 + 20.0 * LOG2 - 0.6 * 8.5;
    const auto r = path_loss_nlos_db(GbsClass::macro, 100, 10, 2);
    CHECK(r.db == doctest::Approx(w7).epsilon(1e-12));
  }
  SUBCASE("guard engages when the unguarded expression dips below LoS") {
    // short range, low altitude: w7 < w3, the guard returns the LoS value
    const double d = 10, z = 21;
    const double w7 =
        13.54 + 39.08 * std::log10(d) + 20.0 * LOG2 - 0.6 * (z - 1.5);
    const double los = path_loss_los_db(GbsClass::macro, d, z, 2);
    REQUIRE(w7 < los);
    CHECK(path_loss_nlos_db(GbsClass::macro, d, z, 2).db ==
          doctest::Approx(los).epsilon(1e-12));
  }
  SUBCASE("macro high: w8 alone, unguarded") {
    const double z = 60, d = 500;
    const double w8 = -17.5 + (46.0 - 7.0 * std::log10(z)) * std::log10(d) +
                      20.0 * std::log10(40.0 * M_PI * 2.0 / 3.0);
    const auto r = path_loss_nlos_db(GbsClass::macro, d, z, 2);
    CHECK(r.db == doctest::Approx(w8).epsilon(1e-12));
    CHECK_FALSE(r.z_clamped);
  }
  SUBCASE("macro above 100 m clamps z and raises the flag") {
    const auto at_100 = path_loss_nlos_db(GbsClass::macro, 500, 100, 2);
    const auto above = path_loss_nlos_db(GbsClass::macro, 500, 180, 2);
    CHECK(above.z_clamped);
    CHECK_FALSE(at_100.z_clamped);
    CHECK(above.db == doctest::Approx(at_100.db).epsilon(1e-12));
  }
  SUBCASE("guarded branches dominate LoS on random inputs") {
    Rng rng(11);
    for (int i = 0; i < 20000; ++i) {
      const GbsClass cls =
          rng.uniform() < 0.5 ? GbsClass::micro : GbsClass::macro;
      const double d = rng.uniform(1.0, 3000.0);
      const double z = rng.uniform(1.5, 300.0);
      if (cls == GbsClass::macro && z > 22.5) continue;  // w8 is unguarded
      CHECK(path_loss_nlos_db(cls, d, z, 2.0).db >=
            path_loss_los_db(cls, d, z, 2.0) - 1e-12);
    }
  }
}

TEST_CASE("rsrp assembly") {
  SUBCASE("P + G - L") {
    Scenario s = one_gbs_scenario(GbsClass::macro, {0, 0, 50});
    const Vec3 uav{300, 0, 50};
    const double g = antenna_gain_db(s.gbs[0], s.radio, uav);
    const double l = path_loss_los_db(GbsClass::macro, 300.0, 50.0, 2.0);
    CHECK(rsrp_dbm(s, s.gbs[0], uav) ==
          doctest::Approx(15.2 + g - l).epsilon(1e-12));
  }
  SUBCASE("linear in the reference power, argmax unchanged") {
    ScenarioGenParams p;
    p.area_w = p.area_h = 800.0;
    p.n_buildings = 8;
    p.n_gbs = 6;
    Scenario s = generate_synthetic_scenario(p, 21);
    Scenario shifted = s;
    shifted.radio.p_ref_dbm += 7.5;
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
      const Vec3 uav{rng.uniform(0, 800), rng.uniform(0, 800),
                     rng.uniform(30, 150)};
      if (s.inside_any_building(uav)) continue;
      const auto base = all_rsrp(s, uav);
      const auto up = all_rsrp(shifted, uav);
      for (std::size_t k = 0; k < base.size(); ++k)
        CHECK(up[k].second - base[k].second == doctest::Approx(7.5).epsilon(1e-12));
      CHECK(best_gbs(s, uav).first == best_gbs(shifted, uav).first);
    }
  }
  SUBCASE("blocking the link never helps on guarded branches") {
    Scenario s = one_gbs_scenario(GbsClass::micro, {0, 0, 10});
    const Vec3 uav{200, 0, 20};  // micro low bracket: guarded
    const double clear = rsrp_dbm(s, s.gbs[0], uav);
    Scenario blocked = s;
    blocked.buildings.push_back({{90, -20, 0}, {110, 20, 60}});
    REQUIRE_FALSE(is_los(blocked, blocked.gbs[0].position, uav));
    CHECK(rsrp_dbm(blocked, blocked.gbs[0], uav) <= clear + 1e-12);
  }
}

TEST_CASE("all_rsrp and best_gbs") {
  SUBCASE("single GBS wins by default") {
    Scenario s = one_gbs_scenario(GbsClass::macro, {100, 100, 30});
    CHECK(best_gbs(s, {200, 200, 60}).first == 0);
  }
  SUBCASE("exact tie breaks to the lower id") {
    // two identical GBS mirrored around the UAV, same sector geometry
    Scenario s = one_gbs_scenario(GbsClass::macro, {100, 500, 30});
    s.gbs.push_back({7, {900, 500, 30}, GbsClass::macro, {0, 120, 240}});
    s.gbs[0].id = 3;
    const Vec3 uav{500, 500, 60};
    const auto r = all_rsrp(s, uav);
    REQUIRE(r.size() == 2);
    // mirror symmetry: sector azimuths {0,120,240} are not mirror symmetric
    // in general, so force both to point straight at the UAV
    s.gbs[0].sector_azimuths_deg[0] = 0;
    s.gbs[1].sector_azimuths_deg[0] = 180;
    const auto a = rsrp_dbm(s, s.gbs[0], uav);
    const auto b = rsrp_dbm(s, s.gbs[1], uav);
    REQUIRE(a == b);
    CHECK(best_gbs(s, uav).first == 3);
  }
  SUBCASE("matches an exhaustive scan on a 30-GBS scenario") {
    ScenarioGenParams p;
    p.area_w = p.area_h = 1400.0;
    p.n_gbs = 30;
    p.n_buildings = 25;
    const Scenario s = generate_synthetic_scenario(p, 77);
    Rng rng(9);
    for (int i = 0; i < 25; ++i) {
      const Vec3 uav{rng.uniform(0, 1400), rng.uniform(0, 1400),
                     rng.uniform(30, 150)};
      if (s.inside_any_building(uav)) continue;
      int want_id = -1;
      double want = -1e300;
      for (const auto& g : s.gbs) {
        const double v = rsrp_dbm(s, g, uav);
        if (v > want || (v == want && g.id < want_id)) {
          want = v;
          want_id = g.id;
        }
      }
      const auto got = best_gbs(s, uav);
      CHECK(got.first == want_id);
      CHECK(got.second == want);
    }
  }
  SUBCASE("empty GBS list errors") {
    Scenario s = one_gbs_scenario(GbsClass::macro, {0, 0, 30});
    s.gbs.clear();
    CHECK_THROWS_AS(best_gbs(s, {1, 1, 50}), std::invalid_argument);
  }
}
