#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "uavsim/env.hpp"
#include "uavsim/radio.hpp"
#include "uavsim/rng.hpp"

using namespace uavsim;

namespace {

Scenario flat_scenario(double sep = 300.0) {
  Scenario s;
  s.area_w = s.area_h = 1000.0;
  s.z_min = 30.0;
  s.z_max = 150.0;
  s.time_limit_steps = 120;
  s.source = {200, 500, 60};
  s.destination = {200 + sep, 500, 60};
  s.gbs.push_back({0, {150, 500, 25}, GbsClass::macro, {0, 120, 240}});
  s.gbs.push_back({1, {850, 500, 25}, GbsClass::macro, {180, 300, 60}});
  return s;
}

}  // namespace

TEST_CASE("classify_rsrp boundaries") {
  const RewardConfig cfg;
  CHECK(classify_rsrp(-79.0, cfg) == RsrpBand::excellent);
  CHECK(classify_rsrp(-80.0, cfg) == RsrpBand::excellent);  // inclusive
  CHECK(classify_rsrp(-80.0000001, cfg) == RsrpBand::mediocre);
  CHECK(classify_rsrp(-100.0, cfg) == RsrpBand::mediocre);  // inclusive
  CHECK(classify_rsrp(-100.01, cfg) == RsrpBand::poor);
}

TEST_CASE("banded reward") {
  const RewardConfig cfg;
  // mu1 * (500 - 480) with excellent signal
  CHECK(reward(500, 480, -70, cfg) == doctest::Approx(200.0).epsilon(1e-12));
  // adds mu2 * rsrp in the mediocre band
  CHECK(reward(500, 480, -90, cfg) == doctest::Approx(199.1).epsilon(1e-12));
  // poor band ignores the distance term entirely
  CHECK(reward(500, 480, -110, cfg) == doctest::Approx(-11.0).epsilon(1e-12));
  CHECK(reward(100, 900, -110, cfg) == doctest::Approx(-11.0).epsilon(1e-12));

  SUBCASE("branch selection at the thresholds") {
    // at exactly -80 the excellent branch applies: no mu2 term
    CHECK(reward(500, 480, -80, cfg) == doctest::Approx(200.0).epsilon(1e-12));
    // at exactly -100 the mediocre branch applies
    CHECK(reward(500, 480, -100, cfg) ==
          doctest::Approx(200.0 + 0.01 * -100.0).epsilon(1e-12));
  }
}

TEST_CASE("reset") {
  const Scenario s = flat_scenario();
  UavEnv env(s, EnvConfig{});
  const EnvState st = env.reset(1);

  CHECK(st.position == s.source);
  CHECK(st.velocity == Vec3{0, 0, 0});
  CHECK(st.step_index == 0);
  CHECK(st.dist_to_dest == doctest::Approx(300.0));

  SUBCASE("serving GBS equals the exhaustive argmax") {
    int want = -1;
    double best = -1e300;
    for (const auto& g : s.gbs) {
      const double v = rsrp_dbm(s, g, s.source);
      if (v > best) {
        best = v;
        want = g.id;
      }
    }
    CHECK(st.serving_gbs == want);
    CHECK(st.serving_rsrp_dbm == best);
  }
  SUBCASE("deterministic") {
    UavEnv env2(s, EnvConfig{});
    const EnvState a = env2.reset(1);
    const EnvState b = env2.reset(1);
    CHECK(a.position == b.position);
    CHECK(a.serving_gbs == b.serving_gbs);
    CHECK(a.serving_rsrp_dbm == b.serving_rsrp_dbm);
    CHECK(a.obstacle.distance == b.obstacle.distance);
  }
}

TEST_CASE("step mechanics") {
  const Scenario s = flat_scenario();
  const EnvConfig cfg;

  SUBCASE("zero delta leaves the position and serving unchanged") {
    UavEnv env(s, cfg);
    const EnvState st = env.reset(0);
    const auto out = env.step({{0, 0, 0}, st.serving_gbs});
    CHECK(out.next_state.position == st.position);
    CHECK_FALSE(out.handover_occurred);
    CHECK_FALSE(out.done);
    // d_prev == d_next, so only the band term remains
    const double r = st.serving_rsrp_dbm;  // position unchanged
    double want = 0.0;
    switch (classify_rsrp(r, cfg.reward)) {
      case RsrpBand::excellent: want = 0.0; break;
      case RsrpBand::mediocre: want = cfg.reward.mu2 * r; break;
      case RsrpBand::poor: want = cfg.reward.mu3 * r; break;
    }
    CHECK(out.reward == doctest::Approx(want).epsilon(1e-9));
  }
  SUBCASE("unit delta moves one step_scale") {
    UavEnv env(s, cfg);
    const EnvState st = env.reset(0);
    const auto out = env.step({{1, 0, 0}, st.serving_gbs});
    CHECK(out.next_state.position.x ==
          doctest::Approx(st.position.x + 20.83).epsilon(1e-12));
    CHECK(out.next_state.velocity.x == doctest::Approx(20.83).epsilon(1e-12));
    // deltas beyond [-1,1] clamp to the same motion
    UavEnv env2(s, cfg);
    env2.reset(0);
    const auto out2 = env2.step({{5.0, 0, 0}, st.serving_gbs});
    CHECK(out2.next_state.position.x == out.next_state.position.x);
  }
  SUBCASE("flying through a wall terminates as collided") {
    Scenario blocked = flat_scenario();
    blocked.buildings.push_back({{215, 480, 0}, {240, 520, 120}});
    UavEnv env(blocked, cfg);
    const EnvState st = env.reset(0);
    const auto out = env.step({{1, 0, 0}, st.serving_gbs});
    CHECK(out.done);
    CHECK(out.terminal_kind == TerminalKind::collided);
    // the sampling oracle agrees the motion segment was blocked
    CHECK_FALSE(oracles::sampled_los(blocked, st.position,
                                     out.next_state.position));
    // collision penalty applies on top of the banded reward
    const double base = reward(st.dist_to_dest, out.next_state.dist_to_dest,
                               out.next_state.serving_rsrp_dbm, cfg.reward);
    CHECK(out.reward ==
          doctest::Approx(base + cfg.reward.collision_penalty).epsilon(1e-9));
  }
  SUBCASE("arrival within the radius terminates with the bonus") {
    const Scenario near = flat_scenario(25.0);
    UavEnv env(near, cfg);
    const EnvState st = env.reset(0);
    const auto out = env.step({{1, 0, 0}, st.serving_gbs});  // 20.83 of 25 m
    CHECK(out.terminal_kind == TerminalKind::reached);
    CHECK(out.next_state.dist_to_dest <= cfg.arrival_radius);
    const double base = reward(st.dist_to_dest, out.next_state.dist_to_dest,
                               out.next_state.serving_rsrp_dbm, cfg.reward);
    CHECK(out.reward ==
          doctest::Approx(base + cfg.reward.terminal_bonus).epsilon(1e-9));
  }
  SUBCASE("timeout at the step limit") {
    Scenario quick = flat_scenario();
    quick.time_limit_steps = 3;
    UavEnv env(quick, cfg);
    env.reset(0);
    env.step({{0, 0, 0}, 0});
    env.step({{0, 0, 0}, 0});
    const auto out = env.step({{0, 0, 0}, 0});
    CHECK(out.terminal_kind == TerminalKind::timeout);
    CHECK_THROWS_AS(env.step({{0, 0, 0}, 0}), std::logic_error);
  }
  SUBCASE("altitude clamps to the flight band") {
    UavEnv env(s, cfg);
    env.reset(0);
    StepOutcome out;
    for (int i = 0; i < 10 && !env.done(); ++i)
      out = env.step({{0, 0, 1}, 0});
    CHECK(out.next_state.position.z <= s.z_max);
    CHECK_FALSE(out.done);  // clamping, not termination
  }
  SUBCASE("handover is flagged when the serving id changes") {
    UavEnv env(s, cfg);
    const EnvState st = env.reset(0);
    const int other = st.serving_gbs == 0 ? 1 : 0;
    const auto out = env.step({{0, 0, 0}, other});
    CHECK(out.handover_occurred);
    CHECK(out.next_state.serving_gbs == other);
    // unknown id rejected
    UavEnv env2(s, cfg);
    env2.reset(0);
    CHECK_THROWS_AS(env2.step({{0, 0, 0}, 99}), std::invalid_argument);
  }
  SUBCASE("deterministic transition") {
    UavEnv a(s, cfg), b(s, cfg);
    a.reset(0);
    b.reset(0);
    const auto oa = a.step({{0.3, -0.2, 0.1}, 1});
    const auto ob = b.step({{0.3, -0.2, 0.1}, 1});
    CHECK(oa.reward == ob.reward);
    CHECK(oa.next_state.position == ob.next_state.position);
    CHECK(oa.next_state.serving_rsrp_dbm == ob.next_state.serving_rsrp_dbm);
  }
}

TEST_CASE("observation vector") {
  const Scenario s = flat_scenario();
  const EnvConfig cfg;
  UavEnv env(s, cfg);
  env.reset(0);

  SUBCASE("layout and reset values") {
    const auto obs = env.observe();
    REQUIRE(static_cast<int>(obs.size()) == 13 + 2);
    CHECK(obs[0] == doctest::Approx(200.0 / 1000.0));
    CHECK(obs[1] == doctest::Approx(500.0 / 1000.0));
    CHECK(obs[2] == doctest::Approx(60.0 / 150.0));
    CHECK(obs[3] == 0.0);  // velocity slots are zero at reset
    CHECK(obs[4] == 0.0);
    CHECK(obs[5] == 0.0);
    // one-hot over the serving slot
    const int serving_slot = s.gbs_slot(env.state().serving_gbs);
    CHECK(obs[10 + serving_slot] == 1.0);
    CHECK(obs[10 + (1 - serving_slot)] == 0.0);
    // destination vector normalized by the initial distance
    CHECK(obs[12] == doctest::Approx(1.0));
    CHECK(obs[13] == doctest::Approx(0.0));
    CHECK(obs[14] == doctest::Approx(0.0));
  }
  SUBCASE("30-GBS scenario yields a 30-slot one-hot") {
    ScenarioGenParams p;
    p.area_w = p.area_h = 1400.0;
    p.n_gbs = 30;
    p.n_buildings = 20;
    const Scenario big = generate_synthetic_scenario(p, 3);
    UavEnv benv(big, cfg);
    benv.reset(0);
    CHECK(static_cast<int>(benv.observe().size()) == 13 + 30);
    int ones = 0;
    const auto obs = benv.observe();
    for (int i = 10; i < 40; ++i) ones += obs[i] == 1.0 ? 1 : 0;
    CHECK(ones == 1);
  }
  SUBCASE("all entries stay within [-1, 1] across random play") {
    Rng rng(14);
    UavEnv walker(s, cfg);
    walker.reset(0);
    int audited = 0;
    while (audited < 10000) {
      if (walker.done()) walker.reset(0);
      const auto obs = walker.observe();
      for (const double v : obs) {
        CHECK(v <= 1.0 + 1e-12);
        CHECK(v >= -1.0 - 1e-12);
      }
      ++audited;
      walker.step({{rng.uniform(-1, 1), rng.uniform(-1, 1),
                    rng.uniform(-1, 1)},
                   static_cast<int>(rng.uniform_int(2))});
    }
  }
}

TEST_CASE("episode invariants under random play") {
  const Scenario s = flat_scenario();
  const EnvConfig cfg;
  Rng rng(99);
  int reached_checked = 0;
  for (int ep = 0; ep < 40; ++ep) {
    UavEnv env(s, cfg);
    env.reset(ep);
    double path = 0.0;
    const double straight = env.state().dist_to_dest;
    while (!env.done()) {
      // bias toward the destination so some episodes actually arrive
      const Vec3 to = (s.destination - env.state().position).normalized();
      const auto out = env.step({{to.x + 0.5 * rng.uniform(-1, 1),
                                  to.y + 0.5 * rng.uniform(-1, 1),
                                  to.z + 0.5 * rng.uniform(-1, 1)},
                                 static_cast<int>(rng.uniform_int(2))});
      path += out.next_state.velocity.norm();
      if (!out.done) {
        CHECK_FALSE(s.inside_any_building(out.next_state.position));
        CHECK(out.next_state.position.z >= s.z_min);
        CHECK(out.next_state.position.z <= s.z_max);
      }
      if (out.terminal_kind == TerminalKind::reached) {
        CHECK(path >= straight - env.config().arrival_radius - 1e-9);
        ++reached_checked;
      }
    }
  }
  CHECK(reached_checked > 0);
}
