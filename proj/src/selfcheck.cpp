#include "uavsim/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "uavsim/env.hpp"
#include "uavsim/mlp.hpp"
#include "uavsim/ppo.hpp"
#include "uavsim/radio.hpp"
#include "uavsim/rng.hpp"
#include "uavsim/scenario.hpp"

namespace uavsim {

namespace {

std::string fmt(const char* f, double a, double b) {
  char out[160];
  std::snprintf(out, sizeof out, f, a, b);
  return out;
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// Dense 1 cm lattice sampling along a-b, restricted to each box's parametric
// window (points outside a closed box cannot be strictly inside it).
bool sampled_los(const Scenario& s, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double len = d.norm();
  if (len == 0.0) return true;
  const double step = 0.01 / len;  // 1 cm in parameter space
  for (const auto& bld : s.buildings) {
    double t0 = 0.0, t1 = 1.0;
    bool overlap = true;
    const double o[3] = {a.x, a.y, a.z};
    const double dv[3] = {d.x, d.y, d.z};
    const double lo[3] = {bld.min_corner.x, bld.min_corner.y, bld.min_corner.z};
    const double hi[3] = {bld.max_corner.x, bld.max_corner.y, bld.max_corner.z};
    for (int i = 0; i < 3 && overlap; ++i) {
      if (dv[i] == 0.0) {
        if (o[i] < lo[i] || o[i] > hi[i]) overlap = false;
        continue;
      }
      double ta = (lo[i] - o[i]) / dv[i];
      double tb = (hi[i] - o[i]) / dv[i];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) overlap = false;
    }
    if (!overlap) continue;
    const long k0 = std::max(0L, static_cast<long>(std::floor((t0 - step) / step)));
    const long k1 = static_cast<long>(std::ceil((t1 + step) / step));
    for (long k = k0; k <= k1; ++k) {
      const double t = k * step;
      if (t > 1.0) break;
      if (bld.contains_strict(a + d * t)) return false;
    }
  }
  return true;
}

CheckResult check_radio_formulas() {
  CheckResult c{"radio_formulas", true, ""};
  const double l2 = std::log10(2.0);
  struct Case {
    double got, want;
  };
  const Case cases[] = {
      {path_loss_los_db(GbsClass::micro, 100, 10, 2), 32.4 + 42.0 + 20 * l2},
      {path_loss_los_db(GbsClass::macro, 1000, 10, 2), 32.4 + 60.0 + 20 * l2},
      {path_loss_los_db(GbsClass::macro, 500, 100, 2),
       28.0 + 22.0 * std::log10(500.0) + 20 * l2},
      {fspl_db(100, 2), 32.4 + 40.0 + 20 * l2},
      {path_loss_nlos_db(GbsClass::micro, 100, 10, 2).db,
       22.4 + 70.6 + 21.3 * l2 - 0.3 * 8.5},
      {path_loss_nlos_db(GbsClass::macro, 100, 10, 2).db,
       13.54 + 39.08 * 2.0 + 20 * l2 - 0.6 * 8.5},
  };
  for (const auto& k : cases) {
    if (!near(k.got, k.want, 1e-6)) {
      c.passed = false;
      c.detail = fmt("got %.9f want %.9f", k.got, k.want);
      return c;
    }
  }
  RadioConfig r;
  if (!near(element_gain_db({90, 0}, r), 8.0, 1e-9) ||
      !near(element_gain_db({90, 65}, r), -4.0, 1e-9) ||
      !near(element_gain_db({90, 180}, r), -22.0, 1e-9)) {
    c.passed = false;
    c.detail = "element gain mismatch";
    return c;
  }
  if (!near(array_factor_db({90.0 + r.downtilt_deg, 0}, r),
            10.0 * std::log10(8.0), 1e-9)) {
    c.passed = false;
    c.detail = "array factor peak mismatch";
  }
  return c;
}

CheckResult check_radio_guards(Rng& rng, int n) {
  CheckResult c{"radio_guards", true, ""};
  RadioConfig r;
  for (int i = 0; i < n; ++i) {
    const GbsClass cls = rng.uniform() < 0.5 ? GbsClass::micro : GbsClass::macro;
    const double d = rng.uniform(1.0, 3000.0);
    const double z = rng.uniform(1.5, 300.0);
    const bool guarded = !(cls == GbsClass::macro && z > 22.5);
    if (guarded) {
      const double los = path_loss_los_db(cls, d, z, 2.0);
      const double nlos = path_loss_nlos_db(cls, d, z, 2.0).db;
      if (nlos < los - 1e-12) {
        c.passed = false;
        c.detail = fmt("NLoS %.6f below LoS %.6f", nlos, los);
        return c;
      }
    }
    const AnglePair a{rng.uniform(0.0, 180.0), rng.uniform(-180.0, 180.0)};
    const double eg = element_gain_db(a, r);
    if (eg < r.ge_max_dbi - r.a_m_db - 1e-12 || eg > r.ge_max_dbi + 1e-12) {
      c.passed = false;
      c.detail = fmt("element gain %.6f outside bounds (theta %.3f)", eg,
                     a.theta_deg);
      return c;
    }
    const double af = array_factor_db(a, r);
    if (af > 10.0 * std::log10(r.n_elements) + 1e-9) {
      c.passed = false;
      c.detail = fmt("array factor %.6f above peak %.6f", af,
                     10.0 * std::log10(r.n_elements));
      return c;
    }
  }
  return c;
}

CheckResult check_los_oracle(Rng& rng, int scenarios, int segments) {
  CheckResult c{"los_oracle", true, ""};
  for (int sc = 0; sc < scenarios; ++sc) {
    ScenarioGenParams p;
    p.area_w = p.area_h = 600.0;
    p.n_buildings = 10;
    p.n_gbs = 2;
    const Scenario s = generate_synthetic_scenario(p, rng.next_u64());
    for (int i = 0; i < segments; ++i) {
      const Vec3 a{rng.uniform(0.0, s.area_w), rng.uniform(0.0, s.area_h),
                   rng.uniform(0.0, 120.0)};
      const Vec3 b{rng.uniform(0.0, s.area_w), rng.uniform(0.0, s.area_h),
                   rng.uniform(0.0, 120.0)};
      if (is_los(s, a, b) != sampled_los(s, a, b)) {
        c.passed = false;
        c.detail = fmt("disagreement at segment from x=%.3f y=%.3f", a.x, a.y);
        return c;
      }
    }
  }
  return c;
}

CheckResult check_reward_bands() {
  CheckResult c{"reward_bands", true, ""};
  RewardConfig r;
  const bool ok = near(reward(500, 480, -70, r), 200.0, 1e-12) &&
                  near(reward(500, 480, -90, r), 199.1, 1e-12) &&
                  near(reward(123, 456, -110, r), -11.0, 1e-12) &&
                  classify_rsrp(-80.0, r) == RsrpBand::excellent &&
                  classify_rsrp(-100.0, r) == RsrpBand::mediocre &&
                  classify_rsrp(-100.01, r) == RsrpBand::poor;
  if (!ok) {
    c.passed = false;
    c.detail = "banded reward mismatch";
  }
  return c;
}

CheckResult check_backprop_fd(Rng& rng, int nets) {
  CheckResult c{"backprop_fd", true, ""};
  for (int t = 0; t < nets; ++t) {
    Mlp net = make_mlp({3, 6, 4, 2}, rng);
    std::vector<double> input(3), og(2);
    for (auto& x : input) x = rng.uniform(-1.0, 1.0);
    for (auto& x : og) x = rng.uniform(-1.0, 1.0);
    MlpActivations acts;
    mlp_forward_cached(net, input, acts);
    auto grads = make_grads(net);
    mlp_backprop(net, input, acts, og, grads);
    auto loss = [&]() {
      const auto out = mlp_forward(net, input);
      return out[0] * og[0] + out[1] * og[1];
    };
    const double h = 1e-5;
    for (std::size_t pi = 0; pi < net.params.size(); ++pi) {
      for (std::size_t k = 0; k < net.params[pi].size(); ++k) {
        const double saved = net.params[pi][k];
        net.params[pi][k] = saved + h;
        const double lp = loss();
        net.params[pi][k] = saved - h;
        const double lm = loss();
        net.params[pi][k] = saved;
        const double fd = (lp - lm) / (2.0 * h);
        const double an = grads[pi][k];
        const double rel =
            std::fabs(an - fd) / std::max({std::fabs(an), std::fabs(fd), 1e-3});
        if (rel > 1e-4) {
          c.passed = false;
          c.detail = fmt("analytic %.9f vs fd %.9f", an, fd);
          return c;
        }
      }
    }
  }
  return c;
}

CheckResult check_gae_mc(Rng& rng, int trials) {
  CheckResult c{"gae_mc", true, ""};
  for (int t = 0; t < trials; ++t) {
    const int n = 5 + static_cast<int>(rng.uniform_int(20));
    Trajectory traj(n);
    for (auto& s : traj) {
      s.reward = rng.uniform(-2.0, 2.0);
      s.value = rng.uniform(-2.0, 2.0);
      s.done = rng.uniform() < 0.15;
    }
    const double bootstrap = rng.uniform(-2.0, 2.0);
    const double gamma = 0.95;
    std::vector<double> adv, ret;
    compute_gae(traj, gamma, 1.0, bootstrap, adv, ret);
    double g = bootstrap;
    for (int i = n - 1; i >= 0; --i) {
      g = traj[i].reward + gamma * (traj[i].done ? 0.0 : g);
      const double mc_adv = g - traj[i].value;
      if (std::fabs(adv[i] - mc_adv) > 1e-10) {
        c.passed = false;
        c.detail = fmt("gae %.12f vs mc %.12f", adv[i], mc_adv);
        return c;
      }
    }
  }
  return c;
}

}  // namespace

std::vector<CheckResult> run_selfchecks(std::uint64_t seed, int scale) {
  Rng rng(seed);
  std::vector<CheckResult> out;
  out.push_back(check_radio_formulas());
  out.push_back(check_radio_guards(rng, 5000 * scale));
  out.push_back(check_los_oracle(rng, 3 * scale, 200 * scale));
  out.push_back(check_reward_bands());
  out.push_back(check_backprop_fd(rng, 5 * scale));
  out.push_back(check_gae_mc(rng, 20 * scale));
  return out;
}

}  // namespace uavsim
