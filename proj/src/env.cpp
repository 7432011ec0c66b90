#include "uavsim/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uavsim/radio.hpp"

namespace uavsim {

const char* terminal_kind_name(TerminalKind k) {
  switch (k) {
    case TerminalKind::none: return "none";
    case TerminalKind::reached: return "reached";
    case TerminalKind::collided: return "collided";
    case TerminalKind::out_of_bounds: return "out_of_bounds";
    case TerminalKind::timeout: return "timeout";
  }
  return "none";
}

RsrpBand classify_rsrp(double rsrp_dbm, const RewardConfig& cfg) {
  if (rsrp_dbm >= cfg.excellent_threshold_dbm) return RsrpBand::excellent;
  if (rsrp_dbm >= cfg.mediocre_threshold_dbm) return RsrpBand::mediocre;
  return RsrpBand::poor;
}

double reward(double d_prev, double d_next, double rsrp_next_dbm,
              const RewardConfig& cfg) {
  switch (classify_rsrp(rsrp_next_dbm, cfg)) {
    case RsrpBand::excellent:
      return cfg.mu1 * (d_prev - d_next);
    case RsrpBand::mediocre:
      return cfg.mu1 * (d_prev - d_next) + cfg.mu2 * rsrp_next_dbm;
    case RsrpBand::poor:
      return cfg.mu3 * rsrp_next_dbm;
  }
  return 0.0;
}

UavEnv::UavEnv(const Scenario& scenario, const EnvConfig& cfg)
    : scenario_(&scenario), cfg_(cfg) {
  validate_scenario(scenario);
  if (scenario.gbs.empty())
    throw std::invalid_argument("UavEnv: scenario has no GBS");
}

EnvState UavEnv::reset(std::uint64_t /*seed*/) {
  const Scenario& s = *scenario_;
  if (s.inside_any_building(s.source))
    throw std::invalid_argument("reset: source lies inside a building");
  state_ = EnvState{};
  state_.position = s.source;
  state_.velocity = {0.0, 0.0, 0.0};
  const auto [id, val] = best_gbs(s, s.source);
  state_.serving_gbs = id;
  state_.serving_rsrp_dbm = val;
  state_.step_index = 0;
  state_.dist_to_dest = distance_3d(s.source, s.destination);
  state_.obstacle =
      nearest_obstacle(s, s.source, cfg_.obstacle_max_range, cfg_.obstacle_n_rays);
  initial_dist_ = std::max(state_.dist_to_dest, 1.0);
  done_ = false;
  terminal_ = TerminalKind::none;
  return state_;
}

StepOutcome UavEnv::step(const ActionCommand& action) {
  if (done_) throw std::logic_error("step called on a terminated episode");
  const Scenario& s = *scenario_;

  const Vec3 delta{std::clamp(action.delta.x, -1.0, 1.0),
                   std::clamp(action.delta.y, -1.0, 1.0),
                   std::clamp(action.delta.z, -1.0, 1.0)};
  const Vec3 unclamped = state_.position + delta * cfg_.step_scale;

  // How far the raw target leaves the flight volume, per axis.
  double exit_dist = 0.0;
  exit_dist = std::max(exit_dist, -unclamped.x);
  exit_dist = std::max(exit_dist, unclamped.x - s.area_w);
  exit_dist = std::max(exit_dist, -unclamped.y);
  exit_dist = std::max(exit_dist, unclamped.y - s.area_h);
  exit_dist = std::max(exit_dist, s.z_min - unclamped.z);
  exit_dist = std::max(exit_dist, unclamped.z - s.z_max);

  Vec3 next_pos{std::clamp(unclamped.x, 0.0, s.area_w),
                std::clamp(unclamped.y, 0.0, s.area_h),
                std::clamp(unclamped.z, s.z_min, s.z_max)};

  StepOutcome out;
  out.terminal_kind = TerminalKind::none;
  if (exit_dist > cfg_.step_scale) out.terminal_kind = TerminalKind::out_of_bounds;

  bool collided = false;
  if (out.terminal_kind == TerminalKind::none) {
    for (const auto& b : s.buildings) {
      if (segment_intersects_building(state_.position, next_pos, b) ||
          b.contains_strict(next_pos)) {
        collided = true;
        break;
      }
    }
    if (collided) out.terminal_kind = TerminalKind::collided;
  }

  const double d_prev = state_.dist_to_dest;
  const double d_next = distance_3d(next_pos, s.destination);

  if (out.terminal_kind == TerminalKind::none && d_next <= cfg_.arrival_radius)
    out.terminal_kind = TerminalKind::reached;
  if (out.terminal_kind == TerminalKind::none &&
      state_.step_index + 1 >= s.time_limit_steps)
    out.terminal_kind = TerminalKind::timeout;

  const int slot = s.gbs_slot(action.next_gbs);
  const double rsrp_next = rsrp_dbm(s, s.gbs[slot], next_pos);

  out.reward = reward(d_prev, d_next, rsrp_next, cfg_.reward);
  if (out.terminal_kind == TerminalKind::reached)
    out.reward += cfg_.reward.terminal_bonus;
  if (out.terminal_kind == TerminalKind::collided)
    out.reward += cfg_.reward.collision_penalty;

  out.handover_occurred = action.next_gbs != state_.serving_gbs;
  out.done = out.terminal_kind != TerminalKind::none;

  EnvState next = state_;
  next.velocity = next_pos - state_.position;
  next.position = next_pos;
  next.serving_gbs = action.next_gbs;
  next.serving_rsrp_dbm = rsrp_next;
  next.step_index = state_.step_index + 1;
  next.dist_to_dest = d_next;
  if (!out.done) {
    next.obstacle = nearest_obstacle(s, next_pos, cfg_.obstacle_max_range,
                                     cfg_.obstacle_n_rays);
  } else {
    next.obstacle = ObstacleReading{0.0, {0.0, 0.0, -1.0}};
  }

  state_ = next;
  done_ = out.done;
  terminal_ = out.terminal_kind;
  out.next_state = next;
  return out;
}

std::vector<double> UavEnv::observe() const {
  const Scenario& s = *scenario_;
  std::vector<double> obs;
  obs.reserve(observation_size());
  obs.push_back(state_.position.x / s.area_w);
  obs.push_back(state_.position.y / s.area_h);
  obs.push_back(state_.position.z / s.z_max);
  obs.push_back(state_.velocity.x / cfg_.step_scale);
  obs.push_back(state_.velocity.y / cfg_.step_scale);
  obs.push_back(state_.velocity.z / cfg_.step_scale);
  obs.push_back(state_.obstacle.distance / cfg_.obstacle_max_range);
  obs.push_back(state_.obstacle.direction.x);
  obs.push_back(state_.obstacle.direction.y);
  obs.push_back(state_.obstacle.direction.z);
  const int serving_slot = s.gbs_slot(state_.serving_gbs);
  for (int i = 0; i < n_gbs(); ++i) obs.push_back(i == serving_slot ? 1.0 : 0.0);
  const Vec3 to_dest = s.destination - state_.position;
  obs.push_back(std::clamp(to_dest.x / initial_dist_, -1.0, 1.0));
  obs.push_back(std::clamp(to_dest.y / initial_dist_, -1.0, 1.0));
  obs.push_back(std::clamp(to_dest.z / initial_dist_, -1.0, 1.0));
  return obs;
}

}  // namespace uavsim
