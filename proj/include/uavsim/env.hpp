#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavsim/scenario.hpp"

namespace uavsim {

enum class RsrpBand { excellent, mediocre, poor };

enum class TerminalKind { none, reached, collided, out_of_bounds, timeout };

const char* terminal_kind_name(TerminalKind k);

struct RewardConfig {
  double mu1 = 10.0;
  double mu2 = 0.01;
  double mu3 = 0.1;
  double excellent_threshold_dbm = -80.0;
  double mediocre_threshold_dbm = -100.0;
  double terminal_bonus = 200.0;
  double collision_penalty = -200.0;
};

struct EnvConfig {
  double step_scale = 20.83;  // meters per unit action, 75 km/h at a 1 s tick
  double arrival_radius = 10.0;
  double obstacle_max_range = 50.0;
  int obstacle_n_rays = 16;
  RewardConfig reward;
};

struct EnvState {
  Vec3 position;
  Vec3 velocity;             // meters per step
  ObstacleReading obstacle;  // c_t and theta_t
  int serving_gbs = 0;
  int step_index = 0;
  double dist_to_dest = 0.0;
  double serving_rsrp_dbm = 0.0;
};

// Continuous delta is clamped componentwise to [-1, 1] before scaling.
struct ActionCommand {
  Vec3 delta;
  int next_gbs = 0;
};

struct StepOutcome {
  EnvState next_state;
  double reward = 0.0;
  bool done = false;
  TerminalKind terminal_kind = TerminalKind::none;
  bool handover_occurred = false;
};

RsrpBand classify_rsrp(double rsrp_dbm, const RewardConfig& cfg);

// Banded reward: excellent -> mu1*(d_prev - d_next); mediocre adds
// mu2*rsrp_next; poor -> mu3*rsrp_next alone.
double reward(double d_prev, double d_next, double rsrp_next_dbm,
              const RewardConfig& cfg);

class UavEnv {
 public:
  UavEnv(const Scenario& scenario, const EnvConfig& cfg);

  EnvState reset(std::uint64_t seed);

  // Throws std::logic_error when called on a terminated episode.
  StepOutcome step(const ActionCommand& action);

  // Fixed-length vector: position (normalized by extents), velocity /
  // step_scale, obstacle distance / max_range, obstacle direction, serving
  // one-hot over M, and the destination-relative vector normalized by the
  // initial straight-line distance (clamped to [-1, 1]).
  std::vector<double> observe() const;
  int observation_size() const { return 13 + n_gbs(); }

  const EnvState& state() const { return state_; }
  bool done() const { return done_; }
  TerminalKind terminal_kind() const { return terminal_; }
  int n_gbs() const { return static_cast<int>(scenario_->gbs.size()); }
  const Scenario& scenario() const { return *scenario_; }
  const EnvConfig& config() const { return cfg_; }

 private:
  const Scenario* scenario_;
  EnvConfig cfg_;
  EnvState state_;
  double initial_dist_ = 1.0;
  bool done_ = true;
  TerminalKind terminal_ = TerminalKind::none;
};

}  // namespace uavsim
