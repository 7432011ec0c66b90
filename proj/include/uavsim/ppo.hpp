#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "uavsim/baseline.hpp"
#include "uavsim/env.hpp"
#include "uavsim/policy.hpp"

namespace uavsim {

struct PpoConfig {
  double lr = 3e-4;
  double gamma = 0.95;
  double clip_epsilon = 0.2;
  double gae_lambda = 0.95;
  int epochs_per_update = 4;
  int minibatch_size = 256;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  int rollout_length = 2048;  // env steps per update, across all instances
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // standard-practice knobs, not printed anywhere upstream
  int num_envs = 8;
  int hidden_size = 128;
  double max_grad_norm = 0.5;
  double log_std_init = -0.5;
  bool normalize_returns = true;
  // re-place the destination at the scenario's source-destination range with
  // a fresh azimuth on every episode, mirroring how the evaluation sweep
  // places its targets
  bool randomize_destination_azimuth = true;
};

struct TrajectoryStep {
  std::vector<double> observation;
  Vec3 delta;
  int gbs_slot = -1;
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
};

using Trajectory = std::vector<TrajectoryStep>;

// delta_t = r_t + gamma*V(s_{t+1})*(1-done_t) - V(s_t), advantages by the
// usual backward lambda recursion, returns = advantages + values. The value
// after the final step is bootstrap_value.
void compute_gae(const Trajectory& traj, double gamma, double lambda,
                 double bootstrap_value, std::vector<double>& advantages,
                 std::vector<double>& returns);

// min(ratio*adv, clip(ratio, 1-eps, 1+eps)*adv) — the pessimistic clipped
// surrogate for one sample.
double clipped_objective(double ratio, double advantage, double clip_epsilon);

// (a - mean) / (std + 1e-8), population statistics over the batch.
std::vector<double> normalize_advantages(const std::vector<double>& adv);

struct PpoBatch {
  std::vector<std::vector<double>> observations;
  std::vector<Vec3> deltas;
  std::vector<int> gbs_slots;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;  // raw; normalized per batch inside update
  std::vector<double> returns;     // in the value net's regression space
};

struct LossReport {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  int minibatches = 0;
  bool aborted = false;  // non-finite loss encountered; no parameters touched
};

// Owns the optimizer state for one policy/value pair.
class PpoUpdater {
 public:
  PpoUpdater(PolicyNet* policy, Mlp* value, const PpoConfig& cfg,
             std::uint64_t shuffle_seed);

  LossReport update(const PpoBatch& batch);

 private:
  PolicyNet* policy_;
  Mlp* value_;
  PpoConfig cfg_;
  AdamState policy_adam_;
  AdamState value_adam_;
  Rng shuffle_rng_;
};

struct TrainRecord {
  int iteration = 0;
  long steps = 0;  // cumulative env steps
  std::optional<double> mean_reward;  // over episodes finished this iteration
  double reach_rate = 0.0;
  double collision_rate = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

struct TrainResult {
  Agent agent;
  std::vector<TrainRecord> log;
};

// Alternates synchronous rollouts over num_envs instances with PPO updates.
// Runs floor(total_steps / rollout_length) iterations; deterministic for a
// fixed seed (worker count only distributes independent env rollouts).
TrainResult train(
    const Scenario& scenario, const EnvConfig& env_cfg, const PpoConfig& cfg,
    AgentKind kind, long total_steps, std::uint64_t seed,
    const A3Config& a3 = {}, int workers = 1,
    const std::function<void(const TrainRecord&)>& on_iteration = nullptr);

std::string train_record_json(const TrainRecord& rec);

}  // namespace uavsim
