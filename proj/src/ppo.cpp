#include "uavsim/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "uavsim/radio.hpp"
#include "uavsim/util.hpp"

namespace uavsim {

void compute_gae(const Trajectory& traj, double gamma, double lambda,
                 double bootstrap_value, std::vector<double>& advantages,
                 std::vector<double>& returns) {
  const std::size_t n = traj.size();
  if (n == 0) throw std::invalid_argument("compute_gae: empty trajectory");
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
  double next_adv = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t i = n; i-- > 0;) {
    const auto& s = traj[i];
    const double nonterminal = s.done ? 0.0 : 1.0;
    const double delta =
        s.reward + gamma * next_value * nonterminal - s.value;
    next_adv = delta + gamma * lambda * nonterminal * next_adv;
    advantages[i] = next_adv;
    returns[i] = next_adv + s.value;
    next_value = s.value;
  }
}

double clipped_objective(double ratio, double advantage, double clip_epsilon) {
  const double clipped =
      std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon) * advantage;
  return std::min(ratio * advantage, clipped);
}

std::vector<double> normalize_advantages(const std::vector<double>& adv) {
  const double n = static_cast<double>(adv.size());
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= n;
  const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
  std::vector<double> out(adv.size());
  for (std::size_t i = 0; i < adv.size(); ++i) out[i] = (adv[i] - mean) * inv_std;
  return out;
}

PpoUpdater::PpoUpdater(PolicyNet* policy, Mlp* value, const PpoConfig& cfg,
                       std::uint64_t shuffle_seed)
    : policy_(policy), value_(value), cfg_(cfg), shuffle_rng_(shuffle_seed) {
  std::vector<Tensor*> pol_params;
  for (auto& t : policy_->net.params) pol_params.push_back(&t);
  pol_params.push_back(&policy_->log_std);
  policy_adam_ = make_adam_state(pol_params);
  std::vector<Tensor*> val_params;
  for (auto& t : value_->params) val_params.push_back(&t);
  value_adam_ = make_adam_state(val_params);
}

LossReport PpoUpdater::update(const PpoBatch& batch) {
  const std::size_t n = batch.observations.size();
  if (n == 0 || batch.deltas.size() != n || batch.old_log_probs.size() != n ||
      batch.advantages.size() != n || batch.returns.size() != n ||
      batch.gbs_slots.size() != n)
    throw std::invalid_argument("ppo_update: inconsistent batch");

  // Advantage normalization over the whole batch.
  const std::vector<double> adv = normalize_advantages(batch.advantages);

  // Snapshot so a non-finite minibatch can abort without corrupting anything.
  const auto pol_snapshot = policy_->net.params;
  const auto log_std_snapshot = policy_->log_std;
  const auto val_snapshot = value_->params;
  const auto pol_adam_snapshot = policy_adam_;
  const auto val_adam_snapshot = value_adam_;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  auto pol_grads = make_grads(policy_->net);
  Tensor log_std_grad(policy_->log_std.size(), 0.0);
  auto val_grads = make_grads(*value_);

  const AdamConfig adam_cfg{cfg_.lr, cfg_.adam_beta1, cfg_.adam_beta2,
                            cfg_.adam_eps};
  std::vector<Tensor*> pol_params;
  std::vector<const Tensor*> pol_grad_ptrs;
  std::vector<Tensor*> pol_grad_mut;
  for (std::size_t i = 0; i < policy_->net.params.size(); ++i) {
    pol_params.push_back(&policy_->net.params[i]);
    pol_grad_ptrs.push_back(&pol_grads[i]);
    pol_grad_mut.push_back(&pol_grads[i]);
  }
  pol_params.push_back(&policy_->log_std);
  pol_grad_ptrs.push_back(&log_std_grad);
  pol_grad_mut.push_back(&log_std_grad);
  std::vector<Tensor*> val_params;
  std::vector<const Tensor*> val_grad_ptrs;
  std::vector<Tensor*> val_grad_mut;
  for (std::size_t i = 0; i < value_->params.size(); ++i) {
    val_params.push_back(&value_->params[i]);
    val_grad_ptrs.push_back(&val_grads[i]);
    val_grad_mut.push_back(&val_grads[i]);
  }

  LossReport report;
  double policy_loss_sum = 0.0;
  double value_loss_sum = 0.0;
  double entropy_sum = 0.0;
  std::size_t samples_seen = 0;

  const int head_size = policy_->net.output_size();
  std::vector<double> d_out(head_size);

  for (int epoch = 0; epoch < cfg_.epochs_per_update; ++epoch) {
    // Fisher-Yates with the deterministic stream
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = shuffle_rng_.uniform_int(i);
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(cfg_.minibatch_size)) {
      const std::size_t stop =
          std::min(n, start + static_cast<std::size_t>(cfg_.minibatch_size));
      const double mb_size = static_cast<double>(stop - start);
      zero_grads(pol_grads);
      std::fill(log_std_grad.begin(), log_std_grad.end(), 0.0);
      zero_grads(val_grads);
      bool finite = true;

      for (std::size_t k = start; k < stop && finite; ++k) {
        const std::size_t idx = order[k];
        const auto& obs = batch.observations[idx];

        MlpActivations pol_acts;
        const PolicyOutput out = policy_->forward_cached(obs, pol_acts);
        const double new_lp =
            policy_logprob(out, batch.deltas[idx], batch.gbs_slots[idx]);
        const double ratio = std::exp(new_lp - batch.old_log_probs[idx]);
        const double a = adv[idx];
        const double unclipped = ratio * a;
        const double clipped =
            std::clamp(ratio, 1.0 - cfg_.clip_epsilon, 1.0 + cfg_.clip_epsilon) *
            a;
        const double obj = clipped_objective(ratio, a, cfg_.clip_epsilon);
        const double entropy = policy_entropy(out);

        MlpActivations val_acts;
        const double v = mlp_forward_cached(*value_, obs, val_acts)[0];
        const double vdiff = v - batch.returns[idx];

        if (!std::isfinite(obj) || !std::isfinite(entropy) ||
            !std::isfinite(vdiff)) {
          finite = false;
          break;
        }

        policy_loss_sum += -obj;
        entropy_sum += entropy;
        value_loss_sum += vdiff * vdiff;
        ++samples_seen;

        // d(-obj)/d(new_lp): the clipped branch has zero gradient outside
        // the trust region, the unclipped branch is ratio * A.
        double dobj_dratio = 0.0;
        if (unclipped <= clipped) {
          dobj_dratio = a;
        } else if (ratio > 1.0 - cfg_.clip_epsilon &&
                   ratio < 1.0 + cfg_.clip_epsilon) {
          dobj_dratio = a;
        }
        const double d_lp = -dobj_dratio * ratio / mb_size;
        const double d_entropy = -cfg_.entropy_coef / mb_size;

        std::fill(d_out.begin(), d_out.end(), 0.0);
        Tensor d_log_std(3, 0.0);
        policy_logprob_grad(out, batch.deltas[idx], batch.gbs_slots[idx], d_lp,
                            d_out, d_log_std);
        policy_entropy_grad(out, d_entropy, d_out, d_log_std);
        mlp_backprop(policy_->net, obs, pol_acts, d_out, pol_grads);
        for (int i = 0; i < 3; ++i) log_std_grad[i] += d_log_std[i];

        const double dv = cfg_.value_coef * 2.0 * vdiff / mb_size;
        const double dv_arr[1] = {dv};
        mlp_backprop(*value_, obs, val_acts, dv_arr, val_grads);
      }

      if (!finite) {
        policy_->net.params = pol_snapshot;
        policy_->log_std = log_std_snapshot;
        value_->params = val_snapshot;
        policy_adam_ = pol_adam_snapshot;
        value_adam_ = val_adam_snapshot;
        report.aborted = true;
        report.minibatches = 0;
        return report;
      }

      clip_grad_norm(pol_grad_mut, cfg_.max_grad_norm);
      clip_grad_norm(val_grad_mut, cfg_.max_grad_norm);
      adam_update(pol_params, pol_grad_ptrs, policy_adam_, adam_cfg);
      adam_update(val_params, val_grad_ptrs, value_adam_, adam_cfg);
      for (auto& ls : policy_->log_std) ls = std::clamp(ls, -5.0, 2.0);
      ++report.minibatches;
    }
  }

  if (samples_seen > 0) {
    report.policy_loss = policy_loss_sum / static_cast<double>(samples_seen);
    report.value_loss = value_loss_sum / static_cast<double>(samples_seen);
    report.entropy = entropy_sum / static_cast<double>(samples_seen);
  }
  return report;
}

namespace {

struct EpisodeStat {
  double total_reward = 0.0;
  TerminalKind outcome = TerminalKind::none;
};

struct RunningMoments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void merge(double batch_count, double batch_mean, double batch_m2) {
    if (batch_count <= 0.0) return;
    const double total = count + batch_count;
    const double delta = batch_mean - mean;
    m2 += batch_m2 + delta * delta * count * batch_count / total;
    mean += delta * batch_count / total;
    count = total;
  }
  double stddev() const {
    if (count < 1.0) return 1.0;
    return std::sqrt(std::max(m2 / count, 1e-8));
  }
};

}  // namespace

TrainResult train(const Scenario& scenario, const EnvConfig& env_cfg,
                  const PpoConfig& cfg, AgentKind kind, long total_steps,
                  std::uint64_t seed, const A3Config& a3, int workers,
                  const std::function<void(const TrainRecord&)>& on_iteration) {
  if (kind == AgentKind::random)
    throw std::invalid_argument("train: the random agent is not trainable");
  if (cfg.num_envs < 1 || cfg.rollout_length < 1 ||
      cfg.rollout_length % cfg.num_envs != 0)
    throw std::invalid_argument(
        "train: rollout_length must be a positive multiple of num_envs");
  if (cfg.minibatch_size < 1 || cfg.minibatch_size > cfg.rollout_length)
    throw std::invalid_argument("train: bad minibatch_size");

  const int n_gbs = static_cast<int>(scenario.gbs.size());
  const int obs_dim = 13 + n_gbs;
  const int n_logits = kind == AgentKind::dupac ? n_gbs : 0;

  Rng master(seed);
  TrainResult result;
  result.agent.kind = kind;
  result.agent.obs_dim = obs_dim;
  result.agent.n_gbs = n_gbs;
  result.agent.policy =
      make_policy(obs_dim, n_logits, cfg.hidden_size, cfg.log_std_init, master);
  result.agent.value =
      make_mlp({obs_dim, cfg.hidden_size, cfg.hidden_size, 1}, master, 1.0);

  PpoUpdater updater(&result.agent.policy, &result.agent.value, cfg,
                     master.next_u64());

  const int num_envs = cfg.num_envs;
  const int steps_per_env = cfg.rollout_length / num_envs;
  const double task_range = distance_3d(scenario.source, scenario.destination);
  // each env owns a scenario copy so episode-level destination re-sampling
  // never touches the caller's object
  std::vector<Scenario> env_scenarios(static_cast<std::size_t>(num_envs),
                                      scenario);
  std::vector<Rng> env_rngs;
  env_rngs.reserve(num_envs);
  for (int i = 0; i < num_envs; ++i) env_rngs.push_back(master.fork(i));
  std::vector<UavEnv> envs;
  envs.reserve(num_envs);
  for (int i = 0; i < num_envs; ++i) envs.emplace_back(env_scenarios[i], env_cfg);
  std::vector<BaselineState> a3_states(num_envs);
  auto reset_env = [&](int i) {
    if (cfg.randomize_destination_azimuth)
      env_scenarios[i].destination =
          place_destination_at_range(env_scenarios[i], task_range, env_rngs[i]);
    envs[i].reset(0);
    a3_states[i].reset(envs[i].state().serving_gbs);
  };
  for (int i = 0; i < num_envs; ++i) reset_env(i);
  std::vector<double> episode_reward_acc(num_envs, 0.0);

  RunningMoments ret_norm;
  auto denorm = [&](double v) {
    return cfg.normalize_returns ? v * ret_norm.stddev() + ret_norm.mean : v;
  };

  const long iterations = total_steps / cfg.rollout_length;
  long steps_done = 0;

  std::vector<Trajectory> trajs(num_envs);
  std::vector<double> bootstraps(num_envs, 0.0);
  std::vector<std::vector<EpisodeStat>> env_episodes(num_envs);

  for (long iter = 1; iter <= iterations; ++iter) {
    for (auto& t : trajs) t.clear();
    for (auto& e : env_episodes) e.clear();

    parallel_for(static_cast<std::size_t>(num_envs), workers, [&](std::size_t ei) {
      auto& env = envs[ei];
      auto& rng = env_rngs[ei];
      auto& traj = trajs[ei];
      traj.reserve(steps_per_env);
      for (int t = 0; t < steps_per_env; ++t) {
        std::vector<double> obs = env.observe();
        const PolicyOutput out = result.agent.policy.forward(obs);
        const double v = denorm(mlp_forward(result.agent.value, obs)[0]);
        SampledAction act = policy_sample(out, rng);
        int serving_id;
        if (kind == AgentKind::dupac) {
          serving_id = env_scenarios[ei].gbs[act.gbs_slot].id;
        } else {
          const auto meas = all_rsrp(env_scenarios[ei], env.state().position);
          serving_id = baseline_select_gbs(a3_states[ei], meas, a3);
        }
        const StepOutcome outcome = env.step({act.delta, serving_id});
        traj.push_back({std::move(obs), act.delta, act.gbs_slot, act.log_prob,
                        outcome.reward, v, outcome.done});
        episode_reward_acc[ei] += outcome.reward;
        if (outcome.done) {
          env_episodes[ei].push_back(
              {episode_reward_acc[ei], outcome.terminal_kind});
          episode_reward_acc[ei] = 0.0;
          reset_env(static_cast<int>(ei));
        }
      }
      bootstraps[ei] =
          env.done() ? 0.0
                     : denorm(mlp_forward(result.agent.value, env.observe())[0]);
    });
    steps_done += cfg.rollout_length;

    PpoBatch batch;
    batch.observations.reserve(cfg.rollout_length);
    batch.deltas.reserve(cfg.rollout_length);
    batch.gbs_slots.reserve(cfg.rollout_length);
    batch.old_log_probs.reserve(cfg.rollout_length);
    batch.advantages.reserve(cfg.rollout_length);
    batch.returns.reserve(cfg.rollout_length);
    std::vector<double> adv, ret;
    for (int ei = 0; ei < num_envs; ++ei) {
      compute_gae(trajs[ei], cfg.gamma, cfg.gae_lambda, bootstraps[ei], adv,
                  ret);
      for (std::size_t t = 0; t < trajs[ei].size(); ++t) {
        auto& s = trajs[ei][t];
        batch.observations.push_back(std::move(s.observation));
        batch.deltas.push_back(s.delta);
        batch.gbs_slots.push_back(s.gbs_slot);
        batch.old_log_probs.push_back(s.log_prob);
        batch.advantages.push_back(adv[t]);
        batch.returns.push_back(ret[t]);
      }
    }

    if (cfg.normalize_returns) {
      const double bn = static_cast<double>(batch.returns.size());
      double bmean = 0.0;
      for (double r : batch.returns) bmean += r;
      bmean /= bn;
      double bm2 = 0.0;
      for (double r : batch.returns) bm2 += (r - bmean) * (r - bmean);
      ret_norm.merge(bn, bmean, bm2);
      const double inv = 1.0 / ret_norm.stddev();
      for (double& r : batch.returns) r = (r - ret_norm.mean) * inv;
    }

    const LossReport report = updater.update(batch);

    TrainRecord rec;
    rec.iteration = static_cast<int>(iter);
    rec.steps = steps_done;
    double reward_sum = 0.0;
    int n_ep = 0, n_reached = 0, n_collided = 0;
    for (const auto& eps : env_episodes) {
      for (const auto& e : eps) {
        reward_sum += e.total_reward;
        ++n_ep;
        if (e.outcome == TerminalKind::reached) ++n_reached;
        if (e.outcome == TerminalKind::collided) ++n_collided;
      }
    }
    if (n_ep > 0) {
      rec.mean_reward = reward_sum / n_ep;
      rec.reach_rate = static_cast<double>(n_reached) / n_ep;
      rec.collision_rate = static_cast<double>(n_collided) / n_ep;
    }
    rec.policy_loss = report.policy_loss;
    rec.value_loss = report.value_loss;
    rec.entropy = report.entropy;
    result.log.push_back(rec);
    if (on_iteration) on_iteration(rec);
  }

  result.agent.ret_count = ret_norm.count;
  result.agent.ret_mean = ret_norm.mean;
  result.agent.ret_m2 = ret_norm.m2;
  return result;
}

std::string train_record_json(const TrainRecord& rec) {
  std::string out = "{\"iteration\":" + std::to_string(rec.iteration);
  out += ",\"steps\":" + std::to_string(rec.steps);
  out += ",\"mean_reward\":";
  out += rec.mean_reward ? format_double(*rec.mean_reward) : "null";
  out += ",\"reach_rate\":" + format_double(rec.reach_rate);
  out += ",\"collision_rate\":" + format_double(rec.collision_rate);
  out += ",\"policy_loss\":" + format_double(rec.policy_loss);
  out += ",\"value_loss\":" + format_double(rec.value_loss);
  out += ",\"entropy\":" + format_double(rec.entropy);
  out += "}";
  return out;
}

}  // namespace uavsim
