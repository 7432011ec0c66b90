#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "uavsim/mlp.hpp"
#include "uavsim/vec3.hpp"

namespace uavsim {

// Hybrid action distribution: tanh-squashed diagonal Gaussian for the 3D
// movement delta plus an optional categorical head over GBS slots. gbs_logits
// is empty for continuous-only (baseline) policies.
struct PolicyOutput {
  std::array<double, 3> mean{};
  std::array<double, 3> log_std{};
  std::vector<double> gbs_logits;
};

struct PolicyNet {
  Mlp net;         // obs -> hidden -> hidden -> (3 + n_logits)
  Tensor log_std;  // 3 state-independent parameters
  int n_logits = 0;

  PolicyOutput forward(std::span<const double> obs) const;
  PolicyOutput forward_cached(std::span<const double> obs,
                              MlpActivations& acts) const;
};

PolicyNet make_policy(int obs_dim, int n_logits, int hidden, double log_std_init,
                      Rng& rng);

struct SampledAction {
  Vec3 delta;
  int gbs_slot = -1;  // -1 when the policy has no categorical head
  double log_prob = 0.0;
};

SampledAction policy_sample(const PolicyOutput& out, Rng& rng);
SampledAction policy_mode(const PolicyOutput& out);  // tanh(mean), argmax

// Exact log-density of the squashed-Gaussian x categorical product. Delta
// components are clamped to 1 - 1e-6 in magnitude before the atanh inverse.
double policy_logprob(const PolicyOutput& out, const Vec3& delta, int gbs_slot);

// Closed-form Gaussian entropy (pre-squash) plus categorical entropy.
double policy_entropy(const PolicyOutput& out);

std::vector<double> softmax(std::span<const double> logits);

// Accumulates scale * d(log_prob)/d(head outputs) into d_out (3 + n_logits,
// mean block first) and d_log_std (3).
void policy_logprob_grad(const PolicyOutput& out, const Vec3& delta,
                         int gbs_slot, double scale, std::span<double> d_out,
                         std::span<double> d_log_std);

void policy_entropy_grad(const PolicyOutput& out, double scale,
                         std::span<double> d_out, std::span<double> d_log_std);

enum class AgentKind { dupac, baseline, random };

const char* agent_kind_name(AgentKind k);
AgentKind agent_kind_from_name(const std::string& name);

// Trained artifact: policy + value nets plus the return-normalizer snapshot
// the trainer used for value regression.
struct Agent {
  AgentKind kind = AgentKind::dupac;
  int obs_dim = 0;
  int n_gbs = 0;
  PolicyNet policy;
  Mlp value;
  double ret_count = 0.0;
  double ret_mean = 0.0;
  double ret_m2 = 0.0;
};

// Flat binary checkpoint: magic/version header, layer shapes, then all
// parameters as little-endian 64-bit floats.
void save_agent(const Agent& agent, const std::string& path);
Agent load_agent(const std::string& path);

}  // namespace uavsim
