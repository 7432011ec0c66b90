#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavsim/baseline.hpp"
#include "uavsim/env.hpp"
#include "uavsim/policy.hpp"

namespace uavsim {

struct EpisodeMetrics {
  double path_length = 0.0;
  double straight_line = 0.0;
  double extra_distance_ratio = 0.0;  // path/straight - 1
  double excellent_frac = 0.0;
  double mediocre_frac = 0.0;
  double poor_frac = 0.0;
  double mean_rsrp_dbm = 0.0;
  int handovers = 0;
  TerminalKind outcome = TerminalKind::none;
  int steps = 0;
};

struct StepTraceEntry {
  int step = 0;
  Vec3 position;
  int serving_gbs = 0;
  double rsrp_dbm = 0.0;
  double reward = 0.0;
};

struct RunEpisodeResult {
  EpisodeMetrics metrics;
  std::vector<StepTraceEntry> trace;
};

// Deterministic mode takes distribution modes (tanh(mean), argmax); the
// random agent draws uniform deltas and GBS slots from the episode seed.
RunEpisodeResult run_episode(const Scenario& scenario, const EnvConfig& env_cfg,
                             const Agent& agent, const A3Config& a3,
                             std::uint64_t seed, bool deterministic);

struct ExperimentConfig {
  std::vector<double> distances{200.0, 400.0, 600.0, 800.0};
  int episodes_per_distance = 50;
  std::uint64_t seed = 0;
  bool deterministic = true;
  bool write_traces = false;
  EnvConfig env;
  A3Config a3;
  int workers = 1;
};

struct SweepRow {
  double distance_m = 0.0;
  std::string agent;
  int episodes = 0;
  double reach_rate = 0.0;
  double mean_extra_distance_ratio = 0.0;  // over reached episodes
  double mean_excellent_frac = 0.0;
  double mean_mediocre_frac = 0.0;
  double mean_poor_frac = 0.0;
  double mean_rsrp_dbm = 0.0;
  double mean_handovers = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::vector<EpisodeMetrics>> episodes;  // per distance
  std::vector<std::string> traces;  // jsonl per distance when write_traces
};

// For each sweep distance the destination is re-placed at that straight-line
// range from the source, azimuth re-sampled per episode from the seed.
SweepResult evaluate_sweep(const Scenario& scenario, const Agent& agent,
                           const ExperimentConfig& cfg);

std::string sweep_csv(const SweepResult& result);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);
std::string sweep_json(const SweepResult& result);
std::string trace_jsonl(const std::vector<RunEpisodeResult>& episodes,
                        double distance);

struct CompareRow {
  double distance_m = 0.0;
  double delta_extra_distance_ratio = 0.0;
  double delta_excellent_frac = 0.0;
  double delta_mean_rsrp_dbm = 0.0;
};

// Per-distance deltas a - b; throws std::invalid_argument on grid mismatch.
std::vector<CompareRow> compare(const std::vector<SweepRow>& a,
                                const std::vector<SweepRow>& b);
std::string compare_csv(const std::vector<CompareRow>& rows);

EpisodeMetrics metrics_from_trace(const std::vector<StepTraceEntry>& trace,
                                  double straight_line, TerminalKind outcome,
                                  const RewardConfig& reward_cfg);

}  // namespace uavsim
