#include "uavsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "uavsim/radio.hpp"
#include "uavsim/rng.hpp"
#include "uavsim/util.hpp"

namespace uavsim {

EpisodeMetrics metrics_from_trace(const std::vector<StepTraceEntry>& trace,
                                  double straight_line, TerminalKind outcome,
                                  const RewardConfig& reward_cfg) {
  EpisodeMetrics m;
  m.straight_line = straight_line;
  m.outcome = outcome;
  m.steps = static_cast<int>(trace.size());
  if (trace.empty()) return m;
  int prev_serving = trace.front().serving_gbs;
  Vec3 prev_pos;
  double rsrp_sum = 0.0;
  int n_exc = 0, n_med = 0, n_poor = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& t = trace[i];
    if (i > 0) {
      m.path_length += distance_3d(prev_pos, t.position);
      if (t.serving_gbs != prev_serving) ++m.handovers;
    }
    prev_pos = t.position;
    prev_serving = t.serving_gbs;
    rsrp_sum += t.rsrp_dbm;
    switch (classify_rsrp(t.rsrp_dbm, reward_cfg)) {
      case RsrpBand::excellent: ++n_exc; break;
      case RsrpBand::mediocre: ++n_med; break;
      case RsrpBand::poor: ++n_poor; break;
    }
  }
  const double n = static_cast<double>(trace.size());
  m.excellent_frac = n_exc / n;
  m.mediocre_frac = n_med / n;
  m.poor_frac = n_poor / n;
  m.mean_rsrp_dbm = rsrp_sum / n;
  m.extra_distance_ratio =
      straight_line > 0.0 ? m.path_length / straight_line - 1.0 : 0.0;
  return m;
}

RunEpisodeResult run_episode(const Scenario& scenario, const EnvConfig& env_cfg,
                             const Agent& agent, const A3Config& a3,
                             std::uint64_t seed, bool deterministic) {
  if (agent.kind != AgentKind::random &&
      static_cast<int>(scenario.gbs.size()) != agent.n_gbs)
    throw std::invalid_argument(
        "run_episode: agent was trained for a different GBS count");

  UavEnv env(scenario, env_cfg);
  env.reset(seed);
  Rng rng(seed);
  BaselineState a3_state;
  a3_state.reset(env.state().serving_gbs);

  RunEpisodeResult result;
  const double straight = env.state().dist_to_dest;
  // step 0 entry describes the reset state
  result.trace.push_back({0, env.state().position, env.state().serving_gbs,
                          env.state().serving_rsrp_dbm, 0.0});

  TerminalKind outcome = TerminalKind::none;
  while (!env.done()) {
    ActionCommand cmd;
    if (agent.kind == AgentKind::random) {
      cmd.delta = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                   rng.uniform(-1.0, 1.0)};
      cmd.next_gbs =
          scenario.gbs[rng.uniform_int(scenario.gbs.size())].id;
    } else {
      const auto obs = env.observe();
      const PolicyOutput out = agent.policy.forward(obs);
      const SampledAction act =
          deterministic ? policy_mode(out) : policy_sample(out, rng);
      cmd.delta = act.delta;
      if (agent.kind == AgentKind::dupac) {
        cmd.next_gbs = scenario.gbs[act.gbs_slot].id;
      } else {
        const auto meas = all_rsrp(scenario, env.state().position);
        cmd.next_gbs = baseline_select_gbs(a3_state, meas, a3);
      }
    }
    const StepOutcome step = env.step(cmd);
    result.trace.push_back({env.state().step_index, env.state().position,
                            env.state().serving_gbs,
                            env.state().serving_rsrp_dbm, step.reward});
    outcome = step.terminal_kind;
  }

  result.metrics =
      metrics_from_trace(result.trace, straight, outcome, env_cfg.reward);
  return result;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^
                    (b * 0xc2b2ae3d27d4eb4fULL) ^ 0xd6e8feb86659fd93ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

SweepResult evaluate_sweep(const Scenario& scenario, const Agent& agent,
                           const ExperimentConfig& cfg) {
  if (cfg.episodes_per_distance < 1)
    throw std::invalid_argument("evaluate_sweep: episodes must be >= 1");
  SweepResult result;
  for (std::size_t di = 0; di < cfg.distances.size(); ++di) {
    const double dist = cfg.distances[di];
    std::vector<RunEpisodeResult> episodes(cfg.episodes_per_distance);
    parallel_for(
        static_cast<std::size_t>(cfg.episodes_per_distance), cfg.workers,
        [&](std::size_t e) {
          const std::uint64_t ep_seed = mix_seed(cfg.seed, di, e);
          Rng place_rng(ep_seed);
          Scenario variant = scenario;
          variant.destination =
              place_destination_at_range(scenario, dist, place_rng);
          episodes[e] = run_episode(variant, cfg.env, agent, cfg.a3, ep_seed,
                                    cfg.deterministic);
        });

    SweepRow row;
    row.distance_m = dist;
    row.agent = agent_kind_name(agent.kind);
    row.episodes = cfg.episodes_per_distance;
    int n_reached = 0;
    double extra_sum = 0.0;
    for (const auto& ep : episodes) {
      const auto& m = ep.metrics;
      if (m.outcome == TerminalKind::reached) {
        ++n_reached;
        extra_sum += m.extra_distance_ratio;
      }
      row.mean_excellent_frac += m.excellent_frac;
      row.mean_mediocre_frac += m.mediocre_frac;
      row.mean_poor_frac += m.poor_frac;
      row.mean_rsrp_dbm += m.mean_rsrp_dbm;
      row.mean_handovers += m.handovers;
    }
    const double n = static_cast<double>(episodes.size());
    row.reach_rate = n_reached / n;
    row.mean_extra_distance_ratio =
        n_reached > 0 ? extra_sum / n_reached
                      : std::numeric_limits<double>::quiet_NaN();
    row.mean_excellent_frac /= n;
    row.mean_mediocre_frac /= n;
    row.mean_poor_frac /= n;
    row.mean_rsrp_dbm /= n;
    row.mean_handovers /= n;
    result.rows.push_back(row);

    std::vector<EpisodeMetrics> ms;
    ms.reserve(episodes.size());
    for (const auto& ep : episodes) ms.push_back(ep.metrics);
    result.episodes.push_back(std::move(ms));
    if (cfg.write_traces) result.traces.push_back(trace_jsonl(episodes, dist));
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out =
      "distance_m,agent,episodes,reach_rate,mean_extra_distance_ratio,"
      "mean_excellent_frac,mean_mediocre_frac,mean_poor_frac,mean_rsrp_dbm,"
      "mean_handovers\n";
  for (const auto& r : result.rows) {
    out += format_double(r.distance_m) + "," + r.agent + "," +
           std::to_string(r.episodes) + "," + format_double(r.reach_rate) +
           "," + format_double(r.mean_extra_distance_ratio) + "," +
           format_double(r.mean_excellent_frac) + "," +
           format_double(r.mean_mediocre_frac) + "," +
           format_double(r.mean_poor_frac) + "," +
           format_double(r.mean_rsrp_dbm) + "," +
           format_double(r.mean_handovers) + "\n";
  }
  return out;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  std::vector<SweepRow> rows;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("results csv: empty file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 10)
      throw std::runtime_error("results csv: expected 10 columns");
    SweepRow r;
    r.distance_m = std::stod(fields[0]);
    r.agent = fields[1];
    r.episodes = std::stoi(fields[2]);
    r.reach_rate = std::stod(fields[3]);
    r.mean_extra_distance_ratio = std::stod(fields[4]);
    r.mean_excellent_frac = std::stod(fields[5]);
    r.mean_mediocre_frac = std::stod(fields[6]);
    r.mean_poor_frac = std::stod(fields[7]);
    r.mean_rsrp_dbm = std::stod(fields[8]);
    r.mean_handovers = std::stod(fields[9]);
    rows.push_back(r);
  }
  return rows;
}

std::string sweep_json(const SweepResult& result) {
  auto stats = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.empty() ? 1.0 : static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= xs.empty() ? 1.0 : static_cast<double>(xs.size());
    return "{\"mean\":" + format_double(mean) +
           ",\"std\":" + format_double(std::sqrt(var)) + "}";
  };
  std::string out = "[";
  for (std::size_t di = 0; di < result.rows.size(); ++di) {
    const auto& row = result.rows[di];
    const auto& eps = result.episodes[di];
    std::vector<double> extra, exc, med, poor, rsrp, hand, steps;
    int n_reached = 0;
    for (const auto& m : eps) {
      if (m.outcome == TerminalKind::reached) {
        ++n_reached;
        extra.push_back(m.extra_distance_ratio);
      }
      exc.push_back(m.excellent_frac);
      med.push_back(m.mediocre_frac);
      poor.push_back(m.poor_frac);
      rsrp.push_back(m.mean_rsrp_dbm);
      hand.push_back(m.handovers);
      steps.push_back(m.steps);
    }
    if (di) out += ",";
    out += "{\"distance_m\":" + format_double(row.distance_m);
    out += ",\"agent\":\"" + row.agent + "\"";
    out += ",\"episodes\":" + std::to_string(row.episodes);
    out += ",\"reach_rate\":" + format_double(row.reach_rate);
    out += ",\"reached\":" + std::to_string(n_reached);
    out += ",\"extra_distance_ratio\":" + stats(extra);
    out += ",\"excellent_frac\":" + stats(exc);
    out += ",\"mediocre_frac\":" + stats(med);
    out += ",\"poor_frac\":" + stats(poor);
    out += ",\"mean_rsrp_dbm\":" + stats(rsrp);
    out += ",\"handovers\":" + stats(hand);
    out += ",\"steps\":" + stats(steps);
    out += "}";
  }
  out += "]\n";
  return out;
}

std::string trace_jsonl(const std::vector<RunEpisodeResult>& episodes,
                        double distance) {
  std::string out;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    for (const auto& t : episodes[e].trace) {
      out += "{\"distance_m\":" + format_double(distance);
      out += ",\"episode\":" + std::to_string(e);
      out += ",\"step\":" + std::to_string(t.step);
      out += ",\"position\":[" + format_double(t.position.x) + "," +
             format_double(t.position.y) + "," + format_double(t.position.z) +
             "]";
      out += ",\"serving_gbs\":" + std::to_string(t.serving_gbs);
      out += ",\"rsrp_dbm\":" + format_double(t.rsrp_dbm);
      out += ",\"reward\":" + format_double(t.reward);
      out += "}\n";
    }
  }
  return out;
}

std::vector<CompareRow> compare(const std::vector<SweepRow>& a,
                                const std::vector<SweepRow>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("compare: sweep grids differ in length");
  std::vector<CompareRow> rows;
  rows.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].distance_m != b[i].distance_m)
      throw std::invalid_argument("compare: sweep distances do not match");
    CompareRow r;
    r.distance_m = a[i].distance_m;
    r.delta_extra_distance_ratio =
        a[i].mean_extra_distance_ratio - b[i].mean_extra_distance_ratio;
    r.delta_excellent_frac =
        a[i].mean_excellent_frac - b[i].mean_excellent_frac;
    r.delta_mean_rsrp_dbm = a[i].mean_rsrp_dbm - b[i].mean_rsrp_dbm;
    rows.push_back(r);
  }
  return rows;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::string out =
      "distance_m,delta_extra_distance_ratio,delta_excellent_frac,"
      "delta_mean_rsrp_dbm\n";
  for (const auto& r : rows) {
    out += format_double(r.distance_m) + "," +
           format_double(r.delta_extra_distance_ratio) + "," +
           format_double(r.delta_excellent_frac) + "," +
           format_double(r.delta_mean_rsrp_dbm) + "\n";
  }
  return out;
}

}  // namespace uavsim
