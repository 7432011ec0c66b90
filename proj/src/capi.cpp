#include "uavsim.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "uavsim/coverage.hpp"
#include "uavsim/harness.hpp"
#include "uavsim/ppo.hpp"
#include "uavsim/radio.hpp"
#include "uavsim/selfcheck.hpp"
#include "uavsim/util.hpp"

using json = nlohmann::json;

struct uavsim_scenario {
  uavsim::Scenario s;
};

struct uavsim_env {
  uavsim::Scenario scenario;  // owned copy so the handle is self-contained
  uavsim::UavEnv env;

  uavsim_env(const uavsim::Scenario& s, const uavsim::EnvConfig& cfg)
      : scenario(s), env(scenario, cfg) {}
};

struct uavsim_agent {
  uavsim::Agent agent;
};

namespace {

thread_local std::string g_last_error;

uavsim_status classify_runtime_error(const std::string& msg) {
  if (msg.find("parse") != std::string::npos ||
      msg.find("csv") != std::string::npos ||
      msg.find("checkpoint:") != std::string::npos)
    return UAVSIM_ERR_PARSE;
  if (msg.find("open") != std::string::npos ||
      msg.find("write") != std::string::npos ||
      msg.find("file") != std::string::npos)
    return UAVSIM_ERR_IO;
  return UAVSIM_ERR_INTERNAL;
}

template <typename F>
uavsim_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return UAVSIM_OK;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return UAVSIM_ERR_INVALID_ARGUMENT;
  } catch (const std::logic_error& e) {
    g_last_error = e.what();
    return UAVSIM_ERR_STATE;
  } catch (const std::runtime_error& e) {
    g_last_error = e.what();
    return classify_runtime_error(e.what());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return UAVSIM_ERR_INTERNAL;
  }
}

void require_ptr(const void* p, const char* what) {
  if (!p) throw std::invalid_argument(std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

json parse_json(const char* text, const char* what) {
  if (!text) return json::object();
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string(what) + " parse: " + e.what());
  }
}

uavsim::EnvConfig env_config_from_json(const json& j) {
  uavsim::EnvConfig c;
  c.step_scale = j.value("step_scale", c.step_scale);
  c.arrival_radius = j.value("arrival_radius", c.arrival_radius);
  c.obstacle_max_range = j.value("obstacle_max_range", c.obstacle_max_range);
  c.obstacle_n_rays = j.value("obstacle_n_rays", c.obstacle_n_rays);
  c.reward.mu1 = j.value("mu1", c.reward.mu1);
  c.reward.mu2 = j.value("mu2", c.reward.mu2);
  c.reward.mu3 = j.value("mu3", c.reward.mu3);
  c.reward.excellent_threshold_dbm =
      j.value("excellent_threshold_dbm", c.reward.excellent_threshold_dbm);
  c.reward.mediocre_threshold_dbm =
      j.value("mediocre_threshold_dbm", c.reward.mediocre_threshold_dbm);
  c.reward.terminal_bonus = j.value("terminal_bonus", c.reward.terminal_bonus);
  c.reward.collision_penalty =
      j.value("collision_penalty", c.reward.collision_penalty);
  return c;
}

uavsim::PpoConfig ppo_config_from_json(const json& j) {
  uavsim::PpoConfig c;
  c.lr = j.value("lr", c.lr);
  c.gamma = j.value("gamma", c.gamma);
  c.clip_epsilon = j.value("clip_epsilon", c.clip_epsilon);
  c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
  c.epochs_per_update = j.value("epochs_per_update", c.epochs_per_update);
  c.minibatch_size = j.value("minibatch_size", c.minibatch_size);
  c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
  c.value_coef = j.value("value_coef", c.value_coef);
  c.rollout_length = j.value("rollout_length", c.rollout_length);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.num_envs = j.value("num_envs", c.num_envs);
  c.hidden_size = j.value("hidden_size", c.hidden_size);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  c.log_std_init = j.value("log_std_init", c.log_std_init);
  c.normalize_returns = j.value("normalize_returns", c.normalize_returns);
  return c;
}

uavsim::A3Config a3_config_from_json(const json& j) {
  uavsim::A3Config c;
  c.hysteresis_db = j.value("hysteresis_db", c.hysteresis_db);
  c.time_to_trigger = j.value("time_to_trigger", c.time_to_trigger);
  return c;
}

std::string ensure_out_dir(const char* out_dir) {
  require_ptr(out_dir, "out_dir");
  std::filesystem::create_directories(out_dir);
  return std::string(out_dir);
}

}  // namespace

extern "C" {

const char* uavsim_version(void) { return "1.0.0"; }

const char* uavsim_last_error(void) { return g_last_error.c_str(); }

void uavsim_string_free(char* s) { delete[] s; }

uavsim_status uavsim_scenario_load(const char* path, uavsim_scenario** out) {
  return guarded([&] {
    require_ptr(path, "path");
    require_ptr(out, "out");
    auto* h = new uavsim_scenario{uavsim::load_scenario(path)};
    *out = h;
  });
}

uavsim_status uavsim_scenario_save(const uavsim_scenario* s,
                                   const char* path) {
  return guarded([&] {
    require_ptr(s, "scenario");
    require_ptr(path, "path");
    uavsim::save_scenario(s->s, path);
  });
}

uavsim_status uavsim_scenario_generate(const char* params_json,
                                       uavsim_scenario** out) {
  return guarded([&] {
    require_ptr(out, "out");
    const json j = parse_json(params_json, "params");
    uavsim::ScenarioGenParams p;
    p.area_w = j.value("area_w", p.area_w);
    p.area_h = j.value("area_h", p.area_h);
    p.n_buildings = j.value("n_buildings", p.n_buildings);
    p.height_min = j.value("height_min", p.height_min);
    p.height_max = j.value("height_max", p.height_max);
    p.n_gbs = j.value("n_gbs", p.n_gbs);
    p.micro_fraction = j.value("micro_fraction", p.micro_fraction);
    p.z_min = j.value("z_min", p.z_min);
    p.z_max = j.value("z_max", p.z_max);
    const std::uint64_t seed = j.value("seed", 0ULL);
    *out = new uavsim_scenario{uavsim::generate_synthetic_scenario(p, seed)};
  });
}

uavsim_status uavsim_scenario_from_json(const char* json_text,
                                        uavsim_scenario** out) {
  return guarded([&] {
    require_ptr(json_text, "json_text");
    require_ptr(out, "out");
    *out = new uavsim_scenario{uavsim::scenario_from_json_text(json_text)};
  });
}

uavsim_status uavsim_scenario_info(const uavsim_scenario* s, char** out_json) {
  return guarded([&] {
    require_ptr(s, "scenario");
    require_ptr(out_json, "out_json");
    json j;
    j["area"] = {s->s.area_w, s->s.area_h};
    j["z_min"] = s->s.z_min;
    j["z_max"] = s->s.z_max;
    j["n_buildings"] = s->s.buildings.size();
    j["n_gbs"] = s->s.gbs.size();
    j["time_limit_steps"] = s->s.time_limit_steps;
    j["source"] = {s->s.source.x, s->s.source.y, s->s.source.z};
    j["destination"] = {s->s.destination.x, s->s.destination.y,
                        s->s.destination.z};
    j["straight_line_m"] = uavsim::distance_3d(s->s.source, s->s.destination);
    j["seed"] = s->s.seed;
    *out_json = dup_string(j.dump());
  });
}

void uavsim_scenario_free(uavsim_scenario* s) { delete s; }

uavsim_status uavsim_rsrp(const uavsim_scenario* s, double x, double y,
                          double z, int gbs_id, double* out_dbm) {
  return guarded([&] {
    require_ptr(s, "scenario");
    require_ptr(out_dbm, "out_dbm");
    const int slot = s->s.gbs_slot(gbs_id);
    *out_dbm = uavsim::rsrp_dbm(s->s, s->s.gbs[slot], {x, y, z});
  });
}

uavsim_status uavsim_best_gbs(const uavsim_scenario* s, double x, double y,
                              double z, int* out_id, double* out_dbm) {
  return guarded([&] {
    require_ptr(s, "scenario");
    require_ptr(out_id, "out_id");
    require_ptr(out_dbm, "out_dbm");
    const auto [id, val] = uavsim::best_gbs(s->s, {x, y, z});
    *out_id = id;
    *out_dbm = val;
  });
}

uavsim_status uavsim_coverage(const uavsim_scenario* s,
                              const char* options_json, const char* out_dir,
                              char** out_result_json) {
  return guarded([&] {
    require_ptr(s, "scenario");
    require_ptr(out_result_json, "out_result_json");
    const std::string dir = ensure_out_dir(out_dir);
    const json j = parse_json(options_json, "options");
    std::vector<double> altitudes = {30.0, 60.0, 100.0};
    if (j.contains("altitudes"))
      altitudes = j["altitudes"].get<std::vector<double>>();
    const double cell = j.value("cell_size", 10.0);
    std::vector<std::string> formats = {"csv", "pgm"};
    if (j.contains("formats"))
      formats = j["formats"].get<std::vector<std::string>>();
    const int workers = j.value("workers", 1);

    json result;
    result["files"] = json::array();
    result["grids"] = json::array();
    for (const double alt : altitudes) {
      const auto grid = uavsim::compute_coverage_grid(s->s, alt, cell, workers);
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "coverage_z%03d", (int)alt);
      for (const auto& f : formats) {
        const std::string path =
            dir + "/" + suffix + (f == "csv" ? ".csv" : ".pgm");
        uavsim::export_grid(
            grid, path,
            f == "csv" ? uavsim::GridFormat::csv : uavsim::GridFormat::pgm);
        result["files"].push_back(path);
      }
      result["grids"].push_back({{"altitude", alt},
                                 {"width", grid.width},
                                 {"height", grid.height},
                                 {"mean_rsrp_dbm", grid.mean_rsrp()}});
    }
    *out_result_json = dup_string(result.dump());
  });
}

uavsim_status uavsim_env_create(const uavsim_scenario* s,
                                const char* env_cfg_json, uavsim_env** out) {
  return guarded([&] {
    require_ptr(s, "scenario");
    require_ptr(out, "out");
    const auto cfg = env_config_from_json(parse_json(env_cfg_json, "env config"));
    *out = new uavsim_env(s->s, cfg);
  });
}

uavsim_status uavsim_env_reset(uavsim_env* env, uint64_t seed) {
  return guarded([&] {
    require_ptr(env, "env");
    env->env.reset(seed);
  });
}

uavsim_status uavsim_env_step(uavsim_env* env, const double delta[3],
                              int next_gbs_id, uavsim_step_result* out) {
  return guarded([&] {
    require_ptr(env, "env");
    require_ptr(delta, "delta");
    require_ptr(out, "out");
    const auto r =
        env->env.step({{delta[0], delta[1], delta[2]}, next_gbs_id});
    out->reward = r.reward;
    out->done = r.done ? 1 : 0;
    out->terminal_kind = static_cast<int>(r.terminal_kind);
    out->handover = r.handover_occurred ? 1 : 0;
    out->serving_gbs = r.next_state.serving_gbs;
    out->rsrp_dbm = r.next_state.serving_rsrp_dbm;
    out->position[0] = r.next_state.position.x;
    out->position[1] = r.next_state.position.y;
    out->position[2] = r.next_state.position.z;
    out->dist_to_dest = r.next_state.dist_to_dest;
  });
}

uavsim_status uavsim_env_observation_size(const uavsim_env* env, int* out) {
  return guarded([&] {
    require_ptr(env, "env");
    require_ptr(out, "out");
    *out = env->env.observation_size();
  });
}

uavsim_status uavsim_env_observe(const uavsim_env* env, double* buf,
                                 size_t buf_len, size_t* out_len) {
  return guarded([&] {
    require_ptr(env, "env");
    require_ptr(buf, "buf");
    const auto obs = env->env.observe();
    if (out_len) *out_len = obs.size();
    if (buf_len < obs.size())
      throw std::invalid_argument("observation buffer too small");
    std::memcpy(buf, obs.data(), obs.size() * sizeof(double));
  });
}

void uavsim_env_free(uavsim_env* env) { delete env; }

uavsim_status uavsim_agent_load(const char* checkpoint_path,
                                uavsim_agent** out) {
  return guarded([&] {
    require_ptr(checkpoint_path, "checkpoint_path");
    require_ptr(out, "out");
    *out = new uavsim_agent{uavsim::load_agent(checkpoint_path)};
  });
}

uavsim_status uavsim_agent_random(const uavsim_scenario* s,
                                  uavsim_agent** out) {
  return guarded([&] {
    require_ptr(s, "scenario");
    require_ptr(out, "out");
    uavsim::Agent a;
    a.kind = uavsim::AgentKind::random;
    a.n_gbs = static_cast<int>(s->s.gbs.size());
    a.obs_dim = 13 + a.n_gbs;
    *out = new uavsim_agent{std::move(a)};
  });
}

uavsim_status uavsim_agent_kind(const uavsim_agent* a, char** out_json) {
  return guarded([&] {
    require_ptr(a, "agent");
    require_ptr(out_json, "out_json");
    json j;
    j["kind"] = uavsim::agent_kind_name(a->agent.kind);
    j["obs_dim"] = a->agent.obs_dim;
    j["n_gbs"] = a->agent.n_gbs;
    *out_json = dup_string(j.dump());
  });
}

uavsim_status uavsim_agent_act(const uavsim_agent* a, const double* obs,
                               size_t obs_len, int deterministic,
                               uint64_t seed, double out_delta[3],
                               int* out_gbs_slot) {
  return guarded([&] {
    require_ptr(a, "agent");
    require_ptr(out_delta, "out_delta");
    require_ptr(out_gbs_slot, "out_gbs_slot");
    uavsim::Rng rng(seed);
    if (a->agent.kind == uavsim::AgentKind::random) {
      for (int i = 0; i < 3; ++i) out_delta[i] = rng.uniform(-1.0, 1.0);
      *out_gbs_slot =
          a->agent.n_gbs > 0
              ? static_cast<int>(rng.uniform_int(a->agent.n_gbs))
              : -1;
      return;
    }
    require_ptr(obs, "obs");
    if (static_cast<int>(obs_len) != a->agent.obs_dim)
      throw std::invalid_argument("observation length mismatch");
    const auto out = a->agent.policy.forward(
        std::span<const double>(obs, obs_len));
    const auto act = deterministic ? uavsim::policy_mode(out)
                                   : uavsim::policy_sample(out, rng);
    out_delta[0] = act.delta.x;
    out_delta[1] = act.delta.y;
    out_delta[2] = act.delta.z;
    *out_gbs_slot = act.gbs_slot;
  });
}

void uavsim_agent_free(uavsim_agent* a) { delete a; }

uavsim_status uavsim_train(const uavsim_scenario* s, const char* config_json,
                           const char* out_dir, char** out_result_json) {
  return guarded([&] {
    require_ptr(s, "scenario");
    require_ptr(out_result_json, "out_result_json");
    const std::string dir = ensure_out_dir(out_dir);
    const json j = parse_json(config_json, "train config");
    const auto kind = uavsim::agent_kind_from_name(j.value("agent", "dupac"));
    const long total_steps = j.value("total_steps", 200000L);
    const std::uint64_t seed = j.value("seed", 0ULL);
    const int workers = j.value("workers", 1);
    const auto env_cfg = env_config_from_json(j.value("env", json::object()));
    const auto ppo_cfg = ppo_config_from_json(j.value("ppo", json::object()));
    const auto a3 = a3_config_from_json(j.value("a3", json::object()));

    std::string log_text;
    const auto result = uavsim::train(
        s->s, env_cfg, ppo_cfg, kind, total_steps, seed, a3, workers,
        [&](const uavsim::TrainRecord& rec) {
          log_text += uavsim::train_record_json(rec) + "\n";
        });

    const std::string ckpt = dir + "/checkpoint.bin";
    const std::string log_path = dir + "/train_log.jsonl";
    uavsim::save_agent(result.agent, ckpt);
    uavsim::write_file(log_path, log_text);

    json out;
    out["checkpoint"] = ckpt;
    out["train_log"] = log_path;
    out["iterations"] = result.log.size();
    out["steps"] = result.log.empty() ? 0L : result.log.back().steps;
    if (!result.log.empty()) {
      const auto& last = result.log.back();
      out["final_reach_rate"] = last.reach_rate;
      out["final_collision_rate"] = last.collision_rate;
      if (last.mean_reward) out["final_mean_reward"] = *last.mean_reward;
    }
    *out_result_json = dup_string(out.dump());
  });
}

uavsim_status uavsim_evaluate(const uavsim_scenario* s,
                              const char* config_json, const char* out_dir,
                              char** out_result_json) {
  return guarded([&] {
    require_ptr(s, "scenario");
    require_ptr(out_result_json, "out_result_json");
    const std::string dir = ensure_out_dir(out_dir);
    const json j = parse_json(config_json, "eval config");

    uavsim::Agent agent;
    const std::string kind_name = j.value("agent", "");
    if (kind_name == "random") {
      agent.kind = uavsim::AgentKind::random;
      agent.n_gbs = static_cast<int>(s->s.gbs.size());
      agent.obs_dim = 13 + agent.n_gbs;
    } else {
      if (!j.contains("checkpoint"))
        throw std::invalid_argument(
            "eval config needs \"checkpoint\" (or \"agent\":\"random\")");
      agent = uavsim::load_agent(j["checkpoint"].get<std::string>());
    }

    uavsim::ExperimentConfig cfg;
    if (j.contains("distances"))
      cfg.distances = j["distances"].get<std::vector<double>>();
    cfg.episodes_per_distance = j.value("episodes", cfg.episodes_per_distance);
    cfg.seed = j.value("seed", 0ULL);
    cfg.deterministic = j.value("deterministic", true);
    cfg.write_traces = j.value("write_traces", false);
    cfg.workers = j.value("workers", 1);
    cfg.env = env_config_from_json(j.value("env", json::object()));
    cfg.a3 = a3_config_from_json(j.value("a3", json::object()));

    const auto sweep = uavsim::evaluate_sweep(s->s, agent, cfg);
    const std::string csv_path = dir + "/results.csv";
    const std::string json_path = dir + "/results.json";
    uavsim::write_file(csv_path, uavsim::sweep_csv(sweep));
    uavsim::write_file(json_path, uavsim::sweep_json(sweep));
    json out;
    out["results_csv"] = csv_path;
    out["results_json"] = json_path;
    if (cfg.write_traces) {
      out["traces"] = json::array();
      for (std::size_t di = 0; di < sweep.traces.size(); ++di) {
        char name[64];
        std::snprintf(name, sizeof name, "traces_%04d.jsonl",
                      (int)sweep.rows[di].distance_m);
        const std::string path = dir + "/" + name;
        uavsim::write_file(path, sweep.traces[di]);
        out["traces"].push_back(path);
      }
    }
    out["rows"] = json::parse(uavsim::sweep_json(sweep));
    *out_result_json = dup_string(out.dump());
  });
}

uavsim_status uavsim_compare(const char* results_csv_a,
                             const char* results_csv_b, const char* out_dir,
                             char** out_result_json) {
  return guarded([&] {
    require_ptr(results_csv_a, "results_csv_a");
    require_ptr(results_csv_b, "results_csv_b");
    require_ptr(out_result_json, "out_result_json");
    const std::string dir = ensure_out_dir(out_dir);
    const auto rows_a =
        uavsim::parse_sweep_csv(uavsim::read_file(results_csv_a));
    const auto rows_b =
        uavsim::parse_sweep_csv(uavsim::read_file(results_csv_b));
    const auto deltas = uavsim::compare(rows_a, rows_b);
    const std::string path = dir + "/compare.csv";
    uavsim::write_file(path, uavsim::compare_csv(deltas));
    json out;
    out["compare_csv"] = path;
    out["rows"] = json::array();
    for (const auto& d : deltas)
      out["rows"].push_back(
          {{"distance_m", d.distance_m},
           {"delta_extra_distance_ratio", d.delta_extra_distance_ratio},
           {"delta_excellent_frac", d.delta_excellent_frac},
           {"delta_mean_rsrp_dbm", d.delta_mean_rsrp_dbm}});
    *out_result_json = dup_string(out.dump());
  });
}

uavsim_status uavsim_validate(uint64_t seed, int scale, char** out_report_json,
                              int* out_all_passed) {
  return guarded([&] {
    require_ptr(out_report_json, "out_report_json");
    require_ptr(out_all_passed, "out_all_passed");
    const auto checks = uavsim::run_selfchecks(seed, scale < 1 ? 1 : scale);
    json out = json::array();
    bool all = true;
    for (const auto& c : checks) {
      out.push_back(
          {{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
      all = all && c.passed;
    }
    *out_all_passed = all ? 1 : 0;
    *out_report_json = dup_string(out.dump());
  });
}

uavsim_status uavsim_hash_file(const char* path, char* out_hex,
                               size_t out_len) {
  return guarded([&] {
    require_ptr(path, "path");
    require_ptr(out_hex, "out_hex");
    const std::string hex = uavsim::sha256_file_hex(path);
    if (out_len < hex.size() + 1)
      throw std::invalid_argument("hash buffer too small (need 65 bytes)");
    std::memcpy(out_hex, hex.c_str(), hex.size() + 1);
  });
}

}  // extern "C"
