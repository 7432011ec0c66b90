// Command-line front end over the libuavsim C API: scenario generation,
// coverage maps, PPO training, evaluation sweeps, comparisons and the
// invariant self-check suite. Every run writes a manifest (config snapshot,
// seed, artifact hashes) into the output directory.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uavsim.h"

using json = nlohmann::json;

namespace {

int g_verbosity = 0;

void info(const std::string& msg) {
  if (g_verbosity > 0) std::fprintf(stderr, "[uavsim] %s\n", msg.c_str());
}

[[noreturn]] void die_runtime(const std::string& context) {
  std::fprintf(stderr, "error: %s: %s\n", context.c_str(), uavsim_last_error());
  std::exit(2);
}

void check(uavsim_status st, const std::string& context) {
  if (st != UAVSIM_OK) die_runtime(context);
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "error: cannot open config file: %s\n", path.c_str());
    std::exit(2);
  }
  try {
    json j;
    in >> j;
    return j;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: config parse: %s\n", e.what());
    std::exit(2);
  }
}

// Seed precedence: explicit --seed flag, then UAVSIM_SEED, then config file.
uint64_t resolve_seed(const json& cfg, bool flag_given, uint64_t flag_seed) {
  if (flag_given) return flag_seed;
  if (const char* env = std::getenv("UAVSIM_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      std::fprintf(stderr, "error: UAVSIM_SEED is not a number: %s\n", env);
      std::exit(2);
    }
  }
  return cfg.value("seed", 0ULL);
}

std::string out_path(const std::string& out_dir, const std::string& name) {
  return (std::filesystem::path(out_dir) / name).string();
}

std::string hash_artifact(const std::string& path) {
  char hex[65];
  check(uavsim_hash_file(path.c_str(), hex, sizeof hex), "hashing " + path);
  return hex;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const json& config, uint64_t seed,
                    const std::vector<std::string>& artifacts) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["seed"] = seed;
  m["artifacts"] = json::object();
  for (const auto& a : artifacts)
    m["artifacts"][std::filesystem::path(a).filename().string()] =
        hash_artifact(a);
  std::filesystem::create_directories(out_dir);
  const std::string path = out_path(out_dir, "manifest.json");
  std::ofstream f(path, std::ios::binary);
  f << m.dump(2) << "\n";
  if (!f) die_runtime("writing " + path);
  info("manifest: " + path);
}

uavsim_scenario* load_scenario_or_die(const std::string& path) {
  if (path.empty()) {
    std::fprintf(stderr, "error: a scenario path is required\n");
    std::exit(2);
  }
  uavsim_scenario* s = nullptr;
  check(uavsim_scenario_load(path.c_str(), &s), "loading scenario " + path);
  return s;
}

std::vector<std::string> result_artifacts(const json& result) {
  std::vector<std::string> files;
  auto add = [&](const json& v) {
    if (v.is_string()) files.push_back(v.get<std::string>());
  };
  for (const char* key : {"checkpoint", "train_log", "results_csv",
                          "results_json", "compare_csv", "scenario"}) {
    if (result.contains(key)) add(result[key]);
  }
  if (result.contains("files"))
    for (const auto& f : result["files"]) add(f);
  if (result.contains("traces"))
    for (const auto& f : result["traces"]) add(f);
  return files;
}

json take_result(char* result_json) {
  json j = json::parse(result_json);
  uavsim_string_free(result_json);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uavsim: connectivity-aware UAV path planning simulator"};
  app.require_subcommand(1);
  app.add_flag("-v,--verbose", g_verbosity, "verbose progress on stderr");

  const int default_workers =
      std::max(1u, std::thread::hardware_concurrency());

  // ---- gen-scenario ----
  auto* gen = app.add_subcommand("gen-scenario", "generate a synthetic scenario");
  std::string gen_config, gen_out = ".";
  double gen_area_w = 1400, gen_area_h = 1400, gen_hmin = 20, gen_hmax = 80;
  double gen_micro = 0.3, gen_zmin = 30, gen_zmax = 150;
  int gen_buildings = 30, gen_gbs = 30;
  uint64_t gen_seed = 0;
  gen->add_option("--config", gen_config, "JSON config file");
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--area-w", gen_area_w, "area width (m)");
  gen->add_option("--area-h", gen_area_h, "area height (m)");
  gen->add_option("--buildings", gen_buildings, "building count");
  gen->add_option("--height-min", gen_hmin, "min building height (m)");
  gen->add_option("--height-max", gen_hmax, "max building height (m)");
  gen->add_option("--gbs", gen_gbs, "GBS count");
  gen->add_option("--micro-frac", gen_micro, "fraction of micro GBS");
  gen->add_option("--zmin", gen_zmin, "min flight altitude (m)");
  gen->add_option("--zmax", gen_zmax, "max flight altitude (m)");
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "generation seed");

  // ---- coverage ----
  auto* cov = app.add_subcommand("coverage", "compute RSRP coverage grids");
  std::string cov_config, cov_out = ".", cov_scenario;
  std::vector<double> cov_alts;
  std::vector<std::string> cov_formats;
  double cov_cell = 10.0;
  int cov_workers = default_workers;
  cov->add_option("--config", cov_config, "JSON config file");
  cov->add_option("--scenario", cov_scenario, "scenario JSON path");
  cov->add_option("--altitudes", cov_alts, "altitudes (m)")->delimiter(',');
  cov->add_option("--cell", cov_cell, "cell size (m)");
  cov->add_option("--format", cov_formats, "csv and/or pgm")->delimiter(',');
  cov->add_option("--out", cov_out, "output directory");
  cov->add_option("--workers", cov_workers, "parallel workers");

  // ---- train ----
  auto* tr = app.add_subcommand("train", "train an agent with PPO");
  std::string tr_config, tr_out = ".", tr_scenario, tr_agent;
  long tr_steps = -1;
  uint64_t tr_seed = 0;
  int tr_workers = -1;
  tr->add_option("--config", tr_config, "JSON config file");
  tr->add_option("--scenario", tr_scenario, "scenario JSON path");
  tr->add_option("--agent", tr_agent, "dupac|baseline");
  tr->add_option("--steps", tr_steps, "total environment steps");
  auto* tr_seed_opt = tr->add_option("--seed", tr_seed, "training seed");
  tr->add_option("--workers", tr_workers, "parallel rollout workers");
  tr->add_option("--out", tr_out, "output directory");

  // ---- eval ----
  auto* ev = app.add_subcommand("eval", "evaluate an agent over a distance sweep");
  std::string ev_config, ev_out = ".", ev_scenario, ev_checkpoint, ev_agent;
  std::vector<double> ev_distances;
  int ev_episodes = -1, ev_workers = -1;
  uint64_t ev_seed = 0;
  bool ev_stochastic = false, ev_traces = false;
  ev->add_option("--config", ev_config, "JSON config file");
  ev->add_option("--scenario", ev_scenario, "scenario JSON path");
  ev->add_option("--checkpoint", ev_checkpoint, "trained checkpoint path");
  ev->add_option("--agent", ev_agent, "random (checkpoint-free baseline)");
  ev->add_option("--distances", ev_distances, "sweep distances (m)")
      ->delimiter(',');
  ev->add_option("--episodes", ev_episodes, "episodes per distance");
  auto* ev_seed_opt = ev->add_option("--seed", ev_seed, "evaluation seed");
  ev->add_flag("--stochastic", ev_stochastic, "sample actions instead of modes");
  ev->add_flag("--traces", ev_traces, "write step traces (jsonl)");
  ev->add_option("--workers", ev_workers, "parallel episode workers");
  ev->add_option("--out", ev_out, "output directory");

  // ---- compare ----
  auto* cmp = app.add_subcommand("compare", "delta report between two results.csv");
  std::string cmp_a, cmp_b, cmp_out = ".";
  cmp->add_option("--a", cmp_a, "results.csv A")->required();
  cmp->add_option("--b", cmp_b, "results.csv B")->required();
  cmp->add_option("--out", cmp_out, "output directory");

  // ---- validate ----
  auto* val = app.add_subcommand("validate", "run the invariant/oracle suite");
  std::string val_out = ".";
  uint64_t val_seed = 12345;
  int val_scale = 1;
  val->add_option("--seed", val_seed, "suite seed");
  val->add_option("--scale", val_scale, "sample-count multiplier");
  val->add_option("--out", val_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  if (gen->parsed()) {
    json cfg = load_config_file(gen_config);
    auto setnum = [&](const char* key, double v, bool given) {
      if (given || !cfg.contains(key)) cfg[key] = v;
    };
    setnum("area_w", gen_area_w, gen->count("--area-w") > 0);
    setnum("area_h", gen_area_h, gen->count("--area-h") > 0);
    setnum("n_buildings", gen_buildings, gen->count("--buildings") > 0);
    setnum("height_min", gen_hmin, gen->count("--height-min") > 0);
    setnum("height_max", gen_hmax, gen->count("--height-max") > 0);
    setnum("n_gbs", gen_gbs, gen->count("--gbs") > 0);
    setnum("micro_fraction", gen_micro, gen->count("--micro-frac") > 0);
    setnum("z_min", gen_zmin, gen->count("--zmin") > 0);
    setnum("z_max", gen_zmax, gen->count("--zmax") > 0);
    const uint64_t seed = resolve_seed(cfg, gen_seed_opt->count() > 0, gen_seed);
    cfg["seed"] = seed;
    uavsim_scenario* s = nullptr;
    check(uavsim_scenario_generate(cfg.dump().c_str(), &s), "generating scenario");
    std::filesystem::create_directories(gen_out);
    const std::string path = out_path(gen_out, "scenario.json");
    check(uavsim_scenario_save(s, path.c_str()), "saving " + path);
    char* info_json = nullptr;
    check(uavsim_scenario_info(s, &info_json), "scenario info");
    std::printf("%s\n", info_json);
    uavsim_string_free(info_json);
    uavsim_scenario_free(s);
    write_manifest(gen_out, "gen-scenario", cfg, seed, {path});
    return 0;
  }

  if (cov->parsed()) {
    json cfg = load_config_file(cov_config);
    if (!cov_scenario.empty()) cfg["scenario"] = cov_scenario;
    if (!cov_alts.empty()) cfg["altitudes"] = cov_alts;
    if (cov->count("--cell") > 0 || !cfg.contains("cell_size"))
      cfg["cell_size"] = cov_cell;
    if (!cov_formats.empty()) cfg["formats"] = cov_formats;
    if (cov->count("--workers") > 0 || !cfg.contains("workers"))
      cfg["workers"] = cov_workers;
    const std::string scen_path = cfg.value("scenario", "");
    if (scen_path.empty()) {
      std::fprintf(stderr, "error: coverage needs --scenario\n");
      return 1;
    }
    uavsim_scenario* s = load_scenario_or_die(scen_path);
    char* result_json = nullptr;
    check(uavsim_coverage(s, cfg.dump().c_str(), cov_out.c_str(), &result_json),
          "computing coverage");
    uavsim_scenario_free(s);
    const json result = take_result(result_json);
    std::printf("%s\n", result.dump(2).c_str());
    write_manifest(cov_out, "coverage", cfg, 0, result_artifacts(result));
    return 0;
  }

  if (tr->parsed()) {
    json cfg = load_config_file(tr_config);
    if (!tr_scenario.empty()) cfg["scenario"] = tr_scenario;
    if (!tr_agent.empty()) cfg["agent"] = tr_agent;
    if (tr_steps >= 0) cfg["total_steps"] = tr_steps;
    if (tr_workers >= 0) cfg["workers"] = tr_workers;
    const uint64_t seed = resolve_seed(cfg, tr_seed_opt->count() > 0, tr_seed);
    cfg["seed"] = seed;
    const std::string scen_path = cfg.value("scenario", "");
    uavsim_scenario* s = load_scenario_or_die(scen_path);
    info("training " + cfg.value("agent", "dupac") + " on " + scen_path);
    char* result_json = nullptr;
    check(uavsim_train(s, cfg.dump().c_str(), tr_out.c_str(), &result_json),
          "training");
    uavsim_scenario_free(s);
    const json result = take_result(result_json);
    std::printf("%s\n", result.dump(2).c_str());
    write_manifest(tr_out, "train", cfg, seed, result_artifacts(result));
    return 0;
  }

  if (ev->parsed()) {
    json cfg = load_config_file(ev_config);
    if (!ev_scenario.empty()) cfg["scenario"] = ev_scenario;
    if (!ev_checkpoint.empty()) cfg["checkpoint"] = ev_checkpoint;
    if (!ev_agent.empty()) cfg["agent"] = ev_agent;
    if (!ev_distances.empty()) cfg["distances"] = ev_distances;
    if (ev_episodes >= 0) cfg["episodes"] = ev_episodes;
    if (ev_stochastic) cfg["deterministic"] = false;
    if (ev_traces) cfg["write_traces"] = true;
    if (ev_workers >= 0) cfg["workers"] = ev_workers;
    const uint64_t seed = resolve_seed(cfg, ev_seed_opt->count() > 0, ev_seed);
    cfg["seed"] = seed;
    const std::string scen_path = cfg.value("scenario", "");
    uavsim_scenario* s = load_scenario_or_die(scen_path);
    char* result_json = nullptr;
    check(uavsim_evaluate(s, cfg.dump().c_str(), ev_out.c_str(), &result_json),
          "evaluating");
    uavsim_scenario_free(s);
    const json result = take_result(result_json);
    std::printf("%s\n", result.dump(2).c_str());
    write_manifest(ev_out, "eval", cfg, seed, result_artifacts(result));
    return 0;
  }

  if (cmp->parsed()) {
    char* result_json = nullptr;
    check(uavsim_compare(cmp_a.c_str(), cmp_b.c_str(), cmp_out.c_str(),
                         &result_json),
          "comparing results");
    const json result = take_result(result_json);
    std::printf("%s\n", result.dump(2).c_str());
    json cfg;
    cfg["a"] = cmp_a;
    cfg["b"] = cmp_b;
    write_manifest(cmp_out, "compare", cfg, 0, result_artifacts(result));
    return 0;
  }

  if (val->parsed()) {
    char* report_json = nullptr;
    int all_passed = 0;
    check(uavsim_validate(val_seed, val_scale, &report_json, &all_passed),
          "running self-checks");
    const json report = take_result(report_json);
    for (const auto& c : report) {
      std::printf("[%s] %s%s%s\n",
                  c["passed"].get<bool>() ? "PASS" : "FAIL",
                  c["name"].get<std::string>().c_str(),
                  c["detail"].get<std::string>().empty() ? "" : ": ",
                  c["detail"].get<std::string>().c_str());
    }
    std::filesystem::create_directories(val_out);
    const std::string path = out_path(val_out, "validate_report.json");
    {
      std::ofstream f(path, std::ios::binary);
      f << report.dump(2) << "\n";
      if (!f) die_runtime("writing " + path);
    }
    json cfg;
    cfg["seed"] = val_seed;
    cfg["scale"] = val_scale;
    write_manifest(val_out, "validate", cfg, val_seed, {path});
    return all_passed ? 0 : 2;
  }

  return 1;
}
