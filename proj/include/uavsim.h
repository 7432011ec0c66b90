/* C API for the uavsim core: connectivity-aware UAV path-planning simulator,
 * PPO trainer and evaluation harness behind opaque handles and status codes.
 * All functions return UAVSIM_OK on success; uavsim_last_error() describes
 * the most recent failure on the calling thread. Strings returned through
 * char** out-parameters are heap-allocated JSON and must be released with
 * uavsim_string_free(). */

#ifndef UAVSIM_H
#define UAVSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uavsim_status {
  UAVSIM_OK = 0,
  UAVSIM_ERR_INVALID_ARGUMENT = 1,
  UAVSIM_ERR_IO = 2,
  UAVSIM_ERR_PARSE = 3,
  UAVSIM_ERR_STATE = 4,
  UAVSIM_ERR_INTERNAL = 5
} uavsim_status;

typedef struct uavsim_scenario uavsim_scenario;
typedef struct uavsim_env uavsim_env;
typedef struct uavsim_agent uavsim_agent;

const char* uavsim_version(void);
/* Message for the last failing call on this thread; empty string if none. */
const char* uavsim_last_error(void);
void uavsim_string_free(char* s);

/* ---- scenario ---- */

uavsim_status uavsim_scenario_load(const char* path, uavsim_scenario** out);
uavsim_status uavsim_scenario_save(const uavsim_scenario* s, const char* path);
/* params_json keys (all optional): area_w, area_h, n_buildings, height_min,
 * height_max, n_gbs, micro_fraction, z_min, z_max, seed. */
uavsim_status uavsim_scenario_generate(const char* params_json,
                                       uavsim_scenario** out);
uavsim_status uavsim_scenario_from_json(const char* json_text,
                                        uavsim_scenario** out);
uavsim_status uavsim_scenario_info(const uavsim_scenario* s, char** out_json);
void uavsim_scenario_free(uavsim_scenario* s);

/* ---- radio queries ---- */

uavsim_status uavsim_rsrp(const uavsim_scenario* s, double x, double y,
                          double z, int gbs_id, double* out_dbm);
uavsim_status uavsim_best_gbs(const uavsim_scenario* s, double x, double y,
                              double z, int* out_id, double* out_dbm);

/* Writes coverage_z<alt>.csv/.pgm per requested altitude into out_dir.
 * options_json: {"altitudes":[...], "cell_size":10.0, "formats":["csv","pgm"],
 * "workers":1}. Result lists written files. */
uavsim_status uavsim_coverage(const uavsim_scenario* s,
                              const char* options_json, const char* out_dir,
                              char** out_result_json);

/* ---- environment ---- */

typedef struct uavsim_step_result {
  double reward;
  int done;          /* 0/1 */
  int terminal_kind; /* 0 none, 1 reached, 2 collided, 3 out_of_bounds,
                        4 timeout */
  int handover;      /* 0/1 */
  int serving_gbs;
  double rsrp_dbm;
  double position[3];
  double dist_to_dest;
} uavsim_step_result;

/* env_cfg_json may be NULL for defaults; see the experiment config "env"
 * block for keys. */
uavsim_status uavsim_env_create(const uavsim_scenario* s,
                                const char* env_cfg_json, uavsim_env** out);
uavsim_status uavsim_env_reset(uavsim_env* env, uint64_t seed);
uavsim_status uavsim_env_step(uavsim_env* env, const double delta[3],
                              int next_gbs_id, uavsim_step_result* out);
uavsim_status uavsim_env_observation_size(const uavsim_env* env, int* out);
uavsim_status uavsim_env_observe(const uavsim_env* env, double* buf,
                                 size_t buf_len, size_t* out_len);
void uavsim_env_free(uavsim_env* env);

/* ---- agents / training / evaluation ---- */

uavsim_status uavsim_agent_load(const char* checkpoint_path,
                                uavsim_agent** out);
/* kind: "random" builds a checkpoint-free random agent for a scenario. */
uavsim_status uavsim_agent_random(const uavsim_scenario* s,
                                  uavsim_agent** out);
uavsim_status uavsim_agent_kind(const uavsim_agent* a, char** out_json);
/* deterministic != 0 takes distribution modes; otherwise samples with seed.
 * Baseline agents have no categorical head: *out_gbs_slot is -1 and the
 * caller picks the serving cell (e.g. via an A3 rule over RSRP queries). */
uavsim_status uavsim_agent_act(const uavsim_agent* a, const double* obs,
                               size_t obs_len, int deterministic,
                               uint64_t seed, double out_delta[3],
                               int* out_gbs_slot);
void uavsim_agent_free(uavsim_agent* a);

/* config_json blocks: "agent" ("dupac"|"baseline"), "total_steps", "seed",
 * "workers", "env" {...}, "ppo" {...}, "a3" {...}. Writes checkpoint.bin and
 * train_log.jsonl into out_dir. */
uavsim_status uavsim_train(const uavsim_scenario* s, const char* config_json,
                           const char* out_dir, char** out_result_json);

/* config_json: "checkpoint" (or "agent":"random"), "distances", "episodes",
 * "seed", "deterministic", "write_traces", "workers", "env", "a3". Writes
 * results.csv and results.json into out_dir. */
uavsim_status uavsim_evaluate(const uavsim_scenario* s, const char* config_json,
                              const char* out_dir, char** out_result_json);

/* Per-distance deltas (A - B) of two results.csv files -> compare.csv. */
uavsim_status uavsim_compare(const char* results_csv_a,
                             const char* results_csv_b, const char* out_dir,
                             char** out_result_json);

/* Runs the invariant/oracle suite; result lists each check with pass/fail.
 * *out_all_passed is 1 when every check passed. */
uavsim_status uavsim_validate(uint64_t seed, int scale, char** out_report_json,
                              int* out_all_passed);

/* SHA-256 of a file, hex into out_hex (>= 65 bytes). */
uavsim_status uavsim_hash_file(const char* path, char* out_hex,
                               size_t out_len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* UAVSIM_H */
