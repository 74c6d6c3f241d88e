#ifndef NESTCTL_H
#define NESTCTL_H

/* C interface to the nestctl simulation library. All functions return a
 * status code; output strings are heap-allocated and must be released with
 * nestctl_string_free. The last error message is kept per thread. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nestctl_status {
  NESTCTL_OK = 0,
  NESTCTL_EINVAL = 1,  /* bad arguments / config rejected */
  NESTCTL_EPARSE = 2,  /* config text is not valid JSON */
  NESTCTL_ERUN = 3,    /* run aborted (e.g. disturbance cap violation) */
  NESTCTL_EINTERNAL = 4
} nestctl_status;

typedef struct nestctl_sim* nestctl_sim_t;  /* parsed scenario configuration */
typedef struct nestctl_run* nestctl_run_t;  /* finished run record */

/* Parse a JSON scenario configuration. */
int nestctl_config_parse(const char* json_text, nestctl_sim_t* out);
void nestctl_sim_free(nestctl_sim_t sim);

/* Number of seeds the config asks for. */
int nestctl_sim_seed_count(nestctl_sim_t sim, size_t* out);

/* Run one seed; pass has_seed_override = 0 to use the config's seed list
 * entry at `index`. */
int nestctl_run_scenario(nestctl_sim_t sim, size_t index, int has_seed_override,
                         uint64_t seed_override, nestctl_run_t* out);
void nestctl_run_free(nestctl_run_t run);

/* Outputs. */
int nestctl_run_csv(nestctl_run_t run, char** out);
int nestctl_run_summary_json(nestctl_run_t run, char** out);
int nestctl_run_regret(nestctl_run_t run, double* regret, double* bound);
int nestctl_run_seed(nestctl_run_t run, uint64_t* seed);

/* Named scenario presets as a JSON array of {name, description}. */
int nestctl_list_scenarios(char** out);

/* Acceptance suite; filter may be NULL or a substring of criterion names.
 * Returns NESTCTL_OK even when criteria fail; *failures carries the count. */
int nestctl_run_acceptance(const char* filter, int* failures, char** report);

const char* nestctl_last_error(void);
void nestctl_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* NESTCTL_H */
