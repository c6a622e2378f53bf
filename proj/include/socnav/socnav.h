#ifndef SOCNAV_SOCNAV_H
#define SOCNAV_SOCNAV_H

#include <stddef.h>
#include <stdint.h>

#if defined(SOCNAV_BUILDING)
#define SOCNAV_API __attribute__((visibility("default")))
#else
#define SOCNAV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum socnav_status {
  SOCNAV_OK = 0,
  SOCNAV_ERR_ARGUMENT = 1, /* null handle or invalid argument */
  SOCNAV_ERR_CONFIG = 2,
  SOCNAV_ERR_IO = 3,
  SOCNAV_ERR_PARSE = 4,
  SOCNAV_ERR_RUNTIME = 5
} socnav_status;

typedef struct socnav_config socnav_config;
typedef struct socnav_dataset socnav_dataset;
typedef struct socnav_policy socnav_policy;
typedef struct socnav_report socnav_report;
typedef struct socnav_trajectories socnav_trajectories;

/* Message of the last failed call on this thread; "" after a success. */
SOCNAV_API const char* socnav_last_error(void);
SOCNAV_API const char* socnav_version(void);

/* Configuration */
SOCNAV_API socnav_status socnav_config_default(socnav_config** out);
SOCNAV_API socnav_status socnav_config_load(const char* path, socnav_config** out);
SOCNAV_API socnav_status socnav_config_save(const socnav_config* cfg, const char* path);
SOCNAV_API socnav_status socnav_config_set_seed(socnav_config* cfg, uint64_t seed);
SOCNAV_API socnav_status socnav_config_get_seed(const socnav_config* cfg, uint64_t* seed);
SOCNAV_API void socnav_config_free(socnav_config* cfg);

/* Expert dataset */
SOCNAV_API socnav_status socnav_dataset_generate(const socnav_config* cfg, socnav_dataset** out);
SOCNAV_API socnav_status socnav_dataset_load(const char* path, socnav_dataset** out);
SOCNAV_API socnav_status socnav_dataset_save(const socnav_dataset* d, const char* path);
SOCNAV_API socnav_status socnav_dataset_size(const socnav_dataset* d, size_t* size);
/* Uses the configured eval_count and the split seed derived from the config seed. */
SOCNAV_API socnav_status socnav_dataset_split(const socnav_config* cfg, const socnav_dataset* d,
                                              socnav_dataset** train, socnav_dataset** eval);
SOCNAV_API void socnav_dataset_free(socnav_dataset* d);

/* Policies and training. Optional output paths may be NULL. */
SOCNAV_API socnav_status socnav_bc_train(const socnav_config* cfg, const socnav_dataset* train,
                                         const socnav_dataset* eval, const char* loss_csv_path,
                                         socnav_policy** out);
SOCNAV_API socnav_status socnav_gail_train(const socnav_config* cfg, const socnav_policy* initial,
                                           const socnav_dataset* expert, const char* diagnostics_csv_path,
                                           const char* critic_path, socnav_policy** out);
SOCNAV_API socnav_status socnav_policy_load(const char* path, socnav_policy** out);
SOCNAV_API socnav_status socnav_policy_save(const socnav_policy* p, const char* path);
SOCNAV_API void socnav_policy_free(socnav_policy* p);

/* Evaluation. `trajectories` may be NULL. */
SOCNAV_API socnav_status socnav_eval_run(const socnav_config* cfg, const socnav_policy* const* policies,
                                         const char* const* tags, size_t count, socnav_report** report,
                                         socnav_trajectories** trajectories);
/* Expert rollouts on the evaluation seed ladder. */
SOCNAV_API socnav_status socnav_simulate_expert(const socnav_config* cfg, socnav_report** report,
                                                socnav_trajectories** trajectories);
SOCNAV_API socnav_status socnav_report_normalize(socnav_report* report, const char* reference_tag);
SOCNAV_API socnav_status socnav_report_save_csv(const socnav_report* report, const char* episodes_path,
                                                const char* summary_path);
SOCNAV_API socnav_status socnav_report_goal_rate(const socnav_report* report, const char* tag, double* rate);
/* Mean min-dist of `tag` in the named scenario. */
SOCNAV_API socnav_status socnav_report_min_dist(const socnav_report* report, const char* tag,
                                                const char* scenario, double* mean);
SOCNAV_API void socnav_report_free(socnav_report* report);

SOCNAV_API socnav_status socnav_trajectories_load(const char* path, socnav_trajectories** out);
SOCNAV_API socnav_status socnav_trajectories_save(const socnav_trajectories* t, const char* path);
SOCNAV_API socnav_status socnav_trajectories_count(const socnav_trajectories* t, size_t* count);
SOCNAV_API socnav_status socnav_trajectories_render_svg(const socnav_trajectories* t, const char* path);
SOCNAV_API void socnav_trajectories_free(socnav_trajectories* t);

#ifdef __cplusplus
}
#endif

#endif
