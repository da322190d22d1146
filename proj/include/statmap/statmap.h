/* SPDX-License-Identifier: Apache-2.0
 *
 * statmap: statistical radio maps for reliable rate selection
 * Copyright (C) 2026 The statmap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#ifndef STATMAP_STATMAP_H
#define STATMAP_STATMAP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(STATMAP_BUILDING_LIBRARY)
#define STATMAP_API __declspec(dllexport)
#else
#define STATMAP_API __declspec(dllimport)
#endif
#else
#define STATMAP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every function returns a status code. On failure the message is available
 * through statmap_last_error() on the calling thread until the next call. */
typedef enum statmap_status {
    STATMAP_OK = 0,
    STATMAP_ERR_CONFIG = 1,
    STATMAP_ERR_DOMAIN = 2,
    STATMAP_ERR_INSUFFICIENT_SAMPLES = 3,
    STATMAP_ERR_NUMERICAL = 4,
    STATMAP_ERR_PARSE = 5,
    STATMAP_ERR_IO = 6,
    STATMAP_ERR_NULL_ARGUMENT = 7,
    STATMAP_ERR_INTERNAL = 8
} statmap_status;

typedef enum statmap_policy {
    STATMAP_POLICY_MAP_QUANTILE = 0,
    STATMAP_POLICY_NEAREST_NEIGHBOR = 1
} statmap_policy;

typedef struct statmap_config statmap_config;
typedef struct statmap_dataset statmap_dataset;
typedef struct statmap_map statmap_map;
typedef struct statmap_chart statmap_chart;
typedef struct statmap_report statmap_report;

STATMAP_API const char *statmap_version(void);
STATMAP_API const char *statmap_status_name(statmap_status status);
STATMAP_API const char *statmap_last_error(void);

/* Configuration. Unknown JSON keys are rejected. */
STATMAP_API statmap_status statmap_config_default(statmap_config **out);
STATMAP_API statmap_status statmap_config_load(const char *path, statmap_config **out);
STATMAP_API statmap_status statmap_config_from_json(const char *json, statmap_config **out);
STATMAP_API statmap_status statmap_config_set_seed(statmap_config *config, uint64_t seed);
STATMAP_API statmap_status statmap_config_apply_full_scale(statmap_config *config);
STATMAP_API statmap_status statmap_config_validate(const statmap_config *config);
STATMAP_API statmap_status statmap_config_delta(const statmap_config *config, double *delta);
STATMAP_API void statmap_config_free(statmap_config *config);

/* Training datasets (JSON Lines on disk). */
STATMAP_API statmap_status statmap_simulate(const statmap_config *config, statmap_dataset **out);
STATMAP_API statmap_status statmap_dataset_save(const statmap_dataset *dataset, const char *path);
STATMAP_API statmap_status statmap_dataset_load(const char *path, statmap_dataset **out);
STATMAP_API statmap_status statmap_dataset_size(const statmap_dataset *dataset, size_t *out);
STATMAP_API void statmap_dataset_free(statmap_dataset *dataset);

/* Channel charts. The trace holds the mean triplet loss before training
 * followed by one entry per epoch. */
STATMAP_API statmap_status statmap_chart_train(const statmap_config *config, const statmap_dataset *dataset,
                                               statmap_chart **out);
STATMAP_API statmap_status statmap_chart_save(const statmap_chart *chart, const char *path);
STATMAP_API statmap_status statmap_chart_load(const char *path, statmap_chart **out);
STATMAP_API statmap_status statmap_chart_trace(const statmap_chart *chart, double *values, size_t capacity,
                                               size_t *length);
STATMAP_API statmap_status statmap_chart_save_trace(const statmap_chart *chart, const char *path);
STATMAP_API void statmap_chart_free(statmap_chart *chart);

/* Radio maps. With a chart the map lives in the latent space of the chart,
 * otherwise on geographic coordinates. */
STATMAP_API statmap_status statmap_map_fit(const statmap_config *config, const statmap_dataset *dataset,
                                           const statmap_chart *chart, statmap_map **out);
STATMAP_API statmap_status statmap_map_save(const statmap_map *map, const char *path);
STATMAP_API statmap_status statmap_map_load(const char *path, statmap_map **out);
STATMAP_API statmap_status statmap_map_predict(const statmap_map *map, double x, double y, double *mean,
                                               double *variance);
STATMAP_API statmap_status statmap_map_hyperparams(const statmap_map *map, double *prior_mean, double *signal_var,
                                                   double *length_scale, double *noise_var);
STATMAP_API void statmap_map_free(statmap_map *map);

STATMAP_API statmap_status statmap_select_rate(const statmap_map *map, statmap_policy policy, double x, double y,
                                               double delta, double *rate);
/* Reads `x,y` query lines and writes `x,y,rate,policy` rows for both policies. */
STATMAP_API statmap_status statmap_select_rates_file(const statmap_map *map, const char *queries_path,
                                                     double delta, const char *out_path);

/* End-to-end experiment for the configured mode. */
STATMAP_API statmap_status statmap_evaluate(const statmap_config *config, statmap_report **out);
STATMAP_API statmap_status statmap_report_write(const statmap_report *report, const char *out_dir);
STATMAP_API statmap_status statmap_report_violation_fraction(const statmap_report *report, statmap_policy policy,
                                                             double *out);
STATMAP_API statmap_status statmap_report_wall_time(const statmap_report *report, double *seconds);
STATMAP_API void statmap_report_free(statmap_report *report);

/* Parametric-fit mismatch tables written to out_dir. */
STATMAP_API statmap_status statmap_mismatch_demo(const statmap_config *config, const char *out_dir);

/* Statistics primitives. */
STATMAP_API statmap_status statmap_empirical_quantile(const double *samples, size_t n, double epsilon, double *out);
STATMAP_API statmap_status statmap_outage_capacity(const double *power, size_t n, double noise_power,
                                                   double epsilon, double *out);
STATMAP_API statmap_status statmap_wasserstein1(const double *a, size_t na, const double *b, size_t nb,
                                                double *out);
STATMAP_API statmap_status statmap_gaussian_quantile(double delta, double *out);

#ifdef __cplusplus
}
#endif

#endif
