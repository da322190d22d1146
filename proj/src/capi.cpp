// SPDX-License-Identifier: Apache-2.0
//
// statmap: statistical radio maps for reliable rate selection
// Copyright (C) 2026 The statmap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "statmap/statmap.h"

#include "statmap/errors.hpp"
#include "statmap/harness.hpp"
#include "statmap/io.hpp"
#include "statmap/rateselect.hpp"
#include "statmap/statistics.hpp"

#include <cstring>
#include <memory>
#include <new>
#include <string>

struct statmap_config
{
    statmap::harness::ExperimentConfig value;
};

struct statmap_dataset
{
    statmap::harness::Dataset value;
};

struct statmap_map
{
    statmap::harness::MapFile value;
};

struct statmap_chart
{
    statmap::chart::ChartModel model;
    std::vector<double> trace;
};

struct statmap_report
{
    statmap::harness::ExperimentReport value;
};

namespace
{
    thread_local std::string g_last_error;

    statmap_status fail(statmap_status s, const char *msg)
    {
        g_last_error = msg;
        return s;
    }

    template <class F>
    statmap_status guarded(F &&fn) noexcept
    {
        try
        {
            g_last_error.clear();
            fn();
            return STATMAP_OK;
        }
        catch (const statmap::DomainError &e)
        {
            return fail(STATMAP_ERR_DOMAIN, e.what());
        }
        catch (const statmap::ConfigError &e)
        {
            return fail(STATMAP_ERR_CONFIG, e.what());
        }
        catch (const statmap::InsufficientSamples &e)
        {
            return fail(STATMAP_ERR_INSUFFICIENT_SAMPLES, e.what());
        }
        catch (const statmap::NumericalError &e)
        {
            return fail(STATMAP_ERR_NUMERICAL, e.what());
        }
        catch (const statmap::ParseError &e)
        {
            return fail(STATMAP_ERR_PARSE, e.what());
        }
        catch (const statmap::IoError &e)
        {
            return fail(STATMAP_ERR_IO, e.what());
        }
        catch (const std::bad_alloc &)
        {
            return fail(STATMAP_ERR_INTERNAL, "out of memory");
        }
        catch (const std::exception &e)
        {
            return fail(STATMAP_ERR_INTERNAL, e.what());
        }
        catch (...)
        {
            return fail(STATMAP_ERR_INTERNAL, "unknown error");
        }
    }

    template <class... P>
    bool any_null(P *...p)
    {
        return ((p == nullptr) || ...);
    }

#define STATMAP_REQUIRE(...)                                                   \
    do                                                                         \
    {                                                                          \
        if (any_null(__VA_ARGS__))                                             \
            return fail(STATMAP_ERR_NULL_ARGUMENT, "null argument");           \
    } while (0)

    statmap::rateselect::Policy to_policy(statmap_policy p)
    {
        switch (p)
        {
        case STATMAP_POLICY_MAP_QUANTILE:
            return statmap::rateselect::Policy::map_quantile;
        case STATMAP_POLICY_NEAREST_NEIGHBOR:
            return statmap::rateselect::Policy::nearest_neighbor;
        }
        throw statmap::ConfigError("unknown policy " + std::to_string(static_cast<int>(p)));
    }
}

extern "C"
{
    const char *statmap_version(void) { return "1.0.0"; }

    const char *statmap_status_name(statmap_status s)
    {
        switch (s)
        {
        case STATMAP_OK:
            return "ok";
        case STATMAP_ERR_CONFIG:
            return "config error";
        case STATMAP_ERR_DOMAIN:
            return "domain error";
        case STATMAP_ERR_INSUFFICIENT_SAMPLES:
            return "insufficient samples";
        case STATMAP_ERR_NUMERICAL:
            return "numerical error";
        case STATMAP_ERR_PARSE:
            return "parse error";
        case STATMAP_ERR_IO:
            return "i/o error";
        case STATMAP_ERR_NULL_ARGUMENT:
            return "null argument";
        case STATMAP_ERR_INTERNAL:
            return "internal error";
        }
        return "unknown status";
    }

    const char *statmap_last_error(void) { return g_last_error.c_str(); }

    statmap_status statmap_config_default(statmap_config **out)
    {
        STATMAP_REQUIRE(out);
        return guarded([&] { *out = new statmap_config{}; });
    }

    statmap_status statmap_config_load(const char *path, statmap_config **out)
    {
        STATMAP_REQUIRE(path, out);
        return guarded([&] {
            auto c = std::make_unique<statmap_config>();
            c->value = statmap::harness::load_config(path);
            *out = c.release();
        });
    }

    statmap_status statmap_config_from_json(const char *json, statmap_config **out)
    {
        STATMAP_REQUIRE(json, out);
        return guarded([&] {
            nlohmann::json j;
            try
            {
                j = nlohmann::json::parse(json);
            }
            catch (const nlohmann::json::parse_error &e)
            {
                throw statmap::ConfigError(std::string("config: ") + e.what());
            }
            auto c = std::make_unique<statmap_config>();
            c->value = statmap::harness::config_from_json(j);
            *out = c.release();
        });
    }

    statmap_status statmap_config_set_seed(statmap_config *config, uint64_t seed)
    {
        STATMAP_REQUIRE(config);
        config->value.seed = seed;
        return STATMAP_OK;
    }

    statmap_status statmap_config_apply_full_scale(statmap_config *config)
    {
        STATMAP_REQUIRE(config);
        return guarded([&] { config->value.apply_full_scale(); });
    }

    statmap_status statmap_config_validate(const statmap_config *config)
    {
        STATMAP_REQUIRE(config);
        return guarded([&] { config->value.validate(); });
    }

    statmap_status statmap_config_delta(const statmap_config *config, double *delta)
    {
        STATMAP_REQUIRE(config, delta);
        *delta = config->value.delta;
        return STATMAP_OK;
    }

    void statmap_config_free(statmap_config *config) { delete config; }

    statmap_status statmap_simulate(const statmap_config *config, statmap_dataset **out)
    {
        STATMAP_REQUIRE(config, out);
        return guarded([&] {
            auto d = std::make_unique<statmap_dataset>();
            d->value = statmap::harness::simulate_dataset(config->value, config->value.seed);
            *out = d.release();
        });
    }

    statmap_status statmap_dataset_save(const statmap_dataset *dataset, const char *path)
    {
        STATMAP_REQUIRE(dataset, path);
        return guarded([&] { statmap::io::save_dataset(dataset->value, path); });
    }

    statmap_status statmap_dataset_load(const char *path, statmap_dataset **out)
    {
        STATMAP_REQUIRE(path, out);
        return guarded([&] {
            auto d = std::make_unique<statmap_dataset>();
            d->value = statmap::io::load_dataset(path);
            *out = d.release();
        });
    }

    statmap_status statmap_dataset_size(const statmap_dataset *dataset, size_t *out)
    {
        STATMAP_REQUIRE(dataset, out);
        *out = dataset->value.users.size();
        return STATMAP_OK;
    }

    void statmap_dataset_free(statmap_dataset *dataset) { delete dataset; }

    statmap_status statmap_chart_train(const statmap_config *config, const statmap_dataset *dataset,
                                       statmap_chart **out)
    {
        STATMAP_REQUIRE(config, dataset, out);
        return guarded([&] {
            auto t = statmap::harness::train_chart(config->value, dataset->value, config->value.seed);
            *out = new statmap_chart{std::move(t.result.model), std::move(t.result.epoch_loss)};
        });
    }

    statmap_status statmap_chart_save(const statmap_chart *chart, const char *path)
    {
        STATMAP_REQUIRE(chart, path);
        return guarded([&] { statmap::io::save_chart(chart->model, path); });
    }

    statmap_status statmap_chart_load(const char *path, statmap_chart **out)
    {
        STATMAP_REQUIRE(path, out);
        return guarded([&] { *out = new statmap_chart{statmap::io::load_chart(path), {}}; });
    }

    statmap_status statmap_chart_trace(const statmap_chart *chart, double *values, size_t capacity, size_t *length)
    {
        STATMAP_REQUIRE(chart, length);
        *length = chart->trace.size();
        if (values != nullptr)
            std::memcpy(values, chart->trace.data(), std::min(capacity, chart->trace.size()) * sizeof(double));
        return STATMAP_OK;
    }

    statmap_status statmap_chart_save_trace(const statmap_chart *chart, const char *path)
    {
        STATMAP_REQUIRE(chart, path);
        return guarded([&] { statmap::harness::write_text_file(path, statmap::chart::trace_csv(chart->trace)); });
    }

    void statmap_chart_free(statmap_chart *chart) { delete chart; }

    statmap_status statmap_map_fit(const statmap_config *config, const statmap_dataset *dataset,
                                   const statmap_chart *chart, statmap_map **out)
    {
        STATMAP_REQUIRE(config, dataset, out);
        return guarded([&] {
            const auto &c = config->value;
            auto m = chart ? statmap::harness::fit_latent_map(c, dataset->value, chart->model, c.seed)
                           : statmap::harness::fit_location_map(c, dataset->value, c.seed);
            *out = new statmap_map{std::move(m)};
        });
    }

    statmap_status statmap_map_save(const statmap_map *map, const char *path)
    {
        STATMAP_REQUIRE(map, path);
        return guarded([&] { statmap::io::save_map(map->value, path); });
    }

    statmap_status statmap_map_load(const char *path, statmap_map **out)
    {
        STATMAP_REQUIRE(path, out);
        return guarded([&] { *out = new statmap_map{statmap::io::load_map(path)}; });
    }

    statmap_status statmap_map_predict(const statmap_map *map, double x, double y, double *mean, double *variance)
    {
        STATMAP_REQUIRE(map, mean, variance);
        return guarded([&] {
            const auto p = map->value.map.predict({x, y});
            *mean = p.mean;
            *variance = p.variance;
        });
    }

    statmap_status statmap_map_hyperparams(const statmap_map *map, double *prior_mean, double *signal_var,
                                           double *length_scale, double *noise_var)
    {
        STATMAP_REQUIRE(map, prior_mean, signal_var, length_scale, noise_var);
        const auto &h = map->value.map.hyper();
        *prior_mean = h.prior_mean;
        *signal_var = h.signal_var;
        *length_scale = h.length_scale;
        *noise_var = h.noise_var;
        return STATMAP_OK;
    }

    void statmap_map_free(statmap_map *map) { delete map; }

    statmap_status statmap_select_rate(const statmap_map *map, statmap_policy policy, double x, double y,
                                       double delta, double *rate)
    {
        STATMAP_REQUIRE(map, rate);
        return guarded([&] {
            namespace rs = statmap::rateselect;
            const auto p = to_policy(policy);
            *rate = p == rs::Policy::map_quantile ? rs::select_rate_map(map->value.map.predict({x, y}), delta).rate
                                                  : rs::select_rate_baseline(map->value.map.train(), {x, y}).rate;
        });
    }

    statmap_status statmap_select_rates_file(const statmap_map *map, const char *queries_path, double delta,
                                             const char *out_path)
    {
        STATMAP_REQUIRE(map, queries_path, out_path);
        return guarded([&] {
            const auto q = statmap::harness::parse_queries_csv(statmap::harness::read_text_file(queries_path));
            statmap::harness::write_text_file(out_path, statmap::harness::select_rates_csv(map->value, q, delta));
        });
    }

    statmap_status statmap_evaluate(const statmap_config *config, statmap_report **out)
    {
        STATMAP_REQUIRE(config, out);
        return guarded([&] { *out = new statmap_report{statmap::harness::run_experiment(config->value)}; });
    }

    statmap_status statmap_report_write(const statmap_report *report, const char *out_dir)
    {
        STATMAP_REQUIRE(report, out_dir);
        return guarded([&] { statmap::harness::write_report(report->value, out_dir); });
    }

    statmap_status statmap_report_violation_fraction(const statmap_report *report, statmap_policy policy, double *out)
    {
        STATMAP_REQUIRE(report, out);
        return guarded([&] { *out = report->value.violation_fraction(to_policy(policy)); });
    }

    statmap_status statmap_report_wall_time(const statmap_report *report, double *seconds)
    {
        STATMAP_REQUIRE(report, seconds);
        *seconds = report->value.wall_time_s;
        return STATMAP_OK;
    }

    void statmap_report_free(statmap_report *report) { delete report; }

    statmap_status statmap_mismatch_demo(const statmap_config *config, const char *out_dir)
    {
        STATMAP_REQUIRE(config, out_dir);
        return guarded([&] {
            const auto res = statmap::harness::run_mismatch_demo(config->value);
            statmap::harness::write_mismatch(res, config->value, out_dir);
        });
    }

    statmap_status statmap_empirical_quantile(const double *samples, size_t n, double epsilon, double *out)
    {
        STATMAP_REQUIRE(out);
        if (n > 0 && samples == nullptr)
            return fail(STATMAP_ERR_NULL_ARGUMENT, "null argument");
        return guarded([&] {
            if (n == 0)
                throw statmap::InsufficientSamples(0, statmap::statistics::min_samples_for_quantile(epsilon));
            const statmap::statistics::EmpiricalDistribution d(std::span<const double>(samples, n));
            *out = statmap::statistics::empirical_quantile(d, epsilon);
        });
    }

    statmap_status statmap_outage_capacity(const double *power, size_t n, double noise_power, double epsilon,
                                           double *out)
    {
        STATMAP_REQUIRE(out);
        if (n > 0 && power == nullptr)
            return fail(STATMAP_ERR_NULL_ARGUMENT, "null argument");
        return guarded([&] {
            *out = statmap::statistics::estimate_outage_capacity(std::span<const double>(power, n), noise_power, epsilon)
                       .value;
        });
    }

    statmap_status statmap_wasserstein1(const double *a, size_t na, const double *b, size_t nb, double *out)
    {
        STATMAP_REQUIRE(a, b, out);
        return guarded([&] {
            const statmap::statistics::EmpiricalDistribution da(std::span<const double>(a, na));
            const statmap::statistics::EmpiricalDistribution db(std::span<const double>(b, nb));
            *out = statmap::statistics::wasserstein1(da, db);
        });
    }

    statmap_status statmap_gaussian_quantile(double delta, double *out)
    {
        STATMAP_REQUIRE(out);
        return guarded([&] { *out = statmap::rateselect::gaussian_quantile(delta); });
    }
}
