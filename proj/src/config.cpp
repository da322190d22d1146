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

#include "statmap/errors.hpp"
#include "statmap/harness.hpp"
#include "statmap/statistics.hpp"

#include <cmath>
#include <set>

namespace statmap::harness
{
    using nlohmann::json;

    namespace
    {
        // Reads known keys of one JSON object and rejects the rest.
        class Reader
        {
        public:
            Reader(const json &j, std::string context) : j_(j), ctx_(std::move(context))
            {
                if (!j_.is_object())
                    throw ConfigError(ctx_ + ": expected an object");
            }

            template <class T>
            void get(const char *key, T &out)
            {
                seen_.insert(key);
                auto it = j_.find(key);
                if (it == j_.end())
                    return;
                try
                {
                    out = it->template get<T>();
                }
                catch (const json::exception &e)
                {
                    throw ConfigError(ctx_ + "." + key + ": " + e.what());
                }
            }

            const json *child(const char *key)
            {
                seen_.insert(key);
                auto it = j_.find(key);
                return it == j_.end() ? nullptr : &*it;
            }

            void finish() const
            {
                for (auto it = j_.begin(); it != j_.end(); ++it)
                    if (!seen_.count(it.key()))
                        throw ConfigError(ctx_ + ": unknown key '" + it.key() + "'");
            }

        private:
            const json &j_;
            std::string ctx_;
            std::set<std::string> seen_;
        };

        void read_band(const json &j, const std::string &ctx, propagation::BandConfig &b)
        {
            Reader r(j, ctx);
            r.get("num_antennas", b.num_antennas);
            r.get("num_subcarriers", b.num_subcarriers);
            r.get("bandwidth_hz", b.bandwidth_hz);
            r.get("carrier_wavelength", b.carrier_wavelength);
            r.get("reference_subcarrier", b.reference_subcarrier);
            r.finish();
        }

        json band_json(const propagation::BandConfig &b)
        {
            return {{"num_antennas", b.num_antennas},
                    {"num_subcarriers", b.num_subcarriers},
                    {"bandwidth_hz", b.bandwidth_hz},
                    {"carrier_wavelength", b.carrier_wavelength},
                    {"reference_subcarrier", b.reference_subcarrier}};
        }

        void read_scenario(const json &j, propagation::ScenarioConfig &s)
        {
            Reader r(j, "scenario");
            r.get("cell_side", s.cell_side);
            if (const json *bs = r.child("bs_location"))
            {
                if (!bs->is_array() || bs->size() != 3)
                    throw ConfigError("scenario.bs_location: expected [x, y, z]");
                try
                {
                    s.bs_location = {(*bs)[0].get<double>(), (*bs)[1].get<double>(), (*bs)[2].get<double>()};
                }
                catch (const json::exception &e)
                {
                    throw ConfigError(std::string("scenario.bs_location: ") + e.what());
                }
            }
            r.get("user_height", s.user_height);
            r.get("num_paths", s.num_paths);
            r.get("pathloss_exponent", s.pathloss_exponent);
            r.get("pathloss_ref_db", s.pathloss_ref_db);
            r.get("shadowing_std_db", s.shadowing_std_db);
            r.get("shadowing_decorrelation_m", s.shadowing_decorrelation_m);
            r.get("path_amp_field_std_db", s.path_amp_field_std_db);
            r.get("path_amp_decorrelation_m", s.path_amp_decorrelation_m);
            r.get("path_power_decay_db", s.path_power_decay_db);
            r.get("angle_offset_spread_deg", s.angle_offset_spread_deg);
            r.get("angle_field_std_deg", s.angle_field_std_deg);
            r.get("delay_spread_s", s.delay_spread_s);
            r.get("noise_power", s.noise_power);
            r.get("field_components", s.field_components);
            if (const json *b = r.child("band"))
                read_band(*b, "scenario.band", s.band);
            r.finish();
        }

        json scenario_json(const propagation::ScenarioConfig &s)
        {
            return {{"cell_side", s.cell_side},
                    {"bs_location", {s.bs_location.x, s.bs_location.y, s.bs_location.z}},
                    {"user_height", s.user_height},
                    {"num_paths", s.num_paths},
                    {"pathloss_exponent", s.pathloss_exponent},
                    {"pathloss_ref_db", s.pathloss_ref_db},
                    {"shadowing_std_db", s.shadowing_std_db},
                    {"shadowing_decorrelation_m", s.shadowing_decorrelation_m},
                    {"path_amp_field_std_db", s.path_amp_field_std_db},
                    {"path_amp_decorrelation_m", s.path_amp_decorrelation_m},
                    {"path_power_decay_db", s.path_power_decay_db},
                    {"angle_offset_spread_deg", s.angle_offset_spread_deg},
                    {"angle_field_std_deg", s.angle_field_std_deg},
                    {"delay_spread_s", s.delay_spread_s},
                    {"noise_power", s.noise_power},
                    {"field_components", s.field_components},
                    {"band", band_json(s.band)}};
        }

        void read_gp(const json &j, const std::string &ctx, GpOptions &g)
        {
            Reader r(j, ctx);
            r.get("restarts", g.restarts);
            r.get("max_iterations", g.max_iterations);
            r.get("fit_subsample", g.fit_subsample);
            std::string kernel(gpmap::kernel_name(g.kernel));
            r.get("kernel", kernel);
            try
            {
                g.kernel = gpmap::parse_kernel(kernel);
            }
            catch (const ConfigError &e)
            {
                throw ConfigError(ctx + ".kernel: " + e.what());
            }
            r.finish();
        }

        json gp_json(const GpOptions &g)
        {
            return {{"restarts", g.restarts},
                    {"max_iterations", g.max_iterations},
                    {"fit_subsample", g.fit_subsample},
                    {"kernel", std::string(gpmap::kernel_name(g.kernel))}};
        }

        void read_chart(const json &j, ChartOptions &c)
        {
            Reader r(j, "chart");
            r.get("n_train_users", c.n_train_users);
            r.get("n_triplets", c.n_triplets);
            r.get("close_quantile", c.close_quantile);
            r.get("far_quantile", c.far_quantile);
            r.get("reduced_subcarriers", c.reduced_subcarriers);
            r.get("hidden", c.hidden);
            r.get("margin", c.train.margin);
            r.get("step_size", c.train.step_size);
            r.get("momentum", c.train.momentum);
            r.get("epochs", c.train.epochs);
            r.get("batch", c.train.batch);
            if (const json *g = r.child("gp"))
                read_gp(*g, "chart.gp", c.gp);
            if (const json *b = r.child("csi_band"))
                read_band(*b, "chart.csi_band", c.csi_band);
            if (const json *b = r.child("power_band"))
                read_band(*b, "chart.power_band", c.power_band);
            r.finish();
        }

        void read_mismatch(const json &j, MismatchOptions &m)
        {
            Reader r(j, "mismatch");
            r.get("path_amplitudes", m.path_amplitudes);
            r.get("oracle_samples", m.oracle_samples);
            r.get("sample_sizes", m.sample_sizes);
            r.get("log_points", m.log_points);
            r.get("linear_points", m.linear_points);
            r.get("confidence", m.confidence);
            r.finish();
        }
    }

    std::size_t ExperimentConfig::effective_oracle_n() const
    {
        return oracle_n > 0 ? oracle_n : static_cast<std::size_t>(std::ceil(100.0 / epsilon - 1e-9));
    }

    std::size_t ExperimentConfig::effective_n_mc() const
    {
        return n_mc > 0 ? n_mc : static_cast<std::size_t>(std::ceil(100.0 / epsilon - 1e-9));
    }

    void ExperimentConfig::validate() const
    {
        scenario.validate();
        point_process.validate();
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw ConfigError("epsilon must lie in (0,1)");
        if (!(delta > 0.0 && delta < 1.0))
            throw ConfigError("delta must lie in (0,1)");
        if (samples_per_user < statistics::min_samples_for_quantile(epsilon))
            throw ConfigError("samples_per_user must exceed 1/epsilon (need at least " +
                              std::to_string(statistics::min_samples_for_quantile(epsilon)) + ")");
        if (n_train_users < 2 || n_test_users < 1)
            throw ConfigError("need n_train_users >= 2 and n_test_users >= 1");
        if (static_cast<double>(effective_oracle_n()) * epsilon < 100.0 * (1.0 - 1e-12))
            throw ConfigError("oracle_n must be >= 100/epsilon");
        for (const GpOptions *g : {&gp, &chart.gp})
            if (g->restarts < 1 || g->max_iterations < 1 || g->fit_subsample < 0 || g->fit_subsample == 1)
                throw ConfigError("gp: need restarts >= 1, max_iterations >= 1, fit_subsample 0 or >= 2");
        if (mode == Mode::chart)
        {
            if (chart.n_train_users < 3)
                throw ConfigError("chart.n_train_users must be >= 3");
            if (chart.n_triplets < 1)
                throw ConfigError("chart.n_triplets must be >= 1");
            if (!(chart.close_quantile > 0.0 && chart.close_quantile < chart.far_quantile && chart.far_quantile < 1.0))
                throw ConfigError("chart: need 0 < close_quantile < far_quantile < 1");
            if (chart.reduced_subcarriers < 1)
                throw ConfigError("chart.reduced_subcarriers must be >= 1");
            for (int h : chart.hidden)
                if (h < 1)
                    throw ConfigError("chart.hidden: layer sizes must be >= 1");
            if (!(chart.train.margin > 0.0) || chart.train.step_size < 0.0 || chart.train.momentum < 0.0 ||
                chart.train.momentum >= 1.0 || chart.train.epochs < 0 || chart.train.batch < 1)
                throw ConfigError("chart: invalid training options");
            auto s = scenario;
            s.band = chart.csi_band;
            s.validate();
            s.band = chart.power_band;
            s.validate();
        }
        if (mismatch.path_amplitudes.empty())
            throw ConfigError("mismatch.path_amplitudes must not be empty");
        for (double a : mismatch.path_amplitudes)
            if (!(a >= 0.0) || !std::isfinite(a))
                throw ConfigError("mismatch.path_amplitudes must be non-negative");
        if (mismatch.sample_sizes.empty() || mismatch.oracle_samples < 1 || mismatch.log_points < 2 ||
            mismatch.linear_points < 1 || !(mismatch.confidence > 0.0 && mismatch.confidence < 1.0))
            throw ConfigError("mismatch: invalid tabulation settings");
        for (auto n : mismatch.sample_sizes)
            if (n < 100)
                throw ConfigError("mismatch.sample_sizes must be >= 100 (Rician fit minimum)");
    }

    void ExperimentConfig::apply_full_scale()
    {
        epsilon = 1e-3;
        delta = 1e-3;
        n_train_users = 500;
        chart.n_train_users = 5000;
        chart.n_triplets = 20000;
        samples_per_user = 10000;
        n_test_users = 10000;
        oracle_n = 0;
        n_mc = 0;
    }

    ExperimentConfig config_from_json(const json &j)
    {
        ExperimentConfig c;
        Reader r(j, "config");
        std::string mode = "location";
        r.get("mode", mode);
        if (mode == "location")
            c.mode = Mode::location;
        else if (mode == "chart")
            c.mode = Mode::chart;
        else
            throw ConfigError("config.mode: expected \"location\" or \"chart\"");
        if (const json *s = r.child("scenario"))
            read_scenario(*s, c.scenario);
        if (const json *p = r.child("point_process"))
        {
            Reader pr(*p, "point_process");
            pr.get("parent_intensity", c.point_process.parent_intensity);
            pr.get("mean_cluster_size", c.point_process.mean_cluster_size);
            pr.get("offspring_std", c.point_process.offspring_std);
            pr.finish();
        }
        r.get("n_train_users", c.n_train_users);
        r.get("samples_per_user", c.samples_per_user);
        r.get("epsilon", c.epsilon);
        r.get("delta", c.delta);
        r.get("n_test_users", c.n_test_users);
        r.get("oracle_n", c.oracle_n);
        r.get("n_mc", c.n_mc);
        r.get("seed", c.seed);
        if (const json *g = r.child("gp"))
            read_gp(*g, "gp", c.gp);
        if (const json *ch = r.child("chart"))
            read_chart(*ch, c.chart);
        if (const json *m = r.child("mismatch"))
            read_mismatch(*m, c.mismatch);
        r.finish();
        return c;
    }

    json config_to_json(const ExperimentConfig &c)
    {
        json chart = {{"n_train_users", c.chart.n_train_users},
                      {"n_triplets", c.chart.n_triplets},
                      {"close_quantile", c.chart.close_quantile},
                      {"far_quantile", c.chart.far_quantile},
                      {"reduced_subcarriers", c.chart.reduced_subcarriers},
                      {"hidden", c.chart.hidden},
                      {"margin", c.chart.train.margin},
                      {"step_size", c.chart.train.step_size},
                      {"momentum", c.chart.train.momentum},
                      {"epochs", c.chart.train.epochs},
                      {"batch", c.chart.train.batch},
                      {"gp", gp_json(c.chart.gp)},
                      {"csi_band", band_json(c.chart.csi_band)},
                      {"power_band", band_json(c.chart.power_band)}};
        json mismatch = {{"path_amplitudes", c.mismatch.path_amplitudes},
                         {"oracle_samples", c.mismatch.oracle_samples},
                         {"sample_sizes", c.mismatch.sample_sizes},
                         {"log_points", c.mismatch.log_points},
                         {"linear_points", c.mismatch.linear_points},
                         {"confidence", c.mismatch.confidence}};
        return {{"mode", c.mode == Mode::location ? "location" : "chart"},
                {"scenario", scenario_json(c.scenario)},
                {"point_process",
                 {{"parent_intensity", c.point_process.parent_intensity},
                  {"mean_cluster_size", c.point_process.mean_cluster_size},
                  {"offspring_std", c.point_process.offspring_std}}},
                {"n_train_users", c.n_train_users},
                {"samples_per_user", c.samples_per_user},
                {"epsilon", c.epsilon},
                {"delta", c.delta},
                {"n_test_users", c.n_test_users},
                {"oracle_n", c.oracle_n},
                {"n_mc", c.n_mc},
                {"seed", c.seed},
                {"gp", gp_json(c.gp)},
                {"chart", chart},
                {"mismatch", mismatch}};
    }

    ExperimentConfig load_config(const std::string &path)
    {
        const std::string text = read_text_file(path);
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            throw ConfigError("config " + path + ": " + e.what());
        }
        return config_from_json(j);
    }
}
