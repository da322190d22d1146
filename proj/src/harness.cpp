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

#include "statmap/harness.hpp"

#include "statmap/errors.hpp"
#include "statmap/format.hpp"
#include "statmap/rng.hpp"
#include "statmap/statistics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace statmap::harness
{
    using nlohmann::json;
    namespace prop = statmap::propagation;
    namespace stats = statmap::statistics;

    namespace
    {
        // Runs one pipeline stage; failures keep their type and gain the stage name.
        template <class F>
        auto stage(const char *name, F &&fn) -> decltype(fn())
        {
            const std::string p = std::string(name) + ": ";
            try
            {
                return fn();
            }
            catch (const InsufficientSamples &e)
            {
                throw InsufficientSamples(p + e.what(), e.have(), e.required());
            }
            catch (const DomainError &e)
            {
                throw DomainError(p + e.what());
            }
            catch (const ConfigError &e)
            {
                throw ConfigError(p + e.what());
            }
            catch (const NumericalError &e)
            {
                throw NumericalError(p + e.what());
            }
            catch (const ParseError &e)
            {
                throw ParseError(p + e.what());
            }
            catch (const IoError &e)
            {
                throw IoError(p + e.what());
            }
        }

        std::vector<double> capacities(std::span<const double> power, double noise)
        {
            std::vector<double> c(power.size());
            for (std::size_t i = 0; i < power.size(); ++i)
                c[i] = stats::capacity_from_power(power[i], noise);
            return c;
        }

        gpmap::FittedMap fit_map(const GpOptions &g, const gpmap::TrainingSet &train, std::uint64_t seed)
        {
            gpmap::FitOptions o;
            o.bounds = gpmap::default_bounds(train);
            o.restarts = g.restarts;
            o.max_iterations = g.max_iterations;
            o.seed = seed;
            const std::size_t n = train.size();
            const auto m = static_cast<std::size_t>(g.fit_subsample);
            if (m == 0 || m >= n)
                return gpmap::fit(train, gpmap::default_init(train, g.kernel), o);
            gpmap::TrainingSet sub;
            for (std::size_t k = 0; k < m; ++k)
            {
                const std::size_t i = k * n / m;
                sub.coords.push_back(train.coords[i]);
                sub.targets.push_back(train.targets[i]);
            }
            const auto searched = gpmap::fit(sub, gpmap::default_init(sub, g.kernel), o);
            auto diag = searched.diagnostics();
            diag.log_marginal_likelihood = gpmap::log_marginal_likelihood(searched.hyper(), train);
            return gpmap::FittedMap(searched.hyper(), train, diag);
        }

        json hyper_json(const gpmap::FittedMap &m)
        {
            const auto &h = m.hyper();
            const auto &d = m.diagnostics();
            return {{"kernel", std::string(gpmap::kernel_name(h.family))},
                    {"prior_mean", h.prior_mean},
                    {"signal_var", h.signal_var},
                    {"length_scale", h.length_scale},
                    {"noise_var", h.noise_var},
                    {"log_marginal_likelihood", d.log_marginal_likelihood},
                    {"iterations", d.iterations},
                    {"evaluations", d.evaluations},
                    {"failed_restarts", d.failed_restarts},
                    {"iteration_cap_hit", d.iteration_cap_hit},
                    {"jitter", d.jitter}};
        }

        // Chart-mode training data with CSI reduced to features on the fly.
        struct ChartData
        {
            std::vector<prop::Location> locations;
            Eigen::MatrixXd features;
            std::vector<stats::EmpiricalDistribution> rates;
            std::vector<double> targets;
        };

        ChartTraining train_on_features(const ExperimentConfig &config, const Eigen::MatrixXd &features,
                                        std::span<const stats::EmpiricalDistribution> rates, std::uint64_t seed)
        {
            ChartTraining out;
            out.mining = stage("triplets", [&] {
                return chart::build_triplets(rates, config.chart.n_triplets, config.chart.close_quantile,
                                             config.chart.far_quantile, derive_seed(seed, "triplets"));
            });
            if (out.mining.triplets.empty())
                throw NumericalError("triplets: no eligible triplet found");
            std::vector<int> dims{static_cast<int>(features.rows())};
            dims.insert(dims.end(), config.chart.hidden.begin(), config.chart.hidden.end());
            dims.push_back(2);
            const auto init = chart::ChartModel::initialize(dims, derive_seed(seed, "chart_init"));
            auto opts = config.chart.train;
            opts.seed = derive_seed(seed, "chart_train");
            out.result = stage("chart_train", [&] { return chart::train(init, out.mining.triplets, features, opts); });
            return out;
        }

        gpmap::TrainingSet training_set(std::vector<gpmap::Point2> coords, std::vector<double> targets)
        {
            gpmap::TrainingSet t;
            t.coords = std::move(coords);
            t.targets = std::move(targets);
            return t;
        }

        std::string policy_str(rateselect::Policy p) { return std::string(rateselect::policy_name(p)); }
    }

    bool operator==(const UserRecord &a, const UserRecord &b)
    {
        if (a.user_id != b.user_id || a.location != b.location || a.power_samples != b.power_samples)
            return false;
        if (a.csi.has_value() != b.csi.has_value())
            return false;
        if (!a.csi)
            return true;
        return a.csi->rows() == b.csi->rows() && a.csi->cols() == b.csi->cols() && *a.csi == *b.csi;
    }

    void simulate_dataset(const ExperimentConfig &config, std::uint64_t seed,
                          const std::function<void(UserRecord &&)> &sink)
    {
        config.validate();
        const auto scn = prop::generate_scenario(config.scenario, derive_seed(seed, "scenario"));
        const bool chart_mode = config.mode == Mode::chart;
        const std::size_t n = static_cast<std::size_t>(chart_mode ? config.chart.n_train_users : config.n_train_users);
        const auto locs = stage("train_locations", [&] {
            return prop::sample_n_locations_thomas(config.point_process, config.scenario.cell(),
                                                   config.scenario.user_height, n,
                                                   derive_seed(seed, "train_locations"));
        });
        const auto &power_band = chart_mode ? config.chart.power_band : config.scenario.band;
        stage("train_samples", [&] {
            for (std::size_t i = 0; i < n; ++i)
            {
                UserRecord rec;
                rec.user_id = static_cast<std::int64_t>(i);
                rec.location = locs[i];
                rec.power_samples = prop::draw_power_samples(scn, locs[i], config.samples_per_user,
                                                             derive_seed(seed, "train_power", {i}), power_band);
                if (chart_mode)
                    rec.csi = prop::draw_csi(scn, locs[i], derive_seed(seed, "csi", {i}), config.chart.csi_band);
                sink(std::move(rec));
            }
            return 0;
        });
    }

    Dataset simulate_dataset(const ExperimentConfig &config, std::uint64_t seed)
    {
        Dataset d;
        simulate_dataset(config, seed, [&](UserRecord &&r) { d.users.push_back(std::move(r)); });
        return d;
    }

    std::vector<double> estimate_targets(const Dataset &dataset, double noise_power, double epsilon)
    {
        std::vector<double> t;
        t.reserve(dataset.users.size());
        for (const auto &u : dataset.users)
        {
            try
            {
                t.push_back(stats::estimate_outage_capacity(u.power_samples, noise_power, epsilon).value);
            }
            catch (const InsufficientSamples &e)
            {
                throw InsufficientSamples("user " + std::to_string(u.user_id), e.have(), e.required());
            }
        }
        return t;
    }

    MapFile fit_location_map(const ExperimentConfig &config, const Dataset &dataset, std::uint64_t seed)
    {
        if (dataset.users.size() < 2)
            throw ConfigError("fit_location_map: need at least 2 users");
        std::vector<gpmap::Point2> coords;
        for (const auto &u : dataset.users)
        {
            if (!u.location)
                throw ConfigError("fit_location_map: user " + std::to_string(u.user_id) + " has no location");
            coords.push_back({u.location->x, u.location->y});
        }
        auto train = training_set(std::move(coords),
                                  estimate_targets(dataset, config.scenario.noise_power, config.epsilon));
        auto map = stage("gp_fit", [&] { return fit_map(config.gp, train, derive_seed(seed, "gp_fit")); });
        return {std::move(map), config.epsilon, "location"};
    }

    Eigen::MatrixXd dataset_features(const Dataset &dataset, int reduced_subcarriers)
    {
        Eigen::MatrixXd f;
        for (std::size_t i = 0; i < dataset.users.size(); ++i)
        {
            const auto &u = dataset.users[i];
            if (!u.csi)
                throw ConfigError("user " + std::to_string(u.user_id) + " has no CSI");
            const Eigen::VectorXd v = chart::csi_features(*u.csi, reduced_subcarriers);
            if (i == 0)
                f.resize(v.size(), static_cast<Eigen::Index>(dataset.users.size()));
            else if (v.size() != f.rows())
                throw ConfigError("user " + std::to_string(u.user_id) + ": CSI shape differs from user 0");
            f.col(static_cast<Eigen::Index>(i)) = v;
        }
        return f;
    }

    ChartTraining train_chart(const ExperimentConfig &config, const Dataset &dataset, std::uint64_t seed)
    {
        const auto features = stage("features", [&] { return dataset_features(dataset, config.chart.reduced_subcarriers); });
        std::vector<stats::EmpiricalDistribution> rates;
        for (const auto &u : dataset.users)
            rates.emplace_back(capacities(u.power_samples, config.scenario.noise_power));
        return train_on_features(config, features, rates, seed);
    }

    MapFile fit_latent_map(const ExperimentConfig &config, const Dataset &dataset, const chart::ChartModel &model,
                           std::uint64_t seed)
    {
        const auto features = stage("features", [&] { return dataset_features(dataset, config.chart.reduced_subcarriers); });
        if (features.rows() != model.input_dim())
            throw ConfigError("fit_latent_map: feature dimension " + std::to_string(features.rows()) +
                              " does not match chart input " + std::to_string(model.input_dim()));
        auto train = training_set(chart::embed_dataset(model, features),
                                  estimate_targets(dataset, config.scenario.noise_power, config.epsilon));
        auto map = stage("gp_fit", [&] { return fit_map(config.chart.gp, train, derive_seed(seed, "gp_fit")); });
        return {std::move(map), config.epsilon, "latent"};
    }

    double ExperimentReport::violation_fraction(rateselect::Policy p) const
    {
        for (const auto &s : summary)
            if (s.policy == p)
                return s.violation_fraction;
        throw ConfigError("report has no rows for policy " + policy_str(p));
    }

    std::vector<PolicySummary> summarize(std::span<const ReportRow> rows, double epsilon)
    {
        std::vector<PolicySummary> out;
        for (auto p : {rateselect::Policy::map_quantile, rateselect::Policy::nearest_neighbor})
        {
            std::size_t n = 0, bad = 0;
            for (const auto &r : rows)
            {
                if (r.policy != p)
                    continue;
                ++n;
                if (r.outage_prob > epsilon)
                    ++bad;
            }
            if (n > 0)
                out.push_back({p, static_cast<double>(bad) / static_cast<double>(n), n});
        }
        return out;
    }

    namespace
    {
        // Evaluates both policies for one test user against the scenario oracle.
        void evaluate_user(const ExperimentConfig &config, const prop::Scenario &scn, const prop::BandConfig &band,
                           std::size_t i, const prop::Location &loc, const gpmap::PredictiveDistribution &pred,
                           const gpmap::TrainingSet &baseline_train, std::vector<ReportRow> &rows,
                           const gpmap::Point2 &latent)
        {
            const double true_ceps = prop::true_outage_capacity(scn, loc, config.epsilon, config.effective_oracle_n(),
                                                                derive_seed(config.seed, "test_oracle", {i}), band);
            const auto map_rate = rateselect::select_rate_map(pred, config.delta);
            const auto nn_rate = rateselect::select_rate_baseline(baseline_train, {loc.x, loc.y});
            // common outage stream for both policies
            const std::uint64_t out_seed = derive_seed(config.seed, "test_outage", {i});
            for (const auto &d : {map_rate, nn_rate})
            {
                ReportRow r;
                r.user_id = static_cast<std::int64_t>(i);
                r.x = loc.x;
                r.y = loc.y;
                r.latent_x = latent.x;
                r.latent_y = latent.y;
                r.true_ceps = true_ceps;
                r.rate = d.rate;
                r.policy = d.policy;
                r.outage_prob = prop::measure_outage_probability(scn, loc, d.rate, config.effective_n_mc(), out_seed, band);
                r.pred_mean = pred.mean;
                r.pred_var = pred.variance;
                rows.push_back(r);
            }
        }

        // Map-policy prediction error against the oracle capacity, next to the
        // spread the GP claims for it.
        json prediction_calibration(std::span<const ReportRow> rows)
        {
            double se = 0.0, var = 0.0, z2 = 0.0;
            std::size_t n = 0, nz = 0;
            for (const auto &r : rows)
            {
                if (r.policy != rateselect::Policy::map_quantile)
                    continue;
                const double err = r.true_ceps - r.pred_mean;
                se += err * err;
                var += r.pred_var;
                ++n;
                if (r.pred_var > 0.0)
                {
                    z2 += err * err / r.pred_var;
                    ++nz;
                }
            }
            if (n == 0)
                return json::object();
            const double dn = static_cast<double>(n);
            return {{"rmse", std::sqrt(se / dn)},
                    {"rms_predictive_sd", std::sqrt(var / dn)},
                    {"rms_standardized_error", nz > 0 ? std::sqrt(z2 / static_cast<double>(nz)) : 0.0}};
        }

        json summary_json(const std::vector<PolicySummary> &summary)
        {
            json s = json::array();
            for (const auto &p : summary)
                s.push_back({{"policy", policy_str(p.policy)}, {"violation_fraction", p.violation_fraction}, {"n", p.n}});
            return s;
        }
    }

    ExperimentReport run_location_experiment(const ExperimentConfig &config)
    {
        const auto t0 = std::chrono::steady_clock::now();
        config.validate();
        if (config.mode != Mode::location)
            throw ConfigError("run_location_experiment: config mode is not \"location\"");
        const std::uint64_t seed = config.seed;
        const auto scn = prop::generate_scenario(config.scenario, derive_seed(seed, "scenario"));
        const Dataset data = simulate_dataset(config, seed);
        const MapFile map = fit_location_map(config, data, seed);

        const auto test = stage("test_locations", [&] {
            return prop::sample_locations_uniform(config.scenario.cell(), config.scenario.user_height,
                                                  static_cast<std::size_t>(config.n_test_users),
                                                  derive_seed(seed, "test_locations"));
        });
        ExperimentReport rep;
        rep.mode = Mode::location;
        stage("evaluate", [&] {
            for (std::size_t i = 0; i < test.size(); ++i)
            {
                const gpmap::Point2 q{test[i].x, test[i].y};
                evaluate_user(config, scn, config.scenario.band, i, test[i], map.map.predict(q), map.map.train(),
                              rep.rows, q);
            }
            return 0;
        });
        rep.summary = summarize(rep.rows, config.epsilon);
        rep.epsilon = config.epsilon;
        rep.delta = config.delta;
        rep.seed = seed;
        rep.config_echo = config_to_json(config);
        rep.details = {{"n_train_users", data.users.size()},
                       {"n_test_users", test.size()},
                       {"oracle_n", config.effective_oracle_n()},
                       {"n_mc", config.effective_n_mc()},
                       {"gp", hyper_json(map.map)},
                       {"prediction_calibration", prediction_calibration(rep.rows)}};
        rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rep;
    }

    ExperimentReport run_chart_experiment(const ExperimentConfig &config)
    {
        const auto t0 = std::chrono::steady_clock::now();
        config.validate();
        if (config.mode != Mode::chart)
            throw ConfigError("run_chart_experiment: config mode is not \"chart\"");
        const std::uint64_t seed = config.seed;
        const double noise = config.scenario.noise_power;
        const auto scn = prop::generate_scenario(config.scenario, derive_seed(seed, "scenario"));

        ChartData cd;
        std::vector<Eigen::VectorXd> cols;
        simulate_dataset(config, seed, [&](UserRecord &&r) {
            cd.locations.push_back(*r.location);
            cols.push_back(stage("features", [&] { return chart::csi_features(*r.csi, config.chart.reduced_subcarriers); }));
            cd.targets.push_back(stage("targets", [&] {
                return stats::estimate_outage_capacity(r.power_samples, noise, config.epsilon).value;
            }));
            cd.rates.emplace_back(capacities(r.power_samples, noise));
        });
        cd.features.resize(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < cols.size(); ++i)
            cd.features.col(static_cast<Eigen::Index>(i)) = cols[i];
        cols.clear();

        ChartTraining ct = train_on_features(config, cd.features, cd.rates, seed);
        const auto &model = ct.result.model;
        const auto latent = chart::embed_dataset(model, cd.features);

        chart::WassersteinCache w1(cd.rates);
        const std::size_t quality_pairs = 2000;
        // quality of the untrained network for reference
        const auto init_model = chart::ChartModel::initialize(model.dims(), derive_seed(seed, "chart_init"));
        const auto init_latent = chart::embed_dataset(init_model, cd.features);
        const double q_init = chart::chart_quality(init_latent, w1, quality_pairs, derive_seed(seed, "quality"));
        const double q_trained = chart::chart_quality(latent, w1, quality_pairs, derive_seed(seed, "quality"));

        auto train = training_set(latent, cd.targets);
        const auto map = stage("gp_fit", [&] { return fit_map(config.chart.gp, train, derive_seed(seed, "gp_fit")); });

        std::vector<gpmap::Point2> train_locs;
        for (const auto &l : cd.locations)
            train_locs.push_back({l.x, l.y});
        const auto baseline_train = training_set(std::move(train_locs), cd.targets);

        const auto test = stage("test_locations", [&] {
            return prop::sample_locations_uniform(config.scenario.cell(), config.scenario.user_height,
                                                  static_cast<std::size_t>(config.n_test_users),
                                                  derive_seed(seed, "test_locations"));
        });
        ExperimentReport rep;
        rep.mode = Mode::chart;
        stage("evaluate", [&] {
            for (std::size_t i = 0; i < test.size(); ++i)
            {
                const auto csi = prop::draw_csi(scn, test[i], derive_seed(seed, "test_csi", {i}), config.chart.csi_band);
                const Eigen::Vector2d z = model.forward(chart::csi_features(csi, config.chart.reduced_subcarriers));
                const gpmap::Point2 q{z(0), z(1)};
                evaluate_user(config, scn, config.chart.power_band, i, test[i], map.predict(q), baseline_train,
                              rep.rows, q);
            }
            return 0;
        });
        rep.summary = summarize(rep.rows, config.epsilon);
        rep.epsilon = config.epsilon;
        rep.delta = config.delta;
        rep.seed = seed;
        rep.config_echo = config_to_json(config);
        rep.details = {{"n_train_users", cd.locations.size()},
                       {"n_test_users", test.size()},
                       {"oracle_n", config.effective_oracle_n()},
                       {"n_mc", config.effective_n_mc()},
                       {"feature_dim", cd.features.rows()},
                       {"triplets", ct.mining.triplets.size()},
                       {"skipped_anchors", ct.mining.skipped_anchors},
                       {"epoch_loss", ct.result.epoch_loss},
                       {"chart_quality_initial", q_init},
                       {"chart_quality_trained", q_trained},
                       {"gp", hyper_json(map)},
                       {"prediction_calibration", prediction_calibration(rep.rows)}};
        rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rep;
    }

    ExperimentReport run_experiment(const ExperimentConfig &config)
    {
        return config.mode == Mode::chart ? run_chart_experiment(config) : run_location_experiment(config);
    }

    std::string report_users_csv(const ExperimentReport &report)
    {
        std::string s = "user_id,x,y,true_ceps,rate,outage_prob,policy,latent_x,latent_y,pred_mean,pred_var\n";
        for (const auto &r : report.rows)
        {
            s += std::to_string(r.user_id);
            for (double v : {r.x, r.y, r.true_ceps, r.rate, r.outage_prob})
            {
                s += ',';
                append_double(s, v);
            }
            s += ',';
            s += rateselect::policy_name(r.policy);
            for (double v : {r.latent_x, r.latent_y, r.pred_mean, r.pred_var})
            {
                s += ',';
                append_double(s, v);
            }
            s += '\n';
        }
        return s;
    }

    std::string report_summary_csv(const ExperimentReport &report)
    {
        std::string s = "policy,violation_fraction,n\n";
        for (const auto &p : report.summary)
        {
            s += rateselect::policy_name(p.policy);
            s += ',';
            append_double(s, p.violation_fraction);
            s += ',' + std::to_string(p.n) + '\n';
        }
        return s;
    }

    std::string outage_cdf_csv(const ExperimentReport &report)
    {
        std::string s = "policy,outage_prob,cdf\n";
        for (const auto &p : report.summary)
        {
            std::vector<double> v;
            for (const auto &r : report.rows)
                if (r.policy == p.policy)
                    v.push_back(r.outage_prob);
            for (const auto &pt : stats::empirical_cdf(stats::EmpiricalDistribution(std::move(v))))
            {
                s += rateselect::policy_name(p.policy);
                s += ',';
                append_double(s, pt.value);
                s += ',';
                append_double(s, pt.probability);
                s += '\n';
            }
        }
        return s;
    }

    void write_report(const ExperimentReport &report, const std::string &out_dir)
    {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec)
            throw IoError("cannot create " + out_dir + ": " + ec.message());
        const std::filesystem::path dir(out_dir);
        write_text_file((dir / "report_users.csv").string(), report_users_csv(report));
        write_text_file((dir / "report_summary.csv").string(), report_summary_csv(report));
        write_text_file((dir / "outage_cdf.csv").string(), outage_cdf_csv(report));
        const json j = {{"format", "statmap.report"},
                        {"version", 1},
                        {"mode", report.mode == Mode::chart ? "chart" : "location"},
                        {"epsilon", report.epsilon},
                        {"delta", report.delta},
                        {"seed", report.seed},
                        {"summary", summary_json(report.summary)},
                        {"details", report.details},
                        {"config", report.config_echo}};
        write_text_file((dir / "report.json").string(), j.dump(2) + "\n");
    }

    const MismatchCurve &MismatchResult::curve(const std::string &estimator, std::size_t n) const
    {
        for (const auto &c : curves)
            if (c.estimator == estimator && (estimator == "oracle" || c.n == n))
                return c;
        throw ConfigError("mismatch: no curve " + estimator + " at n=" + std::to_string(n));
    }

    double MismatchResult::max_deviation(const MismatchCurve &c, double tail_limit) const
    {
        const auto &oracle = curve("oracle", 0);
        double m = 0.0;
        for (std::size_t i = 0; i < breakpoints.size(); ++i)
            if (oracle.cdf[i] <= tail_limit)
                m = std::max(m, std::abs(c.cdf[i] - oracle.cdf[i]));
        return m;
    }

    MismatchResult run_mismatch_demo(const ExperimentConfig &config)
    {
        config.validate();
        const auto &mo = config.mismatch;
        std::vector<double> amps = mo.path_amplitudes;
        double total = 0.0;
        for (double a : amps)
            total += a * a;
        if (!(total > 0.0))
            throw ConfigError("mismatch.path_amplitudes: all zero");
        const double scale = 1.0 / std::sqrt(total);
        double peak = 0.0;
        for (auto &a : amps)
        {
            a *= scale;
            peak += a;
        }
        const double max_power = peak * peak;

        MismatchResult res;
        auto &bp = res.breakpoints;
        const double lo = std::min(1e-4, 0.5 * max_power);
        for (int k = 0; k < mo.log_points; ++k)
            bp.push_back(lo * std::pow(max_power / lo, static_cast<double>(k) / (mo.log_points - 1)));
        for (int k = 1; k <= mo.linear_points; ++k)
            bp.push_back(max_power * k / mo.linear_points);
        std::sort(bp.begin(), bp.end());
        bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

        const std::uint64_t seed = config.seed;
        MismatchCurve oracle{"oracle", static_cast<std::size_t>(mo.oracle_samples), {}, std::nullopt};
        const auto counts = stage("oracle", [&] {
            return prop::count_power_below(amps, bp, mo.oracle_samples, derive_seed(seed, "mismatch_oracle"));
        });
        for (auto c : counts)
            oracle.cdf.push_back(static_cast<double>(c) / static_cast<double>(mo.oracle_samples));
        res.curves.push_back(std::move(oracle));

        for (std::size_t n : mo.sample_sizes)
        {
            const auto power = prop::draw_power_from_amplitudes(amps, n, derive_seed(seed, "mismatch_samples", {n}));
            const stats::EmpiricalDistribution dist(power);
            MismatchCurve emp{"empirical", n, {}, std::nullopt};
            for (double b : bp)
                emp.cdf.push_back(dist.cdf(b));
            res.curves.push_back(std::move(emp));

            std::vector<double> r(power.size());
            for (std::size_t i = 0; i < power.size(); ++i)
                r[i] = std::sqrt(power[i]);
            const auto fit = stage("rician_fit", [&] { return stats::fit_rician_ml(r); });
            MismatchCurve ric{"rician", n, {}, fit};
            for (double b : bp)
                ric.cdf.push_back(stats::rician_power_cdf(b, fit.K, fit.omega));
            res.curves.push_back(std::move(ric));
        }
        res.dkw_half_width =
            stats::dkw_band(*std::max_element(mo.sample_sizes.begin(), mo.sample_sizes.end()), mo.confidence);
        return res;
    }

    void write_mismatch(const MismatchResult &result, const ExperimentConfig &config, const std::string &out_dir)
    {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec)
            throw IoError("cannot create " + out_dir + ": " + ec.message());
        const std::filesystem::path dir(out_dir);

        std::string header = "power";
        for (const auto &c : result.curves)
            header += c.estimator == "oracle" ? std::string(",oracle") : "," + c.estimator + "_N" + std::to_string(c.n);
        header += '\n';
        // same breakpoints in both files; the log table holds log10 of the CDF
        std::string lin = header, lg = header;
        for (std::size_t i = 0; i < result.breakpoints.size(); ++i)
        {
            append_double(lin, result.breakpoints[i]);
            append_double(lg, result.breakpoints[i]);
            for (const auto &c : result.curves)
            {
                lin += ',';
                append_double(lin, c.cdf[i]);
                lg += ',';
                append_double(lg, std::log10(c.cdf[i]));
            }
            lin += '\n';
            lg += '\n';
        }
        write_text_file((dir / "cdf_linear.csv").string(), lin);
        write_text_file((dir / "cdf_log.csv").string(), lg);

        std::string summary = "estimator,n,max_deviation,max_tail_deviation,dkw_half_width,band_exits\n";
        const auto &oracle = result.curve("oracle", 0);
        for (const auto &c : result.curves)
        {
            if (c.fit)
                write_text_file((dir / ("rician_fit_N" + std::to_string(c.n) + ".csv")).string(),
                                stats::rician_fit_csv(*c.fit));
            if (&c == &oracle)
                continue;
            const double band = stats::dkw_band(c.n, config.mismatch.confidence);
            std::size_t exits = 0;
            for (std::size_t i = 0; i < result.breakpoints.size(); ++i)
                if (std::abs(c.cdf[i] - oracle.cdf[i]) > band)
                    ++exits;
            summary += c.estimator + ',' + std::to_string(c.n) + ',';
            append_double(summary, result.max_deviation(c));
            summary += ',';
            append_double(summary, result.max_deviation(c, 1e-3));
            summary += ',';
            append_double(summary, band);
            summary += ',' + std::to_string(exits) + '\n';
        }
        write_text_file((dir / "mismatch_summary.csv").string(), summary);
    }

    std::string select_rates_csv(const MapFile &map, std::span<const gpmap::Point2> queries, double delta)
    {
        std::string s = "x,y,rate,policy\n";
        for (const auto &q : queries)
        {
            const auto a = rateselect::select_rate_map(map.map.predict(q), delta);
            const auto b = rateselect::select_rate_baseline(map.map.train(), q);
            for (const auto &d : {a, b})
            {
                append_double(s, q.x);
                s += ',';
                append_double(s, q.y);
                s += ',';
                append_double(s, d.rate);
                s += ',';
                s += rateselect::policy_name(d.policy);
                s += '\n';
            }
        }
        return s;
    }

    std::vector<gpmap::Point2> parse_queries_csv(const std::string &text)
    {
        std::vector<gpmap::Point2> out;
        std::istringstream in(text);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.empty())
                continue;
            if (line_no == 1 && line == "x,y")
                continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos)
                throw ParseError("queries line " + std::to_string(line_no) + ": expected x,y");
            auto num = [&](const std::string &f, const char *field) {
                double v = 0.0;
                const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
                if (r.ec != std::errc() || r.ptr != f.data() + f.size() || !std::isfinite(v))
                    throw ParseError("queries line " + std::to_string(line_no) + ", field " + field +
                                     ": invalid number '" + f + "'");
                return v;
            };
            out.push_back({num(line.substr(0, comma), "x"), num(line.substr(comma + 1), "y")});
        }
        return out;
    }

    void write_text_file(const std::string &path, const std::string &text)
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f)
            throw IoError("cannot open " + path + " for writing");
        f.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!f)
            throw IoError("write failed: " + path);
    }

    std::string read_text_file(const std::string &path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw IoError("cannot open " + path);
        std::ostringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }
}
