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

#ifndef STATMAP_HARNESS_HPP
#define STATMAP_HARNESS_HPP

#include "statmap/chart.hpp"
#include "statmap/gpmap.hpp"
#include "statmap/propagation.hpp"
#include "statmap/rateselect.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace statmap::harness
{
    enum class Mode
    {
        location,
        chart,
    };

    struct GpOptions
    {
        int restarts = 3;
        int max_iterations = 600;
        // matches the exponential correlation of the scenario fields
        gpmap::KernelFamily kernel = gpmap::KernelFamily::exponential;
        // Hyperparameters are searched on an evenly strided subset of this many
        // points (0: all); the final map conditions on every point.
        int fit_subsample = 0;
    };

    struct ChartOptions
    {
        int n_train_users = 2000;
        std::size_t n_triplets = 8000;
        double close_quantile = 0.05;
        double far_quantile = 0.5;
        int reduced_subcarriers = chart::kDefaultReducedSubcarriers;
        std::vector<int> hidden = {256, 128, 64};
        chart::TrainOptions train{1.0, 2e-3, 0.9, 8, 64, 0};
        GpOptions gp{2, 400, gpmap::KernelFamily::exponential, 500};
        // bands: CSI is read in csi_band, power samples in power_band
        propagation::BandConfig csi_band{64, 288, 5e6, 0.0857, 0};
        propagation::BandConfig power_band{8, 120, 2e6, 0.375, 0};
    };

    struct MismatchOptions
    {
        // normalized to unit mean power before use
        std::vector<double> path_amplitudes = {1.0, 0.41, 0.39, 0.012, 0.010, 0.008, 0.006};
        std::uint64_t oracle_samples = 100'000'000;
        std::vector<std::size_t> sample_sizes = {1000, 10000, 1000000};
        int log_points = 160;    // log-spaced breakpoints from 1e-4 to the max power
        int linear_points = 100; // linear breakpoints on (0, max power]
        double confidence = 0.99;
    };

    struct ExperimentConfig
    {
        Mode mode = Mode::location;
        propagation::ScenarioConfig scenario;
        propagation::PointProcessConfig point_process;
        int n_train_users = 500;
        std::size_t samples_per_user = 1000;
        double epsilon = 1e-2;
        double delta = 1e-2;
        int n_test_users = 2000;
        std::size_t oracle_n = 0; // 0: ceil(100/epsilon)
        std::size_t n_mc = 0;     // 0: ceil(100/epsilon)
        std::uint64_t seed = 1;
        GpOptions gp;
        ChartOptions chart;
        MismatchOptions mismatch;

        std::size_t effective_oracle_n() const;
        std::size_t effective_n_mc() const;
        // Throws ConfigError.
        void validate() const;
        // Full-scale settings: epsilon = delta = 1e-3, 500 / 5000 training users.
        void apply_full_scale();
    };

    // Unknown keys are rejected with ConfigError.
    ExperimentConfig config_from_json(const nlohmann::json &j);
    nlohmann::json config_to_json(const ExperimentConfig &c);
    ExperimentConfig load_config(const std::string &path);

    struct UserRecord
    {
        std::int64_t user_id = 0;
        std::optional<propagation::Location> location;
        std::vector<double> power_samples;
        std::optional<propagation::ChannelMatrix> csi;

        friend bool operator==(const UserRecord &a, const UserRecord &b);
    };

    struct Dataset
    {
        std::vector<UserRecord> users;
        friend bool operator==(const Dataset &, const Dataset &) = default;
    };

    // Training users for the configured mode. Location mode: Thomas locations
    // and power samples in the scenario band. Chart mode: additionally one CSI
    // snapshot in the CSI band, with power samples in the power band.
    void simulate_dataset(const ExperimentConfig &config, std::uint64_t seed,
                          const std::function<void(UserRecord &&)> &sink);
    Dataset simulate_dataset(const ExperimentConfig &config, std::uint64_t seed);

    // Per-user epsilon-outage capacity estimates.
    std::vector<double> estimate_targets(const Dataset &dataset, double noise_power, double epsilon);

    struct MapFile
    {
        gpmap::FittedMap map;
        double epsilon = 0.0;
        std::string coordinates = "location"; // or "latent"
    };

    MapFile fit_location_map(const ExperimentConfig &config, const Dataset &dataset, std::uint64_t seed);
    MapFile fit_latent_map(const ExperimentConfig &config, const Dataset &dataset, const chart::ChartModel &model,
                           std::uint64_t seed);

    struct ChartTraining
    {
        chart::TrainResult result;
        chart::TripletMining mining;
    };
    ChartTraining train_chart(const ExperimentConfig &config, const Dataset &dataset, std::uint64_t seed);

    Eigen::MatrixXd dataset_features(const Dataset &dataset, int reduced_subcarriers);

    struct ReportRow
    {
        std::int64_t user_id = 0;
        double x = 0.0, y = 0.0;
        double latent_x = 0.0, latent_y = 0.0;
        double true_ceps = 0.0;
        double rate = 0.0;
        double outage_prob = 0.0;
        rateselect::Policy policy = rateselect::Policy::map_quantile;
        double pred_mean = 0.0, pred_var = 0.0;
    };

    struct PolicySummary
    {
        rateselect::Policy policy;
        double violation_fraction = 0.0;
        std::size_t n = 0;
    };

    struct ExperimentReport
    {
        Mode mode = Mode::location;
        std::vector<ReportRow> rows; // sorted by (user_id, policy)
        std::vector<PolicySummary> summary;
        double epsilon = 0.0;
        double delta = 0.0;
        std::uint64_t seed = 0;
        nlohmann::json config_echo;
        nlohmann::json details; // hyperparameters, fit diagnostics, chart diagnostics
        double wall_time_s = 0.0; // not written to files

        double violation_fraction(rateselect::Policy p) const;
    };

    // Violation: measured outage probability > epsilon.
    std::vector<PolicySummary> summarize(std::span<const ReportRow> rows, double epsilon);

    ExperimentReport run_location_experiment(const ExperimentConfig &config);
    ExperimentReport run_chart_experiment(const ExperimentConfig &config);
    ExperimentReport run_experiment(const ExperimentConfig &config);

    // Files: report_users.csv, report_summary.csv, outage_cdf.csv, report.json.
    void write_report(const ExperimentReport &report, const std::string &out_dir);
    std::string report_users_csv(const ExperimentReport &report);
    std::string report_summary_csv(const ExperimentReport &report);
    std::string outage_cdf_csv(const ExperimentReport &report);

    struct MismatchCurve
    {
        std::string estimator; // "oracle", "empirical", "rician"
        std::size_t n = 0;
        std::vector<double> cdf; // at the shared breakpoints
        std::optional<statistics::RicianFit> fit;
    };

    struct MismatchResult
    {
        std::vector<double> breakpoints; // normalized power
        std::vector<MismatchCurve> curves;
        double dkw_half_width = 0.0; // for the largest sample size

        const MismatchCurve &curve(const std::string &estimator, std::size_t n) const;
        // max |curve - oracle| over breakpoints with oracle cdf <= tail_limit
        double max_deviation(const MismatchCurve &c, double tail_limit = 1.0) const;
    };

    MismatchResult run_mismatch_demo(const ExperimentConfig &config);
    // Files: cdf_linear.csv, cdf_log.csv, rician_fit_N<n>.csv, mismatch_summary.csv.
    void write_mismatch(const MismatchResult &result, const ExperimentConfig &config, const std::string &out_dir);

    // Map policy and baseline for arbitrary query coordinates: CSV x,y,rate,policy.
    std::string select_rates_csv(const MapFile &map, std::span<const gpmap::Point2> queries, double delta);
    std::vector<gpmap::Point2> parse_queries_csv(const std::string &text);

    void write_text_file(const std::string &path, const std::string &text);
    std::string read_text_file(const std::string &path);
}

#endif
