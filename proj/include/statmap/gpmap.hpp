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

#ifndef STATMAP_GPMAP_HPP
#define STATMAP_GPMAP_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Gaussian-process regression of the epsilon-outage capacity over a 2-D
// coordinate space (geographic or channel-chart latent). The kernel is
// isotropic with a nugget on the diagonal; the squared exponential is the
// default family, the exponential (Matern 1/2) is available for rough fields.

namespace statmap::gpmap
{
    struct Point2
    {
        double x = 0.0;
        double y = 0.0;

        friend bool operator==(const Point2 &, const Point2 &) = default;
    };

    enum class KernelFamily
    {
        squared_exponential,
        exponential,
    };

    std::string_view kernel_name(KernelFamily f) noexcept;
    // Throws ConfigError for unknown names.
    KernelFamily parse_kernel(std::string_view name);

    struct Hyperparams
    {
        double prior_mean = 0.0;
        double signal_var = 1.0;
        double length_scale = 1.0;
        double noise_var = 0.0;
        KernelFamily family = KernelFamily::squared_exponential;

        void validate() const;
    };

    struct TrainingSet
    {
        std::vector<Point2> coords;
        std::vector<double> targets;

        std::size_t size() const noexcept { return coords.size(); }
        // Duplicates are rejected unless allow_duplicates (i.e. a positive nugget).
        void validate(bool allow_duplicates) const;
    };

    struct PredictiveDistribution
    {
        double mean = 0.0;
        double variance = 0.0;
    };

    // Box constraints for the hyperparameter search (natural units).
    struct HyperBounds
    {
        double prior_mean_lo = -1e6, prior_mean_hi = 1e6;
        double signal_var_lo = 1e-6, signal_var_hi = 1e4;
        double length_scale_lo = 1e-3, length_scale_hi = 1e4;
        double noise_var_lo = 1e-8, noise_var_hi = 1e2;

        void validate() const;
        Hyperparams clamp(const Hyperparams &h) const;
    };

    struct FitOptions
    {
        HyperBounds bounds;
        int restarts = 3;
        int max_iterations = 600;
        std::uint64_t seed = 0;
        double restart_log_jitter = 0.5;
    };

    struct FitDiagnostics
    {
        double log_marginal_likelihood = 0.0;
        int iterations = 0;
        int evaluations = 0;
        int failed_restarts = 0;
        bool iteration_cap_hit = false;
        double jitter = 0.0;
    };

    // sigma_f^2 exp(-|x - x'|^2 / (2 l^2)), or sigma_f^2 exp(-|x - x'| / l) for
    // the exponential family (+ sigma_n^2 if same_index).
    double kernel(const Point2 &a, const Point2 &b, const Hyperparams &hyper, bool same_index = false);

    // K + sigma_n^2 I over the training coordinates (plus extra diagonal jitter).
    Eigen::MatrixXd kernel_matrix(const Hyperparams &hyper, std::span<const Point2> coords, double jitter = 0.0);

    // Exact log marginal likelihood. Throws NumericalError if Cholesky fails.
    double log_marginal_likelihood(const Hyperparams &hyper, const TrainingSet &train);

    // Order-independent summary of a kernel matrix, stored in map files.
    struct KernelChecksum
    {
        double sum = 0.0;
        double sum_squares = 0.0;
        double trace = 0.0;
    };
    KernelChecksum kernel_checksum(const Eigen::MatrixXd &k);
    bool checksum_matches(const KernelChecksum &a, const KernelChecksum &b, double rel_tol = 1e-10);

    class FittedMap
    {
    public:
        // Factorizes K + sigma_n^2 I for fixed hyperparameters. When the nugget
        // is zero and Cholesky fails, retries once with 1e-9 sigma_f^2 jitter.
        FittedMap(const Hyperparams &hyper, TrainingSet train, FitDiagnostics diagnostics = {});

        const Hyperparams &hyper() const noexcept { return hyper_; }
        const TrainingSet &train() const noexcept { return train_; }
        const FitDiagnostics &diagnostics() const noexcept { return diagnostics_; }
        const Eigen::MatrixXd &cholesky_factor() const noexcept { return chol_; }
        const Eigen::VectorXd &alpha() const noexcept { return alpha_; }
        const KernelChecksum &checksum() const noexcept { return checksum_; }

        PredictiveDistribution predict(const Point2 &query) const;

    private:
        Hyperparams hyper_;
        TrainingSet train_;
        FitDiagnostics diagnostics_;
        Eigen::MatrixXd chol_; // lower triangular
        Eigen::VectorXd alpha_;
        KernelChecksum checksum_;
    };

    // Maximizes the log marginal likelihood over (m0, log sf2, log l, log sn2)
    // with Nelder-Mead, restarted from seeded jitters of init.
    FittedMap fit(const TrainingSet &train, const Hyperparams &init, const FitOptions &options);

    std::vector<PredictiveDistribution> predict_batch(const FittedMap &map, std::span<const Point2> queries);

    // Data-driven defaults: prior mean / variance from the targets and length
    // scale bounds from the coordinate span.
    Hyperparams default_init(const TrainingSet &train,
                             KernelFamily family = KernelFamily::squared_exponential);
    HyperBounds default_bounds(const TrainingSet &train);
}

#endif
