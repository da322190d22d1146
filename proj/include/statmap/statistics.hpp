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

#ifndef STATMAP_STATISTICS_HPP
#define STATMAP_STATISTICS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace statmap::statistics
{
    // Immutable sorted sample set. Construction sorts and validates.
    class EmpiricalDistribution
    {
    public:
        explicit EmpiricalDistribution(std::vector<double> samples);
        explicit EmpiricalDistribution(std::span<const double> samples)
            : EmpiricalDistribution(std::vector<double>(samples.begin(), samples.end())) {}

        std::size_t size() const noexcept { return sorted_.size(); }
        std::span<const double> sorted() const noexcept { return sorted_; }
        double min() const noexcept { return sorted_.front(); }
        double max() const noexcept { return sorted_.back(); }

        // Fraction of samples <= value.
        double cdf(double value) const noexcept;

    private:
        std::vector<double> sorted_;
    };

    struct OutageCapacityEstimate
    {
        double epsilon = 0.0;
        double value = 0.0; // bits/s/Hz
        std::size_t n_samples = 0;
    };

    struct CdfPoint
    {
        double value;
        double probability;
    };

    struct RicianFit
    {
        double K = 0.0;
        double omega = 0.0;
        double log_likelihood = 0.0;
        int iterations = 0;
    };

    // Shannon capacity log2(1 + power / noise_power).
    double capacity_from_power(double power, double noise_power);

    // Smallest sample count accepted by empirical_quantile for this epsilon,
    // i.e. the smallest n with n > 1/epsilon.
    std::size_t min_samples_for_quantile(double epsilon);

    // Lower order statistic: the ceil(epsilon * n)-th smallest sample.
    // Throws InsufficientSamples when n <= 1/epsilon.
    double empirical_quantile(const EmpiricalDistribution &dist, double epsilon);

    // Empirical epsilon-outage capacity from received power samples.
    OutageCapacityEstimate estimate_outage_capacity(std::span<const double> power_samples,
                                                    double noise_power, double epsilon);

    // Step-function CDF: (sorted_i, i/n), one point per sample.
    std::vector<CdfPoint> empirical_cdf(const EmpiricalDistribution &dist);

    // Exact 1-Wasserstein distance between two empirical distributions,
    // integrating the piecewise-constant quantile functions.
    double wasserstein1(const EmpiricalDistribution &a, const EmpiricalDistribution &b);

    // Dvoretzky-Kiefer-Wolfowitz half-width sqrt(ln(2/(1-confidence)) / (2n)).
    double dkw_band(std::size_t n, double confidence);

    // Modified Bessel function of the first kind, order zero (and its log).
    double bessel_i0(double x);
    double log_bessel_i0(double x);

    // Rician amplitude density / power CDF for parameters (K, omega = E[r^2]).
    double rician_log_pdf(double amplitude, double K, double omega);
    double rician_power_cdf(double power, double K, double omega);

    // Maximum-likelihood Rician fit to amplitude samples. omega is profiled
    // from the mean power; K is found by a bounded 1-D search.
    RicianFit fit_rician_ml(std::span<const double> amplitudes, double k_max = 200.0,
                            int max_iterations = 200);

    // Rician amplitude sampler: r = |sqrt(K omega/(K+1)) + CN(0, omega/(K+1))|.
    std::vector<double> sample_rician(double K, double omega, std::size_t n, std::uint64_t seed);

    // Ranks with ties averaged, and the Spearman rank correlation.
    std::vector<double> average_ranks(std::span<const double> values);
    double spearman(std::span<const double> a, std::span<const double> b);

    // CSV writers: headers `value,cdf` and `param,estimate`.
    std::string cdf_csv(std::span<const CdfPoint> table);
    std::string rician_fit_csv(const RicianFit &fit);
}

#endif
