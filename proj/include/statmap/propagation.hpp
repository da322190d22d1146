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

#ifndef STATMAP_PROPAGATION_HPP
#define STATMAP_PROPAGATION_HPP

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

// Synthetic, spatially consistent propagation environment.
//
// Large-scale structure (pathloss, shadowing, per-path powers and angles) is
// a deterministic function of the location, realized by Gaussian random
// fields with exponential correlation exp(-d / d_decorr). Each field is a sum
// of M random cosines whose wave vectors are drawn from the spectral density
// of the exponential correlation (a 2-D Cauchy law), so a field can be
// evaluated lazily at any coordinate and is bit-exact for a given seed.
//
// Small-scale fading comes from per-sample path phases, i.i.d. uniform across
// paths and samples (block fading). The channel seen on antenna m and
// subcarrier s is
//
//     h[m, s] = sum_p a_p e^{j phi_p} e^{j pi m sin(theta_p)} e^{-j 2 pi f_s tau_p}
//
// with a half-wavelength uniform linear array at the base station.

namespace statmap::propagation
{
    struct Location
    {
        double x = 0.0;
        double y = 0.0;
        double z = 0.0;

        friend bool operator==(const Location &, const Location &) = default;
    };

    struct CellBounds
    {
        double xmin, xmax, ymin, ymax;

        double area() const noexcept { return (xmax - xmin) * (ymax - ymin); }
        bool contains(double x, double y) const noexcept
        {
            return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
        }
    };

    // Radio interface used to observe the environment. The same scenario can
    // be read through several bands (e.g. a CSI band and a power band).
    struct BandConfig
    {
        int num_antennas = 1;
        int num_subcarriers = 1;
        double bandwidth_hz = 0.0;
        double carrier_wavelength = 0.375; // 800 MHz
        int reference_subcarrier = 0;      // used for power samples
    };

    struct ScenarioConfig
    {
        double cell_side = 200.0;
        Location bs_location{-100.0, 0.0, 10.0};
        double user_height = 1.5;
        int num_paths = 7;

        double pathloss_exponent = 3.0;
        double pathloss_ref_db = 80.0; // mean SNR gain at 1 m, relative to noise_power
        double shadowing_std_db = 6.0;
        double shadowing_decorrelation_m = 25.0;
        double path_amp_field_std_db = 5.0;
        double path_amp_decorrelation_m = 15.0;
        double path_power_decay_db = 1.5; // mean power drop per path index
        double angle_offset_spread_deg = 45.0;
        double angle_field_std_deg = 10.0;
        double delay_spread_s = 100e-9;

        double noise_power = 1.0;
        int field_components = 128;
        BandConfig band;

        // Throws ConfigError.
        void validate() const;
        CellBounds cell() const noexcept
        {
            const double h = 0.5 * cell_side;
            return {-h, h, -h, h};
        }
    };

    struct PointProcessConfig
    {
        double parent_intensity = 1.25e-3; // parents per m^2
        double mean_cluster_size = 10.0;
        double offspring_std = 10.0; // m

        void validate() const;
    };

    // Stationary Gaussian field with correlation exp(-d / decorrelation).
    class RandomField
    {
    public:
        RandomField() = default;
        RandomField(std::uint64_t seed, int components, double decorrelation, double stddev);

        double operator()(double x, double y) const noexcept;
        int components() const noexcept { return static_cast<int>(kx_.size()); }

    private:
        std::vector<double> kx_, ky_, phase_;
        double weight_ = 0.0;
    };

    // Location-dependent path parameters.
    struct PathState
    {
        std::vector<double> amplitude; // linear, sqrt of power relative to noise scale
        std::vector<double> angle_rad;
        std::vector<double> delay_s;
        std::vector<double> length_m;
    };

    class Scenario
    {
    public:
        Scenario(const ScenarioConfig &config, std::uint64_t seed);

        const ScenarioConfig &config() const noexcept { return config_; }
        std::uint64_t seed() const noexcept { return seed_; }

        double shadowing_db(double x, double y) const noexcept { return shadowing_(x, y); }
        PathState paths(const Location &loc) const;

        // Analytic mean of the MRC power, i.e. num_antennas * sum_p a_p^2.
        double mean_power(const Location &loc, const BandConfig &band) const;

    private:
        ScenarioConfig config_;
        std::uint64_t seed_;
        RandomField shadowing_;
        std::vector<RandomField> amp_fields_;
        std::vector<RandomField> angle_fields_;
        std::vector<double> angle_offset_rad_;
        std::vector<double> excess_delay_s_;
    };

    Scenario generate_scenario(const ScenarioConfig &config, std::uint64_t seed);

    void validate_location(const Scenario &scenario, const Location &loc);

    std::vector<Location> sample_locations_thomas(const PointProcessConfig &pp, const CellBounds &area,
                                                  double user_height, std::uint64_t seed);

    // Draws Thomas batches with derived seeds until n points exist; keeps the first n.
    std::vector<Location> sample_n_locations_thomas(const PointProcessConfig &pp, const CellBounds &area,
                                                    double user_height, std::size_t n, std::uint64_t seed);

    std::vector<Location> sample_locations_uniform(const CellBounds &area, double user_height,
                                                   std::size_t n, std::uint64_t seed);

    using ChannelMatrix = Eigen::MatrixXcd; // antennas x subcarriers

    // One fading realization of the full antenna x subcarrier channel.
    ChannelMatrix channel_coefficient(const Scenario &scenario, const Location &loc,
                                      std::uint64_t sample_seed, const BandConfig &band);
    ChannelMatrix channel_coefficient(const Scenario &scenario, const Location &loc,
                                      std::uint64_t sample_seed);

    // Same realization as channel_coefficient; the CSI snapshot a user reports.
    ChannelMatrix draw_csi(const Scenario &scenario, const Location &loc, std::uint64_t sample_seed,
                           const BandConfig &band);

    // MRC effective power on the reference subcarrier, n i.i.d. fading draws.
    std::vector<double> draw_power_samples(const Scenario &scenario, const Location &loc, std::size_t n,
                                           std::uint64_t sample_seed, const BandConfig &band);
    std::vector<double> draw_power_samples(const Scenario &scenario, const Location &loc, std::size_t n,
                                           std::uint64_t sample_seed);

    // |sum_p a_p e^{j phi_p}|^2 for fixed amplitudes and uniform phases.
    std::vector<double> draw_power_from_amplitudes(std::span<const double> amplitudes, std::size_t n,
                                                   std::uint64_t seed);

    // Accumulates the number of |sum_p a_p e^{j phi_p}|^2 draws at or below
    // each threshold (ascending), without storing the samples.
    std::vector<std::uint64_t> count_power_below(std::span<const double> amplitudes,
                                                 std::span<const double> thresholds, std::uint64_t n,
                                                 std::uint64_t seed);

    // Monte-Carlo ground truth of the epsilon-outage capacity. oracle_n >= 100/epsilon.
    double true_outage_capacity(const Scenario &scenario, const Location &loc, double epsilon,
                                std::size_t oracle_n, std::uint64_t seed, const BandConfig &band);
    double true_outage_capacity(const Scenario &scenario, const Location &loc, double epsilon,
                                std::size_t oracle_n, std::uint64_t seed);

    // Fraction of n_mc capacity draws strictly below rate.
    double measure_outage_probability(const Scenario &scenario, const Location &loc, double rate,
                                      std::size_t n_mc, std::uint64_t seed, const BandConfig &band);
    double measure_outage_probability(const Scenario &scenario, const Location &loc, double rate,
                                      std::size_t n_mc, std::uint64_t seed);
}

#endif
