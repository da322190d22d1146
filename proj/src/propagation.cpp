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

#include "statmap/propagation.hpp"

#include "statmap/errors.hpp"
#include "statmap/rng.hpp"
#include "statmap/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace statmap::propagation
{
    namespace
    {
        constexpr double kPi = std::numbers::pi;
        constexpr double kSpeedOfLight = 299792458.0;

        std::uint64_t location_id(const Location &loc, std::uint64_t seed, const char *label)
        {
            return derive_seed(seed, label, {coord_bits(loc.x), coord_bits(loc.y), coord_bits(loc.z)});
        }

        void require(bool ok, const std::string &what)
        {
            if (!ok)
                throw ConfigError(what);
        }

        double distance(const Location &a, const Location &b)
        {
            const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
            return std::sqrt(dx * dx + dy * dy + dz * dz);
        }

        void validate_band(const BandConfig &band)
        {
            require(band.num_antennas >= 1, "band: num_antennas must be >= 1");
            require(band.num_subcarriers >= 1, "band: num_subcarriers must be >= 1");
            require(band.bandwidth_hz >= 0.0 && std::isfinite(band.bandwidth_hz), "band: bandwidth_hz must be >= 0");
            require(band.carrier_wavelength > 0.0, "band: carrier_wavelength must be positive");
            require(band.reference_subcarrier >= 0 && band.reference_subcarrier < band.num_subcarriers,
                    "band: reference_subcarrier out of range");
        }

        double subcarrier_frequency(const BandConfig &band, int s)
        {
            if (band.num_subcarriers == 1)
                return 0.0;
            const double spacing = band.bandwidth_hz / band.num_subcarriers;
            return (s - 0.5 * (band.num_subcarriers - 1)) * spacing;
        }

        // Per-path complex gain b_p on every antenna at one frequency offset:
        // G(p, m) = a_p e^{j 2 pi len_p / lambda} e^{j pi m sin theta_p} e^{-j 2 pi f tau_p}
        Eigen::MatrixXcd path_antenna_gains(const PathState &ps, const BandConfig &band, double freq)
        {
            const auto P = static_cast<Eigen::Index>(ps.amplitude.size());
            Eigen::MatrixXcd g(P, band.num_antennas);
            for (Eigen::Index p = 0; p < P; ++p)
            {
                const double geo = 2.0 * kPi * ps.length_m[p] / band.carrier_wavelength -
                                   2.0 * kPi * freq * ps.delay_s[p];
                const double steer = kPi * std::sin(ps.angle_rad[p]);
                for (int m = 0; m < band.num_antennas; ++m)
                    g(p, m) = std::polar(ps.amplitude[p], geo + steer * m);
            }
            return g;
        }

        std::uint64_t fading_stream(const Location &loc, std::uint64_t sample_seed)
        {
            return location_id(loc, sample_seed, "fading");
        }
    }

    void ScenarioConfig::validate() const
    {
        require(cell_side > 0.0, "scenario: cell_side must be positive");
        require(user_height >= 0.0, "scenario: user_height must be >= 0");
        require(bs_location.z >= 0.0, "scenario: bs_location.z must be >= 0");
        require(num_paths >= 1, "scenario: num_paths must be >= 1");
        require(field_components >= 1, "scenario: field_components must be >= 1");
        require(shadowing_decorrelation_m > 0.0, "scenario: shadowing_decorrelation_m must be positive");
        require(path_amp_decorrelation_m > 0.0, "scenario: path_amp_decorrelation_m must be positive");
        require(shadowing_std_db >= 0.0, "scenario: shadowing_std_db must be >= 0");
        require(path_amp_field_std_db >= 0.0, "scenario: path_amp_field_std_db must be >= 0");
        require(angle_field_std_deg >= 0.0, "scenario: angle_field_std_deg must be >= 0");
        require(angle_offset_spread_deg >= 0.0, "scenario: angle_offset_spread_deg must be >= 0");
        require(delay_spread_s >= 0.0, "scenario: delay_spread_s must be >= 0");
        require(noise_power > 0.0, "scenario: noise_power must be positive");
        require(std::isfinite(pathloss_exponent) && std::isfinite(pathloss_ref_db) && std::isfinite(path_power_decay_db),
                "scenario: non-finite pathloss parameters");
        validate_band(band);
    }

    void PointProcessConfig::validate() const
    {
        require(parent_intensity > 0.0, "point process: parent_intensity must be positive");
        require(mean_cluster_size > 0.0, "point process: mean_cluster_size must be positive");
        require(offspring_std >= 0.0, "point process: offspring_std must be >= 0");
    }

    RandomField::RandomField(std::uint64_t seed, int components, double decorrelation, double stddev)
    {
        if (components < 1 || !(decorrelation > 0.0))
            throw ConfigError("RandomField: need components >= 1 and decorrelation > 0");
        if (stddev == 0.0)
            return;
        Engine eng = make_engine(seed);
        kx_.resize(components);
        ky_.resize(components);
        phase_.resize(components);
        for (int m = 0; m < components; ++m)
        {
            // radial law of the 2-D Cauchy spectrum: F(k) = 1 - (1 + L^2 k^2)^{-1/2}
            const double u = uniform01(eng);
            const double s = 1.0 / (1.0 - u);
            const double k = std::sqrt(s * s - 1.0) / decorrelation;
            const double dir = 2.0 * kPi * uniform01(eng);
            kx_[m] = k * std::cos(dir);
            ky_[m] = k * std::sin(dir);
            phase_[m] = 2.0 * kPi * uniform01(eng);
        }
        weight_ = stddev * std::sqrt(2.0 / components);
    }

    double RandomField::operator()(double x, double y) const noexcept
    {
        double acc = 0.0;
        for (std::size_t m = 0; m < kx_.size(); ++m)
            acc += std::cos(kx_[m] * x + ky_[m] * y + phase_[m]);
        return weight_ * acc;
    }

    Scenario::Scenario(const ScenarioConfig &config, std::uint64_t seed) : config_(config), seed_(seed)
    {
        config_.validate();
        const int M = config_.field_components;
        const int P = config_.num_paths;
        shadowing_ = RandomField(derive_seed(seed, "shadowing"), M, config_.shadowing_decorrelation_m,
                                 config_.shadowing_std_db);
        amp_fields_.reserve(P);
        angle_fields_.reserve(P);
        for (int p = 0; p < P; ++p)
        {
            amp_fields_.emplace_back(derive_seed(seed, "path_amp", {static_cast<std::uint64_t>(p)}), M,
                                     config_.path_amp_decorrelation_m, config_.path_amp_field_std_db);
            angle_fields_.emplace_back(derive_seed(seed, "path_angle", {static_cast<std::uint64_t>(p)}), M,
                                       config_.path_amp_decorrelation_m, config_.angle_field_std_deg * kPi / 180.0);
        }
        Engine eng = make_engine(derive_seed(seed, "path_geometry"));
        std::exponential_distribution<double> excess(1.0);
        angle_offset_rad_.assign(P, 0.0);
        excess_delay_s_.assign(P, 0.0);
        // path 0 keeps the geometric direction and the direct delay
        for (int p = 1; p < P; ++p)
        {
            angle_offset_rad_[p] = (2.0 * uniform01(eng) - 1.0) * config_.angle_offset_spread_deg * kPi / 180.0;
            excess_delay_s_[p] = config_.delay_spread_s * excess(eng);
        }
    }

    PathState Scenario::paths(const Location &loc) const
    {
        const int P = config_.num_paths;
        const double d = distance(loc, config_.bs_location);
        const double large_scale_db = config_.pathloss_ref_db - 10.0 * config_.pathloss_exponent * std::log10(d) +
                                      shadowing_(loc.x, loc.y);
        double norm = 0.0;
        for (int p = 0; p < P; ++p)
            norm += std::pow(10.0, -config_.path_power_decay_db * p / 10.0);
        const double azimuth = std::atan2(loc.y - config_.bs_location.y, loc.x - config_.bs_location.x);

        PathState ps;
        ps.amplitude.resize(P);
        ps.angle_rad.resize(P);
        ps.delay_s.resize(P);
        ps.length_m.resize(P);
        for (int p = 0; p < P; ++p)
        {
            const double db = large_scale_db - config_.path_power_decay_db * p + amp_fields_[p](loc.x, loc.y);
            const double power = config_.noise_power * std::pow(10.0, db / 10.0) / norm;
            ps.amplitude[p] = std::sqrt(power);
            ps.angle_rad[p] = azimuth + angle_offset_rad_[p] + angle_fields_[p](loc.x, loc.y);
            ps.delay_s[p] = d / kSpeedOfLight + excess_delay_s_[p];
            ps.length_m[p] = ps.delay_s[p] * kSpeedOfLight;
        }
        return ps;
    }

    double Scenario::mean_power(const Location &loc, const BandConfig &band) const
    {
        const auto ps = paths(loc);
        double acc = 0.0;
        for (double a : ps.amplitude)
            acc += a * a;
        return band.num_antennas * acc;
    }

    Scenario generate_scenario(const ScenarioConfig &config, std::uint64_t seed)
    {
        return Scenario(config, seed);
    }

    void validate_location(const Scenario &scenario, const Location &loc)
    {
        const auto &cfg = scenario.config();
        const auto cell = cfg.cell();
        const double tol = 1e-9 * cfg.cell_side;
        if (!(std::isfinite(loc.x) && std::isfinite(loc.y) && std::isfinite(loc.z)))
            throw ConfigError("location: non-finite coordinate");
        if (loc.z < 0.0)
            throw ConfigError("location: z must be >= 0");
        if (loc.x < cell.xmin - tol || loc.x > cell.xmax + tol || loc.y < cell.ymin - tol || loc.y > cell.ymax + tol)
            throw ConfigError("location: outside the cell");
        if (!(distance(loc, cfg.bs_location) > 0.0))
            throw ConfigError("location: co-located with the base station");
    }

    std::vector<Location> sample_locations_thomas(const PointProcessConfig &pp, const CellBounds &area,
                                                  double user_height, std::uint64_t seed)
    {
        pp.validate();
        if (!(area.xmax > area.xmin && area.ymax > area.ymin))
            throw ConfigError("thomas: empty area");
        Engine eng = make_engine(derive_seed(seed, "thomas"));
        std::poisson_distribution<long> parents(pp.parent_intensity * area.area());
        std::poisson_distribution<long> offspring(pp.mean_cluster_size);
        std::normal_distribution<double> offset(0.0, 1.0);

        std::vector<Location> out;
        const long n_parents = parents(eng);
        for (long i = 0; i < n_parents; ++i)
        {
            const double px = area.xmin + uniform01(eng) * (area.xmax - area.xmin);
            const double py = area.ymin + uniform01(eng) * (area.ymax - area.ymin);
            const long n_off = offspring(eng);
            for (long j = 0; j < n_off; ++j)
            {
                const double x = px + pp.offspring_std * offset(eng);
                const double y = py + pp.offspring_std * offset(eng);
                if (area.contains(x, y))
                    out.push_back({x, y, user_height});
            }
        }
        return out;
    }

    std::vector<Location> sample_n_locations_thomas(const PointProcessConfig &pp, const CellBounds &area,
                                                    double user_height, std::size_t n, std::uint64_t seed)
    {
        std::vector<Location> out;
        for (std::uint64_t round = 0; out.size() < n; ++round)
        {
            if (round > 100000)
                throw ConfigError("thomas: point process produces too few points");
            auto batch = sample_locations_thomas(pp, area, user_height, derive_seed(seed, "thomas_round", {round}));
            out.insert(out.end(), batch.begin(), batch.end());
        }
        out.resize(n);
        return out;
    }

    std::vector<Location> sample_locations_uniform(const CellBounds &area, double user_height, std::size_t n,
                                                   std::uint64_t seed)
    {
        Engine eng = make_engine(derive_seed(seed, "uniform_locations"));
        std::vector<Location> out(n);
        for (auto &l : out)
        {
            l.x = area.xmin + uniform01(eng) * (area.xmax - area.xmin);
            l.y = area.ymin + uniform01(eng) * (area.ymax - area.ymin);
            l.z = user_height;
        }
        return out;
    }

    ChannelMatrix channel_coefficient(const Scenario &scenario, const Location &loc, std::uint64_t sample_seed,
                                      const BandConfig &band)
    {
        validate_band(band);
        validate_location(scenario, loc);
        const auto ps = scenario.paths(loc);
        const int P = static_cast<int>(ps.amplitude.size());
        Engine eng = make_engine(fading_stream(loc, sample_seed));
        std::vector<std::complex<double>> rot(P);
        for (int p = 0; p < P; ++p)
            rot[p] = std::polar(1.0, 2.0 * kPi * uniform01(eng));

        ChannelMatrix h = ChannelMatrix::Zero(band.num_antennas, band.num_subcarriers);
        for (int s = 0; s < band.num_subcarriers; ++s)
        {
            const auto g = path_antenna_gains(ps, band, subcarrier_frequency(band, s));
            for (int m = 0; m < band.num_antennas; ++m)
            {
                std::complex<double> acc = 0.0;
                for (int p = 0; p < P; ++p)
                    acc += rot[p] * g(p, m);
                h(m, s) = acc;
            }
        }
        return h;
    }

    ChannelMatrix channel_coefficient(const Scenario &scenario, const Location &loc, std::uint64_t sample_seed)
    {
        return channel_coefficient(scenario, loc, sample_seed, scenario.config().band);
    }

    ChannelMatrix draw_csi(const Scenario &scenario, const Location &loc, std::uint64_t sample_seed,
                           const BandConfig &band)
    {
        return channel_coefficient(scenario, loc, sample_seed, band);
    }

    std::vector<double> draw_power_samples(const Scenario &scenario, const Location &loc, std::size_t n,
                                           std::uint64_t sample_seed, const BandConfig &band)
    {
        if (n < 1)
            throw ConfigError("draw_power_samples: n must be >= 1");
        validate_band(band);
        validate_location(scenario, loc);
        const auto ps = scenario.paths(loc);
        const int P = static_cast<int>(ps.amplitude.size());
        const auto g = path_antenna_gains(ps, band, subcarrier_frequency(band, band.reference_subcarrier));
        const int A = band.num_antennas;

        Engine eng = make_engine(fading_stream(loc, sample_seed));
        std::vector<std::complex<double>> rot(P);
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            for (int p = 0; p < P; ++p)
                rot[p] = std::polar(1.0, 2.0 * kPi * uniform01(eng));
            double power = 0.0;
            for (int m = 0; m < A; ++m)
            {
                std::complex<double> acc = 0.0;
                for (int p = 0; p < P; ++p)
                    acc += rot[p] * g(p, m);
                power += std::norm(acc);
            }
            out[i] = power;
        }
        return out;
    }

    std::vector<double> draw_power_samples(const Scenario &scenario, const Location &loc, std::size_t n,
                                           std::uint64_t sample_seed)
    {
        return draw_power_samples(scenario, loc, n, sample_seed, scenario.config().band);
    }

    std::vector<double> draw_power_from_amplitudes(std::span<const double> amplitudes, std::size_t n,
                                                   std::uint64_t seed)
    {
        Engine eng = make_engine(derive_seed(seed, "amplitude_fading"));
        std::vector<double> out(n);
        for (auto &v : out)
        {
            double re = 0.0, im = 0.0;
            for (double a : amplitudes)
            {
                const double ph = 2.0 * kPi * uniform01(eng);
                re += a * std::cos(ph);
                im += a * std::sin(ph);
            }
            v = re * re + im * im;
        }
        return out;
    }

    std::vector<std::uint64_t> count_power_below(std::span<const double> amplitudes,
                                                 std::span<const double> thresholds, std::uint64_t n,
                                                 std::uint64_t seed)
    {
        if (!std::is_sorted(thresholds.begin(), thresholds.end()))
            throw ConfigError("count_power_below: thresholds must be ascending");
        std::vector<std::uint64_t> hist(thresholds.size() + 1, 0);
        constexpr std::uint64_t kChunk = 1u << 20;
        for (std::uint64_t start = 0, chunk = 0; start < n; start += kChunk, ++chunk)
        {
            const auto len = static_cast<std::size_t>(std::min(kChunk, n - start));
            const auto samples = draw_power_from_amplitudes(amplitudes, len, derive_seed(seed, "oracle_chunk", {chunk}));
            for (double v : samples)
            {
                // first threshold >= v
                const auto it = std::lower_bound(thresholds.begin(), thresholds.end(), v);
                ++hist[static_cast<std::size_t>(it - thresholds.begin())];
            }
        }
        std::vector<std::uint64_t> cum(thresholds.size());
        std::uint64_t run = 0;
        for (std::size_t i = 0; i < thresholds.size(); ++i)
        {
            run += hist[i];
            cum[i] = run;
        }
        return cum;
    }

    double true_outage_capacity(const Scenario &scenario, const Location &loc, double epsilon,
                                std::size_t oracle_n, std::uint64_t seed, const BandConfig &band)
    {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw DomainError("true_outage_capacity: epsilon must lie in (0,1)");
        if (static_cast<double>(oracle_n) * epsilon < 100.0 * (1.0 - 1e-12))
            throw ConfigError("true_outage_capacity: oracle_n must be >= 100/epsilon");
        const auto power = draw_power_samples(scenario, loc, oracle_n, seed, band);
        return statistics::estimate_outage_capacity(power, scenario.config().noise_power, epsilon).value;
    }

    double true_outage_capacity(const Scenario &scenario, const Location &loc, double epsilon,
                                std::size_t oracle_n, std::uint64_t seed)
    {
        return true_outage_capacity(scenario, loc, epsilon, oracle_n, seed, scenario.config().band);
    }

    double measure_outage_probability(const Scenario &scenario, const Location &loc, double rate,
                                      std::size_t n_mc, std::uint64_t seed, const BandConfig &band)
    {
        if (n_mc < 1)
            throw ConfigError("measure_outage_probability: n_mc must be >= 1");
        if (!(rate > 0.0))
            return 0.0; // capacity is never negative
        const auto power = draw_power_samples(scenario, loc, n_mc, seed, band);
        const double noise = scenario.config().noise_power;
        std::size_t below = 0;
        for (double p : power)
            if (statistics::capacity_from_power(p, noise) < rate)
                ++below;
        return static_cast<double>(below) / static_cast<double>(n_mc);
    }

    double measure_outage_probability(const Scenario &scenario, const Location &loc, double rate,
                                      std::size_t n_mc, std::uint64_t seed)
    {
        return measure_outage_probability(scenario, loc, rate, n_mc, seed, scenario.config().band);
    }
}
