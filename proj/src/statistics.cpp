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

#include "statmap/statistics.hpp"

#include "statmap/errors.hpp"
#include "statmap/format.hpp"
#include "statmap/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace statmap::statistics
{
    EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
        : sorted_(std::move(samples))
    {
        if (sorted_.empty())
            throw ConfigError("EmpiricalDistribution: no samples");
        for (double v : sorted_)
            if (!std::isfinite(v))
                throw ConfigError("EmpiricalDistribution: non-finite sample");
        std::sort(sorted_.begin(), sorted_.end());
    }

    double EmpiricalDistribution::cdf(double value) const noexcept
    {
        auto it = std::upper_bound(sorted_.begin(), sorted_.end(), value);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    }

    double capacity_from_power(double power, double noise_power)
    {
        if (!(noise_power > 0.0))
            throw DomainError("capacity_from_power: noise_power must be positive");
        if (!(power >= 0.0))
            throw DomainError("capacity_from_power: power must be non-negative");
        return std::log2(1.0 + power / noise_power);
    }

    std::size_t min_samples_for_quantile(double epsilon)
    {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw DomainError("epsilon must lie in (0,1)");
        auto m = static_cast<std::size_t>(std::floor(1.0 / epsilon));
        while (m > 0 && static_cast<double>(m) * epsilon > 1.0)
            --m;
        while (static_cast<double>(m) * epsilon <= 1.0)
            ++m;
        return m;
    }

    double empirical_quantile(const EmpiricalDistribution &dist, double epsilon)
    {
        const std::size_t need = min_samples_for_quantile(epsilon);
        const std::size_t n = dist.size();
        if (n < need)
            throw InsufficientSamples(n, need);
        auto k = static_cast<std::size_t>(std::ceil(epsilon * static_cast<double>(n)));
        k = std::clamp<std::size_t>(k, 1, n);
        return dist.sorted()[k - 1];
    }

    OutageCapacityEstimate estimate_outage_capacity(std::span<const double> power_samples,
                                                    double noise_power, double epsilon)
    {
        std::vector<double> caps;
        caps.reserve(power_samples.size());
        for (double p : power_samples)
            caps.push_back(capacity_from_power(p, noise_power));
        EmpiricalDistribution dist(std::move(caps));
        return {epsilon, empirical_quantile(dist, epsilon), dist.size()};
    }

    std::vector<CdfPoint> empirical_cdf(const EmpiricalDistribution &dist)
    {
        const auto s = dist.sorted();
        const double n = static_cast<double>(s.size());
        std::vector<CdfPoint> out;
        out.reserve(s.size());
        for (std::size_t i = 0; i < s.size(); ++i)
        {
            // a run of ties collapses onto its last index
            if (i + 1 < s.size() && s[i + 1] == s[i])
                continue;
            out.push_back({s[i], static_cast<double>(i + 1) / n});
        }
        return out;
    }

    double wasserstein1(const EmpiricalDistribution &a, const EmpiricalDistribution &b)
    {
        const auto sa = a.sorted();
        const auto sb = b.sorted();
        const std::uint64_t na = sa.size();
        const std::uint64_t nb = sb.size();
        if (na == nb)
        {
            double acc = 0.0;
            for (std::size_t i = 0; i < na; ++i)
                acc += std::abs(sa[i] - sb[i]);
            return acc / static_cast<double>(na);
        }
        // Breakpoints i/na and j/nb on the common grid of denominator na*nb.
        std::uint64_t i = 0, j = 0, pos = 0;
        double acc = 0.0;
        while (i < na && j < nb)
        {
            const std::uint64_t end_a = (i + 1) * nb;
            const std::uint64_t end_b = (j + 1) * na;
            const std::uint64_t end = std::min(end_a, end_b);
            acc += static_cast<double>(end - pos) * std::abs(sa[i] - sb[j]);
            pos = end;
            if (end == end_a)
                ++i;
            if (end == end_b)
                ++j;
        }
        return acc / (static_cast<double>(na) * static_cast<double>(nb));
    }

    double dkw_band(std::size_t n, double confidence)
    {
        if (n == 0)
            throw DomainError("dkw_band: n must be at least 1");
        if (!(confidence > 0.0 && confidence < 1.0))
            throw DomainError("dkw_band: confidence must lie in (0,1)");
        return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(n)));
    }

    namespace
    {
        constexpr double kBesselSplit = 15.0;

        double i0_series(double x)
        {
            const double q = 0.25 * x * x;
            double term = 1.0, sum = 1.0;
            for (int k = 1; k < 500; ++k)
            {
                term *= q / (static_cast<double>(k) * static_cast<double>(k));
                sum += term;
                if (term < sum * 1e-17)
                    break;
            }
            return sum;
        }

        // sum_k ((2k-1)!!)^2 / (k! (8x)^k), truncated at the smallest term
        double i0_asymptotic_factor(double x)
        {
            double term = 1.0, sum = 1.0;
            for (int k = 1; k < 60; ++k)
            {
                const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
                if (std::abs(next) >= std::abs(term))
                    break;
                term = next;
                sum += term;
                if (term < sum * 1e-17)
                    break;
            }
            return sum;
        }
    }

    double bessel_i0(double x)
    {
        x = std::abs(x);
        if (x <= kBesselSplit)
            return i0_series(x);
        return std::exp(x) / std::sqrt(2.0 * std::numbers::pi * x) * i0_asymptotic_factor(x);
    }

    double log_bessel_i0(double x)
    {
        x = std::abs(x);
        if (x <= kBesselSplit)
            return std::log(i0_series(x));
        return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(i0_asymptotic_factor(x));
    }

    double rician_log_pdf(double r, double K, double omega)
    {
        if (r <= 0.0)
            return -INFINITY;
        const double kp1 = K + 1.0;
        return std::log(2.0 * kp1 * r / omega) - K - kp1 * r * r / omega +
               log_bessel_i0(2.0 * r * std::sqrt(K * kp1 / omega));
    }

    namespace
    {
        // Regularized lower incomplete gamma P(m, z) for integer m >= 1, by
        // the series e^-z z^m/m! sum_k z^k / ((m+1)...(m+k)).
        double lower_gamma_int(int m, double z)
        {
            if (z <= 0.0)
                return 0.0;
            if (z > m + 40.0 + 10.0 * std::sqrt(static_cast<double>(m)))
            {
                // far right tail: 1 - e^-z sum_{i<m} z^i/i!
                double term = 1.0, sum = 1.0;
                for (int i = 1; i < m; ++i)
                {
                    term *= z / i;
                    sum += term;
                }
                return 1.0 - std::exp(-z + std::log(sum));
            }
            const double log_pref = -z + m * std::log(z) - std::lgamma(m + 1.0);
            double term = 1.0, sum = 1.0;
            for (int k = 1; k < 100000; ++k)
            {
                term *= z / (m + k);
                sum += term;
                if (term < sum * 1e-17)
                    break;
            }
            return std::min(1.0, std::exp(log_pref + std::log(sum)));
        }
    }

    double rician_power_cdf(double power, double K, double omega)
    {
        if (power <= 0.0)
            return 0.0;
        // 2(K+1) x / omega is noncentral chi-square, 2 dof, noncentrality 2K;
        // expand as a Poisson(K) mixture of central chi-squares.
        const double z = (K + 1.0) * power / omega;
        if (K <= 0.0)
            return -std::expm1(-z);
        const int j_max = static_cast<int>(K + 12.0 * std::sqrt(K) + 40.0);
        const double log_k = std::log(K);
        double acc = 0.0;
        for (int j = 0; j <= j_max; ++j)
        {
            const double log_w = -K + j * log_k - std::lgamma(j + 1.0);
            acc += std::exp(log_w) * lower_gamma_int(j + 1, z);
        }
        return std::clamp(acc, 0.0, 1.0);
    }

    RicianFit fit_rician_ml(std::span<const double> amplitudes, double k_max, int max_iterations)
    {
        const std::size_t n = amplitudes.size();
        if (n < 100)
            throw InsufficientSamples("fit_rician_ml", n, 100);
        double sum2 = 0.0;
        double lo = INFINITY, hi = -INFINITY;
        for (double r : amplitudes)
        {
            if (!(r > 0.0) || !std::isfinite(r))
                throw DomainError("fit_rician_ml: samples must be positive and finite");
            sum2 += r * r;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        if (hi - lo <= 1e-12 * hi)
            throw NumericalError("fit_rician_ml: degenerate input (zero variance), likelihood unbounded in K");
        const double omega = sum2 / static_cast<double>(n);

        auto loglik = [&](double K) {
            double acc = 0.0;
            for (double r : amplitudes)
                acc += rician_log_pdf(r, K, omega);
            return acc;
        };

        // Coarse scan on t = log(1+K), then golden-section refinement.
        const double t_hi = std::log1p(k_max);
        constexpr int kGrid = 32;
        int best = 0;
        double best_ll = -INFINITY;
        for (int g = 0; g <= kGrid; ++g)
        {
            const double ll = loglik(std::expm1(t_hi * g / kGrid));
            if (ll > best_ll)
            {
                best_ll = ll;
                best = g;
            }
        }
        double a = t_hi * std::max(0, best - 1) / kGrid;
        double b = t_hi * std::min(kGrid, best + 1) / kGrid;
        const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = b - invphi * (b - a);
        double d = a + invphi * (b - a);
        double fc = loglik(std::expm1(c));
        double fd = loglik(std::expm1(d));
        int it = 0;
        for (; it < max_iterations && (b - a) > 1e-10 * (1.0 + std::abs(a)); ++it)
        {
            if (fc > fd)
            {
                b = d;
                d = c;
                fd = fc;
                c = b - invphi * (b - a);
                fc = loglik(std::expm1(c));
            }
            else
            {
                a = c;
                c = d;
                fc = fd;
                d = a + invphi * (b - a);
                fd = loglik(std::expm1(d));
            }
        }
        if ((b - a) > 1e-10 * (1.0 + std::abs(a)))
            throw NumericalError("fit_rician_ml: no convergence after " + std::to_string(it) +
                                 " iterations, bracket [" + fmt_double(std::expm1(a)) + ", " +
                                 fmt_double(std::expm1(b)) + "]");
        double t = 0.5 * (a + b);
        double K = std::expm1(t);
        double ll = loglik(K);
        // the boundary K = 0 is a valid optimum
        const double ll0 = loglik(0.0);
        if (ll0 >= ll)
        {
            K = 0.0;
            ll = ll0;
        }
        return {K, omega, ll, it};
    }

    std::vector<double> sample_rician(double K, double omega, std::size_t n, std::uint64_t seed)
    {
        if (K < 0.0 || !(omega > 0.0))
            throw ConfigError("sample_rician: need K >= 0 and omega > 0");
        Engine eng = make_engine(derive_seed(seed, "rician"));
        std::normal_distribution<double> normal(0.0, 1.0);
        const double los = std::sqrt(K * omega / (K + 1.0));
        const double sd = std::sqrt(omega / (2.0 * (K + 1.0)));
        std::vector<double> out(n);
        for (auto &r : out)
        {
            const double re = los + sd * normal(eng);
            const double im = sd * normal(eng);
            r = std::hypot(re, im);
        }
        return out;
    }

    std::vector<double> average_ranks(std::span<const double> values)
    {
        const std::size_t n = values.size();
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<double> ranks(n);
        std::size_t i = 0;
        while (i < n)
        {
            std::size_t j = i;
            while (j + 1 < n && values[idx[j + 1]] == values[idx[i]])
                ++j;
            const double r = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k)
                ranks[idx[k]] = r;
            i = j + 1;
        }
        return ranks;
    }

    double spearman(std::span<const double> a, std::span<const double> b)
    {
        if (a.size() != b.size() || a.size() < 2)
            throw ConfigError("spearman: need two equal-length series of size >= 2");
        const auto ra = average_ranks(a);
        const auto rb = average_ranks(b);
        const double n = static_cast<double>(a.size());
        const double mean = (n + 1.0) / 2.0;
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (std::size_t i = 0; i < ra.size(); ++i)
        {
            const double da = ra[i] - mean, db = rb[i] - mean;
            sab += da * db;
            saa += da * da;
            sbb += db * db;
        }
        if (saa == 0.0 || sbb == 0.0)
            return 0.0;
        return sab / std::sqrt(saa * sbb);
    }

    std::string cdf_csv(std::span<const CdfPoint> table)
    {
        std::string out = "value,cdf\n";
        for (const auto &p : table)
        {
            append_double(out, p.value);
            out += ',';
            append_double(out, p.probability);
            out += '\n';
        }
        return out;
    }

    std::string rician_fit_csv(const RicianFit &fit)
    {
        std::string out = "param,estimate\n";
        out += "K," + fmt_double(fit.K) + "\n";
        out += "omega," + fmt_double(fit.omega) + "\n";
        out += "log_likelihood," + fmt_double(fit.log_likelihood) + "\n";
        return out;
    }
}
