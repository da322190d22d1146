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

#include "doctest.h"

#include "statmap/errors.hpp"
#include "statmap/rng.hpp"
#include "statmap/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace statmap;
using namespace statmap::statistics;

namespace
{
    // Quantile-function integral on a uniform grid of u values.
    double w1_grid(const EmpiricalDistribution &a, const EmpiricalDistribution &b, std::size_t grid)
    {
        auto q = [](const EmpiricalDistribution &d, double u) {
            const auto s = d.sorted();
            auto k = static_cast<std::size_t>(std::ceil(u * static_cast<double>(s.size())));
            k = std::clamp<std::size_t>(k, 1, s.size());
            return s[k - 1];
        };
        double acc = 0.0;
        for (std::size_t i = 0; i < grid; ++i)
        {
            const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(grid);
            acc += std::abs(q(a, u) - q(b, u));
        }
        return acc / static_cast<double>(grid);
    }

    std::vector<double> uniform_samples(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0)
    {
        Engine eng = make_engine(seed);
        std::vector<double> v(n);
        for (auto &x : v)
            x = lo + (hi - lo) * uniform01(eng);
        return v;
    }
}

TEST_SUITE("statistics")
{
    TEST_CASE("capacity_from_power examples")
    {
        CHECK(capacity_from_power(0.0, 1.0) == 0.0);
        CHECK(capacity_from_power(1.0, 1.0) == 1.0);
        CHECK(capacity_from_power(3.0, 1.0) == 2.0);
        CHECK_THROWS_AS(capacity_from_power(1.0, 0.0), DomainError);
        CHECK_THROWS_AS(capacity_from_power(1.0, -1.0), DomainError);
        CHECK_THROWS_AS(capacity_from_power(-1.0, 1.0), DomainError);
    }

    TEST_CASE("capacity is strictly increasing in power")
    {
        double prev = -1.0;
        for (double p = 0.0; p < 1e6; p = p * 1.7 + 1e-3)
        {
            const double c = capacity_from_power(p, 0.5);
            CHECK(c > prev);
            prev = c;
        }
    }

    TEST_CASE("empirical distribution validates input")
    {
        CHECK_THROWS_AS(EmpiricalDistribution(std::vector<double>{}), ConfigError);
        CHECK_THROWS_AS(EmpiricalDistribution(std::vector<double>{1.0, NAN}), ConfigError);
        CHECK_THROWS_AS(EmpiricalDistribution(std::vector<double>{INFINITY}), ConfigError);
        const EmpiricalDistribution d(std::vector<double>{3.0, 1.0, 2.0});
        CHECK(std::is_sorted(d.sorted().begin(), d.sorted().end()));
        CHECK(d.min() == 1.0);
        CHECK(d.max() == 3.0);
    }

    TEST_CASE("empirical_quantile order statistic examples")
    {
        std::vector<double> s(100);
        std::iota(s.begin(), s.end(), 1.0);
        CHECK(empirical_quantile(EmpiricalDistribution(s), 0.05) == 5.0);
        for (double eps : {0.011, 0.1, 0.5, 0.99})
            CHECK(empirical_quantile(EmpiricalDistribution(std::vector<double>(200, 2.5)), eps) == 2.5);
    }

    TEST_CASE("empirical_quantile rejects n <= 1/eps")
    {
        for (auto [n, eps] : {std::pair<std::size_t, double>{100, 0.01}, {10, 0.1}, {999, 1e-3}, {1000, 1e-3}, {1, 0.5}})
        {
            const EmpiricalDistribution d(uniform_samples(n, n));
            CHECK_THROWS_AS(empirical_quantile(d, eps), InsufficientSamples);
            try
            {
                empirical_quantile(d, eps);
            }
            catch (const InsufficientSamples &e)
            {
                CHECK(e.required() == min_samples_for_quantile(eps));
                CHECK(e.have() == n);
            }
        }
        CHECK(min_samples_for_quantile(0.01) == 101);
        CHECK(min_samples_for_quantile(1e-3) == 1001);
        CHECK_NOTHROW(empirical_quantile(EmpiricalDistribution(uniform_samples(101, 1)), 0.01));
        CHECK_THROWS_AS(empirical_quantile(EmpiricalDistribution(uniform_samples(101, 1)), 0.0), DomainError);
        CHECK_THROWS_AS(empirical_quantile(EmpiricalDistribution(uniform_samples(101, 1)), 1.0), DomainError);
    }

    TEST_CASE("order statistic mean matches k/(n+1)")
    {
        // n = 1000, eps = 2e-3: the 2nd smallest of 1000 uniforms has mean 2/1001
        Engine eng = make_engine(7);
        double acc = 0.0;
        const int reps = 10000;
        std::vector<double> s(1000);
        for (int r = 0; r < reps; ++r)
        {
            for (auto &x : s)
                x = uniform01(eng);
            acc += empirical_quantile(EmpiricalDistribution(s), 2e-3);
        }
        const double mean = acc / reps;
        CHECK(mean == doctest::Approx(2.0 / 1001.0).epsilon(0.10));
    }

    TEST_CASE("quantile is monotone in eps and equivariant under increasing maps")
    {
        const auto v = uniform_samples(5000, 11, -3.0, 3.0);
        const EmpiricalDistribution d(v);
        std::vector<double> ev(v.size()), cv(v.size());
        std::transform(v.begin(), v.end(), ev.begin(), [](double x) { return std::exp(x); });
        const EmpiricalDistribution de(ev);
        double prev = -INFINITY;
        for (double eps = 0.001; eps < 1.0; eps += 0.0123)
        {
            const double q = empirical_quantile(d, eps);
            CHECK(q >= prev);
            prev = q;
            CHECK(empirical_quantile(de, eps) == std::exp(q));
        }
    }

    TEST_CASE("quantile of capacity equals capacity of the power quantile")
    {
        Engine eng = make_engine(3);
        std::exponential_distribution<double> ex(0.3);
        std::vector<double> p(20000);
        for (auto &x : p)
            x = ex(eng);
        std::vector<double> c(p.size());
        for (std::size_t i = 0; i < p.size(); ++i)
            c[i] = capacity_from_power(p[i], 0.7);
        for (double eps : {1e-3, 1e-2, 0.1, 0.5})
        {
            const double from_power = capacity_from_power(empirical_quantile(EmpiricalDistribution(p), eps), 0.7);
            CHECK(empirical_quantile(EmpiricalDistribution(c), eps) == from_power);
            CHECK(estimate_outage_capacity(p, 0.7, eps).value == from_power);
            CHECK(estimate_outage_capacity(p, 0.7, eps).n_samples == p.size());
        }
    }

    TEST_CASE("empirical_cdf examples")
    {
        const auto t = empirical_cdf(EmpiricalDistribution(std::vector<double>{2.0, 1.0}));
        REQUIRE(t.size() == 2);
        CHECK(t[0].value == 1.0);
        CHECK(t[0].probability == 0.5);
        CHECK(t[1].value == 2.0);
        CHECK(t[1].probability == 1.0);
        const EmpiricalDistribution d(uniform_samples(777, 5));
        CHECK(d.cdf(d.max()) == 1.0);
        CHECK(empirical_cdf(d).back().probability == 1.0);
        const auto ties = empirical_cdf(EmpiricalDistribution(std::vector<double>{1.0, 1.0, 2.0, 3.0}));
        REQUIRE(ties.size() == 3);
        CHECK(ties[0].probability == 0.5);
    }

    TEST_CASE("exponential CDF at 1 within the DKW band")
    {
        Engine eng = make_engine(99);
        std::exponential_distribution<double> ex(1.0);
        std::vector<double> v(1'000'000);
        for (auto &x : v)
            x = ex(eng);
        const EmpiricalDistribution d(std::move(v));
        CHECK(std::abs(d.cdf(1.0) - (1.0 - std::exp(-1.0))) <= dkw_band(d.size(), 0.99));
    }

    TEST_CASE("wasserstein1 examples")
    {
        const auto a = uniform_samples(300, 1);
        auto shuffled = a;
        std::reverse(shuffled.begin(), shuffled.end());
        CHECK(wasserstein1(EmpiricalDistribution(a), EmpiricalDistribution(shuffled)) == 0.0);
        CHECK(wasserstein1(EmpiricalDistribution(std::vector<double>{1.5}), EmpiricalDistribution(std::vector<double>{-2.0})) ==
              3.5);
        const EmpiricalDistribution x(std::vector<double>{0.0, 2.0}), y(std::vector<double>{1.0});
        CHECK(wasserstein1(x, y) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(w1_grid(x, y, 1'000'000) == doctest::Approx(1.0).epsilon(1e-9));
    }

    TEST_CASE("wasserstein1 matches the grid oracle for unequal sizes")
    {
        for (std::uint64_t s = 0; s < 5; ++s)
        {
            const EmpiricalDistribution a(uniform_samples(37 + 13 * s, 100 + s, 0.0, 2.0));
            const EmpiricalDistribution b(uniform_samples(50 - 3 * s, 200 + s, 0.5, 3.0));
            // grid sized to a common multiple of both counts makes the midpoint rule exact
            const std::size_t grid = a.size() * b.size() * 20;
            CHECK(wasserstein1(a, b) == doctest::Approx(w1_grid(a, b, grid)).epsilon(1e-9));
        }
        // equal sizes reduce to the mean absolute difference of sorted samples
        const EmpiricalDistribution a(uniform_samples(64, 1)), b(uniform_samples(64, 2));
        double mad = 0.0;
        for (std::size_t i = 0; i < 64; ++i)
            mad += std::abs(a.sorted()[i] - b.sorted()[i]);
        CHECK(wasserstein1(a, b) == doctest::Approx(mad / 64.0).epsilon(1e-14));
    }

    TEST_CASE("wasserstein1 is a metric")
    {
        Engine eng = make_engine(2024);
        int triangle_violations = 0;
        for (int t = 0; t < 1000; ++t)
        {
            std::vector<EmpiricalDistribution> d;
            for (int k = 0; k < 3; ++k)
            {
                const auto n = 1 + static_cast<std::size_t>(uniform01(eng) * 40.0);
                d.emplace_back(uniform_samples(n, eng(), -1.0, 1.0 + k));
            }
            const double ab = wasserstein1(d[0], d[1]), ba = wasserstein1(d[1], d[0]);
            CHECK(ab == ba);
            CHECK(ab >= 0.0);
            const double bc = wasserstein1(d[1], d[2]), ac = wasserstein1(d[0], d[2]);
            if (ac > ab + bc + 1e-12)
                ++triangle_violations;
        }
        CHECK(triangle_violations == 0);
    }

    TEST_CASE("dkw_band examples")
    {
        CHECK(dkw_band(1'000'000, 0.99) == doctest::Approx(1.6275e-3).epsilon(1e-4));
        const long double ref = std::sqrt(std::log(2.0L / 0.01L) / 2.0e6L);
        CHECK(std::abs(dkw_band(1'000'000, 0.99) - static_cast<double>(ref)) < 1e-15);
        // inversion: n = ln(2/(1-c)) / (2 e^2) gives band e
        const double e = 0.01;
        const double n = std::log(2.0 / 0.5) / (2.0 * e * e);
        CHECK(dkw_band(static_cast<std::size_t>(n), 0.5) == doctest::Approx(e * std::sqrt(n / std::floor(n))));
        CHECK(dkw_band(std::size_t(1) << 60, 0.99) < 1e-8);
        CHECK_THROWS_AS(dkw_band(0, 0.99), DomainError);
        CHECK_THROWS_AS(dkw_band(10, 1.0), DomainError);
    }

    TEST_CASE("bessel_i0 against the power series")
    {
        for (double x : {0.0, 0.5, 1.0, 3.0, 7.5, 14.9, 15.1, 20.0, 40.0})
        {
            long double term = 1.0L, sum = 1.0L;
            const long double q = static_cast<long double>(x) * x / 4.0L;
            for (int k = 1; k < 400; ++k)
            {
                term *= q / (static_cast<long double>(k) * k);
                sum += term;
            }
            CHECK(bessel_i0(x) == doctest::Approx(static_cast<double>(sum)).epsilon(1e-12));
            CHECK(log_bessel_i0(x) == doctest::Approx(std::log(static_cast<double>(sum))).epsilon(1e-12));
        }
        CHECK(log_bessel_i0(2000.0) == doctest::Approx(2000.0 - 0.5 * std::log(2.0 * M_PI * 2000.0)).epsilon(1e-6));
    }

    TEST_CASE("rician densities are consistent")
    {
        for (double K : {0.0, 1.0, 4.0, 30.0})
        {
            const double omega = 1.3;
            // trapezoid integral of the amplitude density up to r gives the power CDF at r^2
            double acc = 0.0, prev = 0.0;
            const double h = 1e-4;
            for (double r = h; r <= 8.0; r += h)
            {
                const double f = std::exp(rician_log_pdf(r, K, omega));
                acc += 0.5 * h * (f + prev);
                prev = f;
                if (std::abs(r - 0.5) < h / 2 || std::abs(r - 1.0) < h / 2 || std::abs(r - 1.6) < h / 2)
                    CHECK(rician_power_cdf(r * r, K, omega) == doctest::Approx(acc).epsilon(1e-5));
            }
            CHECK(acc == doctest::Approx(1.0).epsilon(1e-5));
        }
        // K = 0 is Rayleigh: power CDF 1 - exp(-p / omega)
        CHECK(rician_power_cdf(0.3, 0.0, 2.0) == doctest::Approx(1.0 - std::exp(-0.15)).epsilon(1e-13));
        CHECK(rician_power_cdf(0.0, 3.0, 1.0) == 0.0);
    }

    TEST_CASE("sample_rician moment identities")
    {
        const double K = 4.0, omega = 1.0;
        const auto r = sample_rician(K, omega, 1'000'000, 5);
        double m2 = 0.0, m4 = 0.0;
        for (double x : r)
        {
            m2 += x * x;
            m4 += x * x * x * x;
        }
        m2 /= static_cast<double>(r.size());
        m4 /= static_cast<double>(r.size());
        CHECK(m2 == doctest::Approx(omega).epsilon(0.005));
        CHECK(m4 == doctest::Approx(omega * omega * (K * K + 4 * K + 2) / ((K + 1) * (K + 1))).epsilon(0.01));
    }

    TEST_CASE("fit_rician_ml recovers parameters")
    {
        const auto fit = fit_rician_ml(sample_rician(4.0, 1.0, 1'000'000, 17));
        CHECK(fit.K == doctest::Approx(4.0).epsilon(0.05));
        CHECK(fit.omega == doctest::Approx(1.0).epsilon(0.01));
        CHECK(std::isfinite(fit.log_likelihood));

        const auto ray = fit_rician_ml(sample_rician(0.0, 2.0, 200'000, 18));
        CHECK(ray.K < 0.05);
        CHECK(ray.omega == doctest::Approx(2.0).epsilon(0.01));
    }

    TEST_CASE("fit_rician_ml rejects bad input")
    {
        CHECK_THROWS_AS(fit_rician_ml(std::vector<double>(500, 1.0)), NumericalError);
        CHECK_THROWS_AS(fit_rician_ml(std::vector<double>(99, 1.0)), InsufficientSamples);
        auto v = sample_rician(1.0, 1.0, 200, 1);
        v[3] = 0.0;
        CHECK_THROWS_AS(fit_rician_ml(v), DomainError);
    }

    TEST_CASE("spearman and ranks")
    {
        const std::vector<double> v{3.0, 1.0, 4.0, 1.0, 5.0};
        const auto r = average_ranks(v);
        CHECK(r == std::vector<double>{3.0, 1.5, 4.0, 1.5, 5.0});
        const std::vector<double> a{1, 2, 3, 4, 5}, b{5, 6, 7, 8, 7};
        // textbook value: ranks of b are 1,2,3.5,5,3.5
        CHECK(spearman(a, b) == doctest::Approx(0.8207826816681233).epsilon(1e-12));
        CHECK(spearman(a, a) == doctest::Approx(1.0));
    }

    TEST_CASE("csv writers")
    {
        const auto csv = cdf_csv(empirical_cdf(EmpiricalDistribution(std::vector<double>{1.0, 2.0})));
        CHECK(csv == "value,cdf\n1,0.5\n2,1\n");
        const auto fit = rician_fit_csv({2.5, 1.0, -3.0, 10});
        CHECK(fit == "param,estimate\nK,2.5\nomega,1\nlog_likelihood,-3\n");
    }
}
