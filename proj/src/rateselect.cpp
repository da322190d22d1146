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

#include "statmap/rateselect.hpp"

#include "statmap/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace statmap::rateselect
{
    std::string_view policy_name(Policy p) noexcept
    {
        switch (p)
        {
        case Policy::map_quantile:
            return "map_quantile";
        case Policy::nearest_neighbor:
            return "nearest_neighbor";
        }
        return "unknown";
    }

    double normal_cdf(double x)
    {
        return 0.5 * std::erfc(-x / std::numbers::sqrt2);
    }

    double gaussian_quantile(double delta)
    {
        if (!(delta > 0.0 && delta < 1.0))
            throw DomainError("gaussian_quantile: delta must lie in (0,1)");

        // Acklam's rational approximation (relative error ~1e-9) ...
        static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                                 -3.066479806614716e+01, 2.506628277459239e+00};
        static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                                 -1.328068155288572e+01};
        static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                                 4.374664141464968e+00, 2.938163982698783e+00};
        static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                                 2.445134137142996e+00, 3.754408661907416e+00};
        constexpr double p_low = 0.02425;

        double x;
        if (delta < p_low)
        {
            const double q = std::sqrt(-2.0 * std::log(delta));
            x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }
        else if (delta <= 1.0 - p_low)
        {
            const double q = delta - 0.5;
            const double r = q * q;
            x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
                (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
        }
        else
        {
            const double q = std::sqrt(-2.0 * std::log1p(-delta));
            x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }

        // ... polished with Halley steps against the erfc-based CDF.
        for (int it = 0; it < 3; ++it)
        {
            const double e = (delta < 0.5) ? normal_cdf(x) - delta : -(0.5 * std::erfc(x / std::numbers::sqrt2) - (1.0 - delta));
            const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
            x = x - u / (1.0 + 0.5 * x * u);
        }
        return x;
    }

    RateDecision select_rate_map(const gpmap::PredictiveDistribution &pred, double delta)
    {
        if (!(pred.variance >= 0.0))
            throw DomainError("select_rate_map: negative predictive variance");
        const double z = gaussian_quantile(delta);
        const double rate = pred.variance == 0.0 ? pred.mean : pred.mean + std::sqrt(pred.variance) * z;
        return {std::max(0.0, rate), Policy::map_quantile, delta};
    }

    RateDecision select_rate_baseline(const gpmap::TrainingSet &train, const gpmap::Point2 &query)
    {
        if (train.coords.empty() || train.coords.size() != train.targets.size())
            throw ConfigError("select_rate_baseline: empty or malformed training set");
        std::size_t best = 0;
        double best_d2 = INFINITY;
        for (std::size_t i = 0; i < train.coords.size(); ++i)
        {
            const double dx = train.coords[i].x - query.x, dy = train.coords[i].y - query.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 < best_d2)
            {
                best_d2 = d2;
                best = i;
            }
        }
        return {std::max(0.0, train.targets[best]), Policy::nearest_neighbor, 0.0};
    }
}
