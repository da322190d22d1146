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

#ifndef STATMAP_RATESELECT_HPP
#define STATMAP_RATESELECT_HPP

#include "statmap/gpmap.hpp"

#include <string_view>

namespace statmap::rateselect
{
    enum class Policy
    {
        map_quantile,
        nearest_neighbor,
    };

    std::string_view policy_name(Policy p) noexcept;

    struct RateDecision
    {
        double rate = 0.0;
        Policy policy = Policy::map_quantile;
        double delta = 0.0; // map policy only
    };

    // Standard normal CDF and its inverse (to ~1e-15 absolute on the CDF).
    double normal_cdf(double x);
    double gaussian_quantile(double delta);

    // Rate = max(0, mean + sqrt(variance) * Phi^{-1}(delta)).
    RateDecision select_rate_map(const gpmap::PredictiveDistribution &pred, double delta);

    // Target of the Euclidean-nearest training coordinate, lowest index on ties.
    RateDecision select_rate_baseline(const gpmap::TrainingSet &train, const gpmap::Point2 &query);
}

#endif
