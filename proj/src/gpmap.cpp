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

#include "statmap/gpmap.hpp"

#include "statmap/errors.hpp"
#include "statmap/format.hpp"
#include "statmap/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>

namespace statmap::gpmap
{
    std::string_view kernel_name(KernelFamily f) noexcept
    {
        return f == KernelFamily::exponential ? "exponential" : "squared_exponential";
    }

    KernelFamily parse_kernel(std::string_view name)
    {
        if (name == "squared_exponential")
            return KernelFamily::squared_exponential;
        if (name == "exponential")
            return KernelFamily::exponential;
        throw ConfigError("unknown kernel '" + std::string(name) + "' (squared_exponential, exponential)");
    }

    void Hyperparams::validate() const
    {
        if (!(signal_var > 0.0) || !(length_scale > 0.0) || !(noise_var >= 0.0) || !std::isfinite(prior_mean) ||
            !std::isfinite(signal_var) || !std::isfinite(length_scale) || !std::isfinite(noise_var))
            throw ConfigError("hyperparameters: need signal_var > 0, length_scale > 0, noise_var >= 0");
    }

    void TrainingSet::validate(bool allow_duplicates) const
    {
        if (coords.size() != targets.size())
            throw ConfigError("training set: coords and targets differ in length");
        if (coords.size() < 2)
            throw ConfigError("training set: at least 2 points required");
        for (std::size_t i = 0; i < coords.size(); ++i)
            if (!std::isfinite(coords[i].x) || !std::isfinite(coords[i].y) || !std::isfinite(targets[i]))
                throw ConfigError("training set: non-finite entry at index " + std::to_string(i));
        if (allow_duplicates)
            return;
        std::vector<Point2> sorted = coords;
        std::sort(sorted.begin(), sorted.end(),
                  [](const Point2 &a, const Point2 &b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ConfigError("training set: duplicate coordinates require a positive noise variance");
    }

    void HyperBounds::validate() const
    {
        if (!(prior_mean_lo <= prior_mean_hi) || !(signal_var_lo > 0.0 && signal_var_lo <= signal_var_hi) ||
            !(length_scale_lo > 0.0 && length_scale_lo <= length_scale_hi) ||
            !(noise_var_lo > 0.0 && noise_var_lo <= noise_var_hi))
            throw ConfigError("hyperparameter bounds: need positive, ordered bounds");
    }

    Hyperparams HyperBounds::clamp(const Hyperparams &h) const
    {
        return {std::clamp(h.prior_mean, prior_mean_lo, prior_mean_hi),
                std::clamp(h.signal_var, signal_var_lo, signal_var_hi),
                std::clamp(h.length_scale, length_scale_lo, length_scale_hi),
                std::clamp(h.noise_var, noise_var_lo, noise_var_hi), h.family};
    }

    double kernel(const Point2 &a, const Point2 &b, const Hyperparams &hyper, bool same_index)
    {
        const double dx = a.x - b.x, dy = a.y - b.y;
        const double d2 = dx * dx + dy * dy;
        const double k = hyper.family == KernelFamily::exponential
                             ? hyper.signal_var * std::exp(-std::sqrt(d2) / hyper.length_scale)
                             : hyper.signal_var * std::exp(-d2 / (2.0 * hyper.length_scale * hyper.length_scale));
        return same_index ? k + hyper.noise_var : k;
    }

    Eigen::MatrixXd kernel_matrix(const Hyperparams &hyper, std::span<const Point2> coords, double jitter)
    {
        const auto n = static_cast<Eigen::Index>(coords.size());
        Eigen::MatrixXd k(n, n);
        for (Eigen::Index j = 0; j < n; ++j)
        {
            k(j, j) = kernel(coords[j], coords[j], hyper, true) + jitter;
            for (Eigen::Index i = j + 1; i < n; ++i)
            {
                const double v = kernel(coords[i], coords[j], hyper);
                k(i, j) = v;
                k(j, i) = v;
            }
        }
        return k;
    }

    namespace
    {
        std::string describe(const Hyperparams &h)
        {
            return "kernel=" + std::string(kernel_name(h.family)) + " prior_mean=" + fmt_double(h.prior_mean) + " signal_var=" + fmt_double(h.signal_var) +
                   " length_scale=" + fmt_double(h.length_scale) + " noise_var=" + fmt_double(h.noise_var);
        }

        struct Factor
        {
            Eigen::LLT<Eigen::MatrixXd> llt;
            double jitter = 0.0;
        };

        std::optional<Factor> try_factorize(const Hyperparams &hyper, std::span<const Point2> coords,
                                            bool allow_jitter)
        {
            Factor f;
            f.llt.compute(kernel_matrix(hyper, coords));
            if (f.llt.info() == Eigen::Success)
                return f;
            if (allow_jitter && hyper.noise_var == 0.0)
            {
                f.jitter = 1e-9 * hyper.signal_var;
                f.llt.compute(kernel_matrix(hyper, coords, f.jitter));
                if (f.llt.info() == Eigen::Success)
                    return f;
            }
            return std::nullopt;
        }

        Eigen::VectorXd residuals(const Hyperparams &hyper, const TrainingSet &train)
        {
            Eigen::VectorXd r(static_cast<Eigen::Index>(train.size()));
            for (std::size_t i = 0; i < train.size(); ++i)
                r(static_cast<Eigen::Index>(i)) = train.targets[i] - hyper.prior_mean;
            return r;
        }

        double lml_from_factor(const Eigen::LLT<Eigen::MatrixXd> &llt, const Eigen::VectorXd &r)
        {
            const Eigen::VectorXd z = llt.matrixL().solve(r);
            const auto &l = llt.matrixLLT();
            double log_det = 0.0;
            for (Eigen::Index i = 0; i < l.rows(); ++i)
                log_det += 2.0 * std::log(l(i, i));
            const double n = static_cast<double>(r.size());
            return -0.5 * z.squaredNorm() - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
        }
    }

    double log_marginal_likelihood(const Hyperparams &hyper, const TrainingSet &train)
    {
        hyper.validate();
        if (train.coords.size() != train.targets.size() || train.coords.empty())
            throw ConfigError("log_marginal_likelihood: malformed training set");
        auto f = try_factorize(hyper, train.coords, false);
        if (!f)
            throw NumericalError("log_marginal_likelihood: kernel matrix not positive definite (" + describe(hyper) + ")");
        return lml_from_factor(f->llt, residuals(hyper, train));
    }

    KernelChecksum kernel_checksum(const Eigen::MatrixXd &k)
    {
        return {k.sum(), k.squaredNorm(), k.trace()};
    }

    bool checksum_matches(const KernelChecksum &a, const KernelChecksum &b, double rel_tol)
    {
        auto close = [rel_tol](double x, double y) {
            return std::abs(x - y) <= rel_tol * std::max({1.0, std::abs(x), std::abs(y)});
        };
        return close(a.sum, b.sum) && close(a.sum_squares, b.sum_squares) && close(a.trace, b.trace);
    }

    FittedMap::FittedMap(const Hyperparams &hyper, TrainingSet train, FitDiagnostics diagnostics)
        : hyper_(hyper), train_(std::move(train)), diagnostics_(diagnostics)
    {
        hyper_.validate();
        train_.validate(hyper_.noise_var > 0.0);
        auto f = try_factorize(hyper_, train_.coords, true);
        if (!f)
            throw NumericalError("FittedMap: kernel matrix not positive definite (" + describe(hyper_) + ")");
        diagnostics_.jitter = f->jitter;
        chol_ = f->llt.matrixL();
        alpha_ = f->llt.solve(residuals(hyper_, train_));
        checksum_ = kernel_checksum(kernel_matrix(hyper_, train_.coords, f->jitter));
        if (diagnostics_.evaluations == 0)
            diagnostics_.log_marginal_likelihood = lml_from_factor(f->llt, residuals(hyper_, train_));
    }

    PredictiveDistribution FittedMap::predict(const Point2 &query) const
    {
        const auto n = static_cast<Eigen::Index>(train_.size());
        Eigen::VectorXd k(n);
        for (Eigen::Index i = 0; i < n; ++i)
            k(i) = kernel(query, train_.coords[static_cast<std::size_t>(i)], hyper_);
        const double mean = hyper_.prior_mean + k.dot(alpha_);
        const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
        const double var = hyper_.signal_var - v.squaredNorm();
        return {mean, std::max(0.0, var)};
    }

    std::vector<PredictiveDistribution> predict_batch(const FittedMap &map, std::span<const Point2> queries)
    {
        std::vector<PredictiveDistribution> out;
        out.reserve(queries.size());
        for (const auto &q : queries)
            out.push_back(map.predict(q));
        return out;
    }

    namespace
    {
        using Theta = std::array<double, 4>; // m0, log sf2, log l, log sn2

        Hyperparams from_theta(const Theta &t, const HyperBounds &b, KernelFamily family)
        {
            return b.clamp({t[0], std::exp(t[1]), std::exp(t[2]), std::exp(t[3]), family});
        }

        Theta to_theta(const Hyperparams &h)
        {
            return {h.prior_mean, std::log(h.signal_var), std::log(h.length_scale), std::log(h.noise_var)};
        }

        struct SearchResult
        {
            Theta best{};
            double value = -INFINITY;
            int iterations = 0;
            int evaluations = 0;
            bool cap_hit = false;
        };

        template <class F>
        SearchResult nelder_mead(F &&objective, const Theta &start, const Theta &step, int max_iterations)
        {
            constexpr int D = 4;
            std::array<Theta, D + 1> simplex;
            std::array<double, D + 1> value;
            SearchResult res;
            auto eval = [&](const Theta &t) {
                ++res.evaluations;
                return objective(t); // maximized; -inf on failure
            };
            simplex[0] = start;
            for (int i = 0; i < D; ++i)
            {
                simplex[i + 1] = start;
                simplex[i + 1][i] += step[i];
            }
            for (int i = 0; i <= D; ++i)
                value[i] = eval(simplex[i]);

            auto order = [&]() {
                std::array<int, D + 1> idx{0, 1, 2, 3, 4};
                std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return value[a] > value[b]; });
                auto s = simplex;
                auto v = value;
                for (int i = 0; i <= D; ++i)
                {
                    simplex[i] = s[idx[i]];
                    value[i] = v[idx[i]];
                }
            };

            int it = 0;
            for (; it < max_iterations; ++it)
            {
                order();
                double size = 0.0;
                for (int i = 1; i <= D; ++i)
                    for (int d = 0; d < D; ++d)
                        size = std::max(size, std::abs(simplex[i][d] - simplex[0][d]));
                const bool flat = std::isfinite(value[D]) &&
                                  std::abs(value[0] - value[D]) <= 1e-11 * (1.0 + std::abs(value[0]));
                if (flat && size < 1e-7)
                    break;

                Theta centroid{};
                for (int i = 0; i < D; ++i)
                    for (int d = 0; d < D; ++d)
                        centroid[d] += simplex[i][d] / D;
                auto along = [&](double coef) {
                    Theta t;
                    for (int d = 0; d < D; ++d)
                        t[d] = centroid[d] + coef * (simplex[D][d] - centroid[d]);
                    return t;
                };

                const Theta xr = along(-1.0);
                const double fr = eval(xr);
                if (fr > value[0])
                {
                    const Theta xe = along(-2.0);
                    const double fe = eval(xe);
                    if (fe > fr)
                    {
                        simplex[D] = xe;
                        value[D] = fe;
                    }
                    else
                    {
                        simplex[D] = xr;
                        value[D] = fr;
                    }
                    continue;
                }
                if (fr > value[D - 1])
                {
                    simplex[D] = xr;
                    value[D] = fr;
                    continue;
                }
                const bool outside = fr > value[D];
                const Theta xc = along(outside ? -0.5 : 0.5);
                const double fc = eval(xc);
                if (fc > (outside ? fr : value[D]))
                {
                    simplex[D] = xc;
                    value[D] = fc;
                    continue;
                }
                for (int i = 1; i <= D; ++i)
                {
                    for (int d = 0; d < D; ++d)
                        simplex[i][d] = simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d]);
                    value[i] = eval(simplex[i]);
                }
            }
            order();
            res.best = simplex[0];
            res.value = value[0];
            res.iterations = it;
            res.cap_hit = it >= max_iterations;
            return res;
        }
    }

    FittedMap fit(const TrainingSet &train, const Hyperparams &init, const FitOptions &options)
    {
        options.bounds.validate();
        init.validate();
        train.validate(true);
        if (options.restarts < 1 || options.max_iterations < 1)
            throw ConfigError("fit: restarts and max_iterations must be >= 1");
        const HyperBounds &bounds = options.bounds;

        auto objective = [&](const Theta &t) -> double {
            const Hyperparams h = from_theta(t, bounds, init.family);
            auto f = try_factorize(h, train.coords, false);
            if (!f)
                return -INFINITY;
            const double v = lml_from_factor(f->llt, residuals(h, train));
            return std::isfinite(v) ? v : -INFINITY;
        };

        double target_sd = 0.0;
        {
            double mean = 0.0;
            for (double y : train.targets)
                mean += y;
            mean /= static_cast<double>(train.size());
            for (double y : train.targets)
                target_sd += (y - mean) * (y - mean);
            target_sd = std::sqrt(target_sd / static_cast<double>(train.size()));
        }
        const double m0_step = std::max(0.1 * target_sd, 1e-3 * (1.0 + std::abs(init.prior_mean)));
        const Theta step{m0_step, 0.5, 0.5, 0.5};

        const Hyperparams init_clamped = bounds.clamp(init);
        Theta best = to_theta(init_clamped);
        double best_value = objective(best);
        FitDiagnostics diag;
        diag.evaluations = 1;

        Engine eng = make_engine(derive_seed(options.seed, "gp_restarts"));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int r = 0; r < options.restarts; ++r)
        {
            Theta start = to_theta(init_clamped);
            if (r > 0)
            {
                start[0] += m0_step * normal(eng);
                for (int d = 1; d < 4; ++d)
                    start[d] += options.restart_log_jitter * normal(eng);
                start = to_theta(from_theta(start, bounds, init.family));
            }
            auto res = nelder_mead(objective, start, step, options.max_iterations);
            diag.iterations += res.iterations;
            diag.evaluations += res.evaluations;
            diag.iteration_cap_hit = diag.iteration_cap_hit || res.cap_hit;
            if (!std::isfinite(res.value))
            {
                ++diag.failed_restarts;
                continue;
            }
            if (res.value > best_value)
            {
                best_value = res.value;
                best = res.best;
            }
        }
        if (!std::isfinite(best_value))
            throw NumericalError("fit: Cholesky failed for every restart (init " + describe(init_clamped) + ")");
        diag.log_marginal_likelihood = best_value;
        return FittedMap(from_theta(best, bounds, init.family), train, diag);
    }

    namespace
    {
        void target_moments(const TrainingSet &train, double &mean, double &var)
        {
            mean = 0.0;
            for (double y : train.targets)
                mean += y;
            mean /= static_cast<double>(train.targets.size());
            var = 0.0;
            for (double y : train.targets)
                var += (y - mean) * (y - mean);
            var /= static_cast<double>(train.targets.size());
        }

        double coordinate_span(const TrainingSet &train)
        {
            double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
            for (const auto &c : train.coords)
            {
                xlo = std::min(xlo, c.x);
                xhi = std::max(xhi, c.x);
                ylo = std::min(ylo, c.y);
                yhi = std::max(yhi, c.y);
            }
            const double span = std::hypot(xhi - xlo, yhi - ylo);
            return span > 0.0 ? span : 1.0;
        }
    }

    Hyperparams default_init(const TrainingSet &train, KernelFamily family)
    {
        double mean, var;
        target_moments(train, mean, var);
        const double scale = var > 0.0 ? var : 1.0;
        return {mean, scale, 0.1 * coordinate_span(train), 0.1 * scale, family};
    }

    HyperBounds default_bounds(const TrainingSet &train)
    {
        double mean, var;
        target_moments(train, mean, var);
        const double scale = var > 0.0 ? var : 1.0;
        const double sd = std::sqrt(scale);
        const double span = coordinate_span(train);
        HyperBounds b;
        b.prior_mean_lo = mean - 10.0 * sd;
        b.prior_mean_hi = mean + 10.0 * sd;
        b.signal_var_lo = 1e-6 * scale;
        b.signal_var_hi = 1e2 * scale;
        b.length_scale_lo = 1e-3 * span;
        b.length_scale_hi = 10.0 * span;
        b.noise_var_lo = 1e-8 * scale;
        b.noise_var_hi = 10.0 * scale;
        return b;
    }
}
