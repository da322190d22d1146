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

#include "statmap/chart.hpp"

#include "statmap/errors.hpp"
#include "statmap/format.hpp"
#include "statmap/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace statmap::chart
{
    FeatureLayout feature_layout(int num_antennas, int num_subcarriers, int reduced_subcarriers)
    {
        if (num_antennas < 1 || num_subcarriers < 1 || reduced_subcarriers < 1)
            throw ConfigError("feature_layout: dimensions must be >= 1");
        FeatureLayout l;
        l.num_antennas = num_antennas;
        l.num_subcarriers = num_subcarriers;
        l.stride = (num_subcarriers + reduced_subcarriers - 1) / reduced_subcarriers;
        l.reduced_subcarriers = (num_subcarriers + l.stride - 1) / l.stride;
        return l;
    }

    Eigen::VectorXd csi_features(const propagation::ChannelMatrix &csi, int reduced_subcarriers)
    {
        if (csi.size() == 0)
            throw ConfigError("csi_features: empty CSI");
        if (!csi.allFinite())
            throw ConfigError("csi_features: non-finite CSI entry");
        const double total = csi.squaredNorm();
        if (!(total > 0.0))
            throw ConfigError("csi_features: degenerate all-zero CSI");

        const auto layout = feature_layout(static_cast<int>(csi.rows()), static_cast<int>(csi.cols()),
                                           reduced_subcarriers);
        const int A = layout.num_antennas;
        const int S = layout.reduced_subcarriers;
        Eigen::VectorXd f(layout.dimension());
        const Eigen::Index half = static_cast<Eigen::Index>(A) * S;
        for (int a = 0; a < A; ++a)
        {
            for (int k = 0; k < S; ++k)
            {
                const auto h0 = csi(a, static_cast<Eigen::Index>(k) * layout.stride);
                const auto h1 = csi(a, static_cast<Eigen::Index>((k + 1) % S) * layout.stride);
                const Eigen::Index i = static_cast<Eigen::Index>(a) * S + k;
                f(i) = std::abs(h0);
                f(half + i) = std::abs(h0 + h1);
            }
        }
        const double norm = f.head(2 * half).norm();
        f.head(2 * half) /= norm;
        f(2 * half) = std::log10(total);
        return f;
    }

    WassersteinCache::WassersteinCache(std::span<const statistics::EmpiricalDistribution> dists)
        : dists_(dists), rows_(dists.size())
    {
    }

    const std::vector<double> &WassersteinCache::row(std::size_t i)
    {
        auto &r = rows_.at(i);
        if (r.empty())
        {
            r.resize(dists_.size());
            for (std::size_t j = 0; j < dists_.size(); ++j)
            {
                if (j == i)
                    r[j] = 0.0;
                else if (!rows_[j].empty())
                    r[j] = rows_[j][i];
                else
                    r[j] = statistics::wasserstein1(dists_[i], dists_[j]);
            }
        }
        return r;
    }

    double WassersteinCache::operator()(std::size_t i, std::size_t j)
    {
        if (!rows_.at(i).empty())
            return rows_[i][j];
        if (!rows_.at(j).empty())
            return rows_[j][i];
        return i == j ? 0.0 : statistics::wasserstein1(dists_[i], dists_[j]);
    }

    TripletMining build_triplets(std::span<const statistics::EmpiricalDistribution> rate_dists,
                                 std::size_t n_triplets, double close_quantile, double far_quantile,
                                 std::uint64_t seed)
    {
        const std::size_t n = rate_dists.size();
        if (n < 3)
            throw ConfigError("build_triplets: at least 3 users required");
        if (!(close_quantile > 0.0 && close_quantile < far_quantile && far_quantile < 1.0))
            throw ConfigError("build_triplets: need 0 < close_quantile < far_quantile < 1");

        WassersteinCache w1(rate_dists);
        Engine eng = make_engine(derive_seed(seed, "triplets"));
        auto pick = [&](std::size_t count) {
            return static_cast<std::size_t>(uniform01(eng) * static_cast<double>(count));
        };

        TripletMining out;
        const std::size_t max_attempts = 4 * n_triplets + 16;
        std::vector<double> others;
        std::vector<std::size_t> close, far;
        while (out.triplets.size() < n_triplets && out.attempts < max_attempts)
        {
            ++out.attempts;
            const std::size_t a = pick(n);
            const auto &row = w1.row(a);
            others.clear();
            for (std::size_t j = 0; j < n; ++j)
                if (j != a)
                    others.push_back(row[j]);
            std::sort(others.begin(), others.end());
            auto order_stat = [&](double q) {
                auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(others.size())));
                return others[std::clamp<std::size_t>(k, 1, others.size()) - 1];
            };
            const double close_cut = order_stat(close_quantile);
            const double far_cut = order_stat(far_quantile);
            close.clear();
            far.clear();
            for (std::size_t j = 0; j < n; ++j)
            {
                if (j == a)
                    continue;
                if (row[j] <= close_cut)
                    close.push_back(j);
                if (row[j] > far_cut)
                    far.push_back(j);
            }
            if (close.empty() || far.empty())
            {
                ++out.skipped_anchors;
                continue;
            }
            const std::size_t p = close[pick(close.size())];
            const std::size_t q = far[pick(far.size())];
            if (!(row[p] < row[q]) || p == q)
            {
                ++out.skipped_anchors;
                continue;
            }
            out.triplets.push_back({a, p, q});
        }
        return out;
    }

    ChartModel::ChartModel(std::vector<int> dims, std::vector<Eigen::MatrixXd> weights,
                           std::vector<Eigen::VectorXd> biases)
        : dims_(std::move(dims)), weights_(std::move(weights)), biases_(std::move(biases))
    {
        check();
    }

    void ChartModel::check() const
    {
        if (dims_.size() < 2 || dims_.back() != 2)
            throw ConfigError("ChartModel: need at least one layer and output dimension 2");
        if (weights_.size() != dims_.size() - 1 || biases_.size() != weights_.size())
            throw ConfigError("ChartModel: layer count mismatch");
        for (std::size_t l = 0; l < weights_.size(); ++l)
        {
            if (weights_[l].rows() != dims_[l + 1] || weights_[l].cols() != dims_[l] || biases_[l].size() != dims_[l + 1])
                throw ConfigError("ChartModel: layer " + std::to_string(l) + " has wrong shape");
            if (!weights_[l].allFinite() || !biases_[l].allFinite())
                throw ConfigError("ChartModel: non-finite parameters in layer " + std::to_string(l));
        }
    }

    ChartModel ChartModel::initialize(std::vector<int> dims, std::uint64_t seed)
    {
        if (dims.size() < 2)
            throw ConfigError("ChartModel: need at least one layer");
        for (int d : dims)
            if (d < 1)
                throw ConfigError("ChartModel: layer sizes must be >= 1");
        Engine eng = make_engine(derive_seed(seed, "chart_init"));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<Eigen::MatrixXd> w;
        std::vector<Eigen::VectorXd> b;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l)
        {
            const bool last = l + 2 == dims.size();
            const double sd = std::sqrt((last ? 1.0 : 2.0) / dims[l]);
            Eigen::MatrixXd m(dims[l + 1], dims[l]);
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                for (Eigen::Index i = 0; i < m.rows(); ++i)
                    m(i, j) = sd * normal(eng);
            w.push_back(std::move(m));
            b.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
        }
        return ChartModel(std::move(dims), std::move(w), std::move(b));
    }

    Eigen::MatrixXd ChartModel::forward_batch(const Eigen::MatrixXd &features) const
    {
        if (features.rows() != input_dim())
            throw ConfigError("ChartModel: feature dimension " + std::to_string(features.rows()) +
                              " does not match model input " + std::to_string(input_dim()));
        Eigen::MatrixXd a = features;
        for (std::size_t l = 0; l < weights_.size(); ++l)
        {
            Eigen::MatrixXd z = weights_[l] * a;
            z.colwise() += biases_[l];
            if (l + 1 < weights_.size())
                z = z.cwiseMax(0.0);
            a = std::move(z);
        }
        return a;
    }

    Eigen::Vector2d ChartModel::forward(const Eigen::VectorXd &features) const
    {
        return forward_batch(features).col(0);
    }

    Eigen::VectorXd ChartModel::first_layer_preactivation(const Eigen::VectorXd &features) const
    {
        if (features.size() != input_dim())
            throw ConfigError("ChartModel: feature dimension mismatch");
        return weights_[0] * features + biases_[0];
    }

    double ChartModel::lipschitz_bound() const
    {
        double acc = 1.0;
        for (const auto &w : weights_)
            acc *= w.norm();
        return acc;
    }

    bool operator==(const ChartModel &a, const ChartModel &b)
    {
        if (a.dims_ != b.dims_)
            return false;
        for (std::size_t l = 0; l < a.weights_.size(); ++l)
            if (a.weights_[l] != b.weights_[l] || a.biases_[l] != b.biases_[l])
                return false;
        return true;
    }

    Eigen::Vector2d forward(const ChartModel &model, const Eigen::VectorXd &features)
    {
        return model.forward(features);
    }

    namespace
    {
        double hinge(const Eigen::Vector2d &za, const Eigen::Vector2d &zp, const Eigen::Vector2d &zn, double margin)
        {
            return std::max(0.0, (za - zp).norm() - (za - zn).norm() + margin);
        }

        void check_triplet(const Triplet &t, Eigen::Index n)
        {
            const auto lim = static_cast<std::size_t>(n);
            if (t.anchor >= lim || t.positive >= lim || t.negative >= lim)
                throw ConfigError("triplet refers to a user outside the feature matrix");
        }
    }

    double triplet_loss(const ChartModel &model, const Triplet &triplet, const Eigen::MatrixXd &features, double margin)
    {
        if (!(margin > 0.0))
            throw ConfigError("triplet_loss: margin must be positive");
        check_triplet(triplet, features.cols());
        const Eigen::Vector2d za = model.forward(features.col(static_cast<Eigen::Index>(triplet.anchor)));
        const Eigen::Vector2d zp = model.forward(features.col(static_cast<Eigen::Index>(triplet.positive)));
        const Eigen::Vector2d zn = model.forward(features.col(static_cast<Eigen::Index>(triplet.negative)));
        return hinge(za, zp, zn, margin);
    }

    double loss_and_gradient(const ChartModel &model, std::span<const Triplet> triplets,
                             const Eigen::MatrixXd &features, double margin, Gradients &grad)
    {
        if (triplets.empty())
            throw ConfigError("loss_and_gradient: no triplets");
        if (!(margin > 0.0))
            throw ConfigError("loss_and_gradient: margin must be positive");

        // Distinct users, in ascending order, are embedded once per batch.
        std::map<std::size_t, Eigen::Index> local;
        for (const auto &t : triplets)
        {
            check_triplet(t, features.cols());
            local.emplace(t.anchor, 0);
            local.emplace(t.positive, 0);
            local.emplace(t.negative, 0);
        }
        Eigen::MatrixXd x(features.rows(), static_cast<Eigen::Index>(local.size()));
        {
            Eigen::Index c = 0;
            for (auto &[user, col] : local)
            {
                col = c;
                x.col(c++) = features.col(static_cast<Eigen::Index>(user));
            }
        }

        const std::size_t L = model.num_layers();
        const auto &W = model.weights();
        const auto &B = model.biases();
        // acts[0] = input, acts[l+1] = output of layer l
        std::vector<Eigen::MatrixXd> acts(L + 1);
        acts[0] = std::move(x);
        for (std::size_t l = 0; l < L; ++l)
        {
            Eigen::MatrixXd z = W[l] * acts[l];
            z.colwise() += B[l];
            if (l + 1 < L)
                z = z.cwiseMax(0.0);
            acts[l + 1] = std::move(z);
        }
        const Eigen::MatrixXd &out = acts[L];

        const double inv = 1.0 / static_cast<double>(triplets.size());
        Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(2, out.cols());
        double loss = 0.0;
        for (const auto &t : triplets)
        {
            const Eigen::Index ia = local.at(t.anchor), ip = local.at(t.positive), in = local.at(t.negative);
            const Eigen::Vector2d dap = out.col(ia) - out.col(ip);
            const Eigen::Vector2d dan = out.col(ia) - out.col(in);
            const double nap = dap.norm(), nan = dan.norm();
            const double l = nap - nan + margin;
            if (l <= 0.0)
                continue;
            loss += l * inv;
            if (nap > 0.0)
            {
                const Eigen::Vector2d g = dap * (inv / nap);
                delta.col(ia) += g;
                delta.col(ip) -= g;
            }
            if (nan > 0.0)
            {
                const Eigen::Vector2d g = dan * (inv / nan);
                delta.col(ia) -= g;
                delta.col(in) += g;
            }
        }

        grad.weights.resize(L);
        grad.biases.resize(L);
        for (std::size_t l = L; l-- > 0;)
        {
            grad.weights[l].noalias() = delta * acts[l].transpose();
            grad.biases[l] = delta.rowwise().sum();
            if (l == 0)
                break;
            Eigen::MatrixXd back = W[l].transpose() * delta;
            // rectifier derivative: active where the layer output is positive
            delta = back.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
        }
        return loss;
    }

    double mean_triplet_loss(const ChartModel &model, std::span<const Triplet> triplets,
                             const Eigen::MatrixXd &features, double margin)
    {
        if (triplets.empty())
            throw ConfigError("mean_triplet_loss: no triplets");
        const Eigen::MatrixXd z = model.forward_batch(features);
        double acc = 0.0;
        for (const auto &t : triplets)
        {
            check_triplet(t, features.cols());
            acc += hinge(z.col(static_cast<Eigen::Index>(t.anchor)), z.col(static_cast<Eigen::Index>(t.positive)),
                         z.col(static_cast<Eigen::Index>(t.negative)), margin);
        }
        return acc / static_cast<double>(triplets.size());
    }

    TrainResult train(const ChartModel &init, std::span<const Triplet> triplets, const Eigen::MatrixXd &features,
                      const TrainOptions &options)
    {
        if (triplets.empty())
            throw ConfigError("train: no triplets");
        if (!(options.margin > 0.0) || options.step_size < 0.0 || options.momentum < 0.0 || options.momentum >= 1.0 ||
            options.epochs < 0 || options.batch < 1)
            throw ConfigError("train: invalid options");

        TrainResult res{init, {}};
        ChartModel &model = res.model;
        const std::size_t L = model.num_layers();
        Gradients velocity;
        for (std::size_t l = 0; l < L; ++l)
        {
            velocity.weights.push_back(Eigen::MatrixXd::Zero(model.weights()[l].rows(), model.weights()[l].cols()));
            velocity.biases.push_back(Eigen::VectorXd::Zero(model.biases()[l].size()));
        }

        auto full_loss = [&]() {
            const double v = mean_triplet_loss(model, triplets, features, options.margin);
            if (!std::isfinite(v))
                throw NumericalError("train: non-finite loss after " + std::to_string(res.epoch_loss.size()) +
                                     " epochs");
            return v;
        };
        res.epoch_loss.push_back(full_loss());

        std::vector<Triplet> order(triplets.begin(), triplets.end());
        Engine eng = make_engine(derive_seed(options.seed, "chart_train"));
        Gradients grad;
        for (int epoch = 0; epoch < options.epochs; ++epoch)
        {
            // Fisher-Yates with the library's own uniform draw
            for (std::size_t i = order.size(); i > 1; --i)
            {
                const auto j = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(i));
                std::swap(order[i - 1], order[j]);
            }
            for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(options.batch))
            {
                const std::size_t len = std::min<std::size_t>(options.batch, order.size() - start);
                const double loss = loss_and_gradient(model, std::span(order).subspan(start, len), features,
                                                      options.margin, grad);
                if (!std::isfinite(loss))
                    throw NumericalError("train: non-finite batch loss in epoch " + std::to_string(epoch));
                for (std::size_t l = 0; l < L; ++l)
                {
                    velocity.weights[l] = options.momentum * velocity.weights[l] + grad.weights[l];
                    velocity.biases[l] = options.momentum * velocity.biases[l] + grad.biases[l];
                    model.weights()[l] -= options.step_size * velocity.weights[l];
                    model.biases()[l] -= options.step_size * velocity.biases[l];
                }
            }
            res.epoch_loss.push_back(full_loss());
        }
        return res;
    }

    std::vector<gpmap::Point2> embed_dataset(const ChartModel &model, const Eigen::MatrixXd &features)
    {
        const Eigen::MatrixXd z = model.forward_batch(features);
        std::vector<gpmap::Point2> out(static_cast<std::size_t>(z.cols()));
        for (Eigen::Index i = 0; i < z.cols(); ++i)
            out[static_cast<std::size_t>(i)] = {z(0, i), z(1, i)};
        return out;
    }

    double chart_quality(std::span<const gpmap::Point2> latent, WassersteinCache &w1, std::size_t n_pairs,
                         std::uint64_t seed)
    {
        if (latent.size() != w1.size() || latent.size() < 2)
            throw ConfigError("chart_quality: latent points and distributions differ in count");
        Engine eng = make_engine(derive_seed(seed, "chart_quality"));
        std::vector<double> dl, dw;
        const auto n = latent.size();
        while (dl.size() < n_pairs)
        {
            const auto i = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(n));
            const auto j = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(n));
            if (i == j)
                continue;
            dl.push_back(std::hypot(latent[i].x - latent[j].x, latent[i].y - latent[j].y));
            dw.push_back(w1(i, j));
        }
        return statistics::spearman(dl, dw);
    }

    std::string trace_csv(std::span<const double> epoch_loss)
    {
        std::string out = "epoch,mean_loss\n";
        for (std::size_t e = 0; e < epoch_loss.size(); ++e)
        {
            out += std::to_string(e);
            out += ',';
            append_double(out, epoch_loss[e]);
            out += '\n';
        }
        return out;
    }
}
