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

#ifndef STATMAP_CHART_HPP
#define STATMAP_CHART_HPP

#include "statmap/gpmap.hpp"
#include "statmap/propagation.hpp"
#include "statmap/statistics.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

// Channel charting: a dense rectifier network maps CSI features to a 2-D
// latent space. Training uses a triplet loss whose triplets are mined from
// 1-Wasserstein distances between per-user rate distributions, so users with
// similar capacity statistics land close together in the chart.

namespace statmap::chart
{
    constexpr int kDefaultReducedSubcarriers = 24;

    struct FeatureLayout
    {
        int num_antennas = 0;
        int num_subcarriers = 0;
        int reduced_subcarriers = 0; // S_red actually used
        int stride = 0;              // every stride-th subcarrier is kept

        int dimension() const noexcept { return 2 * num_antennas * reduced_subcarriers + 1; }
    };

    FeatureLayout feature_layout(int num_antennas, int num_subcarriers,
                                 int reduced_subcarriers = kDefaultReducedSubcarriers);

    // Layout: [ |h(a,k)| , |h(a,k) + h(a,k+1 mod S_red)| ] over antennas a and
    // kept subcarriers k, jointly scaled to unit Euclidean norm, followed by
    // log10 of the total CSI power. Invariant to a global phase rotation.
    Eigen::VectorXd csi_features(const propagation::ChannelMatrix &csi,
                                 int reduced_subcarriers = kDefaultReducedSubcarriers);

    struct Triplet
    {
        std::size_t anchor = 0;
        std::size_t positive = 0;
        std::size_t negative = 0;

        friend bool operator==(const Triplet &, const Triplet &) = default;
    };

    struct TripletMining
    {
        std::vector<Triplet> triplets;
        std::size_t skipped_anchors = 0; // no eligible positive or negative
        std::size_t attempts = 0;
    };

    // Lazily filled symmetric matrix of W1 distances between users.
    class WassersteinCache
    {
    public:
        explicit WassersteinCache(std::span<const statistics::EmpiricalDistribution> dists);

        std::size_t size() const noexcept { return dists_.size(); }
        double operator()(std::size_t i, std::size_t j);
        const std::vector<double> &row(std::size_t i);

    private:
        std::span<const statistics::EmpiricalDistribution> dists_;
        std::vector<std::vector<double>> rows_;
    };

    TripletMining build_triplets(std::span<const statistics::EmpiricalDistribution> rate_dists,
                                 std::size_t n_triplets, double close_quantile, double far_quantile,
                                 std::uint64_t seed);

    class ChartModel
    {
    public:
        ChartModel() = default;
        ChartModel(std::vector<int> dims, std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases);

        // He-initialized network; dims must end with 2.
        static ChartModel initialize(std::vector<int> dims, std::uint64_t seed);
        static std::vector<int> default_dims(int input_dim) { return {input_dim, 256, 128, 64, 2}; }

        const std::vector<int> &dims() const noexcept { return dims_; }
        int input_dim() const noexcept { return dims_.front(); }
        std::size_t num_layers() const noexcept { return weights_.size(); }
        const std::vector<Eigen::MatrixXd> &weights() const noexcept { return weights_; }
        const std::vector<Eigen::VectorXd> &biases() const noexcept { return biases_; }
        std::vector<Eigen::MatrixXd> &weights() noexcept { return weights_; }
        std::vector<Eigen::VectorXd> &biases() noexcept { return biases_; }

        Eigen::Vector2d forward(const Eigen::VectorXd &features) const;
        // Columns are inputs; returns 2 x n.
        Eigen::MatrixXd forward_batch(const Eigen::MatrixXd &features) const;
        // Pre-activations of layer 0.
        Eigen::VectorXd first_layer_preactivation(const Eigen::VectorXd &features) const;

        // Product of layer Frobenius norms, an upper bound on the Lipschitz constant.
        double lipschitz_bound() const;

        friend bool operator==(const ChartModel &a, const ChartModel &b);

    private:
        void check() const;

        std::vector<int> dims_;
        std::vector<Eigen::MatrixXd> weights_; // layer l: dims[l+1] x dims[l]
        std::vector<Eigen::VectorXd> biases_;
    };

    Eigen::Vector2d forward(const ChartModel &model, const Eigen::VectorXd &features);

    // max(0, |z_a - z_p| - |z_a - z_n| + margin); features holds one column per user.
    double triplet_loss(const ChartModel &model, const Triplet &triplet, const Eigen::MatrixXd &features,
                        double margin);

    struct Gradients
    {
        std::vector<Eigen::MatrixXd> weights;
        std::vector<Eigen::VectorXd> biases;
    };

    // Mean triplet loss over the given triplets and its exact gradient.
    double loss_and_gradient(const ChartModel &model, std::span<const Triplet> triplets,
                             const Eigen::MatrixXd &features, double margin, Gradients &grad);

    double mean_triplet_loss(const ChartModel &model, std::span<const Triplet> triplets,
                             const Eigen::MatrixXd &features, double margin);

    struct TrainOptions
    {
        double margin = 1.0;
        double step_size = 1e-3;
        double momentum = 0.9;
        int epochs = 10;
        int batch = 64;
        std::uint64_t seed = 0;
    };

    struct TrainResult
    {
        ChartModel model;
        // entry 0: loss of the initial model; entry e: loss after epoch e
        std::vector<double> epoch_loss;
    };

    TrainResult train(const ChartModel &init, std::span<const Triplet> triplets, const Eigen::MatrixXd &features,
                      const TrainOptions &options);

    std::vector<gpmap::Point2> embed_dataset(const ChartModel &model, const Eigen::MatrixXd &features);

    // Spearman correlation between latent distance and W1 distance over random pairs.
    double chart_quality(std::span<const gpmap::Point2> latent, WassersteinCache &w1, std::size_t n_pairs,
                         std::uint64_t seed);

    std::string trace_csv(std::span<const double> epoch_loss);
}

#endif
