// SPDX-License-Identifier: Apache-2.0
//
// pbce-lab: parametric Bayesian channel estimation laboratory
// Copyright (C) 2026 The pbce-lab authors
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

#ifndef PBCE_ARRAY_MODEL_HPP
#define PBCE_ARRAY_MODEL_HPP

#include "pbce/types.hpp"

#include <cstdint>
#include <vector>

namespace pbce
{
    // ---------------------------------------------------------------------
    // Uniform linear array (half-wavelength spacing) with unit-norm steering
    // vectors a(w)[k] = exp(-j k w) / sqrt(n). The spatial frequency of a
    // direction theta is w = pi * sin(theta).
    // ---------------------------------------------------------------------

    cvec steering(double omega, Eigen::Index n);
    cvec steering_derivative(double omega, Eigen::Index n);
    cmat steering_matrix(const std::vector<double> &omegas, Eigen::Index n);

    double angle_deg_to_omega(double theta_deg);

    /// |a^H(w) a(w + dw)|^2, exact (Dirichlet kernel) and second-order Taylor value.
    struct InnerProductSq
    {
        double exact;
        double approx;
    };
    InnerProductSq inner_product_sq(double omega, double delta_omega, Eigen::Index n);

    // ---------------------------------------------------------------------
    // Prior and scenario description
    // ---------------------------------------------------------------------

    struct MixtureComponent
    {
        double weight;
        double mean_deg;
        double std_deg;
    };

    enum class GainLaw
    {
        uniform_normalized, ///< rho_l ~ U[0, N], rescaled so that sum(rho) = N
        fixed               ///< rho_l = N / L
    };

    struct PriorSpec
    {
        std::vector<MixtureComponent> angle_mixture;
        GainLaw gain_law = GainLaw::uniform_normalized;

        // Minimum pairwise spatial-frequency distance for L > 1, in units of
        // the beamwidth 2*pi/N. Zero disables the rejection step.
        double min_separation_beamwidths = 1.0;

        /// Four-region mixture: weights {0.1, 0.5, 0.2, 0.2},
        /// means {-70, -30, 20, 60} deg, stds {5, 10, 5, 10} deg.
        static PriorSpec four_region_default();

        void validate() const; // throws std::invalid_argument
    };

    struct Scenario
    {
        Eigen::Index n_rx = 64;
        Eigen::Index num_paths = 1;
        Eigen::Index coherence_len = 1;
        double noise_var = 1.0;
        PriorSpec prior = PriorSpec::four_region_default();
        std::uint64_t seed = 0;

        void validate() const; // throws std::invalid_argument
    };

    /// Ground truth for one coherence interval.
    struct ChannelRealization
    {
        std::vector<double> omegas;   ///< L spatial frequencies in (-pi, pi]
        std::vector<double> rhos;     ///< L gain variances
        cmat alphas;                  ///< L x T complex path gains
        cmat channels;                ///< N x T, column t is h(t)
        std::size_t region = 0;       ///< mixture component the angles came from

        Eigen::Index num_paths() const { return static_cast<Eigen::Index>(omegas.size()); }
        Eigen::Index coherence_len() const { return channels.cols(); }
        cvec last_channel() const { return channels.col(channels.cols() - 1); }
    };

    struct ObservationBlock
    {
        cmat snapshots;          ///< N x T, Y = [y(1), ..., y(T)]
        double noise_var = 1.0;
        cmat sample_cov;         ///< (1/T) Y Y^H
        rvec emp_gain_power;     ///< per path (1/T) sum_t |alpha_l(t)|^2

        cvec last_snapshot() const { return snapshots.col(snapshots.cols() - 1); }
    };

    /// Builds h(t) = sum_l alpha_l(t) a(w_l) from angles and gains.
    cmat synthesize_channels(const std::vector<double> &omegas, const cmat &alphas, Eigen::Index n_rx);

    /// Order in which per-snapshot gains and noise are drawn: T-1 first, then 0..T-2.
    std::vector<Eigen::Index> snapshot_draw_order(Eigen::Index coherence_len);

    ChannelRealization sample_prior(const PriorSpec &prior, const Scenario &scenario, Rng &rng);

    ObservationBlock observe(const ChannelRealization &realization, const Scenario &scenario, Rng &rng);

    cmat sample_covariance(const cmat &snapshots);

    /// Circular distance between two spatial frequencies.
    double omega_distance(double a, double b);

    /// Maps any real spatial frequency into (-pi, pi].
    double wrap_omega(double omega);
}

#endif
