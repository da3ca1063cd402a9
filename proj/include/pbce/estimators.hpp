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

#ifndef PBCE_ESTIMATORS_HPP
#define PBCE_ESTIMATORS_HPP

#include "pbce/array_model.hpp"

#include <vector>

namespace pbce
{
    // ----- Direction estimators ------------------------------------------

    struct BartlettResult
    {
        double omega = 0.0;
        bool degenerate = false; ///< flat or all-zero spectrum, omega is meaningless
    };

    /// Bartlett spectrum a^H(w) C a(w) evaluated at arbitrary w.
    double bartlett_spectrum(const cmat &sample_cov, double omega);

    /// argmax_w a^H(w) C a(w) over a uniform grid on (-pi, pi], optionally
    /// refined by one parabolic interpolation step around the grid peak.
    /// Single-path estimator. grid_size must be at least 4 * n_rx.
    BartlettResult bartlett_estimate(const cmat &sample_cov, Eigen::Index grid_size = 4096, bool refine = true);

    struct RootMusicOptions
    {
        bool forward_backward = false;
    };

    /// Root-MUSIC. Returns the num_paths spatial frequencies sorted ascending.
    /// Throws EstimatorFailure if fewer than num_paths usable roots exist.
    std::vector<double> root_music(const cmat &sample_cov, Eigen::Index num_paths, const RootMusicOptions &opts = {});

    /// Forward-backward averaged covariance (C + J conj(C) J) / 2.
    cmat forward_backward(const cmat &sample_cov);

    // ----- Path gains ----------------------------------------------------

    /// rho_hat = diag((A^H A)^-1 A^H (C - s2 I) A (A^H A)^-1), clamped at 0.
    /// Throws EstimatorFailure if the estimated steering matrix is rank deficient.
    std::vector<double> estimate_gains(const cmat &sample_cov, const std::vector<double> &omegas_hat, double noise_var);

    // ----- Parametric channel estimators ---------------------------------

    struct ParamEstimate
    {
        std::vector<double> omegas_hat;
        std::vector<double> rhos_hat;
        double noise_var_used = 1.0;
    };

    enum class LmmseMode
    {
        exact,     ///< A C_rho A^H (A C_rho A^H + s2 I)^-1
        favorable  ///< sum_l rho_l / (rho_l + s2) a_l a_l^H
    };

    Filter conditional_lmmse_filter(const std::vector<double> &omegas, const std::vector<double> &rhos,
                                    double noise_var, Eigen::Index n_rx, LmmseMode mode = LmmseMode::exact);

    /// Filters the last snapshot y(T) with the conditional LMMSE filter at the
    /// estimated parameters.
    cvec pbce_estimate(const ObservationBlock &observation, const ParamEstimate &params,
                       LmmseMode mode = LmmseMode::exact);

    /// Same filter at the true parameters.
    cvec genie_lmmse(const ObservationBlock &observation, const ChannelRealization &realization);

    enum class DirectionEstimator
    {
        root_music,
        bartlett
    };

    struct ParamEstimationOptions
    {
        DirectionEstimator direction = DirectionEstimator::root_music;
        bool perfect_gains = false;        ///< use the true rho instead of estimating it
        double noise_var_factor = 1.0;     ///< (1 + eps) mismatch applied to the assumed noise variance
        Eigen::Index bartlett_grid = 4096;
        RootMusicOptions music;
    };

    /// Runs the direction and gain estimators on one observation. The truth is
    /// only read when perfect_gains is set: each estimated direction receives
    /// the gain of the true path it is matched to (minimum total circular distance).
    ParamEstimate estimate_parameters(const ObservationBlock &observation, Eigen::Index num_paths,
                                      const ParamEstimationOptions &opts,
                                      const ChannelRealization *truth = nullptr);

    /// Permutation p minimising sum_l |estimated[l] - truth[p[l]]| on the circle.
    std::vector<std::size_t> match_paths(const std::vector<double> &estimated, const std::vector<double> &truth);
}

#endif
