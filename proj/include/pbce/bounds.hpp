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

#ifndef PBCE_BOUNDS_HPP
#define PBCE_BOUNDS_HPP

#include "pbce/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pbce
{
    // ---------------------------------------------------------------------
    // Cramer-Rao bound of the spatial frequency (single source, ULA).
    //
    // The textbook expression s2 / (2T) [Re{d^H (I - a a^H)^-1 d}]^-1 has a
    // singular matrix as written (a is unit norm). It is evaluated with the
    // orthogonal projector I - a a^H in place of the inverse, i.e. the
    // pseudo-inverse reading, which gives the ULA closed form
    //   CRB = 6 s2 / (T (N^2 - 1)).
    // ---------------------------------------------------------------------

    struct CrbOmega
    {
        double matrix_form;
        double reduced_form;
    };

    CrbOmega crb_omega(Eigen::Index n_rx, Eigen::Index coherence_len, double noise_var);

    /// How C_bar = E[C_l] is formed from the smearing variance.
    enum class CbarConvention
    {
        plug_in,       ///< C_l evaluated at alpha_bar = rho (default)
        inverse_mean,  ///< uses E[1/alpha_bar] = T / ((T - 1) rho), needs T >= 2
        realized       ///< uses the realised alpha_bar passed in
    };

    struct BoundInputs
    {
        Eigen::Index n_rx = 64;
        Eigen::Index coherence_len = 1;
        double noise_var = 1.0;
        std::vector<double> rhos;
        std::vector<double> c_bars;
        double crb = 0.0; ///< per-path CRB of the spatial frequency

        double b() const { return static_cast<double>(n_rx * n_rx) / 24.0; }
        void validate() const;
    };

    /// Fills C_bar and the CRB consistently from (N, T, s2, rho).
    BoundInputs make_bound_inputs(Eigen::Index n_rx, Eigen::Index coherence_len, double noise_var,
                                  std::vector<double> rhos, CbarConvention convention = CbarConvention::plug_in,
                                  const std::vector<double> &alpha_bars = {});

    /// Asymptotic MSE of the smeared CME filter (not normalised).
    double cme_asymptotic_mse(const BoundInputs &in);

    /// Asymptotic MSE of the PBCE. `believed_noise_var` is the noise variance
    /// the estimator assumes; it only enters the shrinkage rho / (rho + s2_hat).
    double pbce_asymptotic_mse(const BoundInputs &in, std::optional<double> believed_noise_var = std::nullopt);

    /// CME - PBCE bound difference written out: 4B sum_l s_l (1 - s_l) rho_l C_bar_l.
    double bound_gap_closed_form(const BoundInputs &in);

    // ---------------------------------------------------------------------
    // Log-log slope fitting
    // ---------------------------------------------------------------------

    struct SlopeFit
    {
        double slope = 0.0;
        double intercept = 0.0;
        double r_squared = 0.0;
        std::size_t points_used = 0;
        std::vector<std::string> warnings;
    };

    /// Ordinary least squares fit of log(y) against log(x).
    SlopeFit fit_loglog(const std::vector<double> &x, const std::vector<double> &y);

    /// Raised when |f - g| underflows on too many grid points to fit a slope.
    class DifferenceUnderflow : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    using NoiseFunction = std::function<double(double)>;

    /// Slope of log|f(s2) - g(s2)| against log s2. Needs >= 4 grid points
    /// spanning >= 2 decades; points where the difference underflows (< 1e-300)
    /// are dropped with a warning.
    SlopeFit convergence_slope(const NoiseFunction &f, const NoiseFunction &g, const std::vector<double> &noise_grid);

    struct MismatchGap
    {
        double exact;        ///< PBCE_AB(s2_hat) - PBCE_AB(s2)
        double leading_term; ///< sum_l rho_l^2 (eps s2)^2 / (rho_l + s2)^3
    };

    /// Noise mismatch s2_hat = (1 + eps) s2 with eps > -1.
    MismatchGap mismatch_gap(const BoundInputs &in, double epsilon);
}

#endif
