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

#ifndef PBCE_CME_HPP
#define PBCE_CME_HPP

#include "pbce/array_model.hpp"

#include <memory>
#include <vector>

namespace pbce
{
    // =====================================================================
    // Sampled conditional mean: W = sum_i w_i W(delta_i) with posterior
    // weights log w_i = (T/s2) tr(W_i C_y) + T log|I - W_i| + log prior_i.
    // =====================================================================

    struct ParameterSample
    {
        std::vector<double> omegas;
        std::vector<double> rhos;
        double log_prior = 0.0; ///< 0 for draws from the prior, log p(delta) for grid points
    };

    struct SampledCmeResult
    {
        Filter filter;
        double weight_entropy = 0.0; ///< nats; 0 means a single sample carries all the weight
        double max_weight = 1.0;
    };

    SampledCmeResult sampled_cme_filter(const cmat &sample_cov, Eigen::Index coherence_len, double noise_var,
                                        const std::vector<ParameterSample> &samples);

    // =====================================================================
    // Asymptotic (Gaussian-smeared) conditional mean filter
    // =====================================================================

    /**
     * Per-path ingredients of the high-SNR / long-coherence CME filter
     *   W = sum_l s_l G(w_hat_l, C_l),  s_l = rho_l / (rho_l + s2),
     *   C_l = 6 s2 (rho_l + s2) / (T N^2 rho_l alpha_bar_l).
     * For a single path with rho = N this is 6 s2 (N + s2) / (T N^3 alpha_bar).
     */
    struct AsymptoticCmeSpec
    {
        std::vector<double> omega_hats;
        std::vector<double> variances;
        std::vector<double> shrinkages;

        // False when estimated gains were supplied: the smeared multipath form
        // assumes the gain variances are known.
        bool gains_are_true = true;
    };

    double smearing_variance(double rho, double alpha_bar, double noise_var, Eigen::Index coherence_len,
                             Eigen::Index n_rx);

    AsymptoticCmeSpec make_asymptotic_cme_spec(const std::vector<double> &omega_hats, const std::vector<double> &rhos,
                                               const std::vector<double> &alpha_bars, double noise_var,
                                               Eigen::Index coherence_len, Eigen::Index n_rx,
                                               bool gains_are_true = true);

    enum class SmearMethod
    {
        closed_form,
        quadrature
    };

    /// G(w_hat, C) = E[a(d) a(d)^H], d ~ N(w_hat, C).
    cmat smeared_projector(double omega_hat, double variance, Eigen::Index n_rx,
                           SmearMethod method = SmearMethod::closed_form);

    Filter asymptotic_cme_filter(const AsymptoticCmeSpec &spec, Eigen::Index n_rx,
                                 SmearMethod method = SmearMethod::closed_form);

    // =====================================================================
    // Prior densities and the local flatness condition
    // =====================================================================

    class PriorDensity
    {
    public:
        virtual ~PriorDensity() = default;
        virtual Eigen::Index dim() const = 0;
        virtual double pdf(const rvec &delta) const = 0;
        virtual rvec gradient(const rvec &delta) const = 0;
    };

    class UniformDensity final : public PriorDensity
    {
    public:
        UniformDensity(rvec lower, rvec upper);
        Eigen::Index dim() const override { return lower_.size(); }
        double pdf(const rvec &delta) const override;
        rvec gradient(const rvec &delta) const override;

    private:
        rvec lower_, upper_;
        double density_;
    };

    class GaussianDensity final : public PriorDensity
    {
    public:
        GaussianDensity(double mean, double stddev);
        Eigen::Index dim() const override { return 1; }
        double pdf(const rvec &delta) const override;
        rvec gradient(const rvec &delta) const override;

    private:
        double mean_, stddev_;
    };

    /// Density of w = pi sin(theta) when theta (degrees) follows the angle
    /// mixture, each component truncated to (-90, 90) degrees.
    class AngleMixtureDensity final : public PriorDensity
    {
    public:
        explicit AngleMixtureDensity(const PriorSpec &prior);
        Eigen::Index dim() const override { return 1; }
        double pdf(const rvec &delta) const override;
        rvec gradient(const rvec &delta) const override;
        double pdf(double omega) const;
        double derivative(double omega) const;

    private:
        std::vector<MixtureComponent> components_;
        std::vector<double> inside_mass_;
    };

    struct FlatnessReport
    {
        double sup_log_gradient = 0.0; ///< sup over S of |grad p| / p
        double diameter = 0.0;
        double ratio = 0.0;            ///< sup_log_gradient * diameter
        bool satisfied = false;        ///< ratio < threshold
    };

    /// Checks sup_S |dp/dd / p| << 1 / diam(S) on a dense tensor grid over the
    /// box [lower, upper]. Throws std::domain_error if p vanishes on the grid.
    FlatnessReport check_prior_flatness(const PriorDensity &prior, const rvec &lower, const rvec &upper,
                                        double threshold = 0.1, Eigen::Index points_per_dim = 201);

    // =====================================================================
    // Gaussian tail control
    // =====================================================================

    struct TailMass
    {
        double chernoff_bound; ///< sqrt(2 pi C) exp(-k^2 / 2C)
        double exact;          ///< int_k^inf exp(-x^2 / 2C) dx
    };

    TailMass chernoff_tail_mass(double variance, double half_width);

    /// 2 exp(-k^2 / 2C) <= mass_defect, i.e. 1 - 2 exp(-k^2/2C) ~ 1.
    bool tail_premise_satisfied(double variance, double half_width, double mass_defect = 1e-5);

    /// Smallest k with 2 exp(-k^2 / 2C) <= mass_defect.
    double half_width_for_defect(double variance, double mass_defect = 1e-5);
}

#endif
