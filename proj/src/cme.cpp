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

#include "pbce/cme.hpp"
#include "pbce/estimators.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace pbce
{
    // ----- Sampled CME ---------------------------------------------------

    SampledCmeResult sampled_cme_filter(const cmat &sample_cov, Eigen::Index coherence_len, double noise_var,
                                        const std::vector<ParameterSample> &samples)
    {
        if (samples.empty())
            throw std::invalid_argument("sampled_cme_filter: empty sample set");
        if (!(noise_var > 0.0))
            throw std::invalid_argument("sampled_cme_filter: noise variance must be positive");
        if (coherence_len < 1)
            throw std::invalid_argument("sampled_cme_filter: coherence length must be positive");

        const Eigen::Index n = sample_cov.rows();
        const double t_len = static_cast<double>(coherence_len);

        // With W = A M A^H, M = (C_rho A^H A + s2 I)^-1 C_rho:
        //   tr(W C_y)    = tr(M A^H C_y A)
        //   log|I - W|   = -log|I + C_rho A^H A / s2|
        std::vector<double> log_w(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i)
        {
            const auto &s = samples[i];
            if (s.omegas.size() != s.rhos.size() || s.omegas.empty())
                throw std::invalid_argument("sampled_cme_filter: malformed parameter sample");
            const auto num_paths = static_cast<Eigen::Index>(s.omegas.size());
            const cmat a = steering_matrix(s.omegas, n);
            Eigen::VectorXd rho(num_paths);
            for (Eigen::Index l = 0; l < num_paths; ++l)
                rho[l] = s.rhos[static_cast<std::size_t>(l)];

            const cmat gram = a.adjoint() * a;
            cmat k = rho.asDiagonal() * gram;
            k.diagonal().array() += noise_var;
            const Eigen::PartialPivLU<cmat> lu(k);
            const cmat m = lu.solve(cmat(rho.asDiagonal()));
            const double trace = (m * (a.adjoint() * sample_cov * a)).trace().real();

            // |C_rho G + s2 I| / s2^L = |I + C_rho G / s2|
            double log_det = 0.0;
            for (Eigen::Index l = 0; l < num_paths; ++l)
                log_det += std::log(std::abs(lu.matrixLU()(l, l)) / noise_var);

            log_w[i] = t_len / noise_var * trace - t_len * log_det + s.log_prior;
        }

        const double peak = *std::max_element(log_w.begin(), log_w.end());
        if (!std::isfinite(peak))
            throw std::runtime_error("sampled_cme_filter: non-finite log weights");

        double total = 0.0;
        std::vector<double> weights(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i)
        {
            weights[i] = std::exp(log_w[i] - peak);
            total += weights[i];
        }

        SampledCmeResult out;
        out.filter.matrix = cmat::Zero(n, n);
        out.weight_entropy = 0.0;
        out.max_weight = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i)
        {
            const double w = weights[i] / total;
            out.max_weight = std::max(out.max_weight, w);
            if (w <= 0.0)
                continue;
            out.weight_entropy -= w * std::log(w);
            if (w < 1e-18)
                continue;
            out.filter.matrix += w * conditional_lmmse_filter(samples[i].omegas, samples[i].rhos, noise_var, n,
                                                              LmmseMode::exact)
                                         .matrix;
        }
        return out;
    }

    // ----- Asymptotic CME ------------------------------------------------

    double smearing_variance(double rho, double alpha_bar, double noise_var, Eigen::Index coherence_len,
                             Eigen::Index n_rx)
    {
        if (!(rho > 0.0) || !(alpha_bar > 0.0) || !(noise_var > 0.0))
            throw std::invalid_argument("smearing_variance: rho, alpha_bar and noise variance must be positive");
        const double nd = static_cast<double>(n_rx);
        return 6.0 * noise_var * (rho + noise_var) /
               (static_cast<double>(coherence_len) * nd * nd * rho * alpha_bar);
    }

    AsymptoticCmeSpec make_asymptotic_cme_spec(const std::vector<double> &omega_hats, const std::vector<double> &rhos,
                                               const std::vector<double> &alpha_bars, double noise_var,
                                               Eigen::Index coherence_len, Eigen::Index n_rx, bool gains_are_true)
    {
        if (omega_hats.size() != rhos.size() || rhos.size() != alpha_bars.size())
            throw std::invalid_argument("make_asymptotic_cme_spec: per-path inputs differ in length");
        AsymptoticCmeSpec spec;
        spec.omega_hats = omega_hats;
        spec.gains_are_true = gains_are_true;
        for (std::size_t l = 0; l < rhos.size(); ++l)
        {
            spec.variances.push_back(smearing_variance(rhos[l], alpha_bars[l], noise_var, coherence_len, n_rx));
            spec.shrinkages.push_back(rhos[l] / (rhos[l] + noise_var));
        }
        return spec;
    }

    namespace
    {
        constexpr std::size_t quadrature_nodes = 801;
        constexpr double quadrature_half_width = 8.0; // in standard deviations

        const gsl_integration_glfixed_table &legendre_table()
        {
            struct Holder
            {
                gsl_integration_glfixed_table *table = gsl_integration_glfixed_table_alloc(quadrature_nodes);
                ~Holder() { gsl_integration_glfixed_table_free(table); }
            };
            static const Holder holder;
            return *holder.table;
        }
    }

    cmat smeared_projector(double omega_hat, double variance, Eigen::Index n_rx, SmearMethod method)
    {
        if (!(variance > 0.0))
            throw std::invalid_argument("smeared_projector: variance must be positive");

        const double inv_n = 1.0 / static_cast<double>(n_rx);
        cmat g(n_rx, n_rx);

        if (method == SmearMethod::closed_form)
        {
            // Gaussian characteristic function: E[exp(-j d x)] = exp(-j d w_hat - d^2 C / 2)
            for (Eigen::Index lag = 0; lag < n_rx; ++lag)
            {
                const double d = static_cast<double>(lag);
                const cplx v = inv_n * std::exp(-0.5 * d * d * variance) * std::polar(1.0, -d * omega_hat);
                for (Eigen::Index m = lag; m < n_rx; ++m)
                {
                    g(m, m - lag) = v;
                    g(m - lag, m) = std::conj(v);
                }
            }
            return g;
        }

        const double sd = std::sqrt(variance);
        const double lo = omega_hat - quadrature_half_width * sd;
        const double hi = omega_hat + quadrature_half_width * sd;
        const double norm = 1.0 / std::sqrt(2.0 * pi * variance);
        const auto &table = legendre_table();

        g.setZero();
        for (std::size_t i = 0; i < quadrature_nodes; ++i)
        {
            double x = 0.0, w = 0.0;
            gsl_integration_glfixed_point(lo, hi, i, &x, &w, &table);
            const double u = x - omega_hat;
            const double weight = w * norm * std::exp(-0.5 * u * u / variance);
            const cvec a = steering(x, n_rx);
            g.noalias() += weight * (a * a.adjoint());
        }
        return g;
    }

    Filter asymptotic_cme_filter(const AsymptoticCmeSpec &spec, Eigen::Index n_rx, SmearMethod method)
    {
        if (spec.omega_hats.size() != spec.variances.size() || spec.variances.size() != spec.shrinkages.size())
            throw std::invalid_argument("asymptotic_cme_filter: inconsistent spec");
        Filter w;
        w.matrix = cmat::Zero(n_rx, n_rx);
        for (std::size_t l = 0; l < spec.omega_hats.size(); ++l)
        {
            if (!(spec.variances[l] > 0.0))
                throw std::invalid_argument("asymptotic_cme_filter: smearing variance must be positive");
            w.matrix += spec.shrinkages[l] * smeared_projector(spec.omega_hats[l], spec.variances[l], n_rx, method);
        }
        return w;
    }

    // ----- Prior densities -----------------------------------------------

    UniformDensity::UniformDensity(rvec lower, rvec upper) : lower_(std::move(lower)), upper_(std::move(upper))
    {
        if (lower_.size() != upper_.size() || lower_.size() == 0 || (upper_.array() <= lower_.array()).any())
            throw std::invalid_argument("UniformDensity: need lower < upper componentwise");
        density_ = 1.0 / (upper_ - lower_).prod();
    }

    double UniformDensity::pdf(const rvec &delta) const
    {
        const bool inside = (delta.array() >= lower_.array()).all() && (delta.array() <= upper_.array()).all();
        return inside ? density_ : 0.0;
    }

    rvec UniformDensity::gradient(const rvec &delta) const { return rvec::Zero(delta.size()); }

    GaussianDensity::GaussianDensity(double mean, double stddev) : mean_(mean), stddev_(stddev)
    {
        if (!(stddev > 0.0))
            throw std::invalid_argument("GaussianDensity: stddev must be positive");
    }

    double GaussianDensity::pdf(const rvec &delta) const
    {
        const double z = (delta[0] - mean_) / stddev_;
        return std::exp(-0.5 * z * z) / (stddev_ * std::sqrt(2.0 * pi));
    }

    rvec GaussianDensity::gradient(const rvec &delta) const
    {
        rvec g(1);
        g[0] = -(delta[0] - mean_) / (stddev_ * stddev_) * pdf(delta);
        return g;
    }

    AngleMixtureDensity::AngleMixtureDensity(const PriorSpec &prior) : components_(prior.angle_mixture)
    {
        prior.validate();
        for (const auto &c : components_)
        {
            const double upper = 0.5 * std::erfc(-(90.0 - c.mean_deg) / (c.std_deg * std::sqrt(2.0)));
            const double lower = 0.5 * std::erfc(-(-90.0 - c.mean_deg) / (c.std_deg * std::sqrt(2.0)));
            inside_mass_.push_back(upper - lower);
        }
    }

    double AngleMixtureDensity::pdf(double omega) const
    {
        if (!(omega > -pi && omega < pi))
            return 0.0;
        const double theta = std::asin(omega / pi) * 180.0 / pi;
        const double jacobian = (180.0 / pi) / std::sqrt(pi * pi - omega * omega);
        double p = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i)
        {
            const auto &c = components_[i];
            const double z = (theta - c.mean_deg) / c.std_deg;
            p += c.weight * std::exp(-0.5 * z * z) / (c.std_deg * std::sqrt(2.0 * pi) * inside_mass_[i]);
        }
        return p * jacobian;
    }

    double AngleMixtureDensity::derivative(double omega) const
    {
        if (!(omega > -pi && omega < pi))
            return 0.0;
        const double theta = std::asin(omega / pi) * 180.0 / pi;
        const double r2 = pi * pi - omega * omega;
        const double dtheta = (180.0 / pi) / std::sqrt(r2);             // d theta / d w
        const double d2theta = (180.0 / pi) * omega / (r2 * std::sqrt(r2)); // d^2 theta / d w^2
        double dp = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i)
        {
            const auto &c = components_[i];
            const double z = (theta - c.mean_deg) / c.std_deg;
            const double phi = c.weight * std::exp(-0.5 * z * z) / (c.std_deg * std::sqrt(2.0 * pi) * inside_mass_[i]);
            const double dphi = -z / c.std_deg * phi;
            dp += dphi * dtheta * dtheta + phi * d2theta;
        }
        return dp;
    }

    double AngleMixtureDensity::pdf(const rvec &delta) const { return pdf(delta[0]); }

    rvec AngleMixtureDensity::gradient(const rvec &delta) const
    {
        rvec g(1);
        g[0] = derivative(delta[0]);
        return g;
    }

    FlatnessReport check_prior_flatness(const PriorDensity &prior, const rvec &lower, const rvec &upper,
                                        double threshold, Eigen::Index points_per_dim)
    {
        const Eigen::Index dim = prior.dim();
        if (lower.size() != dim || upper.size() != dim)
            throw std::invalid_argument("check_prior_flatness: region dimension does not match the prior");
        if ((upper.array() < lower.array()).any())
            throw std::invalid_argument("check_prior_flatness: empty region");
        if (points_per_dim < 2)
            throw std::invalid_argument("check_prior_flatness: need at least 2 grid points per dimension");

        // Keep the tensor grid below ~1e6 points.
        Eigen::Index per_dim = points_per_dim;
        while (per_dim > 2 && std::pow(static_cast<double>(per_dim), static_cast<double>(dim)) > 1e6)
            per_dim = per_dim / 2 + 1;

        FlatnessReport report;
        report.diameter = (upper - lower).norm();

        std::vector<Eigen::Index> index(static_cast<std::size_t>(dim), 0);
        rvec point(dim);
        while (true)
        {
            for (Eigen::Index d = 0; d < dim; ++d)
            {
                const double frac = static_cast<double>(index[static_cast<std::size_t>(d)]) / static_cast<double>(per_dim - 1);
                point[d] = lower[d] + frac * (upper[d] - lower[d]);
            }
            const double p = prior.pdf(point);
            if (!(p > 0.0))
                throw std::domain_error("check_prior_flatness: region leaves the prior support");
            report.sup_log_gradient = std::max(report.sup_log_gradient, prior.gradient(point).norm() / p);

            Eigen::Index d = 0;
            while (d < dim && ++index[static_cast<std::size_t>(d)] == per_dim)
                index[static_cast<std::size_t>(d++)] = 0;
            if (d == dim)
                break;
        }

        report.ratio = report.sup_log_gradient * report.diameter;
        report.satisfied = report.ratio < threshold;
        return report;
    }

    // ----- Tails -------------------------------------------------------------

    TailMass chernoff_tail_mass(double variance, double half_width)
    {
        if (!(variance > 0.0) || !(half_width > 0.0))
            throw std::invalid_argument("chernoff_tail_mass: need C > 0 and k > 0");
        const double scale = std::sqrt(2.0 * pi * variance);
        return {scale * std::exp(-half_width * half_width / (2.0 * variance)),
                scale * 0.5 * std::erfc(half_width / std::sqrt(2.0 * variance))};
    }

    bool tail_premise_satisfied(double variance, double half_width, double mass_defect)
    {
        return 2.0 * std::exp(-half_width * half_width / (2.0 * variance)) <= mass_defect;
    }

    double half_width_for_defect(double variance, double mass_defect)
    {
        if (!(mass_defect > 0.0 && mass_defect < 2.0))
            throw std::invalid_argument("half_width_for_defect: mass defect must lie in (0, 2)");
        return std::sqrt(2.0 * variance * std::log(2.0 / mass_defect));
    }
}
