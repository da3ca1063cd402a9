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

#include "pbce/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pbce
{
    cvec steering(double omega, Eigen::Index n)
    {
        cvec a(n);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (Eigen::Index k = 0; k < n; ++k)
            a[k] = scale * std::polar(1.0, -static_cast<double>(k) * omega);
        return a;
    }

    cvec steering_derivative(double omega, Eigen::Index n)
    {
        cvec d(n);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (Eigen::Index k = 0; k < n; ++k)
        {
            const double kd = static_cast<double>(k);
            d[k] = cplx(0.0, -kd * scale) * std::polar(1.0, -kd * omega);
        }
        return d;
    }

    cmat steering_matrix(const std::vector<double> &omegas, Eigen::Index n)
    {
        cmat a(n, static_cast<Eigen::Index>(omegas.size()));
        for (std::size_t l = 0; l < omegas.size(); ++l)
            a.col(static_cast<Eigen::Index>(l)) = steering(omegas[l], n);
        return a;
    }

    double angle_deg_to_omega(double theta_deg)
    {
        return pi * std::sin(theta_deg * pi / 180.0);
    }

    InnerProductSq inner_product_sq(double /*omega*/, double delta_omega, Eigen::Index n)
    {
        const double nd = static_cast<double>(n);
        const double approx = 1.0 - nd * nd * delta_omega * delta_omega / 12.0;

        const double den = nd * std::sin(0.5 * delta_omega);
        if (den == 0.0)
            return {1.0, approx};
        const double ratio = std::sin(0.5 * nd * delta_omega) / den;
        return {ratio * ratio, approx};
    }

    PriorSpec PriorSpec::four_region_default()
    {
        PriorSpec p;
        p.angle_mixture = {{0.1, -70.0, 5.0}, {0.5, -30.0, 10.0}, {0.2, 20.0, 5.0}, {0.2, 60.0, 10.0}};
        p.gain_law = GainLaw::uniform_normalized;
        p.min_separation_beamwidths = 1.0;
        return p;
    }

    void PriorSpec::validate() const
    {
        if (angle_mixture.empty())
            throw std::invalid_argument("prior: angle mixture is empty");
        double total = 0.0;
        for (const auto &c : angle_mixture)
        {
            if (!(c.weight >= 0.0))
                throw std::invalid_argument("prior: mixture weights must be non-negative");
            if (!(c.std_deg > 0.0))
                throw std::invalid_argument("prior: mixture standard deviations must be positive");
            total += c.weight;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("prior: mixture weights must sum to 1");
        if (!(min_separation_beamwidths >= 0.0))
            throw std::invalid_argument("prior: min_separation_beamwidths must be non-negative");
    }

    void Scenario::validate() const
    {
        if (n_rx < 2)
            throw std::invalid_argument("scenario: n_rx must be at least 2");
        if (num_paths < 1)
            throw std::invalid_argument("scenario: num_paths must be at least 1");
        if (coherence_len < 1)
            throw std::invalid_argument("scenario: coherence_len must be at least 1");
        if (!(noise_var > 0.0) || !std::isfinite(noise_var))
            throw std::invalid_argument("scenario: noise_var must be positive and finite");
        prior.validate();
    }

    double wrap_omega(double omega)
    {
        double w = std::remainder(omega, 2.0 * pi); // [-pi, pi]
        if (w <= -pi)
            w += 2.0 * pi;
        return w;
    }

    double omega_distance(double a, double b)
    {
        return std::abs(std::remainder(a - b, 2.0 * pi));
    }

    cmat synthesize_channels(const std::vector<double> &omegas, const cmat &alphas, Eigen::Index n_rx)
    {
        return steering_matrix(omegas, n_rx) * alphas;
    }

    std::vector<Eigen::Index> snapshot_draw_order(Eigen::Index coherence_len)
    {
        std::vector<Eigen::Index> order;
        if (coherence_len < 1)
            return order;
        order.push_back(coherence_len - 1);
        for (Eigen::Index t = 0; t + 1 < coherence_len; ++t)
            order.push_back(t);
        return order;
    }

    namespace
    {
        double draw_angle_deg(const MixtureComponent &c, Rng &rng)
        {
            std::normal_distribution<double> n(c.mean_deg, c.std_deg);
            for (int attempt = 0; attempt < 100000; ++attempt)
            {
                const double theta = n(rng);
                if (theta > -90.0 && theta < 90.0)
                    return theta;
            }
            throw std::runtime_error("prior: mixture component has no mass inside (-90, 90) degrees");
        }

        bool separated(const std::vector<double> &omegas, double min_dist)
        {
            for (std::size_t i = 0; i < omegas.size(); ++i)
                for (std::size_t j = i + 1; j < omegas.size(); ++j)
                    if (omega_distance(omegas[i], omegas[j]) < min_dist)
                        return false;
            return true;
        }
    }

    ChannelRealization sample_prior(const PriorSpec &prior, const Scenario &scenario, Rng &rng)
    {
        prior.validate();
        const auto num_paths = static_cast<std::size_t>(scenario.num_paths);
        const double n = static_cast<double>(scenario.n_rx);

        ChannelRealization out;

        std::vector<double> weights;
        for (const auto &c : prior.angle_mixture)
            weights.push_back(c.weight);
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        out.region = pick(rng);
        const auto &component = prior.angle_mixture[out.region];

        const double min_dist = num_paths > 1 ? prior.min_separation_beamwidths * 2.0 * pi / n : 0.0;
        out.omegas.resize(num_paths);
        bool ok = false;
        for (int attempt = 0; attempt < 10000 && !ok; ++attempt)
        {
            for (auto &w : out.omegas)
                w = angle_deg_to_omega(draw_angle_deg(component, rng));
            ok = separated(out.omegas, min_dist);
        }
        if (!ok)
            throw std::runtime_error("prior: could not draw angles satisfying the minimum separation; lower min_separation_beamwidths");

        out.rhos.assign(num_paths, n / static_cast<double>(num_paths));
        if (prior.gain_law == GainLaw::uniform_normalized && num_paths > 1)
        {
            std::uniform_real_distribution<double> u(0.0, n);
            double total = 0.0;
            while (!(total > 0.0))
            {
                for (auto &r : out.rhos)
                    r = u(rng);
                total = std::accumulate(out.rhos.begin(), out.rhos.end(), 0.0);
            }
            for (auto &r : out.rhos)
                r *= n / total;
        }
        else if (prior.gain_law == GainLaw::uniform_normalized)
        {
            // A single path is normalised to rho = N whatever the uniform draw was;
            // the draw is still consumed so the stream layout does not depend on L.
            std::uniform_real_distribution<double> u(0.0, n);
            (void)u(rng);
        }

        // The filtered snapshot t = T is drawn first and the rest follow in
        // order, so draws with a shorter T are a prefix of draws with a longer one.
        out.alphas.resize(scenario.num_paths, scenario.coherence_len);
        for (const Eigen::Index t : snapshot_draw_order(scenario.coherence_len))
            for (Eigen::Index l = 0; l < scenario.num_paths; ++l)
                out.alphas(l, t) = complex_normal(rng, out.rhos[static_cast<std::size_t>(l)]);

        out.channels = synthesize_channels(out.omegas, out.alphas, scenario.n_rx);
        return out;
    }

    cmat sample_covariance(const cmat &snapshots)
    {
        cmat c = snapshots * snapshots.adjoint() / static_cast<double>(snapshots.cols());
        // Make the Hermitian symmetry exact.
        return 0.5 * (c + c.adjoint());
    }

    ObservationBlock observe(const ChannelRealization &realization, const Scenario &scenario, Rng &rng)
    {
        const Eigen::Index n = realization.channels.rows();
        const Eigen::Index t_len = realization.channels.cols();
        if (n != scenario.n_rx || t_len != scenario.coherence_len)
            throw std::invalid_argument("observe: realization does not match the scenario dimensions");

        ObservationBlock obs;
        obs.noise_var = scenario.noise_var;
        obs.snapshots.resize(n, t_len);
        for (const Eigen::Index t : snapshot_draw_order(t_len))
            for (Eigen::Index k = 0; k < n; ++k)
                obs.snapshots(k, t) = realization.channels(k, t) + complex_normal(rng, scenario.noise_var);
        obs.sample_cov = sample_covariance(obs.snapshots);
        obs.emp_gain_power = realization.alphas.cwiseAbs2().rowwise().mean();
        return obs;
    }
}
