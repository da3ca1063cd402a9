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

#include "pbce/estimators.hpp"
#include "pbce/polynomial.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pbce
{
    namespace
    {
        // c_d = sum over the d-th sub-diagonal (m - n = d), d = 0 .. N-1.
        std::vector<cplx> lower_diagonal_sums(const cmat &m)
        {
            const Eigen::Index n = m.rows();
            std::vector<cplx> sums(static_cast<std::size_t>(n), cplx(0.0));
            for (Eigen::Index col = 0; col < n; ++col)
                for (Eigen::Index row = col; row < n; ++row)
                    sums[static_cast<std::size_t>(row - col)] += m(row, col);
            return sums;
        }

        // (1/N) [c_0 + 2 Re sum_{d>0} c_d z^d], z = e^{jw}
        double hermitian_form(const std::vector<cplx> &sums, double omega, double inv_n)
        {
            const cplx z = std::polar(1.0, omega);
            cplx acc = 0.0;
            for (std::size_t d = sums.size() - 1; d >= 1; --d)
                acc = (acc + sums[d]) * z;
            return inv_n * (sums[0].real() + 2.0 * acc.real());
        }
    }

    double bartlett_spectrum(const cmat &sample_cov, double omega)
    {
        const auto sums = lower_diagonal_sums(sample_cov);
        return hermitian_form(sums, omega, 1.0 / static_cast<double>(sample_cov.rows()));
    }

    BartlettResult bartlett_estimate(const cmat &sample_cov, Eigen::Index grid_size, bool refine)
    {
        const Eigen::Index n = sample_cov.rows();
        if (sample_cov.cols() != n)
            throw std::invalid_argument("bartlett_estimate: covariance must be square");
        if (grid_size < 4 * n)
            throw std::invalid_argument("bartlett_estimate: grid_size must be at least 4 * n_rx");

        const auto sums = lower_diagonal_sums(sample_cov);
        const double inv_n = 1.0 / static_cast<double>(n);
        const double step = 2.0 * pi / static_cast<double>(grid_size);

        std::vector<double> spectrum(static_cast<std::size_t>(grid_size));
        for (Eigen::Index i = 0; i < grid_size; ++i)
            spectrum[static_cast<std::size_t>(i)] = hermitian_form(sums, -pi + static_cast<double>(i + 1) * step, inv_n);

        const auto [lo_it, hi_it] = std::minmax_element(spectrum.begin(), spectrum.end());
        const double peak = *hi_it;
        if (!(peak > 0.0) || peak - *lo_it <= 1e-12 * peak)
            return {0.0, true};

        const auto idx = static_cast<std::size_t>(hi_it - spectrum.begin());
        double omega = -pi + static_cast<double>(idx + 1) * step;
        if (refine)
        {
            const std::size_t g = spectrum.size();
            const double left = spectrum[(idx + g - 1) % g];
            const double right = spectrum[(idx + 1) % g];
            const double curvature = left - 2.0 * peak + right;
            if (curvature < 0.0)
                omega += 0.5 * (left - right) / curvature * step;
        }
        return {wrap_omega(omega), false};
    }

    cmat forward_backward(const cmat &sample_cov)
    {
        const Eigen::Index n = sample_cov.rows();
        cmat flipped(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                flipped(i, j) = std::conj(sample_cov(n - 1 - i, n - 1 - j));
        return 0.5 * (sample_cov + flipped);
    }

    std::vector<double> root_music(const cmat &sample_cov, Eigen::Index num_paths, const RootMusicOptions &opts)
    {
        const Eigen::Index n = sample_cov.rows();
        if (sample_cov.cols() != n)
            throw std::invalid_argument("root_music: covariance must be square");
        if (num_paths < 1 || num_paths >= n)
            throw std::invalid_argument("root_music: need 1 <= num_paths < n_rx");

        const cmat cov = opts.forward_backward ? forward_backward(sample_cov) : sample_cov;
        Eigen::SelfAdjointEigenSolver<cmat> eig(cov);
        if (eig.info() != Eigen::Success)
            throw EstimatorFailure("root_music: eigendecomposition failed");

        // Eigenvalues come back ascending: the first n - L vectors span the noise subspace.
        const cmat noise = eig.eigenvectors().leftCols(n - num_paths);
        const cmat proj = noise * noise.adjoint();

        // a^H P a = (1/N) sum_d b_d z^d with z = e^{jw}, d = m - n. Shifting by
        // z^{N-1} gives a polynomial of degree 2N - 2 with conjugate-reciprocal roots.
        const auto lower = lower_diagonal_sums(proj);
        std::vector<cplx> coeffs(static_cast<std::size_t>(2 * n - 1));
        const auto centre = static_cast<std::size_t>(n - 1);
        coeffs[centre] = lower[0];
        for (std::size_t d = 1; d < lower.size(); ++d)
        {
            coeffs[centre + d] = lower[d];
            coeffs[centre - d] = std::conj(lower[d]);
        }

        std::vector<cplx> roots;
        try
        {
            roots = polynomial_roots(coeffs);
        }
        catch (const std::exception &e)
        {
            throw EstimatorFailure(std::string("root_music: ") + e.what());
        }

        struct Candidate
        {
            cplx z;
            double modulus;
            double on_circle;
        };
        std::vector<Candidate> candidates;

        // Near the unit circle a (numerically split) double root shows up as a
        // tight pair; merge such pairs and use the pair mean, whose phase is far
        // better conditioned than either member.
        constexpr double circle_tol = 1e-5;
        constexpr double pair_tol = 1e-4;
        std::vector<bool> used(roots.size(), false);
        for (std::size_t i = 0; i < roots.size(); ++i)
        {
            const cplx z = roots[i];
            if (used[i] || !std::isfinite(z.real()) || !std::isfinite(z.imag()))
                continue;
            const double r = std::abs(z);
            if (std::abs(r - 1.0) < circle_tol)
            {
                used[i] = true;
                cplx sum = z;
                int count = 1;
                for (std::size_t j = i + 1; j < roots.size(); ++j)
                {
                    if (!used[j] && std::abs(roots[j] - z) < pair_tol)
                    {
                        used[j] = true;
                        sum += roots[j];
                        ++count;
                    }
                }
                candidates.push_back({sum / static_cast<double>(count), 1.0, 0.0});
            }
            else if (r < 1.0)
            {
                used[i] = true;
                candidates.push_back({z, r, 0.0});
            }
        }

        if (static_cast<Eigen::Index>(candidates.size()) < num_paths)
            throw EstimatorFailure("root_music: found " + std::to_string(candidates.size()) +
                                   " roots inside the unit circle, need " + std::to_string(num_paths));

        for (auto &c : candidates)
            c.on_circle = std::abs(polynomial_eval(coeffs, std::polar(1.0, std::arg(c.z))));

        std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate &a, const Candidate &b)
                         {
                             if (a.modulus != b.modulus)
                                 return a.modulus > b.modulus;
                             return a.on_circle < b.on_circle; });

        std::vector<double> omegas;
        for (Eigen::Index l = 0; l < num_paths; ++l)
            omegas.push_back(wrap_omega(std::arg(candidates[static_cast<std::size_t>(l)].z)));
        std::sort(omegas.begin(), omegas.end());
        return omegas;
    }

    std::vector<double> estimate_gains(const cmat &sample_cov, const std::vector<double> &omegas_hat, double noise_var)
    {
        const Eigen::Index n = sample_cov.rows();
        const cmat a = steering_matrix(omegas_hat, n);
        const cmat gram = a.adjoint() * a;

        Eigen::SelfAdjointEigenSolver<cmat> eig(gram, Eigen::EigenvaluesOnly);
        const double smallest = eig.eigenvalues().minCoeff();
        const double largest = eig.eigenvalues().maxCoeff();
        if (!(smallest > 1e-10 * largest))
            throw EstimatorFailure("estimate_gains: steering matrix is rank deficient, paths are unresolvable");

        const cmat m = a.adjoint() * sample_cov * a - noise_var * gram;
        const Eigen::LDLT<cmat> ldlt(gram);
        const cmat left = ldlt.solve(m);                           // G^-1 M
        const cmat full = ldlt.solve(left.adjoint()).adjoint();    // G^-1 M G^-1

        std::vector<double> rhos(omegas_hat.size());
        for (std::size_t l = 0; l < rhos.size(); ++l)
        {
            const auto li = static_cast<Eigen::Index>(l);
            rhos[l] = std::max(0.0, full(li, li).real());
        }
        return rhos;
    }

    Filter conditional_lmmse_filter(const std::vector<double> &omegas, const std::vector<double> &rhos,
                                    double noise_var, Eigen::Index n_rx, LmmseMode mode)
    {
        if (!(noise_var > 0.0))
            throw std::invalid_argument("conditional_lmmse_filter: noise variance must be positive");
        if (omegas.size() != rhos.size())
            throw std::invalid_argument("conditional_lmmse_filter: omegas and rhos differ in length");
        for (double r : rhos)
            if (!(r >= 0.0))
                throw std::invalid_argument("conditional_lmmse_filter: gain variances must be non-negative");

        const cmat a = steering_matrix(omegas, n_rx);
        const auto num_paths = static_cast<Eigen::Index>(omegas.size());
        Eigen::VectorXd rho(num_paths);
        for (Eigen::Index l = 0; l < num_paths; ++l)
            rho[l] = rhos[static_cast<std::size_t>(l)];

        Filter w;
        if (mode == LmmseMode::favorable)
        {
            const Eigen::VectorXd shrink = rho.array() / (rho.array() + noise_var);
            w.matrix = a * shrink.asDiagonal() * a.adjoint();
            return w;
        }

        // A C (A C A^H + s2 I)^-1 = A (C A^H A + s2 I)^-1 C A^H  (push-through identity)
        cmat k = rho.asDiagonal() * (a.adjoint() * a);
        k.diagonal().array() += noise_var;
        const cmat inner = k.partialPivLu().solve(cmat(rho.asDiagonal()));
        w.matrix = a * inner * a.adjoint();
        w.matrix = 0.5 * (w.matrix + w.matrix.adjoint()).eval();
        return w;
    }

    cvec pbce_estimate(const ObservationBlock &observation, const ParamEstimate &params, LmmseMode mode)
    {
        const Eigen::Index n = observation.snapshots.rows();
        return conditional_lmmse_filter(params.omegas_hat, params.rhos_hat, params.noise_var_used, n, mode)
            .apply(observation.last_snapshot());
    }

    cvec genie_lmmse(const ObservationBlock &observation, const ChannelRealization &realization)
    {
        ParamEstimate truth{realization.omegas, realization.rhos, observation.noise_var};
        return pbce_estimate(observation, truth, LmmseMode::exact);
    }

    std::vector<std::size_t> match_paths(const std::vector<double> &estimated, const std::vector<double> &truth)
    {
        if (estimated.size() != truth.size())
            throw std::invalid_argument("match_paths: size mismatch");
        std::vector<std::size_t> perm(truth.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::vector<std::size_t> best = perm;
        double best_cost = std::numeric_limits<double>::infinity();
        do
        {
            double cost = 0.0;
            for (std::size_t l = 0; l < perm.size(); ++l)
                cost += omega_distance(estimated[l], truth[perm[l]]);
            if (cost < best_cost)
            {
                best_cost = cost;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }

    ParamEstimate estimate_parameters(const ObservationBlock &observation, Eigen::Index num_paths,
                                      const ParamEstimationOptions &opts, const ChannelRealization *truth)
    {
        ParamEstimate est;
        est.noise_var_used = observation.noise_var * opts.noise_var_factor;
        if (!(est.noise_var_used > 0.0))
            throw std::invalid_argument("estimate_parameters: mismatch factor must keep the noise variance positive");

        if (opts.direction == DirectionEstimator::bartlett)
        {
            if (num_paths != 1)
                throw std::invalid_argument("estimate_parameters: the Bartlett estimator handles a single path only");
            const auto b = bartlett_estimate(observation.sample_cov, opts.bartlett_grid, true);
            if (b.degenerate)
                throw EstimatorFailure("bartlett_estimate: degenerate spectrum");
            est.omegas_hat = {b.omega};
        }
        else
        {
            est.omegas_hat = root_music(observation.sample_cov, num_paths, opts.music);
        }

        if (opts.perfect_gains)
        {
            if (truth == nullptr || truth->num_paths() != num_paths)
                throw std::invalid_argument("estimate_parameters: perfect gains requested without matching ground truth");
            const auto perm = match_paths(est.omegas_hat, truth->omegas);
            for (std::size_t l = 0; l < perm.size(); ++l)
                est.rhos_hat.push_back(truth->rhos[perm[l]]);
        }
        else
        {
            est.rhos_hat = estimate_gains(observation.sample_cov, est.omegas_hat, est.noise_var_used);
        }
        return est;
    }
}
