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

#include "oracles.hpp"
#include "pbce/estimators.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace pbce;
using Catch::Approx;

namespace
{
    cmat model_cov(const std::vector<double> &omegas, const std::vector<double> &rhos, double s2, Eigen::Index n)
    {
        cmat c = s2 * cmat::Identity(n, n);
        for (std::size_t l = 0; l < omegas.size(); ++l)
        {
            const cvec a = oracle::steering(omegas[l], n);
            c += rhos[l] * a * a.adjoint();
        }
        return c;
    }
}

TEST_CASE("Bartlett peak on a noiseless single-path covariance", "[estimators]")
{
    for (double w : {-2.5, -0.3, 0.0, 0.77, 3.0})
    {
        const cmat c = model_cov({w}, {64.0}, 1e-6, 64);
        const auto b = bartlett_estimate(c, 4096, true);
        CHECK_FALSE(b.degenerate);
        CHECK(omega_distance(b.omega, w) < 2.0 * pi / 4096);
        CHECK(bartlett_spectrum(c, w) == Approx(64.0 + 1e-6).epsilon(1e-12));
    }
    CHECK(bartlett_estimate(cmat::Zero(8, 8), 64).degenerate);
    CHECK_THROWS_AS(bartlett_estimate(cmat::Identity(8, 8), 16), std::invalid_argument);
}

TEST_CASE("root-MUSIC recovers separated sources", "[estimators]")
{
    const std::vector<double> w{-1.1, 0.2, 0.5};
    const cmat c = model_cov(w, {20.0, 30.0, 14.0}, 1e-3, 32);
    for (bool fb : {false, true})
    {
        RootMusicOptions o;
        o.forward_backward = fb;
        const auto got = root_music(c, 3, o);
        REQUIRE(got.size() == 3);
        CHECK(std::is_sorted(got.begin(), got.end()));
        for (std::size_t l = 0; l < 3; ++l)
            CHECK(got[l] == Approx(w[l]).margin(1e-6));
    }
    CHECK_THROWS_AS(root_music(c, 32), std::invalid_argument);
    CHECK_THROWS_AS(root_music(c, 0), std::invalid_argument);
}

TEST_CASE("forward-backward averaging", "[estimators]")
{
    const cmat c = model_cov({0.4}, {8.0}, 0.5, 6);
    // The model covariance of a ULA is already persymmetric.
    CHECK((forward_backward(c) - c).norm() < 1e-13);

    cmat r = cmat::Random(5, 5);
    r = r * r.adjoint();
    const cmat f = forward_backward(r);
    cmat j = cmat::Zero(5, 5);
    for (int i = 0; i < 5; ++i)
        j(i, 4 - i) = 1.0;
    CHECK((f - 0.5 * (r + j * r.conjugate() * j)).norm() < 1e-13);
}

TEST_CASE("gain estimator is exact on the model covariance", "[estimators]")
{
    const std::vector<double> w{-0.9, 0.1, 1.4};
    const std::vector<double> rho{10.0, 30.0, 24.0};
    const auto got = estimate_gains(model_cov(w, rho, 0.3, 16), w, 0.3);
    for (std::size_t l = 0; l < 3; ++l)
        CHECK(got[l] == Approx(rho[l]).epsilon(1e-11));

    // Negative estimates are clamped.
    const auto low = estimate_gains(model_cov({0.2}, {1.0}, 0.3, 8), {0.2}, 5.0);
    CHECK(low[0] == 0.0);

    CHECK_THROWS_AS(estimate_gains(model_cov(w, rho, 0.3, 16), {0.3, 0.3}, 0.3), EstimatorFailure);
}

TEST_CASE("conditional LMMSE filter matches a direct inverse", "[estimators]")
{
    const std::vector<double> w{-0.4, 0.9};
    const std::vector<double> rho{5.0, 11.0};
    const Filter f = conditional_lmmse_filter(w, rho, 0.7, 16, LmmseMode::exact);
    CHECK((f.matrix - oracle::lmmse(w, rho, 0.7, 16)).norm() < 1e-12);

    // Favorable propagation form, a plain sum of shrunk projectors.
    const Filter g = conditional_lmmse_filter(w, rho, 0.7, 16, LmmseMode::favorable);
    cmat want = cmat::Zero(16, 16);
    for (std::size_t l = 0; l < 2; ++l)
    {
        const cvec a = oracle::steering(w[l], 16);
        want += rho[l] / (rho[l] + 0.7) * a * a.adjoint();
    }
    CHECK((g.matrix - want).norm() < 1e-13);

    // For a single path both forms agree.
    const Filter e1 = conditional_lmmse_filter({0.3}, {64.0}, 1.0, 64, LmmseMode::exact);
    const Filter f1 = conditional_lmmse_filter({0.3}, {64.0}, 1.0, 64, LmmseMode::favorable);
    CHECK((e1.matrix - f1.matrix).norm() < 1e-12);

    CHECK_THROWS_AS(conditional_lmmse_filter(w, rho, 0.0, 16), std::invalid_argument);
    CHECK_THROWS_AS(conditional_lmmse_filter(w, {1.0}, 1.0, 16), std::invalid_argument);
}

TEST_CASE("genie LMMSE reaches rho s2 / (rho + s2) per path", "[estimators]")
{
    // Single path, rho = N = 64, s2 = 1: the normalised error is 1/65.
    Scenario s;
    s.prior.gain_law = GainLaw::fixed;
    Rng rng(3);
    double err = 0.0;
    const int trials = 20000;
    std::vector<double> e;
    for (int i = 0; i < trials; ++i)
    {
        const auto r = sample_prior(s.prior, s, rng);
        const auto o = observe(r, s, rng);
        const double v = (genie_lmmse(o, r) - r.last_channel()).squaredNorm() / 64.0;
        e.push_back(v);
        err += v;
    }
    const double mean = err / trials;
    double var = 0.0;
    for (double v : e)
        var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / (trials - 1) / trials);
    CHECK(std::abs(mean - 1.0 / 65.0) < 4.0 * se);
}

TEST_CASE("path matching on the circle", "[estimators]")
{
    const auto p = match_paths({3.1, -0.5, 0.4}, {0.41, -3.1, -0.52});
    CHECK(p == std::vector<std::size_t>{1, 2, 0});
    CHECK_THROWS_AS(match_paths({0.1}, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("parameter estimation end to end", "[estimators]")
{
    Scenario s;
    s.num_paths = 2;
    s.coherence_len = 200;
    s.noise_var = 0.01;
    Rng rng(17);
    const auto r = sample_prior(s.prior, s, rng);
    const auto o = observe(r, s, rng);

    ParamEstimationOptions opts;
    const auto est = estimate_parameters(o, 2, opts);
    REQUIRE(est.omegas_hat.size() == 2);
    const auto perm = match_paths(est.omegas_hat, r.omegas);
    for (std::size_t l = 0; l < 2; ++l)
    {
        CHECK(omega_distance(est.omegas_hat[l], r.omegas[perm[l]]) < 1e-2);
        CHECK(est.rhos_hat[l] == Approx(o.emp_gain_power[static_cast<Eigen::Index>(perm[l])]).epsilon(0.1));
    }

    opts.perfect_gains = true;
    const auto genie_gains = estimate_parameters(o, 2, opts, &r);
    for (std::size_t l = 0; l < 2; ++l)
        CHECK(genie_gains.rhos_hat[l] == r.rhos[perm[l]]);
    CHECK_THROWS_AS(estimate_parameters(o, 2, opts), std::invalid_argument);

    opts.perfect_gains = false;
    opts.noise_var_factor = 1.5;
    CHECK(estimate_parameters(o, 2, opts).noise_var_used == Approx(0.015));

    opts.direction = DirectionEstimator::bartlett;
    CHECK_THROWS_AS(estimate_parameters(o, 2, opts), std::invalid_argument);
}

TEST_CASE("PBCE filters the last snapshot", "[estimators]")
{
    Scenario s;
    s.coherence_len = 4;
    s.noise_var = 0.1;
    Rng rng(23);
    const auto r = sample_prior(s.prior, s, rng);
    const auto o = observe(r, s, rng);
    ParamEstimate p{r.omegas, r.rhos, s.noise_var};
    CHECK((pbce_estimate(o, p) - genie_lmmse(o, r)).norm() < 1e-12);
    const cvec direct = oracle::lmmse(r.omegas, r.rhos, 0.1, 64) * o.snapshots.col(3);
    CHECK((pbce_estimate(o, p) - direct).norm() < 1e-10);
}

TEST_CASE("LMMSE filter limiting cases", "[estimators]")
{
    // DFT-spaced spatial frequencies give exactly orthogonal steering vectors.
    const std::vector<double> w{0.0, 2.0 * pi / 8.0, 4.0 * pi / 8.0};
    const std::vector<double> rho{3.0, 1.0, 4.0};
    const Filter e = conditional_lmmse_filter(w, rho, 0.2, 8, LmmseMode::exact);
    const Filter f = conditional_lmmse_filter(w, rho, 0.2, 8, LmmseMode::favorable);
    CHECK((e.matrix - f.matrix).norm() < 1e-12);

    CHECK(conditional_lmmse_filter(w, rho, 1e12, 8).matrix.norm() < 1e-10);

    const cvec a = oracle::steering(0.5, 8);
    const Filter one = conditional_lmmse_filter({0.5}, {8.0}, 2.0, 8);
    CHECK((one.matrix - 0.8 * a * a.adjoint()).norm() < 1e-14);
}

TEST_CASE("root-MUSIC resolves three paths within a beamwidth", "[estimators][slow]")
{
    Scenario s;
    s.num_paths = 3;
    s.coherence_len = 16;
    s.noise_var = 0.01;
    Rng rng(154);
    int within = 0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i)
    {
        const auto r = sample_prior(s.prior, s, rng);
        const auto o = observe(r, s, rng);
        try
        {
            const auto w = root_music(o.sample_cov, 3);
            const auto p = match_paths(w, r.omegas);
            double sq = 0.0;
            for (std::size_t l = 0; l < 3; ++l)
                sq += std::pow(omega_distance(w[l], r.omegas[p[l]]), 2);
            within += std::sqrt(sq / 3.0) < 2.0 * pi / 64.0;
        }
        catch (const EstimatorFailure &)
        {
        }
    }
    CHECK(within >= 990);
}
