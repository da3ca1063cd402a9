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
#include "pbce/bounds.hpp"
#include "pbce/cme.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace pbce;
using Catch::Approx;

TEST_CASE("CRB of the spatial frequency", "[bounds]")
{
    const auto c = crb_omega(64, 1, 1.0);
    CHECK(c.reduced_form == Approx(0.0014652014652014652).epsilon(1e-15));
    CHECK(c.matrix_form == Approx(c.reduced_form).epsilon(1e-10));
    CHECK(crb_omega(64, 1, 1e-3).reduced_form == Approx(1.4652014652014652e-6).epsilon(1e-15));

    for (Eigen::Index n : {2, 5, 16, 64})
        for (Eigen::Index t : {1, 7})
        {
            const auto v = crb_omega(n, t, 0.3);
            CHECK(v.matrix_form == Approx(oracle::crb_numeric(n, t, 0.3)).epsilon(1e-8));
            CHECK(v.matrix_form == Approx(v.reduced_form).epsilon(1e-10));
        }
    CHECK_THROWS_AS(crb_omega(1, 1, 1.0), std::invalid_argument);
}

TEST_CASE("bound inputs follow the smearing variance", "[bounds]")
{
    const auto in = make_bound_inputs(64, 4, 0.5, {40.0, 24.0});
    CHECK(in.b() == Approx(4096.0 / 24.0));
    CHECK(in.crb == Approx(6.0 * 0.5 / (4.0 * 4095.0)));
    CHECK(in.c_bars[0] == Approx(smearing_variance(40.0, 40.0, 0.5, 4, 64)));

    const auto inv = make_bound_inputs(64, 4, 0.5, {40.0}, CbarConvention::inverse_mean);
    CHECK(inv.c_bars[0] == Approx(in.c_bars[0] * 4.0 / 3.0));
    const auto real = make_bound_inputs(64, 4, 0.5, {40.0}, CbarConvention::realized, {20.0});
    CHECK(real.c_bars[0] == Approx(2.0 * in.c_bars[0]));

    CHECK_THROWS_AS(make_bound_inputs(64, 1, 0.5, {40.0}, CbarConvention::inverse_mean), std::invalid_argument);
    CHECK_THROWS_AS(make_bound_inputs(64, 4, 0.5, {40.0}, CbarConvention::realized), std::invalid_argument);
}

TEST_CASE("asymptotic MSE expressions against a term-by-term transcription", "[bounds]")
{
    for (const auto &rhos : std::vector<std::vector<double>>{{64.0}, {10.0, 30.0, 24.0}, {0.0, 64.0}})
        for (double s2 : {1.0, 0.1, 1e-3})
            for (Eigen::Index t : {1, 16})
            {
                const auto in = make_bound_inputs(64, t, s2, rhos);
                const oracle::BoundTerms terms{64.0, in.b(), s2, in.crb, in.rhos, in.c_bars};
                // Both sides cancel O(N) terms, so compare on the scale of N.
                CHECK(std::abs(cme_asymptotic_mse(in) - oracle::cme_ab(terms)) / 64.0 < 1e-14);
                CHECK(std::abs(pbce_asymptotic_mse(in) - oracle::pbce_ab(terms, s2)) / 64.0 < 1e-14);
                CHECK(std::abs(pbce_asymptotic_mse(in, 1.3 * s2) - oracle::pbce_ab(terms, 1.3 * s2)) / 64.0 < 1e-14);
            }
}

TEST_CASE("bound gap closed form and ordering", "[bounds]")
{
    for (double s2 : {1.0, 0.1, 0.01})
    {
        const auto in = make_bound_inputs(64, 16, s2, {10.0, 30.0, 24.0});
        // The CME bound sits above the PBCE bound by exactly this amount.
        const double diff = cme_asymptotic_mse(in) - pbce_asymptotic_mse(in);
        CHECK(bound_gap_closed_form(in) > 0.0);
        CHECK(std::abs(diff - bound_gap_closed_form(in)) / 64.0 < 1e-13);
    }
}

TEST_CASE("bound gap vanishes quadratically in the noise variance", "[bounds]")
{
    for (const auto &rhos : std::vector<std::vector<double>>{{64.0}, {10.0, 30.0, 24.0}})
    {
        const auto f = [&](double s2) { return cme_asymptotic_mse(make_bound_inputs(64, 1, s2, rhos)); };
        const auto g = [&](double s2) { return pbce_asymptotic_mse(make_bound_inputs(64, 1, s2, rhos)); };
        const auto fit = convergence_slope(f, g, {1e-1, 1e-2, 1e-3, 1e-4});
        CHECK(fit.slope == Approx(2.0).margin(0.05));
        CHECK(fit.warnings.empty());
    }
    const auto same = [](double) { return 1.0; };
    CHECK_THROWS_AS(convergence_slope(same, same, {1e-1, 1e-2, 1e-3, 1e-4}), DifferenceUnderflow);
    CHECK_THROWS_AS(convergence_slope(same, same, {1e-1, 1e-2, 1e-3}), std::invalid_argument);
    CHECK_THROWS_AS(convergence_slope(same, same, {1e-1, 2e-1, 3e-1, 4e-1}), std::invalid_argument);
}

TEST_CASE("noise mismatch gap", "[bounds]")
{
    // Small noise, where the quadratic term dominates the CRB cross term.
    const auto in = make_bound_inputs(64, 1, 1e-4, {64.0});
    std::vector<double> eps{0.8, 0.5, 0.3, 0.2, 0.1};
    std::vector<double> gaps;
    for (double e : eps)
    {
        const auto m = mismatch_gap(in, e);
        CHECK(m.exact > 0.0);
        gaps.push_back(m.exact);
    }
    CHECK(oracle::loglog_slope(eps, gaps) == Approx(2.0).margin(0.05));
    const auto half = mismatch_gap(in, 0.5);
    CHECK(half.exact / half.leading_term == Approx(1.0).margin(0.01));
    const double den = 64.0 + 1e-4;
    CHECK(half.leading_term == Approx(64.0 * 64.0 * 0.25e-8 / (den * den * den)).epsilon(1e-12));
    CHECK_THROWS_AS(mismatch_gap(in, -1.0), std::invalid_argument);
}

TEST_CASE("log-log fit", "[bounds]")
{
    const auto fit = fit_loglog({1.0, 10.0, 100.0}, {3.0, 300.0, 30000.0});
    CHECK(fit.slope == Approx(2.0).epsilon(1e-14));
    CHECK(std::exp(fit.intercept) == Approx(3.0).epsilon(1e-13));
    CHECK(fit.r_squared == Approx(1.0).epsilon(1e-14));
    CHECK(fit.points_used == 3);
    CHECK_THROWS_AS(fit_loglog({1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_loglog({1.0, 2.0}, {1.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_loglog({2.0, 2.0}, {1.0, 3.0}), std::invalid_argument);
}
