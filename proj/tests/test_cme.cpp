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
#include "pbce/cme.hpp"
#include "pbce/estimators.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace pbce;
using Catch::Approx;

namespace
{
    // Posterior log weight written with full N x N matrices.
    double oracle_log_weight(const ParameterSample &s, const cmat &cy, double t, double s2)
    {
        const Eigen::Index n = cy.rows();
        const cmat w = oracle::lmmse(s.omegas, s.rhos, s2, n);
        const cmat i_minus_w = cmat::Identity(n, n) - w;
        const double log_det = std::log(std::abs(i_minus_w.fullPivLu().determinant()));
        return t / s2 * (w * cy).trace().real() + t * log_det + s.log_prior;
    }
}

TEST_CASE("sampled CME weights follow the posterior", "[cme]")
{
    const Eigen::Index n = 8;
    Scenario s;
    s.n_rx = n;
    s.num_paths = 2;
    s.coherence_len = 3;
    s.noise_var = 2.0;
    Rng rng(9);
    const auto r = sample_prior(s.prior, s, rng);
    const auto o = observe(r, s, rng);

    std::vector<ParameterSample> samples{
        {{0.3, -1.0}, {3.0, 5.0}, 0.0}, {{0.1, 0.9}, {6.0, 2.0}, -0.5}, {r.omegas, r.rhos, 0.2}};
    const auto got = sampled_cme_filter(o.sample_cov, 3, 2.0, samples);

    std::vector<double> lw;
    for (const auto &p : samples)
        lw.push_back(oracle_log_weight(p, o.sample_cov, 3.0, 2.0));
    const double peak = *std::max_element(lw.begin(), lw.end());
    double total = 0.0;
    for (double &v : lw)
        total += (v = std::exp(v - peak));
    cmat want = cmat::Zero(n, n);
    for (std::size_t i = 0; i < samples.size(); ++i)
        want += lw[i] / total * oracle::lmmse(samples[i].omegas, samples[i].rhos, 2.0, n);
    CHECK((got.filter.matrix - want).norm() < 1e-10);
    CHECK(got.max_weight == Approx(*std::max_element(lw.begin(), lw.end()) / total).epsilon(1e-10));

    const auto single = sampled_cme_filter(o.sample_cov, 3, 2.0, {samples[1]});
    CHECK(single.weight_entropy == 0.0);
    CHECK(single.max_weight == 1.0);
    CHECK((single.filter.matrix - oracle::lmmse(samples[1].omegas, samples[1].rhos, 2.0, n)).norm() < 1e-12);

    CHECK_THROWS_AS(sampled_cme_filter(o.sample_cov, 3, 2.0, {}), std::invalid_argument);
}

TEST_CASE("smearing variance", "[cme]")
{
    CHECK(smearing_variance(64.0, 1.0, 1.0, 1, 64) == Approx(0.00148773193359375).epsilon(1e-15));
    CHECK(smearing_variance(64.0, 64.0, 1.0, 4, 64) == Approx(0.00148773193359375 / 256.0).epsilon(1e-15));
    CHECK_THROWS_AS(smearing_variance(0.0, 1.0, 1.0, 1, 64), std::invalid_argument);

    const auto spec = make_asymptotic_cme_spec({0.1, 0.2}, {40.0, 24.0}, {30.0, 20.0}, 0.5, 8, 64);
    CHECK(spec.shrinkages[1] == Approx(24.0 / 24.5));
    CHECK(spec.variances[0] == Approx(6.0 * 0.5 * 40.5 / (8.0 * 4096.0 * 40.0 * 30.0)));
}

TEST_CASE("smeared projector closed form matches quadrature and an independent integral", "[cme]")
{
    for (const auto &[w, c, n] : std::vector<std::tuple<double, double, Eigen::Index>>{
             {0.3, 1e-4, 16}, {-2.0, 3e-3, 64}, {3.1, 0.05, 8}, {0.0, 0.00148773193359375, 64}})
    {
        const cmat closed = smeared_projector(w, c, n, SmearMethod::closed_form);
        const cmat quad = smeared_projector(w, c, n, SmearMethod::quadrature);
        const cmat ref = oracle::smeared_projector(w, c, n);
        CHECK((closed - quad).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((closed - ref).cwiseAbs().maxCoeff() < 1e-10);
    }
    // Vanishing variance collapses to the projector.
    const cvec a = oracle::steering(0.4, 8);
    CHECK((smeared_projector(0.4, 1e-16, 8) - a * a.adjoint()).norm() < 1e-13);
    CHECK_THROWS_AS(smeared_projector(0.4, 0.0, 8), std::invalid_argument);
}

TEST_CASE("asymptotic CME filter", "[cme]")
{
    const auto spec = make_asymptotic_cme_spec({0.1, -1.0}, {40.0, 24.0}, {41.0, 22.0}, 0.5, 8, 32);
    const Filter f = asymptotic_cme_filter(spec, 32);
    cmat want = cmat::Zero(32, 32);
    for (std::size_t l = 0; l < 2; ++l)
        want += spec.shrinkages[l] * oracle::smeared_projector(spec.omega_hats[l], spec.variances[l], 32);
    CHECK((f.matrix - want).cwiseAbs().maxCoeff() < 1e-10);

    // Vanishing variance gives the favorable-propagation LMMSE filter.
    AsymptoticCmeSpec sharp = spec;
    sharp.variances = {1e-16, 1e-16};
    const Filter fav = conditional_lmmse_filter({0.1, -1.0}, {40.0, 24.0}, 0.5, 32, LmmseMode::favorable);
    CHECK((asymptotic_cme_filter(sharp, 32).matrix - fav.matrix).norm() < 1e-12);
}

TEST_CASE("local flatness condition", "[cme]")
{
    const UniformDensity box(rvec::Constant(2, -1.0), rvec::Constant(2, 1.0));
    const auto flat = check_prior_flatness(box, rvec::Constant(2, -0.1), rvec::Constant(2, 0.1));
    CHECK(flat.satisfied);
    CHECK(flat.sup_log_gradient == 0.0);

    // |p'/p| = |x - m| / sd^2; on [m - 0.01, m + 0.01] with sd = 1 the ratio is 0.01 * 0.02.
    const GaussianDensity g(0.5, 1.0);
    const auto narrow = check_prior_flatness(g, rvec::Constant(1, 0.49), rvec::Constant(1, 0.51));
    CHECK(narrow.satisfied);
    CHECK(narrow.sup_log_gradient == Approx(0.01).epsilon(1e-9));
    CHECK(narrow.ratio == Approx(0.0002).epsilon(1e-6));

    const GaussianDensity steep(0.0, 0.1);
    const auto wide = check_prior_flatness(steep, rvec::Constant(1, -0.5), rvec::Constant(1, 0.5));
    CHECK_FALSE(wide.satisfied);

    const UniformDensity unit(rvec::Constant(1, 0.0), rvec::Constant(1, 1.0));
    CHECK_THROWS_AS(check_prior_flatness(unit, rvec::Constant(1, 0.5), rvec::Constant(1, 2.0)), std::domain_error);
}

TEST_CASE("angle mixture density integrates to one", "[cme]")
{
    const AngleMixtureDensity d(PriorSpec::four_region_default());
    const int n = 200000;
    double total = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double w = -pi + (i + 0.5) * 2.0 * pi / n;
        total += d.pdf(w) * 2.0 * pi / n;
    }
    CHECK(total == Approx(1.0).epsilon(1e-4));

    const double w = 0.3, h = 1e-6;
    CHECK(d.derivative(w) == Approx((d.pdf(w + h) - d.pdf(w - h)) / (2.0 * h)).epsilon(1e-5));
}

TEST_CASE("Gaussian tail bounds", "[cme]")
{
    const double c = 0.00148773193359375;
    for (double k : {0.05, 0.1, 0.2, 0.3})
    {
        const auto t = chernoff_tail_mass(c, k);
        CHECK(t.exact == Approx(std::sqrt(pi * c / 2.0) * std::erfc(k / std::sqrt(2.0 * c))).epsilon(1e-12));
        CHECK(t.chernoff_bound >= t.exact);
    }
    CHECK(tail_premise_satisfied(c, 0.2));
    CHECK_FALSE(tail_premise_satisfied(c, 0.05));
    const double k = half_width_for_defect(c, 1e-5);
    CHECK(2.0 * std::exp(-k * k / (2.0 * c)) == Approx(1e-5).epsilon(1e-10));
}

TEST_CASE("duplicated samples do not change the sampled CME", "[cme]")
{
    const cmat c = cmat::Identity(8, 8) * 1.5;
    const ParameterSample a{{0.3}, {8.0}, 0.0};
    const ParameterSample b{{-1.2}, {8.0}, 0.0};
    const auto two = sampled_cme_filter(c, 2, 0.5, {a, b});
    const auto three = sampled_cme_filter(c, 2, 0.5, {a, a, b});
    const auto one_a = sampled_cme_filter(c, 2, 0.5, {a, a});
    CHECK((one_a.filter.matrix - sampled_cme_filter(c, 2, 0.5, {a}).filter.matrix).norm() < 1e-14);
    // Duplicating a sample doubles its prior mass, nothing else.
    ParameterSample a2 = a;
    a2.log_prior = std::log(2.0);
    CHECK((three.filter.matrix - sampled_cme_filter(c, 2, 0.5, {a2, b}).filter.matrix).norm() < 1e-12);
    CHECK(two.weight_entropy > 0.0);
}

TEST_CASE("smeared projector structure", "[cme]")
{
    const cmat g = smeared_projector(1.1, 0.02, 16);
    CHECK((g - g.adjoint()).norm() < 1e-15);
    CHECK(std::abs(g.trace() - cplx(1.0)) < 1e-14);
    for (Eigen::Index k = 0; k < 16; ++k)
        CHECK(std::abs(g(k, k) - cplx(1.0 / 16.0)) < 1e-15);
    Eigen::SelfAdjointEigenSolver<cmat> eig(g);
    CHECK(eig.eigenvalues().minCoeff() > -1e-14);
}
