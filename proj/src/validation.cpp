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

#include "pbce/validation.hpp"
#include "pbce/bounds.hpp"
#include "pbce/cme.hpp"
#include "pbce/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace pbce
{
    namespace
    {
        struct Check
        {
            std::string name;
            std::function<CheckResult(bool perturbed)> run;
        };

        CheckResult result(std::string name, double value, double tolerance, bool passed, std::string detail)
        {
            return {std::move(name), passed, value, tolerance, std::move(detail)};
        }

        std::string fmt(double v)
        {
            std::ostringstream os;
            os.precision(6);
            os << v;
            return os.str();
        }

        CheckResult crb_forms(bool perturbed)
        {
            double worst = 0.0;
            for (const Eigen::Index n : {2, 4, 8, 16, 64, 128})
            {
                const auto crb = crb_omega(n, 3, 0.25);
                const double nd = static_cast<double>(n);
                const double oracle = 6.0 * 0.25 / (3.0 * (nd * nd - 1.0)) * (perturbed ? 1.0 + 1e-6 : 1.0);
                worst = std::max(worst, std::abs(crb.matrix_form - oracle) / oracle);
            }
            return result("crb_matrix_vs_closed_form", worst, 1e-10, worst < 1e-10,
                          "max relative deviation over N in {2,...,128}: " + fmt(worst));
        }

        CheckResult smearing(bool perturbed)
        {
            Rng rng(20261019);
            std::uniform_real_distribution<double> omega(-pi, pi);
            std::uniform_real_distribution<double> log_c(std::log(1e-6), std::log(1e-1));
            double worst = 0.0;
            for (int i = 0; i < 10; ++i)
            {
                const double w = omega(rng);
                const double c = std::exp(log_c(rng));
                const cmat closed = smeared_projector(w, c, 64, SmearMethod::closed_form);
                const cmat quad = smeared_projector(w, perturbed ? c * 1.01 : c, 64, SmearMethod::quadrature);
                worst = std::max(worst, (closed - quad).cwiseAbs().maxCoeff());
            }
            return result("smearing_closed_form_vs_quadrature", worst, 1e-8, worst < 1e-8,
                          "max entrywise deviation over 10 random (w, C): " + fmt(worst));
        }

        CheckResult gain_estimator(bool perturbed)
        {
            Rng rng(7);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            double worst = 0.0;
            int instances = 0;
            for (Eigen::Index n = 2; n <= 8; ++n)
                for (Eigen::Index l = 1; l <= std::min<Eigen::Index>(3, n); ++l)
                    for (int rep = 0; rep < 3; ++rep)
                    {
                        // Equispaced directions with a random offset keep the Gram matrix well conditioned.
                        std::vector<double> omegas, rhos;
                        const double offset = 2.0 * pi * u(rng);
                        for (Eigen::Index k = 0; k < l; ++k)
                        {
                            omegas.push_back(wrap_omega(offset + 2.0 * pi * static_cast<double>(k) / static_cast<double>(l) +
                                                        0.3 * u(rng) / static_cast<double>(n)));
                            rhos.push_back(0.1 + 5.0 * u(rng));
                        }
                        const double s2 = 0.05 + u(rng);
                        const cmat a = steering_matrix(omegas, n);
                        rvec r(l);
                        for (Eigen::Index k = 0; k < l; ++k)
                            r[k] = rhos[static_cast<std::size_t>(k)];
                        const cmat cov = a * r.cast<cplx>().asDiagonal() * a.adjoint() +
                                         s2 * cmat::Identity(n, n);
                        const auto est = estimate_gains(cov, omegas, perturbed ? 1.01 * s2 : s2);
                        for (std::size_t k = 0; k < rhos.size(); ++k)
                            worst = std::max(worst, std::abs(est[k] - rhos[k]) / rhos[k]);
                        ++instances;
                    }
            return result("gain_estimator_exact_on_model_covariance", worst, 1e-9, worst < 1e-9,
                          std::to_string(instances) + " instances, max relative error " + fmt(worst));
        }

        CheckResult flatness_cases(bool perturbed)
        {
            const UniformDensity uniform(rvec::Constant(1, -1.0), rvec::Constant(1, 1.0));
            const auto r_uniform = check_prior_flatness(uniform, rvec::Constant(1, -0.5), rvec::Constant(1, 0.5));

            const double sd = 0.2;
            const GaussianDensity gauss(0.1, sd);
            const double narrow = perturbed ? 6.0 * sd : sd / 100.0;
            const auto r_narrow = check_prior_flatness(gauss, rvec::Constant(1, 0.1 - narrow / 2),
                                                       rvec::Constant(1, 0.1 + narrow / 2));
            const auto r_wide =
                check_prior_flatness(gauss, rvec::Constant(1, 0.1 - 3.0 * sd), rvec::Constant(1, 0.1 + 3.0 * sd));

            const bool ok = r_uniform.satisfied && r_uniform.sup_log_gradient == 0.0 && r_narrow.satisfied &&
                            !r_wide.satisfied && r_wide.ratio >= 9.0 - 1e-9;
            return result("prior_flatness_cases", r_wide.ratio, 9.0, ok,
                          "uniform ratio " + fmt(r_uniform.ratio) + ", narrow Gaussian " + fmt(r_narrow.ratio) +
                              ", wide Gaussian " + fmt(r_wide.ratio));
        }

        CheckResult bound_gap(bool perturbed)
        {
            double worst = 0.0;
            for (const double s2 : {1.0, 1e-1, 1e-2, 1e-3})
            {
                const auto in = make_bound_inputs(64, 4, s2, {20.0, 30.0, 14.0});
                const double direct = cme_asymptotic_mse(in) - pbce_asymptotic_mse(in);
                const double closed = bound_gap_closed_form(in) * (perturbed ? 1.001 : 1.0);
                // The direct difference cancels two O(N) terms, so compare on the scale of N.
                worst = std::max(worst, std::abs(direct - closed) / 64.0);
            }
            return result("bound_gap_identity", worst, 1e-13, worst < 1e-13,
                          "max deviation of CME - PBCE from 4B sum s(1-s) rho C, relative to N: " + fmt(worst));
        }

        CheckResult gap_slope(bool perturbed)
        {
            auto inputs = [](double s2) { return make_bound_inputs(64, 1, s2, {64.0}); };
            // Perturbed: the two bounds are taken at different noise levels, so
            // their difference no longer vanishes as s2 -> 0.
            const auto fit = convergence_slope([&](double s2) { return cme_asymptotic_mse(inputs(s2)); },
                                               [&](double s2)
                                               { return pbce_asymptotic_mse(inputs(perturbed ? 1.5 * s2 : s2)); },
                                               {1e-1, 1e-2, 1e-3, 1e-4});
            const double dev = std::abs(fit.slope - 2.0);
            return result("bound_gap_quadratic_slope", fit.slope, 0.05, dev <= 0.05, "slope " + fmt(fit.slope));
        }

        CheckResult steering_derivative_fd(bool perturbed)
        {
            double worst = 0.0;
            const double h = 1e-6;
            for (const double w : {-2.5, -0.4, 0.0, 0.7, 3.0})
            {
                const cvec fd = (steering(w + h, 16) - steering(w - h, 16)) / (2.0 * h);
                cvec d = steering_derivative(w, 16);
                if (perturbed)
                    d *= 1.001;
                worst = std::max(worst, (fd - d).cwiseAbs().maxCoeff());
            }
            return result("steering_derivative_finite_difference", worst, 1e-6, worst < 1e-6,
                          "max deviation from central difference: " + fmt(worst));
        }

        CheckResult chernoff(bool perturbed)
        {
            bool ok = true;
            double worst_ratio = 0.0;
            for (int k = 1; k <= 10; ++k)
            {
                const double c = 2e-3;
                const auto t = chernoff_tail_mass(c, k * std::sqrt(c));
                const double bound = perturbed ? 0.2 * t.chernoff_bound : t.chernoff_bound;
                ok = ok && t.exact <= bound;
                worst_ratio = std::max(worst_ratio, t.exact / bound);
            }
            return result("chernoff_bound_dominates_tail", worst_ratio, 1.0, ok,
                          "max exact/bound ratio for k/sqrt(C) in 1..10: " + fmt(worst_ratio));
        }

        CheckResult root_music_noiseless(bool perturbed)
        {
            const std::vector<double> truth{-1.1, 0.2, 1.9};
            cmat alphas(3, 4);
            Rng rng(3);
            for (Eigen::Index i = 0; i < alphas.size(); ++i)
                alphas.data()[i] = complex_normal(rng, 1.0);
            cmat y = synthesize_channels(truth, alphas, 32);
            const auto est = root_music(sample_covariance(y), 3);
            double worst = 0.0;
            for (std::size_t l = 0; l < 3; ++l)
                worst = std::max(worst, omega_distance(est[l] + (perturbed ? 1e-6 : 0.0), truth[l]));
            return result("root_music_noiseless", worst, 1e-8, worst < 1e-8,
                          "max direction error with 3 paths, N = 32, T = 4: " + fmt(worst));
        }

        const std::vector<Check> &checks()
        {
            static const std::vector<Check> all{
                {"crb_matrix_vs_closed_form", crb_forms},
                {"smearing_closed_form_vs_quadrature", smearing},
                {"gain_estimator_exact_on_model_covariance", gain_estimator},
                {"prior_flatness_cases", flatness_cases},
                {"bound_gap_identity", bound_gap},
                {"bound_gap_quadratic_slope", gap_slope},
                {"steering_derivative_finite_difference", steering_derivative_fd},
                {"chernoff_bound_dominates_tail", chernoff},
                {"root_music_noiseless", root_music_noiseless},
            };
            return all;
        }
    }

    std::vector<std::string> validation_check_names()
    {
        std::vector<std::string> names;
        for (const auto &c : checks())
            names.push_back(c.name);
        return names;
    }

    std::vector<CheckResult> run_validation(const std::optional<std::string> &perturb)
    {
        if (perturb)
        {
            const auto names = validation_check_names();
            if (std::find(names.begin(), names.end(), *perturb) == names.end())
            {
                std::string list;
                for (const auto &n : names)
                    list += (list.empty() ? "" : ", ") + n;
                throw std::invalid_argument("unknown check '" + *perturb + "'; valid checks: " + list);
            }
        }
        std::vector<CheckResult> out;
        for (const auto &c : checks())
        {
            try
            {
                out.push_back(c.run(perturb && *perturb == c.name));
            }
            catch (const std::exception &e)
            {
                out.push_back(result(c.name, 0.0, 0.0, false, std::string("threw: ") + e.what()));
            }
        }
        return out;
    }
}
