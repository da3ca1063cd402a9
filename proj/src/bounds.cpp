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

#include "pbce/bounds.hpp"
#include "pbce/array_model.hpp"
#include "pbce/cme.hpp"

#include <algorithm>
#include <cmath>

namespace pbce
{
    CrbOmega crb_omega(Eigen::Index n_rx, Eigen::Index coherence_len, double noise_var)
    {
        if (n_rx < 2)
            throw std::invalid_argument("crb_omega: n_rx must be at least 2 (N^2 - 1 vanishes otherwise)");
        if (coherence_len < 1)
            throw std::invalid_argument("crb_omega: coherence length must be positive");
        if (!(noise_var > 0.0))
            throw std::invalid_argument("crb_omega: noise variance must be positive");

        // The value does not depend on w; evaluate at w = 0.
        const cvec a = steering(0.0, n_rx);
        const cvec d = steering_derivative(0.0, n_rx);
        const cvec projected = d - a * a.dot(d); // (I - a a^H) d, dot() conjugates its first argument
        const double info = d.dot(projected).real();

        const double t = static_cast<double>(coherence_len);
        const double nd = static_cast<double>(n_rx);
        return {noise_var / (2.0 * t) / info, 6.0 * noise_var / (t * (nd * nd - 1.0))};
    }

    void BoundInputs::validate() const
    {
        if (n_rx < 2 || coherence_len < 1)
            throw std::invalid_argument("bounds: need n_rx >= 2 and T >= 1");
        if (!(noise_var >= 0.0))
            throw std::invalid_argument("bounds: noise variance must be non-negative");
        if (rhos.empty() || rhos.size() != c_bars.size())
            throw std::invalid_argument("bounds: rhos and c_bars must be non-empty and of equal length");
        for (std::size_t l = 0; l < rhos.size(); ++l)
            if (!(rhos[l] >= 0.0) || !(c_bars[l] >= 0.0))
                throw std::invalid_argument("bounds: rhos and c_bars must be non-negative");
        if (!(crb >= 0.0))
            throw std::invalid_argument("bounds: CRB must be non-negative");
    }

    BoundInputs make_bound_inputs(Eigen::Index n_rx, Eigen::Index coherence_len, double noise_var,
                                  std::vector<double> rhos, CbarConvention convention,
                                  const std::vector<double> &alpha_bars)
    {
        BoundInputs in;
        in.n_rx = n_rx;
        in.coherence_len = coherence_len;
        in.noise_var = noise_var;
        in.crb = crb_omega(n_rx, coherence_len, noise_var).reduced_form;
        in.rhos = std::move(rhos);

        if (convention == CbarConvention::realized && alpha_bars.size() != in.rhos.size())
            throw std::invalid_argument("make_bound_inputs: realized convention needs one alpha_bar per path");
        if (convention == CbarConvention::inverse_mean && coherence_len < 2)
            throw std::invalid_argument("make_bound_inputs: E[1/alpha_bar] is infinite for T = 1");

        for (std::size_t l = 0; l < in.rhos.size(); ++l)
        {
            const double rho = in.rhos[l];
            if (!(rho > 0.0))
            {
                in.c_bars.push_back(0.0); // shrinkage is zero, C_bar never contributes
                continue;
            }
            switch (convention)
            {
            case CbarConvention::plug_in:
                in.c_bars.push_back(smearing_variance(rho, rho, noise_var, coherence_len, n_rx));
                break;
            case CbarConvention::inverse_mean:
            {
                // C is proportional to 1/alpha_bar; alpha_bar ~ Gamma(T, rho/T).
                const double t = static_cast<double>(coherence_len);
                const double inv_mean = t / ((t - 1.0) * rho);
                in.c_bars.push_back(smearing_variance(rho, 1.0, noise_var, coherence_len, n_rx) * inv_mean);
                break;
            }
            case CbarConvention::realized:
                in.c_bars.push_back(smearing_variance(rho, alpha_bars[l], noise_var, coherence_len, n_rx));
                break;
            }
        }
        return in;
    }

    namespace
    {
        double shrinkage(double rho, double noise_var)
        {
            const double den = rho + noise_var;
            return den > 0.0 ? rho / den : 0.0;
        }
    }

    double cme_asymptotic_mse(const BoundInputs &in)
    {
        in.validate();
        const double b = in.b();
        double mse = static_cast<double>(in.n_rx);
        for (std::size_t l = 0; l < in.rhos.size(); ++l)
        {
            const double rho = in.rhos[l];
            const double s = shrinkage(rho, in.noise_var);
            mse -= 2.0 * s * (rho * (1.0 - 2.0 * b * in.c_bars[l]) - 2.0 * b * in.crb);
            mse += s * s * (rho * (1.0 - 4.0 * b * in.c_bars[l]) - 2.0 * b * in.crb + in.noise_var);
        }
        return mse;
    }

    double pbce_asymptotic_mse(const BoundInputs &in, std::optional<double> believed_noise_var)
    {
        in.validate();
        const double believed = believed_noise_var.value_or(in.noise_var);
        const double b = in.b();
        double mse = static_cast<double>(in.n_rx);
        for (const double rho : in.rhos)
        {
            const double s = shrinkage(rho, believed);
            mse -= 2.0 * s * (rho - 2.0 * b * in.crb);
            mse += s * s * (rho - 2.0 * b * in.crb + in.noise_var);
        }
        return mse;
    }

    double bound_gap_closed_form(const BoundInputs &in)
    {
        in.validate();
        double gap = 0.0;
        for (std::size_t l = 0; l < in.rhos.size(); ++l)
        {
            const double s = shrinkage(in.rhos[l], in.noise_var);
            gap += s * (1.0 - s) * in.rhos[l] * in.c_bars[l];
        }
        return 4.0 * in.b() * gap;
    }

    SlopeFit fit_loglog(const std::vector<double> &x, const std::vector<double> &y)
    {
        if (x.size() != y.size() || x.size() < 2)
            throw std::invalid_argument("fit_loglog: need at least two (x, y) pairs");
        const auto n = static_cast<double>(x.size());
        double sx = 0.0, sy = 0.0;
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            if (!(x[i] > 0.0) || !(y[i] > 0.0))
                throw std::invalid_argument("fit_loglog: values must be positive");
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
            sx += lx.back();
            sy += ly.back();
        }
        const double mx = sx / n, my = sy / n;
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i)
        {
            sxx += (lx[i] - mx) * (lx[i] - mx);
            sxy += (lx[i] - mx) * (ly[i] - my);
            syy += (ly[i] - my) * (ly[i] - my);
        }
        if (sxx == 0.0)
            throw std::invalid_argument("fit_loglog: x values must not all coincide");

        SlopeFit fit;
        fit.slope = sxy / sxx;
        fit.intercept = my - fit.slope * mx;
        fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
        fit.points_used = lx.size();
        return fit;
    }

    SlopeFit convergence_slope(const NoiseFunction &f, const NoiseFunction &g, const std::vector<double> &noise_grid)
    {
        if (noise_grid.size() < 4)
            throw std::invalid_argument("convergence_slope: need at least 4 noise variances");
        const auto [lo, hi] = std::minmax_element(noise_grid.begin(), noise_grid.end());
        if (!(*lo > 0.0) || std::log10(*hi / *lo) < 2.0 - 1e-12)
            throw std::invalid_argument("convergence_slope: grid must be positive and span at least two decades");

        std::vector<double> xs, ys;
        std::vector<std::string> warnings;
        for (const double s2 : noise_grid)
        {
            const double diff = std::abs(f(s2) - g(s2));
            if (!(diff >= 1e-300))
            {
                warnings.push_back("difference underflows at noise variance " + std::to_string(s2) +
                                   "; point dropped");
                continue;
            }
            xs.push_back(s2);
            ys.push_back(diff);
        }
        if (xs.size() < 2)
            throw DifferenceUnderflow("convergence_slope: difference underflows on the grid, no slope can be fitted");

        auto fit = fit_loglog(xs, ys);
        fit.warnings = std::move(warnings);
        return fit;
    }

    MismatchGap mismatch_gap(const BoundInputs &in, double epsilon)
    {
        if (!(epsilon > -1.0))
            throw std::invalid_argument("mismatch_gap: epsilon must exceed -1");
        const double believed = (1.0 + epsilon) * in.noise_var;
        MismatchGap out;
        out.exact = pbce_asymptotic_mse(in, believed) - pbce_asymptotic_mse(in);
        out.leading_term = 0.0;
        const double shift = epsilon * in.noise_var;
        for (const double rho : in.rhos)
        {
            const double den = rho + in.noise_var;
            out.leading_term += rho * rho * shift * shift / (den * den * den);
        }
        return out;
    }
}
