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

#ifndef PBCE_TYPES_HPP
#define PBCE_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace pbce
{
    using cplx = std::complex<double>;
    using cvec = Eigen::VectorXcd;
    using cmat = Eigen::MatrixXcd;
    using rvec = Eigen::VectorXd;

    /// Random engine used throughout. Every Monte-Carlo trial owns its own instance.
    using Rng = std::mt19937_64;

    inline constexpr double pi = std::numbers::pi;

    /// Raised when an estimator cannot produce a result for a given draw
    /// (e.g. too few root-MUSIC roots, unresolvable steering matrix). The
    /// simulation harness counts these as trial failures.
    class EstimatorFailure : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Linear estimator h_hat = W y.
    struct Filter
    {
        cmat matrix;

        cvec apply(const cvec &y) const { return matrix * y; }
        Eigen::Index size() const { return matrix.rows(); }
    };

    /// Draws from CN(0, variance).
    inline cplx complex_normal(Rng &rng, double variance)
    {
        std::normal_distribution<double> n(0.0, std::sqrt(0.5 * variance));
        const double re = n(rng);
        const double im = n(rng);
        return {re, im};
    }

    inline double db_to_noise_var(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }
}

#endif
