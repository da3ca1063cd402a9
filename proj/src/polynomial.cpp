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

#include "pbce/polynomial.hpp"

#include <complex>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>

namespace pbce
{
    cplx polynomial_eval(const std::vector<cplx> &coeffs, cplx z)
    {
        cplx acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
            acc = acc * z + *it;
        return acc;
    }

    std::vector<cplx> polynomial_roots(const std::vector<cplx> &coeffs, double rel_tol)
    {
        double scale = 0.0;
        for (const auto &c : coeffs)
            scale = std::max(scale, std::abs(c));
        if (scale == 0.0)
            throw std::invalid_argument("polynomial_roots: zero polynomial");

        std::size_t hi = coeffs.size();
        while (hi > 0 && std::abs(coeffs[hi - 1]) <= rel_tol * scale)
            --hi;
        std::size_t lo = 0;
        while (lo < hi && coeffs[lo] == cplx(0.0))
            ++lo;

        std::vector<cplx> roots(lo, cplx(0.0)); // exact zero roots
        const std::size_t deg = hi - lo - 1;
        if (deg == 0)
            return roots;

        // Frobenius companion matrix of the monic polynomial. It is already upper
        // Hessenberg, so the QR iteration can start directly (column-major storage).
        const auto n = static_cast<lapack_int>(deg);
        const cplx lead = coeffs[hi - 1];
        std::vector<cplx> companion(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), cplx(0.0));
        for (lapack_int i = 1; i < n; ++i)
            companion[static_cast<std::size_t>((i - 1) * n + i)] = 1.0;
        for (lapack_int i = 0; i < n; ++i)
            companion[static_cast<std::size_t>((n - 1) * n + i)] = -coeffs[lo + static_cast<std::size_t>(i)] / lead;

        std::vector<cplx> eig(static_cast<std::size_t>(n));
        const lapack_int info = LAPACKE_zhseqr(LAPACK_COL_MAJOR, 'E', 'N', n, 1, n, companion.data(), n, eig.data(),
                                               nullptr, n);
        if (info != 0)
            throw std::runtime_error("polynomial_roots: companion eigenvalue iteration did not converge");
        roots.insert(roots.end(), eig.begin(), eig.end());
        return roots;
    }
}
