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

#ifndef PBCE_POLYNOMIAL_HPP
#define PBCE_POLYNOMIAL_HPP

#include "pbce/types.hpp"

#include <vector>

namespace pbce
{
    /// Roots of p(z) = sum_k coeffs[k] z^k, computed as the eigenvalues of the
    /// companion matrix. Highest-order coefficients below `rel_tol * max|c|` are
    /// dropped first, so the returned vector may hold fewer than deg roots.
    std::vector<cplx> polynomial_roots(const std::vector<cplx> &coeffs, double rel_tol = 1e-14);

    /// Horner evaluation, coeffs ascending.
    cplx polynomial_eval(const std::vector<cplx> &coeffs, cplx z);
}

#endif
