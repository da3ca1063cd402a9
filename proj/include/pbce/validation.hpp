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

#ifndef PBCE_VALIDATION_HPP
#define PBCE_VALIDATION_HPP

#include <optional>
#include <string>
#include <vector>

namespace pbce
{
    struct CheckResult
    {
        std::string name;
        bool passed = false;
        double value = 0.0;     ///< measured quantity (error, ratio or slope)
        double tolerance = 0.0;
        std::string detail;
    };

    /// Names accepted by run_validation's fault injection, one per check.
    std::vector<std::string> validation_check_names();

    /// Fast oracle suite. `perturb` names a check whose input is deliberately
    /// corrupted so that the check must fail (negative control).
    /// Throws std::invalid_argument for an unknown name.
    std::vector<CheckResult> run_validation(const std::optional<std::string> &perturb = std::nullopt);
}

#endif
