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

#ifndef PBCE_CLI_HPP
#define PBCE_CLI_HPP

#include <iosfwd>

namespace pbce
{
    enum ExitCode : int
    {
        exit_ok = 0,
        exit_config_error = 2,
        exit_runtime_error = 3,
        exit_validation_failure = 4
    };

    /// Entry point of the pbce_lab tool; subcommands sweep, bounds, validate.
    /// Worker count precedence: config file < PBCE_WORKERS < --workers.
    int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
}

#endif
