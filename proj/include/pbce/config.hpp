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

#ifndef PBCE_CONFIG_HPP
#define PBCE_CONFIG_HPP

#include "pbce/sim_harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pbce
{
    /// Malformed or inconsistent run configuration. The message names the
    /// offending file, line or key.
    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /**
     * Everything a sweep run needs. Config files are INI-style:
     *
     *   [scenario]  n_rx, num_paths, coherence_len, snr_db | noise_var, seed
     *   [prior]     weights, means_deg, stds_deg, gain_law, min_separation_beamwidths
     *   [sweep]     axis, values, estimators, trials, perfect_gains, mismatch_eps, cbar,
     *               sampled_cme_mode, sampled_cme_samples, bartlett_grid, forward_backward
     *   [output]    path, workers, summary_json, convergence
     *
     * Lists are comma separated; `values` also accepts the range form a:step:b.
     */
    struct RunConfig
    {
        SweepSpec sweep;
        std::filesystem::path output_path = "results.csv";
        std::optional<std::filesystem::path> summary_json;
        bool convergence = false; ///< add a convergence report to the JSON summary

        void validate() const; // throws ConfigError
    };

    RunConfig parse_config(std::istream &in, const std::string &source_name);
    RunConfig load_config(const std::filesystem::path &path);

    /// "1,2,5" or "a:step:b" (inclusive, evaluated as a + i * step).
    std::vector<double> parse_value_list(std::string_view text);
    std::vector<std::string> split_list(std::string_view text);
}

#endif
