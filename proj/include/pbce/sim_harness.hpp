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

#ifndef PBCE_SIM_HARNESS_HPP
#define PBCE_SIM_HARNESS_HPP

#include "pbce/array_model.hpp"
#include "pbce/bounds.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pbce
{
    enum class SweepAxis
    {
        snr_db,
        coherence_len,
        n_rx
    };

    enum class EstimatorTag
    {
        pbce_rmusic,
        pbce_bartlett,
        genie_lmmse,
        sampled_cme,
        asymptotic_cme,
        bound_cme_ab,
        bound_pbce_ab,
        crb_omega_curve,
        zero ///< h_hat = 0, sanity anchor with NMSE 1
    };

    std::string_view to_string(SweepAxis axis);
    std::string_view to_string(EstimatorTag tag);
    SweepAxis parse_axis(std::string_view text);       // throws std::invalid_argument listing valid names
    EstimatorTag parse_estimator(std::string_view text); // throws std::invalid_argument listing valid tags
    std::vector<EstimatorTag> all_estimator_tags();

    struct SampledCmeOptions
    {
        enum class Mode
        {
            grid,  ///< uniform w grid on (-pi, pi], weighted by the prior density
            prior  ///< i.i.d. draws from the prior, equal weights
        };
        Mode mode = Mode::grid;
        std::size_t samples = 2048;
    };

    struct SweepSpec
    {
        SweepAxis axis = SweepAxis::snr_db;
        std::vector<double> axis_values;
        Scenario base;
        std::vector<EstimatorTag> estimators;
        std::size_t trials = 1000;
        bool perfect_gains = false;
        std::optional<double> mismatch_eps;
        std::size_t workers = 1;
        CbarConvention cbar = CbarConvention::plug_in;
        SampledCmeOptions sampled_cme;
        Eigen::Index bartlett_grid = 4096;
        bool forward_backward = false;

        void validate() const; // throws std::invalid_argument
    };

    /// One (sweep point, estimator) result. For crb_omega_curve the value
    /// columns hold CRB_w instead of an NMSE.
    struct SweepRecord
    {
        SweepAxis axis = SweepAxis::snr_db;
        double axis_value = 0.0;
        EstimatorTag estimator = EstimatorTag::zero;
        double nmse_linear = 0.0;
        double nmse_db = 0.0;
        std::size_t trials_used = 0;
        std::size_t failures = 0;
        double std_err = 0.0;

        bool operator==(const SweepRecord &) const = default;
    };

    struct SweepResult
    {
        std::vector<SweepRecord> records;
        std::vector<std::vector<std::uint64_t>> draw_hashes; ///< [sweep point][trial]
    };

    /// Scenario at one sweep point (base scenario with the axis value applied).
    Scenario scenario_at(const SweepSpec &spec, std::size_t sweep_index);

    enum class TrialStream
    {
        channel, ///< angles, gain variances and path gains
        noise
    };

    /// Per-trial random stream, a pure function of (seed, trial index, stream).
    /// It does not depend on the sweep point: trial m sees the same underlying
    /// draws at every axis value (common random numbers), which keeps the
    /// point-to-point differences of a curve free of independent sampling noise.
    Rng trial_rng(std::uint64_t seed, std::uint64_t trial_index, TrialStream stream);

    /// FNV-1a hash of the ground truth and observation of one trial.
    std::uint64_t draw_hash(const ChannelRealization &realization, const ObservationBlock &observation);

    struct TrialOutcome
    {
        std::vector<std::optional<double>> values; ///< one per spec estimator; nullopt = estimator failure
        std::uint64_t hash = 0;
    };

    TrialOutcome evaluate_trial(const SweepSpec &spec, std::size_t sweep_index, std::size_t trial_index);

    SweepResult run_sweep(const SweepSpec &spec);

    // ----- Convergence studies ---------------------------------------------

    struct ConvergenceStudySpec
    {
        Eigen::Index n_rx = 64;
        Eigen::Index coherence_len = 1;
        std::vector<double> rhos{64.0};
        std::vector<double> noise_grid{1e-1, 1e-2, 1e-3, 1e-4};
        CbarConvention cbar = CbarConvention::plug_in;
        std::vector<SweepRecord> monte_carlo; ///< optional sweep output to analyse
    };

    struct ConvergenceReport
    {
        SlopeFit analytic; ///< log|CME_AB - PBCE_AB| vs log s2

        // Monte-Carlo part, filled when pbce_rmusic and bound records exist.
        std::vector<double> axis_values;
        std::vector<double> pbce_nmse;
        std::vector<double> gap_to_cme;  ///< pbce - bound_cme_ab (NMSE)
        std::vector<double> gap_to_pbce; ///< pbce - bound_pbce_ab (NMSE)
        std::optional<SlopeFit> empirical_gap_slope_cme;
        std::optional<SlopeFit> empirical_gap_slope_pbce;
        bool pbce_strictly_decreasing = false;
        bool gap_to_cme_decreasing = false;
    };

    ConvergenceReport run_convergence_study(const ConvergenceStudySpec &spec);

    // ----- Output ------------------------------------------------------------

    inline constexpr std::string_view results_csv_header =
        "axis,axis_value,estimator,nmse_linear,nmse_db,trials_used,failures,std_err";

    /// Writes the records sorted by (axis_value, estimator name). Throws
    /// std::runtime_error naming the path on I/O failure.
    void write_results(std::vector<SweepRecord> records, const std::filesystem::path &path);
    std::vector<SweepRecord> read_results(const std::filesystem::path &path);

    void write_summary_json(const std::vector<SweepRecord> &records, const ConvergenceReport *report,
                            const std::filesystem::path &path);
}

#endif
