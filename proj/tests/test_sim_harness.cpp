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

#include "pbce/sim_harness.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pbce;
using Catch::Approx;

namespace
{
    SweepSpec tiny_spec()
    {
        SweepSpec s;
        s.axis = SweepAxis::snr_db;
        s.axis_values = {0.0, 10.0, 20.0};
        s.base.n_rx = 16;
        s.base.coherence_len = 4;
        s.base.seed = 2024;
        s.estimators = {EstimatorTag::pbce_rmusic, EstimatorTag::genie_lmmse, EstimatorTag::asymptotic_cme,
                        EstimatorTag::bound_cme_ab, EstimatorTag::bound_pbce_ab, EstimatorTag::crb_omega_curve,
                        EstimatorTag::zero};
        s.trials = 40;
        return s;
    }

    std::string slurp(const std::filesystem::path &p)
    {
        std::ifstream in(p);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::filesystem::path temp_path(const std::string &name)
    {
        return std::filesystem::temp_directory_path() / ("pbce_test_" + name);
    }
}

TEST_CASE("name tables round trip", "[sim_harness]")
{
    for (const auto tag : all_estimator_tags())
        CHECK(parse_estimator(to_string(tag)) == tag);
    for (const auto axis : {SweepAxis::snr_db, SweepAxis::coherence_len, SweepAxis::n_rx})
        CHECK(parse_axis(to_string(axis)) == axis);
    CHECK_THROWS_WITH(parse_estimator("pbce_rmuisc"), Catch::Matchers::ContainsSubstring("valid tags"));
    CHECK_THROWS_AS(parse_axis("snr"), std::invalid_argument);
}

TEST_CASE("sweep specification validation", "[sim_harness]")
{
    auto s = tiny_spec();
    CHECK_NOTHROW(s.validate());

    auto bad = s;
    bad.axis_values = {0.0, 0.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = s;
    bad.axis = SweepAxis::coherence_len;
    bad.axis_values = {1.5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = s;
    bad.base.num_paths = 2;
    bad.estimators = {EstimatorTag::pbce_bartlett};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = s;
    bad.trials = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = s;
    bad.estimators.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("scenario at a sweep point", "[sim_harness]")
{
    auto s = tiny_spec();
    CHECK(scenario_at(s, 1).noise_var == Approx(0.1));
    s.axis = SweepAxis::n_rx;
    s.axis_values = {8, 32};
    CHECK(scenario_at(s, 1).n_rx == 32);
    s.axis = SweepAxis::coherence_len;
    CHECK(scenario_at(s, 0).coherence_len == 8);
}

TEST_CASE("trial streams are pure functions of seed, trial and stream", "[sim_harness]")
{
    Rng a = trial_rng(1, 5, TrialStream::channel);
    Rng b = trial_rng(1, 5, TrialStream::channel);
    CHECK(a() == b());
    CHECK(trial_rng(1, 5, TrialStream::channel)() != trial_rng(1, 5, TrialStream::noise)());
    CHECK(trial_rng(1, 5, TrialStream::channel)() != trial_rng(1, 6, TrialStream::channel)());
    CHECK(trial_rng(1, 5, TrialStream::channel)() != trial_rng(2, 5, TrialStream::channel)());
}

TEST_CASE("the ground truth of a trial is shared across the SNR axis", "[sim_harness]")
{
    const auto s = tiny_spec();
    const auto r0 = evaluate_trial(s, 0, 3);
    const auto r2 = evaluate_trial(s, 2, 3);
    // Same channel, different noise level: the zero estimator sees the same channel power.
    REQUIRE(r0.values.back().has_value());
    CHECK(*r0.values.back() == *r2.values.back());
    CHECK(r0.hash != r2.hash);
    CHECK(evaluate_trial(s, 0, 3).hash == r0.hash);
}

TEST_CASE("deterministic bound and CRB columns", "[sim_harness]")
{
    auto s = tiny_spec();
    s.estimators = {EstimatorTag::crb_omega_curve};
    s.trials = 3;
    const auto res = run_sweep(s);
    REQUIRE(res.records.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
    {
        const double s2 = std::pow(10.0, -s.axis_values[i] / 10.0);
        CHECK(res.records[i].nmse_linear == Approx(6.0 * s2 / (4.0 * 255.0)).epsilon(1e-14));
        CHECK(res.records[i].std_err < 1e-15 * res.records[i].nmse_linear);
        CHECK(res.records[i].nmse_db == Approx(10.0 * std::log10(res.records[i].nmse_linear)));
    }
}

TEST_CASE("sweep results do not depend on the worker count", "[sim_harness]")
{
    auto s = tiny_spec();
    s.trials = 12;
    s.workers = 1;
    const auto one = run_sweep(s);
    s.workers = 3;
    const auto three = run_sweep(s);
    CHECK(one.records == three.records);
    CHECK(one.draw_hashes == three.draw_hashes);
}

TEST_CASE("zero estimator averages to one", "[sim_harness]")
{
    SweepSpec s;
    s.axis_values = {0.0};
    s.base.n_rx = 8;
    s.estimators = {EstimatorTag::zero};
    s.trials = 4000;
    const auto r = run_sweep(s).records.at(0);
    CHECK(std::abs(r.nmse_linear - 1.0) < 4.0 * r.std_err);
    CHECK(r.trials_used == 4000);
    CHECK(r.failures == 0);
}

TEST_CASE("results CSV round trip and golden output", "[sim_harness]")
{
    const auto res = run_sweep(tiny_spec());
    const auto path = temp_path("tiny.csv");
    write_results(res.records, path);
    const auto back = read_results(path);
    CHECK(std::is_permutation(back.begin(), back.end(), res.records.begin(), res.records.end()));

    // Regression anchor for the whole pipeline (RNG layout, estimators, reduction).
    const std::filesystem::path golden = std::filesystem::path(PBCE_SOURCE_DIR) / "tests/data/tiny_sweep.csv";
    // PBCE_UPDATE_GOLDEN=1 rewrites the anchor after an intended change.
    if (std::getenv("PBCE_UPDATE_GOLDEN"))
        std::filesystem::copy_file(path, golden, std::filesystem::copy_options::overwrite_existing);
    CHECK(slurp(path) == slurp(golden));
    std::filesystem::remove(path);

    CHECK_THROWS_WITH(write_results(res.records, "/nonexistent-dir/x.csv"),
                      Catch::Matchers::ContainsSubstring("/nonexistent-dir/x.csv"));
    CHECK_THROWS_AS(read_results(golden.string() + ".missing"), std::runtime_error);
}

TEST_CASE("summary JSON", "[sim_harness]")
{
    std::vector<SweepRecord> recs{{SweepAxis::snr_db, 0.0, EstimatorTag::zero, 1.0, 0.0, 3, 1, std::nan("")}};
    const auto path = temp_path("summary.json");
    write_summary_json(recs, nullptr, path);
    const auto text = slurp(path);
    CHECK(text.find("\"std_err\": null") != std::string::npos);
    CHECK(text.find("\"zero\"") != std::string::npos);
    std::filesystem::remove(path);
}

TEST_CASE("analytic convergence study", "[sim_harness]")
{
    ConvergenceStudySpec c;
    const auto r = run_convergence_study(c);
    CHECK(r.analytic.slope == Approx(2.0).margin(0.05));
    CHECK(r.axis_values.empty());
}
