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

#include "pbce/cli.hpp"
#include "pbce/config.hpp"
#include "pbce/validation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <ostream>

namespace pbce
{
    namespace
    {
        std::string fmt(double v, const char *spec = "%.6g")
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, spec, v);
            return buf;
        }

        std::optional<std::size_t> workers_from_env()
        {
            const char *env = std::getenv("PBCE_WORKERS");
            if (!env || !*env)
                return std::nullopt;
            char *end = nullptr;
            const long long v = std::strtoll(env, &end, 10);
            if (*end != '\0' || v < 1)
                throw ConfigError("PBCE_WORKERS='" + std::string(env) + "' is not a positive integer");
            return static_cast<std::size_t>(v);
        }

        struct SweepFlags
        {
            std::string config;
            std::optional<std::string> output;
            std::optional<std::size_t> trials;
            std::optional<std::uint64_t> seed;
            std::optional<std::size_t> workers;
            std::optional<std::string> axis;
            std::optional<std::string> values;
            std::optional<std::string> estimators;
            std::optional<std::string> summary_json;
        };

        int cmd_sweep(const SweepFlags &flags, std::ostream &out, std::ostream &err)
        {
            RunConfig cfg;
            try
            {
                cfg = load_config(flags.config);
                if (const auto env = workers_from_env())
                    cfg.sweep.workers = *env;
                if (flags.workers)
                    cfg.sweep.workers = *flags.workers;
                if (flags.trials)
                    cfg.sweep.trials = *flags.trials;
                if (flags.seed)
                    cfg.sweep.base.seed = *flags.seed;
                if (flags.output)
                    cfg.output_path = *flags.output;
                if (flags.summary_json)
                    cfg.summary_json = std::filesystem::path(*flags.summary_json);
                if (flags.axis)
                    cfg.sweep.axis = parse_axis(*flags.axis);
                if (flags.values)
                    cfg.sweep.axis_values = parse_value_list(*flags.values);
                if (flags.estimators)
                {
                    cfg.sweep.estimators.clear();
                    for (const auto &tag : split_list(*flags.estimators))
                        cfg.sweep.estimators.push_back(parse_estimator(tag));
                }
                cfg.validate();
            }
            catch (const ConfigError &e)
            {
                err << "config error: " << e.what() << '\n';
                return exit_config_error;
            }
            catch (const std::invalid_argument &e)
            {
                err << "config error: " << e.what() << '\n';
                return exit_config_error;
            }

            try
            {
                out << "sweep over " << to_string(cfg.sweep.axis) << ": " << cfg.sweep.axis_values.size()
                    << " points x " << cfg.sweep.trials << " trials, workers=" << cfg.sweep.workers << '\n';
                const auto result = run_sweep(cfg.sweep);
                std::size_t per_point = cfg.sweep.estimators.size();
                for (std::size_t i = 0; i < result.records.size(); i += per_point)
                {
                    const auto &first = result.records[i];
                    out << to_string(first.axis) << '=' << fmt(first.axis_value) << ':';
                    for (std::size_t e = i; e < i + per_point; ++e)
                    {
                        const auto &r = result.records[e];
                        out << "  " << to_string(r.estimator) << ' ' << fmt(r.nmse_db, "%.2f") << " dB";
                        if (r.failures > 0)
                            out << " (" << r.failures << " failed)";
                    }
                    out << '\n';
                }
                write_results(result.records, cfg.output_path);
                out << "wrote " << result.records.size() << " records to " << cfg.output_path.string() << '\n';

                if (cfg.summary_json)
                {
                    std::optional<ConvergenceReport> report;
                    if (cfg.convergence)
                    {
                        ConvergenceStudySpec study;
                        study.n_rx = cfg.sweep.base.n_rx;
                        study.coherence_len = cfg.sweep.base.coherence_len;
                        study.rhos = std::vector<double>(static_cast<std::size_t>(cfg.sweep.base.num_paths),
                                                         static_cast<double>(cfg.sweep.base.n_rx) /
                                                             static_cast<double>(cfg.sweep.base.num_paths));
                        study.cbar = cfg.sweep.cbar;
                        study.monte_carlo = result.records;
                        report = run_convergence_study(study);
                    }
                    write_summary_json(result.records, report ? &*report : nullptr, *cfg.summary_json);
                    out << "wrote summary to " << cfg.summary_json->string() << '\n';
                }
            }
            catch (const std::exception &e)
            {
                err << "runtime error: " << e.what() << '\n';
                return exit_runtime_error;
            }
            return exit_ok;
        }

        struct BoundsFlags
        {
            long long n_rx = 64;
            long long t = 1;
            double snr_db = 30.0;
            long long paths = 1;
            std::optional<std::string> rhos;
            std::optional<double> eps;
            bool slope = false;
            std::string grid = "1e-1,1e-2,1e-3,1e-4";
        };

        int cmd_bounds(const BoundsFlags &flags, std::ostream &out, std::ostream &err)
        {
            BoundInputs in;
            std::vector<double> grid;
            try
            {
                if (flags.n_rx < 2)
                    throw ConfigError("--n-rx must be at least 2 (the CRB needs N^2 - 1 > 0)");
                if (flags.t < 1)
                    throw ConfigError("--t must be at least 1");
                if (flags.paths < 1)
                    throw ConfigError("--paths must be at least 1");
                std::vector<double> rhos;
                if (flags.rhos)
                {
                    for (const auto &item : split_list(*flags.rhos))
                        rhos.push_back(parse_value_list(item).at(0));
                    if (static_cast<long long>(rhos.size()) != flags.paths)
                        throw ConfigError("--rhos must list one value per path");
                    for (double r : rhos)
                        if (!(r > 0.0))
                            throw ConfigError("--rhos values must be positive");
                }
                else
                    rhos.assign(static_cast<std::size_t>(flags.paths),
                                static_cast<double>(flags.n_rx) / static_cast<double>(flags.paths));
                if (flags.eps && !(*flags.eps > -1.0))
                    throw ConfigError("--eps must exceed -1");
                grid = parse_value_list(flags.grid);
                in = make_bound_inputs(flags.n_rx, flags.t, db_to_noise_var(flags.snr_db), rhos);
            }
            catch (const std::exception &e)
            {
                err << "config error: " << e.what() << '\n';
                return exit_config_error;
            }

            try
            {
                const double n = static_cast<double>(in.n_rx);
                const double cme = cme_asymptotic_mse(in);
                const double pbce = pbce_asymptotic_mse(in);
                out << "quantity,value\n";
                out << "noise_var," << fmt(in.noise_var) << '\n';
                out << "crb_omega," << fmt(in.crb) << '\n';
                out << "cme_ab," << fmt(cme) << '\n';
                out << "pbce_ab," << fmt(pbce) << '\n';
                out << "cme_ab_nmse_db," << fmt(10.0 * std::log10(cme / n), "%.4f") << '\n';
                out << "pbce_ab_nmse_db," << fmt(10.0 * std::log10(pbce / n), "%.4f") << '\n';
                out << "gap," << fmt(cme - pbce) << '\n';
                out << "gap_closed_form," << fmt(bound_gap_closed_form(in)) << '\n';
                if (flags.eps)
                {
                    const auto m = mismatch_gap(in, *flags.eps);
                    out << "mismatch_gap," << fmt(m.exact) << '\n';
                    out << "mismatch_leading_term," << fmt(m.leading_term) << '\n';
                }
                if (flags.slope)
                {
                    const auto at = [&](double s2)
                    { return make_bound_inputs(in.n_rx, in.coherence_len, s2, in.rhos); };
                    const auto fit = convergence_slope([&](double s2) { return cme_asymptotic_mse(at(s2)); },
                                                       [&](double s2) { return pbce_asymptotic_mse(at(s2)); }, grid);
                    out << "gap_slope," << fmt(fit.slope) << '\n';
                    out << "gap_slope_r_squared," << fmt(fit.r_squared) << '\n';
                    for (const auto &w : fit.warnings)
                        err << "warning: " << w << '\n';
                    if (flags.eps)
                    {
                        const double eps = *flags.eps;
                        const auto mfit = convergence_slope(
                            [&](double s2) { return pbce_asymptotic_mse(at(s2), (1.0 + eps) * s2); },
                            [&](double s2) { return pbce_asymptotic_mse(at(s2)); }, grid);
                        out << "mismatch_slope," << fmt(mfit.slope) << '\n';
                    }
                }
            }
            catch (const std::invalid_argument &e)
            {
                err << "config error: " << e.what() << '\n';
                return exit_config_error;
            }
            catch (const std::exception &e)
            {
                err << "runtime error: " << e.what() << '\n';
                return exit_runtime_error;
            }
            return exit_ok;
        }

        int cmd_validate(const std::optional<std::string> &perturb, bool json, std::ostream &out, std::ostream &err)
        {
            std::vector<CheckResult> results;
            try
            {
                results = run_validation(perturb);
            }
            catch (const std::invalid_argument &e)
            {
                err << "config error: " << e.what() << '\n';
                return exit_config_error;
            }

            bool all = true;
            for (const auto &r : results)
                all = all && r.passed;

            if (json)
            {
                nlohmann::json doc;
                doc["passed"] = all;
                doc["perturbed"] = perturb ? nlohmann::json(*perturb) : nlohmann::json(nullptr);
                for (const auto &r : results)
                    doc["checks"].push_back({{"name", r.name},
                                             {"passed", r.passed},
                                             {"value", r.value},
                                             {"tolerance", r.tolerance},
                                             {"detail", r.detail}});
                out << doc.dump(2) << '\n';
            }
            else
            {
                for (const auto &r : results)
                    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
                out << (all ? "all checks passed" : "validation FAILED") << '\n';
            }
            return all ? exit_ok : exit_validation_failure;
        }
    }

    int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"pbce_lab: parametric Bayesian channel estimation experiments"};
        app.require_subcommand(1);

        SweepFlags sweep;
        auto *s = app.add_subcommand("sweep", "Monte-Carlo NMSE sweep driven by a config file");
        s->add_option("--config", sweep.config, "INI config file")->required();
        s->add_option("--output", sweep.output, "CSV output path (overrides [output] path)");
        s->add_option("--trials", sweep.trials, "Monte-Carlo trials per point")->check(CLI::PositiveNumber);
        s->add_option("--seed", sweep.seed, "Base seed");
        s->add_option("--workers", sweep.workers, "Worker threads (overrides PBCE_WORKERS)")->check(CLI::PositiveNumber);
        s->add_option("--axis", sweep.axis, "snr_db, coherence_len or n_rx");
        s->add_option("--values", sweep.values, "Axis values, comma list or start:step:stop");
        s->add_option("--estimators", sweep.estimators, "Comma separated estimator tags");
        s->add_option("--summary-json", sweep.summary_json, "Also write a JSON summary");

        BoundsFlags bounds;
        auto *b = app.add_subcommand("bounds", "Closed-form bounds for one scenario");
        b->add_option("--n-rx", bounds.n_rx, "Receive antennas");
        b->add_option("--t", bounds.t, "Coherence length");
        b->add_option("--snr-db", bounds.snr_db, "SNR in dB (noise variance 10^(-SNR/10))");
        b->add_option("--paths", bounds.paths, "Number of paths");
        b->add_option("--rhos", bounds.rhos, "Comma separated gain variances (default N/L each)");
        b->add_option("--eps", bounds.eps, "Noise-variance mismatch (believed = (1 + eps) s2)");
        b->add_flag("--slope", bounds.slope, "Fit the log-log slope of the bound gap over --grid");
        b->add_option("--grid", bounds.grid, "Noise variances for --slope");

        std::optional<std::string> perturb;
        bool json = false;
        auto *v = app.add_subcommand("validate", "Run the fast oracle suite");
        v->add_option("--perturb", perturb, "Corrupt the named check (negative control)");
        v->add_flag("--json", json, "Machine-readable report");

        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::ParseError &e)
        {
            const int code = app.exit(e, out, err);
            return code == 0 ? exit_ok : exit_config_error;
        }

        if (s->parsed())
            return cmd_sweep(sweep, out, err);
        if (b->parsed())
            return cmd_bounds(bounds, out, err);
        return cmd_validate(perturb, json, out, err);
    }
}
