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

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pbce
{
    namespace
    {
        std::string fmt(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        double parse_double(const std::string &s, const std::filesystem::path &path, std::size_t line)
        {
            if (s == "nan" || s == "-nan")
                return std::nan("");
            try
            {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used == s.size())
                    return v;
            }
            catch (const std::exception &)
            {
            }
            throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
        }

        nlohmann::json number(double v)
        {
            return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
        }

        nlohmann::json slope_json(const SlopeFit &fit)
        {
            return {{"slope", number(fit.slope)},
                    {"intercept", number(fit.intercept)},
                    {"r_squared", number(fit.r_squared)},
                    {"points_used", fit.points_used},
                    {"warnings", fit.warnings}};
        }
    }

    void write_results(std::vector<SweepRecord> records, const std::filesystem::path &path)
    {
        std::stable_sort(records.begin(), records.end(), [](const SweepRecord &a, const SweepRecord &b)
                         {
                             if (a.axis_value != b.axis_value)
                                 return a.axis_value < b.axis_value;
                             return to_string(a.estimator) < to_string(b.estimator);
                         });

        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("cannot open '" + path.string() + "' for writing");
        out << results_csv_header << '\n';
        for (const auto &r : records)
            out << to_string(r.axis) << ',' << fmt(r.axis_value) << ',' << to_string(r.estimator) << ','
                << fmt(r.nmse_linear) << ',' << fmt(r.nmse_db) << ',' << r.trials_used << ',' << r.failures << ','
                << fmt(r.std_err) << '\n';
        out.flush();
        if (!out)
            throw std::runtime_error("write to '" + path.string() + "' failed");
    }

    std::vector<SweepRecord> read_results(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open '" + path.string() + "' for reading");
        std::string line;
        if (!std::getline(in, line) || line != results_csv_header)
            throw std::runtime_error(path.string() + ": missing or unexpected CSV header");

        std::vector<SweepRecord> records;
        std::size_t line_no = 1;
        while (std::getline(in, line))
        {
            ++line_no;
            if (line.empty())
                continue;
            std::vector<std::string> fields;
            std::stringstream ss(line);
            std::string f;
            while (std::getline(ss, f, ','))
                fields.push_back(f);
            if (fields.size() != 8)
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 8 fields");
            SweepRecord r;
            r.axis = parse_axis(fields[0]);
            r.axis_value = parse_double(fields[1], path, line_no);
            r.estimator = parse_estimator(fields[2]);
            r.nmse_linear = parse_double(fields[3], path, line_no);
            r.nmse_db = parse_double(fields[4], path, line_no);
            r.trials_used = static_cast<std::size_t>(std::stoull(fields[5]));
            r.failures = static_cast<std::size_t>(std::stoull(fields[6]));
            r.std_err = parse_double(fields[7], path, line_no);
            records.push_back(r);
        }
        return records;
    }

    void write_summary_json(const std::vector<SweepRecord> &records, const ConvergenceReport *report,
                            const std::filesystem::path &path)
    {
        nlohmann::json doc;
        auto &rows = doc["records"] = nlohmann::json::array();
        for (const auto &r : records)
            rows.push_back({{"axis", to_string(r.axis)},
                            {"axis_value", r.axis_value},
                            {"estimator", to_string(r.estimator)},
                            {"nmse_linear", number(r.nmse_linear)},
                            {"nmse_db", number(r.nmse_db)},
                            {"trials_used", r.trials_used},
                            {"failures", r.failures},
                            {"std_err", number(r.std_err)}});
        if (report)
        {
            auto &c = doc["convergence"];
            c["analytic_gap_slope"] = slope_json(report->analytic);
            c["axis_values"] = report->axis_values;
            c["pbce_nmse"] = report->pbce_nmse;
            nlohmann::json g1 = nlohmann::json::array(), g2 = nlohmann::json::array();
            for (double v : report->gap_to_cme)
                g1.push_back(number(v));
            for (double v : report->gap_to_pbce)
                g2.push_back(number(v));
            c["gap_to_cme"] = g1;
            c["gap_to_pbce"] = g2;
            if (report->empirical_gap_slope_cme)
                c["empirical_gap_slope_cme"] = slope_json(*report->empirical_gap_slope_cme);
            if (report->empirical_gap_slope_pbce)
                c["empirical_gap_slope_pbce"] = slope_json(*report->empirical_gap_slope_pbce);
            c["pbce_strictly_decreasing"] = report->pbce_strictly_decreasing;
            c["gap_to_cme_decreasing"] = report->gap_to_cme_decreasing;
        }
        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("cannot open '" + path.string() + "' for writing");
        out << doc.dump(2) << '\n';
        if (!out)
            throw std::runtime_error("write to '" + path.string() + "' failed");
    }
}
