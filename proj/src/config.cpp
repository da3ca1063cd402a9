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

#include "pbce/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace pbce
{
    namespace pt = boost::property_tree;

    namespace
    {
        const std::map<std::string, std::set<std::string>> &allowed_keys()
        {
            static const std::map<std::string, std::set<std::string>> keys{
                {"scenario", {"n_rx", "num_paths", "coherence_len", "snr_db", "noise_var", "seed"}},
                {"prior", {"weights", "means_deg", "stds_deg", "gain_law", "min_separation_beamwidths"}},
                {"sweep",
                 {"axis", "values", "estimators", "trials", "perfect_gains", "mismatch_eps", "cbar", "sampled_cme_mode",
                  "sampled_cme_samples", "bartlett_grid", "forward_backward"}},
                {"output", {"path", "workers", "summary_json", "convergence"}},
            };
            return keys;
        }

        std::string trim(std::string_view s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string_view::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r\n");
            return std::string(s.substr(b, e - b + 1));
        }

        double to_double(const std::string &s, const std::string &what)
        {
            try
            {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used == s.size() && std::isfinite(v))
                    return v;
            }
            catch (const std::exception &)
            {
            }
            throw ConfigError(what + ": '" + s + "' is not a finite number");
        }

        long long to_integer(const std::string &s, const std::string &what)
        {
            try
            {
                std::size_t used = 0;
                const long long v = std::stoll(s, &used);
                if (used == s.size())
                    return v;
            }
            catch (const std::exception &)
            {
            }
            throw ConfigError(what + ": '" + s + "' is not an integer");
        }

        bool to_bool(const std::string &s, const std::string &what)
        {
            if (s == "true" || s == "1" || s == "yes" || s == "on")
                return true;
            if (s == "false" || s == "0" || s == "no" || s == "off")
                return false;
            throw ConfigError(what + ": '" + s + "' is not a boolean");
        }

        std::vector<double> to_doubles(const std::string &s, const std::string &what)
        {
            std::vector<double> out;
            for (const auto &item : split_list(s))
                out.push_back(to_double(item, what));
            return out;
        }

        // Looks up section.key and hands the trimmed value to `apply`.
        template <typename F>
        void with(const pt::ptree &tree, const std::string &section, const std::string &key, F &&apply)
        {
            const auto sec = tree.get_child_optional(section);
            if (!sec)
                return;
            const auto value = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
            if (value)
                apply(trim(*value), "[" + section + "] " + key);
        }
    }

    std::vector<std::string> split_list(std::string_view text)
    {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (start <= text.size())
        {
            const auto comma = text.find(',', start);
            const auto end = comma == std::string_view::npos ? text.size() : comma;
            const auto item = trim(text.substr(start, end - start));
            if (item.empty())
                throw ConfigError("empty item in list '" + std::string(text) + "'");
            out.push_back(item);
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        return out;
    }

    std::vector<double> parse_value_list(std::string_view text)
    {
        const std::string s = trim(text);
        if (s.empty())
            throw ConfigError("empty value list");
        if (s.find(':') == std::string::npos)
            return to_doubles(s, "value list");

        const auto c1 = s.find(':');
        const auto c2 = s.find(':', c1 + 1);
        if (c2 == std::string::npos || s.find(':', c2 + 1) != std::string::npos)
            throw ConfigError("range '" + s + "' must have the form start:step:stop");
        const double a = to_double(trim(s.substr(0, c1)), "range start");
        const double step = to_double(trim(s.substr(c1 + 1, c2 - c1 - 1)), "range step");
        const double b = to_double(trim(s.substr(c2 + 1)), "range stop");
        if (step == 0.0 || (b - a) * step < 0.0)
            throw ConfigError("range '" + s + "': step does not lead from start to stop");
        const double span = (b - a) / step;
        if (span > 1e6)
            throw ConfigError("range '" + s + "' expands to too many values");
        const auto count = static_cast<long long>(std::floor(span + 1e-9)) + 1;
        std::vector<double> out;
        for (long long i = 0; i < count; ++i)
            out.push_back(a + static_cast<double>(i) * step);
        return out;
    }

    void RunConfig::validate() const
    {
        try
        {
            sweep.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(e.what());
        }
        if (output_path.empty())
            throw ConfigError("[output] path must not be empty");
    }

    RunConfig parse_config(std::istream &in, const std::string &source_name)
    {
        pt::ptree tree;
        try
        {
            pt::read_ini(in, tree);
        }
        catch (const pt::ini_parser_error &e)
        {
            throw ConfigError(source_name + ":" + std::to_string(e.line()) + ": " + e.message());
        }

        for (const auto &[section, body] : tree)
        {
            const auto it = allowed_keys().find(section);
            if (it == allowed_keys().end())
                throw ConfigError(source_name + ": unknown section [" + section + "]");
            if (!body.data().empty())
                throw ConfigError(source_name + ": key '" + section + "' must live inside a section");
            for (const auto &[key, value] : body)
                if (!it->second.count(key))
                    throw ConfigError(source_name + ": unknown key '" + key + "' in section [" + section + "]");
        }

        RunConfig cfg;
        SweepSpec &sw = cfg.sweep;
        Scenario &sc = sw.base;
        try
        {
            with(tree, "scenario", "n_rx", [&](const std::string &v, const std::string &w) { sc.n_rx = to_integer(v, w); });
            with(tree, "scenario", "num_paths",
                 [&](const std::string &v, const std::string &w) { sc.num_paths = to_integer(v, w); });
            with(tree, "scenario", "coherence_len",
                 [&](const std::string &v, const std::string &w) { sc.coherence_len = to_integer(v, w); });
            bool have_snr = false;
            with(tree, "scenario", "snr_db",
                 [&](const std::string &v, const std::string &w)
                 {
                     sc.noise_var = db_to_noise_var(to_double(v, w));
                     have_snr = true;
                 });
            with(tree, "scenario", "noise_var",
                 [&](const std::string &v, const std::string &w)
                 {
                     if (have_snr)
                         throw ConfigError("[scenario] give either snr_db or noise_var, not both");
                     sc.noise_var = to_double(v, w);
                 });
            with(tree, "scenario", "seed",
                 [&](const std::string &v, const std::string &w)
                 {
                     const auto seed = to_integer(v, w);
                     if (seed < 0)
                         throw ConfigError(w + ": seed must be non-negative");
                     sc.seed = static_cast<std::uint64_t>(seed);
                 });

            std::vector<double> weights, means, stds;
            with(tree, "prior", "weights", [&](const std::string &v, const std::string &w) { weights = to_doubles(v, w); });
            with(tree, "prior", "means_deg", [&](const std::string &v, const std::string &w) { means = to_doubles(v, w); });
            with(tree, "prior", "stds_deg", [&](const std::string &v, const std::string &w) { stds = to_doubles(v, w); });
            if (!weights.empty() || !means.empty() || !stds.empty())
            {
                if (weights.size() != means.size() || weights.size() != stds.size())
                    throw ConfigError("[prior] weights, means_deg and stds_deg must have equal length");
                sc.prior.angle_mixture.clear();
                for (std::size_t i = 0; i < weights.size(); ++i)
                    sc.prior.angle_mixture.push_back({weights[i], means[i], stds[i]});
            }
            with(tree, "prior", "gain_law",
                 [&](const std::string &v, const std::string &w)
                 {
                     if (v == "uniform_normalized")
                         sc.prior.gain_law = GainLaw::uniform_normalized;
                     else if (v == "fixed")
                         sc.prior.gain_law = GainLaw::fixed;
                     else
                         throw ConfigError(w + ": '" + v + "' is not one of uniform_normalized, fixed");
                 });
            with(tree, "prior", "min_separation_beamwidths",
                 [&](const std::string &v, const std::string &w)
                 { sc.prior.min_separation_beamwidths = to_double(v, w); });

            with(tree, "sweep", "axis",
                 [&](const std::string &v, const std::string &) { sw.axis = parse_axis(v); });
            with(tree, "sweep", "values",
                 [&](const std::string &v, const std::string &) { sw.axis_values = parse_value_list(v); });
            with(tree, "sweep", "estimators",
                 [&](const std::string &v, const std::string &)
                 {
                     sw.estimators.clear();
                     for (const auto &tag : split_list(v))
                         sw.estimators.push_back(parse_estimator(tag));
                 });
            with(tree, "sweep", "trials",
                 [&](const std::string &v, const std::string &w)
                 {
                     const auto n = to_integer(v, w);
                     if (n < 1)
                         throw ConfigError(w + ": must be at least 1");
                     sw.trials = static_cast<std::size_t>(n);
                 });
            with(tree, "sweep", "perfect_gains",
                 [&](const std::string &v, const std::string &w) { sw.perfect_gains = to_bool(v, w); });
            with(tree, "sweep", "mismatch_eps",
                 [&](const std::string &v, const std::string &w) { sw.mismatch_eps = to_double(v, w); });
            with(tree, "sweep", "cbar",
                 [&](const std::string &v, const std::string &w)
                 {
                     if (v == "plug_in")
                         sw.cbar = CbarConvention::plug_in;
                     else if (v == "inverse_mean")
                         sw.cbar = CbarConvention::inverse_mean;
                     else if (v == "realized")
                         sw.cbar = CbarConvention::realized;
                     else
                         throw ConfigError(w + ": '" + v + "' is not one of plug_in, inverse_mean, realized");
                 });
            with(tree, "sweep", "sampled_cme_mode",
                 [&](const std::string &v, const std::string &w)
                 {
                     if (v == "grid")
                         sw.sampled_cme.mode = SampledCmeOptions::Mode::grid;
                     else if (v == "prior")
                         sw.sampled_cme.mode = SampledCmeOptions::Mode::prior;
                     else
                         throw ConfigError(w + ": '" + v + "' is not one of grid, prior");
                 });
            with(tree, "sweep", "sampled_cme_samples",
                 [&](const std::string &v, const std::string &w)
                 {
                     const auto n = to_integer(v, w);
                     if (n < 1)
                         throw ConfigError(w + ": must be at least 1");
                     sw.sampled_cme.samples = static_cast<std::size_t>(n);
                 });
            with(tree, "sweep", "bartlett_grid",
                 [&](const std::string &v, const std::string &w) { sw.bartlett_grid = to_integer(v, w); });
            with(tree, "sweep", "forward_backward",
                 [&](const std::string &v, const std::string &w) { sw.forward_backward = to_bool(v, w); });

            with(tree, "output", "path", [&](const std::string &v, const std::string &) { cfg.output_path = v; });
            with(tree, "output", "workers",
                 [&](const std::string &v, const std::string &w)
                 {
                     const auto n = to_integer(v, w);
                     if (n < 1)
                         throw ConfigError(w + ": must be at least 1");
                     sw.workers = static_cast<std::size_t>(n);
                 });
            with(tree, "output", "summary_json",
                 [&](const std::string &v, const std::string &) { cfg.summary_json = std::filesystem::path(v); });
            with(tree, "output", "convergence",
                 [&](const std::string &v, const std::string &w) { cfg.convergence = to_bool(v, w); });
        }
        catch (const ConfigError &e)
        {
            throw ConfigError(source_name + ": " + e.what());
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(source_name + ": " + e.what());
        }
        return cfg;
    }

    RunConfig load_config(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file '" + path.string() + "'");
        return parse_config(in, path.string());
    }
}
