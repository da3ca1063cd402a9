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
#include "pbce/cme.hpp"
#include "pbce/estimators.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace pbce
{
    namespace
    {
        constexpr std::array<std::pair<SweepAxis, std::string_view>, 3> axis_names{{
            {SweepAxis::snr_db, "snr_db"},
            {SweepAxis::coherence_len, "coherence_len"},
            {SweepAxis::n_rx, "n_rx"},
        }};

        constexpr std::array<std::pair<EstimatorTag, std::string_view>, 9> estimator_names{{
            {EstimatorTag::pbce_rmusic, "pbce_rmusic"},
            {EstimatorTag::pbce_bartlett, "pbce_bartlett"},
            {EstimatorTag::genie_lmmse, "genie_lmmse"},
            {EstimatorTag::sampled_cme, "sampled_cme"},
            {EstimatorTag::asymptotic_cme, "asymptotic_cme"},
            {EstimatorTag::bound_cme_ab, "bound_cme_ab"},
            {EstimatorTag::bound_pbce_ab, "bound_pbce_ab"},
            {EstimatorTag::crb_omega_curve, "crb_omega_curve"},
            {EstimatorTag::zero, "zero"},
        }};

        template <typename Table>
        std::string valid_names(const Table &table)
        {
            std::string out;
            for (const auto &[value, name] : table)
            {
                if (!out.empty())
                    out += ", ";
                out += name;
            }
            return out;
        }

        // Stream domains keep the sampled-CME prior draws apart from the trial draws.
        constexpr std::uint32_t trial_domain = 0x7472u;
        constexpr std::uint32_t prior_sample_domain = 0x7073u;

        Rng make_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint32_t domain)
        {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                              static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32), domain};
            return Rng(seq);
        }

        double squared_error(const cvec &h, const cvec &h_hat)
        {
            return (h - h_hat).squaredNorm() / static_cast<double>(h.size());
        }

        std::vector<ParameterSample> sampled_cme_set(const SweepSpec &spec, const Scenario &scenario,
                                                     std::size_t sweep_index)
        {
            const double rho = static_cast<double>(scenario.n_rx);
            std::vector<ParameterSample> samples;
            samples.reserve(spec.sampled_cme.samples);
            if (spec.sampled_cme.mode == SampledCmeOptions::Mode::grid)
            {
                const AngleMixtureDensity density(scenario.prior);
                const double step = 2.0 * pi / static_cast<double>(spec.sampled_cme.samples);
                for (std::size_t i = 0; i < spec.sampled_cme.samples; ++i)
                {
                    const double omega = -pi + static_cast<double>(i + 1) * step;
                    const double p = density.pdf(omega);
                    if (p > 0.0)
                        samples.push_back({{omega}, {rho}, std::log(p)});
                }
            }
            else
            {
                Rng rng = make_rng(scenario.seed, sweep_index, 0, prior_sample_domain);
                Scenario one_path = scenario;
                one_path.num_paths = 1;
                one_path.coherence_len = 1;
                for (std::size_t i = 0; i < spec.sampled_cme.samples; ++i)
                {
                    const auto draw = sample_prior(scenario.prior, one_path, rng);
                    samples.push_back({draw.omegas, {rho}, 0.0});
                }
            }
            if (samples.empty())
                throw std::runtime_error("sampled_cme: the prior assigns no mass to the sample grid");
            return samples;
        }

        // Ground truth reordered to follow the estimated directions.
        struct MatchedTruth
        {
            std::vector<double> rhos;
            std::vector<double> alpha_bars;
        };

        MatchedTruth match_truth(const std::vector<double> &anchors, const ChannelRealization &real,
                                 const ObservationBlock &obs)
        {
            const auto perm = match_paths(anchors, real.omegas);
            MatchedTruth m;
            for (const auto p : perm)
            {
                m.rhos.push_back(real.rhos[p]);
                m.alpha_bars.push_back(obs.emp_gain_power[static_cast<Eigen::Index>(p)]);
            }
            return m;
        }
    }

    std::string_view to_string(SweepAxis axis)
    {
        for (const auto &[value, name] : axis_names)
            if (value == axis)
                return name;
        return "unknown";
    }

    std::string_view to_string(EstimatorTag tag)
    {
        for (const auto &[value, name] : estimator_names)
            if (value == tag)
                return name;
        return "unknown";
    }

    SweepAxis parse_axis(std::string_view text)
    {
        for (const auto &[value, name] : axis_names)
            if (name == text)
                return value;
        throw std::invalid_argument("unknown sweep axis '" + std::string(text) + "'; valid axes: " +
                                    valid_names(axis_names));
    }

    EstimatorTag parse_estimator(std::string_view text)
    {
        for (const auto &[value, name] : estimator_names)
            if (name == text)
                return value;
        throw std::invalid_argument("unknown estimator tag '" + std::string(text) + "'; valid tags: " +
                                    valid_names(estimator_names));
    }

    std::vector<EstimatorTag> all_estimator_tags()
    {
        std::vector<EstimatorTag> tags;
        for (const auto &[value, name] : estimator_names)
            tags.push_back(value);
        return tags;
    }

    void SweepSpec::validate() const
    {
        if (axis_values.empty())
            throw std::invalid_argument("sweep: axis_values must not be empty");
        const bool increasing = std::adjacent_find(axis_values.begin(), axis_values.end(),
                                                   [](double a, double b) { return !(a < b); }) == axis_values.end();
        const bool decreasing = std::adjacent_find(axis_values.begin(), axis_values.end(),
                                                   [](double a, double b) { return !(a > b); }) == axis_values.end();
        if (!increasing && !decreasing)
            throw std::invalid_argument("sweep: axis_values must be strictly monotone");
        if (trials < 1)
            throw std::invalid_argument("sweep: trials must be at least 1");
        if (workers < 1)
            throw std::invalid_argument("sweep: workers must be at least 1");
        if (estimators.empty())
            throw std::invalid_argument("sweep: no estimators requested");
        if (mismatch_eps && !(*mismatch_eps > -1.0))
            throw std::invalid_argument("sweep: mismatch_eps must exceed -1");
        if (sampled_cme.samples < 1)
            throw std::invalid_argument("sweep: sampled_cme samples must be at least 1");
        if (axis != SweepAxis::snr_db)
            for (double v : axis_values)
                if (v != std::floor(v))
                    throw std::invalid_argument("sweep: integer axis '" + std::string(to_string(axis)) +
                                                "' received a fractional value");

        for (std::size_t i = 0; i < axis_values.size(); ++i)
        {
            const Scenario s = scenario_at(*this, i);
            s.validate();
            for (const auto tag : estimators)
            {
                const bool single_path_only = tag == EstimatorTag::pbce_bartlett || tag == EstimatorTag::sampled_cme;
                if (single_path_only && s.num_paths != 1)
                    throw std::invalid_argument("sweep: estimator '" + std::string(to_string(tag)) +
                                                "' supports a single path only");
                if ((tag == EstimatorTag::pbce_rmusic || tag == EstimatorTag::asymptotic_cme) &&
                    s.num_paths >= s.n_rx)
                    throw std::invalid_argument("sweep: root-MUSIC needs num_paths < n_rx");
            }
            if (cbar == CbarConvention::inverse_mean && s.coherence_len < 2)
                throw std::invalid_argument("sweep: the inverse_mean C_bar convention needs T >= 2");
        }
    }

    Scenario scenario_at(const SweepSpec &spec, std::size_t sweep_index)
    {
        Scenario s = spec.base;
        const double v = spec.axis_values.at(sweep_index);
        switch (spec.axis)
        {
        case SweepAxis::snr_db:
            s.noise_var = db_to_noise_var(v);
            break;
        case SweepAxis::coherence_len:
            s.coherence_len = static_cast<Eigen::Index>(std::llround(v));
            break;
        case SweepAxis::n_rx:
            s.n_rx = static_cast<Eigen::Index>(std::llround(v));
            break;
        }
        return s;
    }

    Rng trial_rng(std::uint64_t seed, std::uint64_t trial_index, TrialStream stream)
    {
        return make_rng(seed, trial_index, static_cast<std::uint64_t>(stream), trial_domain);
    }

    std::uint64_t draw_hash(const ChannelRealization &realization, const ObservationBlock &observation)
    {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](const void *data, std::size_t bytes)
        {
            const auto *p = static_cast<const unsigned char *>(data);
            for (std::size_t i = 0; i < bytes; ++i)
            {
                h ^= p[i];
                h *= 1099511628211ull;
            }
        };
        mix(realization.omegas.data(), realization.omegas.size() * sizeof(double));
        mix(realization.rhos.data(), realization.rhos.size() * sizeof(double));
        mix(realization.channels.data(), static_cast<std::size_t>(realization.channels.size()) * sizeof(cplx));
        mix(observation.snapshots.data(), static_cast<std::size_t>(observation.snapshots.size()) * sizeof(cplx));
        return h;
    }

    TrialOutcome evaluate_trial(const SweepSpec &spec, std::size_t sweep_index, std::size_t trial_index)
    {
        const Scenario scenario = scenario_at(spec, sweep_index);
        Rng channel_rng = trial_rng(scenario.seed, trial_index, TrialStream::channel);
        Rng noise_rng = trial_rng(scenario.seed, trial_index, TrialStream::noise);
        const ChannelRealization real = sample_prior(scenario.prior, scenario, channel_rng);
        const ObservationBlock obs = observe(real, scenario, noise_rng);
        const cvec h = real.last_channel();
        const cvec y = obs.last_snapshot();
        const Eigen::Index n = scenario.n_rx;
        const double factor = spec.mismatch_eps ? 1.0 + *spec.mismatch_eps : 1.0;

        TrialOutcome out;
        out.hash = draw_hash(real, obs);

        ParamEstimationOptions opts;
        opts.perfect_gains = spec.perfect_gains;
        opts.noise_var_factor = factor;
        opts.bartlett_grid = spec.bartlett_grid;
        opts.music.forward_backward = spec.forward_backward;

        std::optional<BoundInputs> bound_inputs;
        auto bounds = [&]() -> const BoundInputs &
        {
            if (!bound_inputs)
                bound_inputs = make_bound_inputs(n, scenario.coherence_len, scenario.noise_var, real.rhos, spec.cbar,
                                                 std::vector<double>(obs.emp_gain_power.data(),
                                                                     obs.emp_gain_power.data() + obs.emp_gain_power.size()));
            return *bound_inputs;
        };

        for (const auto tag : spec.estimators)
        {
            try
            {
                switch (tag)
                {
                case EstimatorTag::pbce_rmusic:
                case EstimatorTag::pbce_bartlett:
                {
                    opts.direction = tag == EstimatorTag::pbce_rmusic ? DirectionEstimator::root_music
                                                                      : DirectionEstimator::bartlett;
                    const auto est = estimate_parameters(obs, scenario.num_paths, opts, &real);
                    out.values.emplace_back(squared_error(h, pbce_estimate(obs, est)));
                    break;
                }
                case EstimatorTag::genie_lmmse:
                    out.values.emplace_back(squared_error(h, genie_lmmse(obs, real)));
                    break;
                case EstimatorTag::sampled_cme:
                {
                    const auto samples = sampled_cme_set(spec, scenario, sweep_index);
                    const auto res = sampled_cme_filter(obs.sample_cov, scenario.coherence_len, scenario.noise_var,
                                                        samples);
                    out.values.emplace_back(squared_error(h, res.filter.apply(y)));
                    break;
                }
                case EstimatorTag::asymptotic_cme:
                {
                    std::vector<double> anchors;
                    if (scenario.num_paths == 1)
                    {
                        const auto b = bartlett_estimate(obs.sample_cov, spec.bartlett_grid, true);
                        if (b.degenerate)
                            throw EstimatorFailure("bartlett_estimate: degenerate spectrum");
                        anchors = {b.omega};
                    }
                    else
                    {
                        anchors = root_music(obs.sample_cov, scenario.num_paths, opts.music);
                    }
                    const auto truth = match_truth(anchors, real, obs);
                    const auto cme = make_asymptotic_cme_spec(anchors, truth.rhos, truth.alpha_bars,
                                                              scenario.noise_var, scenario.coherence_len, n);
                    out.values.emplace_back(squared_error(h, asymptotic_cme_filter(cme, n).apply(y)));
                    break;
                }
                case EstimatorTag::bound_cme_ab:
                    out.values.emplace_back(cme_asymptotic_mse(bounds()) / static_cast<double>(n));
                    break;
                case EstimatorTag::bound_pbce_ab:
                {
                    std::optional<double> believed;
                    if (spec.mismatch_eps)
                        believed = factor * scenario.noise_var;
                    out.values.emplace_back(pbce_asymptotic_mse(bounds(), believed) / static_cast<double>(n));
                    break;
                }
                case EstimatorTag::crb_omega_curve:
                    out.values.emplace_back(crb_omega(n, scenario.coherence_len, scenario.noise_var).reduced_form);
                    break;
                case EstimatorTag::zero:
                    out.values.emplace_back(h.squaredNorm() / static_cast<double>(n));
                    break;
                }
            }
            catch (const EstimatorFailure &)
            {
                out.values.emplace_back(std::nullopt);
            }
        }

        if (draw_hash(real, obs) != out.hash)
            throw std::logic_error("evaluate_trial: an estimator modified the shared draw");
        return out;
    }

    SweepResult run_sweep(const SweepSpec &spec)
    {
        spec.validate();

        SweepResult result;
        for (std::size_t point = 0; point < spec.axis_values.size(); ++point)
        {
            std::vector<TrialOutcome> outcomes(spec.trials);
            std::atomic<std::size_t> next{0};
            std::exception_ptr error;
            std::mutex error_mutex;

            auto worker = [&]()
            {
                while (true)
                {
                    const std::size_t trial = next.fetch_add(1);
                    if (trial >= spec.trials)
                        return;
                    try
                    {
                        outcomes[trial] = evaluate_trial(spec, point, trial);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(error_mutex);
                        if (!error)
                            error = std::current_exception();
                        next.store(spec.trials);
                        return;
                    }
                }
            };

            const std::size_t n_threads = std::min(spec.workers, spec.trials);
            if (n_threads <= 1)
                worker();
            else
            {
                std::vector<std::jthread> pool;
                for (std::size_t w = 0; w < n_threads; ++w)
                    pool.emplace_back(worker);
            }
            if (error)
                std::rethrow_exception(error);

            // Reduce in trial order so the result does not depend on scheduling.
            std::vector<std::uint64_t> hashes;
            for (const auto &o : outcomes)
                hashes.push_back(o.hash);
            result.draw_hashes.push_back(std::move(hashes));

            for (std::size_t e = 0; e < spec.estimators.size(); ++e)
            {
                SweepRecord rec;
                rec.axis = spec.axis;
                rec.axis_value = spec.axis_values[point];
                rec.estimator = spec.estimators[e];

                double sum = 0.0;
                for (const auto &o : outcomes)
                {
                    if (o.values[e])
                    {
                        sum += *o.values[e];
                        ++rec.trials_used;
                    }
                    else
                        ++rec.failures;
                }
                if (rec.trials_used == 0)
                {
                    rec.nmse_linear = std::numeric_limits<double>::quiet_NaN();
                    rec.std_err = std::numeric_limits<double>::quiet_NaN();
                }
                else
                {
                    const double used = static_cast<double>(rec.trials_used);
                    rec.nmse_linear = sum / used;
                    double ss = 0.0;
                    for (const auto &o : outcomes)
                        if (o.values[e])
                            ss += (*o.values[e] - rec.nmse_linear) * (*o.values[e] - rec.nmse_linear);
                    rec.std_err = rec.trials_used > 1 ? std::sqrt(ss / (used - 1.0) / used) : 0.0;
                }
                rec.nmse_db = 10.0 * std::log10(rec.nmse_linear);
                result.records.push_back(rec);
            }
        }
        return result;
    }

    ConvergenceReport run_convergence_study(const ConvergenceStudySpec &spec)
    {
        ConvergenceReport report;
        auto inputs = [&spec](double s2) { return make_bound_inputs(spec.n_rx, spec.coherence_len, s2, spec.rhos, spec.cbar); };
        report.analytic = convergence_slope([&](double s2) { return cme_asymptotic_mse(inputs(s2)); },
                                            [&](double s2) { return pbce_asymptotic_mse(inputs(s2)); },
                                            spec.noise_grid);

        if (spec.monte_carlo.empty())
            return report;

        auto lookup = [&](double axis_value, EstimatorTag tag) -> std::optional<double>
        {
            for (const auto &r : spec.monte_carlo)
                if (r.axis_value == axis_value && r.estimator == tag && r.trials_used > 0)
                    return r.nmse_linear;
            return std::nullopt;
        };

        std::vector<double> values;
        for (const auto &r : spec.monte_carlo)
            if (r.estimator == EstimatorTag::pbce_rmusic)
                values.push_back(r.axis_value);
        std::sort(values.begin(), values.end());

        const SweepAxis axis = spec.monte_carlo.front().axis;
        std::vector<double> xs, gaps_cme, gaps_pbce, xs_cme, xs_pbce;
        for (const double v : values)
        {
            const auto pbce = lookup(v, EstimatorTag::pbce_rmusic);
            const auto cme = lookup(v, EstimatorTag::bound_cme_ab);
            const auto pb = lookup(v, EstimatorTag::bound_pbce_ab);
            if (!pbce)
                continue;
            report.axis_values.push_back(v);
            report.pbce_nmse.push_back(*pbce);
            report.gap_to_cme.push_back(cme ? *pbce - *cme : std::numeric_limits<double>::quiet_NaN());
            report.gap_to_pbce.push_back(pb ? *pbce - *pb : std::numeric_limits<double>::quiet_NaN());

            const double x = axis == SweepAxis::snr_db ? db_to_noise_var(v) : v;
            if (cme && std::abs(*pbce - *cme) > 0.0)
            {
                xs_cme.push_back(x);
                gaps_cme.push_back(std::abs(*pbce - *cme));
            }
            if (pb && std::abs(*pbce - *pb) > 0.0)
            {
                xs_pbce.push_back(x);
                gaps_pbce.push_back(std::abs(*pbce - *pb));
            }
        }
        if (xs_cme.size() >= 2)
            report.empirical_gap_slope_cme = fit_loglog(xs_cme, gaps_cme);
        if (xs_pbce.size() >= 2)
            report.empirical_gap_slope_pbce = fit_loglog(xs_pbce, gaps_pbce);

        report.pbce_strictly_decreasing = report.pbce_nmse.size() >= 2;
        report.gap_to_cme_decreasing = report.gap_to_cme.size() >= 2;
        for (std::size_t i = 1; i < report.pbce_nmse.size(); ++i)
        {
            report.pbce_strictly_decreasing &= report.pbce_nmse[i] < report.pbce_nmse[i - 1];
            report.gap_to_cme_decreasing &= std::abs(report.gap_to_cme[i]) < std::abs(report.gap_to_cme[i - 1]);
        }
        return report;
    }
}
