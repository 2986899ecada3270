/*
* Copyright (C) 2026 epimag contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#pragma once

// Ablation and one-parameter sensitivity studies built on run_experiment.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "epimag/experiment.hpp"

namespace epimag
{

enum class SweepParam
{
    Window,
    Horizon,
    Lambda,
    Delta
};

inline SweepParam parse_sweep_param(const std::string& s)
{
    if (s == "window" || s == "w") return SweepParam::Window;
    if (s == "horizon" || s == "h") return SweepParam::Horizon;
    if (s == "lambda") return SweepParam::Lambda;
    if (s == "delta") return SweepParam::Delta;
    throw ConfigError("unknown sweep parameter '" + s + "' (window, horizon, lambda, delta)");
}

inline const char* to_string(SweepParam p)
{
    switch (p) {
    case SweepParam::Window: return "window";
    case SweepParam::Horizon: return "horizon";
    case SweepParam::Lambda: return "lambda";
    case SweepParam::Delta: return "delta";
    }
    return "?";
}

inline std::vector<double> default_sweep_values(SweepParam p)
{
    switch (p) {
    case SweepParam::Window: return {20, 30, 40, 50, 60};
    case SweepParam::Horizon: return {1, 2, 3, 4, 5, 6};
    case SweepParam::Lambda: return {0, 0.2, 0.4, 0.6, 0.8, 1.0};
    case SweepParam::Delta: return {0, 0.2, 0.4, 0.6, 0.8};
    }
    return {};
}

/// Parses "a,b,c", "lo..hi" (step 1) or "lo..hi:step". Ranges include both ends.
inline std::vector<double> parse_values(const std::string& text)
{
    const auto number = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v   = std::stod(trim(s), &used);
            if (used != trim(s).size()) {
                throw std::invalid_argument(s);
            }
            return v;
        }
        catch (const std::exception&) {
            throw ConfigError("cannot parse value '" + s + "' in '" + text + "'");
        }
    };
    std::vector<double> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        std::string rest = text.substr(dots + 2);
        double step      = 1;
        if (const auto colon = rest.find(':'); colon != std::string::npos) {
            step = number(rest.substr(colon + 1));
            rest = rest.substr(0, colon);
        }
        const double lo = number(text.substr(0, dots));
        const double hi = number(rest);
        if (!(step > 0) || hi < lo) {
            throw ConfigError("bad range '" + text + "'");
        }
        const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
        for (long k = 0; k <= n; ++k) {
            out.push_back(lo + static_cast<double>(k) * step);
        }
        return out;
    }
    std::istringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (!trim(part).empty()) {
            out.push_back(number(part));
        }
    }
    if (out.empty()) {
        throw ConfigError("no values in '" + text + "'");
    }
    return out;
}

inline void apply_sweep_value(ExperimentConfig& cfg, SweepParam p, double v)
{
    const auto as_int = [&](const char* what) {
        if (v != std::floor(v) || v < 1) {
            throw ConfigError(std::string(what) + " values must be positive integers");
        }
        return static_cast<int>(v);
    };
    switch (p) {
    case SweepParam::Window: cfg.model.window = as_int("window"); break;
    case SweepParam::Horizon:
        cfg.horizon = as_int("horizon");
        if (cfg.horizon == 1) {
            cfg.allow_single_step = true;
        }
        break;
    case SweepParam::Lambda: cfg.train.lambda = v; break;
    case SweepParam::Delta: cfg.model.delta = v; break;
    }
}

struct StudyRow
{
    std::string label;
    double value = 0;  //!< swept value; 0 for ablation rows
    ExperimentConfig config;
    SeedSummary summary;
};

struct StudyOptions
{
    std::vector<std::uint64_t> seeds{42};
    std::function<void(const StudyRow&, std::uint64_t, const ForecastRun&)> on_run;
};

namespace detail
{
inline StudyRow run_row(const EpidemicSeries& series, const GeoAdjacency& adj, const ExperimentConfig& cfg,
                        std::string label, double value, const StudyOptions& opts)
{
    StudyRow row{std::move(label), value, cfg, {}};
    const auto data = prepare_data(series, adj, cfg);
    row.summary     = average_over_seeds(data, cfg, opts.seeds, [&](std::uint64_t seed, const ForecastRun& run) {
        if (opts.on_run) {
            opts.on_run(row, seed, run);
        }
    });
    return row;
}
} // namespace detail

inline const std::vector<Variant>& ablation_variants()
{
    static const std::vector<Variant> v{Variant::Full, Variant::NoPhysicsLoss, Variant::NoTransmissionGraph,
                                        Variant::NoTransmissionPath};
    return v;
}

//! One row per model variant, all sharing `base` otherwise.
inline std::vector<StudyRow> run_ablation(const EpidemicSeries& series, const GeoAdjacency& adj,
                                          const ExperimentConfig& base, const StudyOptions& opts = {})
{
    std::vector<StudyRow> rows;
    for (auto v : ablation_variants()) {
        auto cfg          = base;
        cfg.model.variant = v;
        rows.push_back(detail::run_row(series, adj, cfg, to_string(v), 0, opts));
    }
    return rows;
}

//! One row per value of `param`. Data are re-windowed for each value.
inline std::vector<StudyRow> run_sweep(const EpidemicSeries& series, const GeoAdjacency& adj,
                                       const ExperimentConfig& base, SweepParam param,
                                       const std::vector<double>& values, const StudyOptions& opts = {})
{
    if (values.empty()) {
        throw ConfigError("sweep needs at least one value");
    }
    std::vector<ExperimentConfig> configs;
    for (double v : values) {
        auto cfg = base;
        apply_sweep_value(cfg, param, v);
        cfg.validate();
        configs.push_back(cfg);
    }
    std::vector<StudyRow> rows;
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::ostringstream label;
        label << to_string(param) << '=' << values[i];
        rows.push_back(detail::run_row(series, adj, configs[i], label.str(), values[i], opts));
    }
    return rows;
}

inline const char* study_csv_header()
{
    return "label,value,variant,horizon,window,lambda,delta,seeds,mean_rmse,mean_pcc,config_hash";
}

inline void write_study_row(std::ostream& out, const StudyRow& r)
{
    out << r.label << ',' << r.value << ',' << to_string(r.config.model.variant) << ',' << r.config.horizon << ','
        << r.config.model.window << ',' << r.config.train.lambda << ',' << r.config.model.delta << ','
        << r.summary.seeds.size() << ',' << r.summary.mean_rmse << ',';
    if (r.summary.mean_pcc) {
        out << *r.summary.mean_pcc;
    }
    out << ',' << r.config.hash() << '\n';
}

} // namespace epimag
