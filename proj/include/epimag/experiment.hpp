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

// Experiment configuration and the end-to-end protocol: load, split, normalize on the
// training rows, window, train with early stopping, forecast the test span, and score
// in real units.

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "epimag/data.hpp"
#include "epimag/geo_graph.hpp"
#include "epimag/key_value.hpp"
#include "epimag/metrics.hpp"
#include "epimag/model.hpp"
#include "epimag/trainer.hpp"

namespace epimag
{

struct ExperimentConfig
{
    std::string dataset = "synthetic";
    std::filesystem::path registry = "data/datasets.cfg";
    std::filesystem::path counts;     //!< overrides the registry when set
    std::filesystem::path adjacency;  //!< overrides the registry when set
    std::filesystem::path output_dir = "runs";
    int horizon            = 2;
    bool allow_single_step = false;
    ModelConfig model;
    TrainConfig train;
    SplitSpec split;

    //! Canonical flat form; every key is written, so equal configs serialize equally.
    KeyValues to_key_values() const
    {
        KeyValues kv;
        const auto num = [](double v) {
            std::ostringstream os;
            os.precision(17);
            os << v;
            return os.str();
        };
        kv["dataset"]             = dataset;
        kv["registry"]            = registry.string();
        kv["counts"]              = counts.string();
        kv["adjacency"]           = adjacency.string();
        kv["output_dir"]          = output_dir.string();
        kv["horizon"]             = std::to_string(horizon);
        kv["allow_single_step"]   = allow_single_step ? "true" : "false";
        kv["window"]              = std::to_string(model.window);
        kv["d1"]                  = std::to_string(model.st_dim);
        kv["d2"]                  = std::to_string(model.head_dim);
        kv["d3"]                  = std::to_string(model.htgn_dim);
        kv["htgn_channels"]       = std::to_string(model.htgn_channels);
        kv["eiel_layers"]         = std::to_string(model.eiel_layers);
        kv["delta"]               = num(model.delta);
        kv["variant"]             = to_string(model.variant);
        kv["lr"]                  = num(train.lr);
        kv["weight_decay"]        = num(train.weight_decay);
        kv["batch_size"]          = std::to_string(train.batch_size);
        kv["max_epochs"]          = std::to_string(train.max_epochs);
        kv["patience"]            = std::to_string(train.patience);
        kv["lambda"]              = num(train.lambda);
        kv["seed"]                = std::to_string(train.seed);
        kv["residual"]            = to_string(train.residual);
        kv["conservation_weight"] = num(train.conservation_weight);
        kv["conservation_total"]  = num(train.conservation_total);
        kv["train_frac"]          = num(split.train_frac);
        kv["val_frac"]            = num(split.val_frac);
        kv["test_frac"]           = num(split.test_frac);
        return kv;
    }

    //! Applies `kv` on top of this config. Unknown keys are rejected.
    void apply(const KeyValues& kv)
    {
        for (const auto& [key, value] : kv) {
            set(key, value);
        }
    }

    void set(const std::string& key, const std::string& value)
    {
        try {
            if (key == "dataset") dataset = value;
            else if (key == "registry") registry = value;
            else if (key == "counts") counts = value;
            else if (key == "adjacency") adjacency = value;
            else if (key == "output_dir") output_dir = value;
            else if (key == "horizon") horizon = std::stoi(value);
            else if (key == "allow_single_step") allow_single_step = parse_bool(value);
            else if (key == "window") model.window = std::stoi(value);
            else if (key == "d1") model.st_dim = std::stoi(value);
            else if (key == "d2") model.head_dim = std::stoi(value);
            else if (key == "d3") model.htgn_dim = std::stoi(value);
            else if (key == "dims") set_dims(value);
            else if (key == "htgn_channels") model.htgn_channels = std::stoi(value);
            else if (key == "eiel_layers") model.eiel_layers = std::stoi(value);
            else if (key == "delta") model.delta = std::stod(value);
            else if (key == "variant") model.variant = parse_variant(value);
            else if (key == "lr") train.lr = std::stod(value);
            else if (key == "weight_decay") train.weight_decay = std::stod(value);
            else if (key == "batch_size") train.batch_size = std::stoi(value);
            else if (key == "max_epochs") train.max_epochs = std::stoi(value);
            else if (key == "patience") train.patience = std::stoi(value);
            else if (key == "lambda") train.lambda = std::stod(value);
            else if (key == "seed") train.seed = std::stoull(value);
            else if (key == "residual") train.residual = parse_residual_mode(value);
            else if (key == "conservation_weight") train.conservation_weight = std::stod(value);
            else if (key == "conservation_total") train.conservation_total = std::stod(value);
            else if (key == "train_frac") split.train_frac = std::stod(value);
            else if (key == "val_frac") split.val_frac = std::stod(value);
            else if (key == "test_frac") split.test_frac = std::stod(value);
            else throw ConfigError("unknown config key '" + key + "'");
        }
        catch (const std::invalid_argument&) {
            throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
        }
        catch (const std::out_of_range&) {
            throw ConfigError("config key '" + key + "': value out of range '" + value + "'");
        }
    }

    //! Fingerprint of the settings that determine results (paths and output dir excluded).
    std::string hash() const
    {
        auto kv = to_key_values();
        kv.erase("registry");
        kv.erase("counts");
        kv.erase("adjacency");
        kv.erase("output_dir");
        std::ostringstream os;
        write_key_values(os, kv);
        return hex64(fnv1a(os.str()));
    }

    void validate() const
    {
        if (horizon < 1 || (horizon == 1 && !allow_single_step)) {
            throw ConfigError("horizon must be at least 2 (1 needs allow_single_step)");
        }
        if (model.window <= 0) {
            throw ConfigError("window must be positive");
        }
        check_threshold(model.delta);
        split.validate();
        train.validate();
    }

    WindowOptions window_options() const
    {
        return {allow_single_step};
    }

private:
    static bool parse_bool(const std::string& v)
    {
        if (v == "true" || v == "1" || v == "yes") {
            return true;
        }
        if (v == "false" || v == "0" || v == "no") {
            return false;
        }
        throw std::invalid_argument(v);
    }

    void set_dims(const std::string& value)
    {
        std::istringstream ss(value);
        std::string part;
        std::vector<int> dims;
        while (std::getline(ss, part, ',')) {
            dims.push_back(std::stoi(part));
        }
        if (dims.size() != 3) {
            throw ConfigError("dims expects D1,D2,D3");
        }
        model.st_dim   = dims[0];
        model.head_dim = dims[1];
        model.htgn_dim = dims[2];
    }
};

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path)
{
    ExperimentConfig cfg;
    cfg.apply(load_key_values(path));
    return cfg;
}

//! Counts and adjacency paths, from explicit settings or the registry.
inline DatasetEntry resolve_dataset(const ExperimentConfig& cfg)
{
    DatasetEntry e;
    if (!cfg.counts.empty() || !cfg.adjacency.empty()) {
        if (cfg.counts.empty() || cfg.adjacency.empty()) {
            throw ConfigError("counts and adjacency must be given together");
        }
        e = {cfg.counts, cfg.adjacency};
    }
    else {
        if (!std::filesystem::exists(cfg.registry)) {
            throw ConfigError("dataset registry " + cfg.registry.string() + " not found (run 'prepare' or 'simulate')");
        }
        const auto reg = load_registry(cfg.registry);
        auto it        = reg.find(cfg.dataset);
        if (it == reg.end()) {
            throw ConfigError("unknown dataset '" + cfg.dataset + "' in " + cfg.registry.string());
        }
        e = it->second;
    }
    for (const auto& p : {e.counts, e.adjacency}) {
        if (!std::filesystem::exists(p)) {
            throw ConfigError("missing file " + p.string());
        }
    }
    return e;
}

struct PreparedData
{
    EpidemicSeries series;
    GeoAdjacency adjacency;
    SeriesSplit parts;
    NormalizationStats stats;
    std::vector<WindowedSample> train;
    std::vector<WindowedSample> val;
    std::vector<WindowedSample> test;
};

inline PreparedData prepare_data(EpidemicSeries series, GeoAdjacency adjacency, const ExperimentConfig& cfg)
{
    cfg.validate();
    if (adjacency.size() != series.locations()) {
        throw DataError("adjacency has " + std::to_string(adjacency.size()) + " nodes but the series has " +
                        std::to_string(series.locations()) + " locations");
    }
    const int w = static_cast<int>(cfg.model.window);
    const int h = cfg.horizon;
    PreparedData d;
    d.parts     = chronological_split(series, cfg.split, w + h);
    d.stats     = fit_normalization(d.parts.train);
    d.train     = make_windows(apply_normalization(d.parts.train.values, d.stats), w, h, cfg.window_options());
    d.val       = make_windows(apply_normalization(d.parts.val.values, d.stats), w, h, cfg.window_options());
    d.test      = make_windows(apply_normalization(d.parts.test.values, d.stats), w, h, cfg.window_options());
    d.series    = std::move(series);
    d.adjacency = std::move(adjacency);
    return d;
}

inline PreparedData load_prepared_data(const ExperimentConfig& cfg)
{
    const auto entry = resolve_dataset(cfg);
    auto series      = load_csv(entry.counts);
    auto adj         = load_adjacency(entry.adjacency, series.locations());
    return prepare_data(std::move(series), std::move(adj), cfg);
}

struct ForecastRun
{
    ExperimentConfig config;
    Forecaster model;
    NormalizationStats stats;
    TrainingHistory history;
    SeriesForecast test_forecast;
    MetricReport test_metrics;
    MetricReport val_metrics;
    double train_seconds = 0;
};

inline MetricReport score_span(const Forecaster& model, const PreparedData& data, const EpidemicSeries& span,
                               const ExperimentConfig& cfg, SeriesForecast* out = nullptr)
{
    auto fc = predict_series(model, data.adjacency, span, data.stats, cfg.horizon, cfg.window_options());
    auto r  = evaluate(fc.predicted, fc.truth);
    if (out) {
        *out = std::move(fc);
    }
    return r;
}

inline ForecastRun run_experiment(const PreparedData& data, const ExperimentConfig& cfg,
                                  const std::function<void(const EpochRecord&)>& on_epoch = {})
{
    ForecastRun run;
    run.config = cfg;
    run.stats  = data.stats;
    run.model  = Forecaster(cfg.model);
    const auto start = std::chrono::steady_clock::now();
    run.history      = train(run.model, data.train, data.val, data.adjacency, cfg.train, on_epoch);
    run.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    run.val_metrics  = score_span(run.model, data, data.parts.val, cfg);
    run.test_metrics = score_span(run.model, data, data.parts.test, cfg, &run.test_forecast);
    return run;
}

struct SeedSummary
{
    std::vector<std::uint64_t> seeds;
    std::vector<MetricReport> reports;
    double mean_rmse = 0;
    std::optional<double> mean_pcc;  //!< empty if any seed's PCC is undefined
};

inline SeedSummary summarize_seeds(std::vector<std::uint64_t> seeds, std::vector<MetricReport> reports)
{
    SeedSummary s;
    s.seeds   = std::move(seeds);
    s.reports = std::move(reports);
    double pcc_sum = 0;
    bool pcc_ok    = true;
    for (const auto& r : s.reports) {
        s.mean_rmse += r.rmse;
        if (r.pcc) {
            pcc_sum += *r.pcc;
        }
        else {
            pcc_ok = false;
        }
    }
    const double n = static_cast<double>(s.reports.size());
    s.mean_rmse /= n;
    if (pcc_ok) {
        s.mean_pcc = pcc_sum / n;
    }
    return s;
}

//! Test metrics averaged over independent runs, one per seed.
inline SeedSummary average_over_seeds(const PreparedData& data, ExperimentConfig cfg,
                                      const std::vector<std::uint64_t>& seeds,
                                      const std::function<void(std::uint64_t, const ForecastRun&)>& on_run = {})
{
    if (seeds.empty()) {
        throw ConfigError("need at least one seed");
    }
    std::vector<MetricReport> reports;
    for (auto seed : seeds) {
        cfg.train.seed = seed;
        auto run       = run_experiment(data, cfg);
        if (on_run) {
            on_run(seed, run);
        }
        reports.push_back(run.test_metrics);
    }
    return summarize_seeds(seeds, std::move(reports));
}

inline std::vector<std::uint64_t> seed_range(std::uint64_t first, int count)
{
    std::vector<std::uint64_t> s;
    for (int k = 0; k < count; ++k) {
        s.push_back(first + static_cast<std::uint64_t>(k));
    }
    return s;
}

} // namespace epimag
