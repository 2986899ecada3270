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

// Run artifacts: checkpoint archive (JSON holding config, normalization statistics and
// every parameter array), metrics JSON and the per-epoch training log.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "epimag/experiment.hpp"

namespace epimag
{

using json = nlohmann::json;

inline constexpr const char* kCheckpointFormat = "epimag-checkpoint";
inline constexpr int kCheckpointVersion        = 1;

struct Checkpoint
{
    ExperimentConfig config;
    Forecaster model;
    NormalizationStats stats;
    std::vector<std::string> location_ids;
    TrainingHistory history;  //!< summary fields only; per-epoch records are in the training log
};

namespace detail
{
inline json vector_to_json(const Vector& v)
{
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Vector vector_from_json(const json& j)
{
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}
} // namespace detail

inline json checkpoint_to_json(const Checkpoint& ck)
{
    json j;
    j["format"]  = kCheckpointFormat;
    j["version"] = kCheckpointVersion;
    j["config"]  = ck.config.to_key_values();
    j["location_ids"]  = ck.location_ids;
    j["normalization"] = {{"min", detail::vector_to_json(ck.stats.per_location_min)},
                          {"max", detail::vector_to_json(ck.stats.per_location_max)}};
    j["training"] = {{"best_epoch", ck.history.best_epoch},
                     {"best_val_loss", ck.history.best_val_loss},
                     {"stopped_epoch", ck.history.stopped_epoch},
                     {"early_stopped", ck.history.early_stopped}};
    json params = json::array();
    for (const auto& p : ck.model.parameters()) {
        std::vector<double> data;
        data.reserve(static_cast<std::size_t>(p.value.size()));
        for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
            for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
                data.push_back(p.value(r, c));
            }
        }
        params.push_back({{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()}, {"data", data}});
    }
    j["parameters"] = std::move(params);
    return j;
}

inline Checkpoint checkpoint_from_json(const json& j)
{
    if (j.value("format", "") != kCheckpointFormat) {
        throw DataError("not an epimag checkpoint");
    }
    if (j.value("version", 0) != kCheckpointVersion) {
        throw DataError("unsupported checkpoint version " + std::to_string(j.value("version", 0)));
    }
    Checkpoint ck;
    ck.config.apply(j.at("config").get<KeyValues>());
    ck.model        = Forecaster(ck.config.model);
    ck.location_ids = j.at("location_ids").get<std::vector<std::string>>();
    ck.stats.per_location_min = detail::vector_from_json(j.at("normalization").at("min"));
    ck.stats.per_location_max = detail::vector_from_json(j.at("normalization").at("max"));
    const auto& tr            = j.at("training");
    ck.history.best_epoch     = tr.at("best_epoch").get<int>();
    ck.history.best_val_loss  = tr.at("best_val_loss").get<double>();
    ck.history.stopped_epoch  = tr.at("stopped_epoch").get<int>();
    ck.history.early_stopped  = tr.at("early_stopped").get<bool>();

    auto& store        = ck.model.parameters();
    const auto& params = j.at("parameters");
    if (params.size() != store.size()) {
        throw DataError("checkpoint holds " + std::to_string(params.size()) + " parameters, model expects " +
                        std::to_string(store.size()));
    }
    for (const auto& p : params) {
        const auto name = p.at("name").get<std::string>();
        const auto idx  = store.find(name);
        if (!idx) {
            throw DataError("checkpoint parameter '" + name + "' does not exist in the model");
        }
        Matrix& value   = store[*idx].value;
        const auto rows = p.at("rows").get<Eigen::Index>();
        const auto cols = p.at("cols").get<Eigen::Index>();
        const auto data = p.at("data").get<std::vector<double>>();
        if (rows != value.rows() || cols != value.cols() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
            throw DataError("checkpoint parameter '" + name + "' has the wrong shape");
        }
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                value(r, c) = data[static_cast<std::size_t>(r * cols + c)];
            }
        }
    }
    if (ck.stats.locations() != static_cast<Eigen::Index>(ck.location_ids.size())) {
        throw DataError("checkpoint normalization does not match its location list");
    }
    return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << checkpoint_to_json(ck).dump(1) << '\n';
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open checkpoint " + path.string());
    }
    json j;
    try {
        in >> j;
    }
    catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return checkpoint_from_json(j);
}

inline Checkpoint make_checkpoint(const ForecastRun& run, const std::vector<std::string>& location_ids)
{
    return {run.config, run.model, run.stats, location_ids, run.history};
}

inline json pcc_json(const std::optional<double>& pcc)
{
    return pcc ? json(*pcc) : json(nullptr);
}

//! {dataset, horizon, seed, rmse, pcc, config_hash, ...}; pcc is null when undefined.
inline json metrics_json(const ExperimentConfig& cfg, const MetricReport& r, const std::string& split = "test")
{
    return {{"dataset", cfg.dataset},
            {"horizon", cfg.horizon},
            {"seed", cfg.train.seed},
            {"rmse", r.rmse},
            {"pcc", pcc_json(r.pcc)},
            {"config_hash", cfg.hash()},
            {"variant", to_string(cfg.model.variant)},
            {"split", split},
            {"n_samples", r.n_samples}};
}

inline void write_json(const std::filesystem::path& path, const json& j)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

inline const char* training_log_header()
{
    return "epoch,l_g,l_d,l_o,l_p,total,lambda,val_l_g";
}

inline void write_training_log_row(std::ostream& out, const EpochRecord& r)
{
    out << r.epoch << ',' << r.train.l_g << ',' << r.train.l_d << ',' << r.train.l_o << ',' << r.train.l_p << ','
        << r.train.total << ',' << r.train.lambda << ',' << r.val_loss << '\n';
}

} // namespace epimag
