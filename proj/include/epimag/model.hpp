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

// End-to-end forecaster: ST encoder -> EIEL -> affinity graph -> HTGN -> affine decoder
// over [P; T]. Ablation variants drop parts of this pipeline.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "epimag/data.hpp"
#include "epimag/eiel.hpp"
#include "epimag/geo_graph.hpp"
#include "epimag/htgn.hpp"
#include "epimag/mag.hpp"
#include "epimag/st_encoder.hpp"

namespace epimag
{

enum class Variant
{
    Full,
    NoPhysicsLoss,        //!< lambda forced to 0
    NoTransmissionGraph,  //!< decoder sees P only; EIEL and physics loss kept
    NoTransmissionPath,   //!< decoder sees P only; EIEL, affinity graph, HTGN and physics loss removed
};

inline const char* to_string(Variant v)
{
    switch (v) {
    case Variant::Full:
        return "full";
    case Variant::NoPhysicsLoss:
        return "no-pl";
    case Variant::NoTransmissionGraph:
        return "no-tg";
    case Variant::NoTransmissionPath:
        return "no-tp";
    }
    return "?";
}

inline Variant parse_variant(const std::string& s)
{
    for (auto v : {Variant::Full, Variant::NoPhysicsLoss, Variant::NoTransmissionGraph, Variant::NoTransmissionPath}) {
        if (s == to_string(v)) {
            return v;
        }
    }
    throw ConfigError("unknown model variant '" + s + "' (expected full, no-pl, no-tg or no-tp)");
}

struct ModelConfig
{
    Eigen::Index window        = 20;
    Eigen::Index st_dim        = 32;  //!< D1
    Eigen::Index head_dim      = 16;  //!< D2
    Eigen::Index htgn_dim      = 32;  //!< D3
    Eigen::Index htgn_channels = 16;
    int eiel_layers            = 2;
    double delta               = 0.2;
    Variant variant            = Variant::Full;

    bool uses_eiel() const
    {
        return variant != Variant::NoTransmissionPath;
    }
    bool uses_transmission_graph() const
    {
        return variant == Variant::Full || variant == Variant::NoPhysicsLoss;
    }
    bool uses_physics_loss() const
    {
        return variant == Variant::Full || variant == Variant::NoTransmissionGraph;
    }
};

struct ForecastOutput
{
    Vector y_hat;  //!< normalized units
    std::optional<SIRPrediction> sir;
    std::optional<AffinityGraph> mag;
};

//! Recorded forward pass; optional members are absent in variants that skip them.
struct ForwardGraph
{
    ad::Var y_hat;
    ad::Var st;
    std::optional<SirVars> sir;
    std::optional<ad::Var> affinity;
    std::optional<ad::Var> transmission;
};

class Forecaster
{
public:
    Forecaster() = default;

    explicit Forecaster(ModelConfig cfg)
        : cfg_(cfg)
    {
        if (cfg.window <= 0 || cfg.st_dim <= 0 || cfg.head_dim <= 0 || cfg.htgn_dim <= 0 || cfg.htgn_channels <= 0 ||
            cfg.eiel_layers <= 0) {
            throw ConfigError("model dimensions must be positive");
        }
        check_threshold(cfg.delta);
        encoder_ = STEncoder(store_, cfg.window, cfg.st_dim);
        if (cfg.uses_eiel()) {
            eiel_ = EIEL(store_, cfg.st_dim, cfg.head_dim, cfg.eiel_layers);
        }
        Eigen::Index decoder_in = cfg.st_dim;
        if (cfg.uses_transmission_graph()) {
            htgn_ = HTGN(store_, cfg.window, cfg.htgn_channels, cfg.htgn_dim);
            decoder_in += cfg.htgn_dim;
        }
        decoder_ = nn::Dense(store_, "decoder", decoder_in, 1);
    }

    const ModelConfig& config() const
    {
        return cfg_;
    }
    ad::ParameterStore& parameters()
    {
        return store_;
    }
    const ad::ParameterStore& parameters() const
    {
        return store_;
    }
    const EIEL& eiel() const
    {
        return eiel_;
    }
    const nn::Dense& decoder() const
    {
        return decoder_;
    }

    //! Xavier for weights, zero biases, mean-initialized temporal readouts.
    void initialize(std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        store_.initialize(rng);
    }

    ForwardGraph forward(ad::Tape& tape, ad::Var geo_prop, ad::Var history) const
    {
        ForwardGraph g;
        g.st = encoder_.forward(tape, store_, geo_prop, history);
        ad::Var features = g.st;
        if (cfg_.uses_eiel()) {
            auto embedding = eiel_.embed(tape, store_, g.st);
            g.sir          = eiel_.predict(tape, store_, embedding);
            if (cfg_.uses_transmission_graph()) {
                auto affinity = ad::sparsify(ad::normalize_affinity(ad::cosine_affinity(embedding)), cfg_.delta);
                g.affinity     = affinity;
                g.transmission = htgn_.forward(tape, store_, affinity, history);
                features       = ad::concat_cols({g.st, *g.transmission});
            }
        }
        g.y_hat = decoder_(tape, store_, features);
        return g;
    }

    //! Evaluates one window. `geo_prop` is normalized_laplacian_operator(adjacency).
    ForecastOutput predict(const Matrix& history, const Matrix& geo_prop) const
    {
        require_shape(history, cfg_.window, geo_prop.rows(), "Forecaster history");
        ad::Tape tape;
        auto g = forward(tape, tape.constant(geo_prop), tape.constant(nn::stack_history(history)));
        ForecastOutput out;
        out.y_hat = g.y_hat.value().col(0);
        if (g.sir) {
            out.sir = g.sir->values();
        }
        if (g.affinity) {
            out.mag = AffinityGraph{g.affinity->value(), cfg_.delta};
        }
        return out;
    }

    ForecastOutput forward(const WindowedSample& sample, const GeoAdjacency& adj) const
    {
        return predict(sample.history, normalized_laplacian_operator(adj));
    }

private:
    ModelConfig cfg_;
    ad::ParameterStore store_;
    STEncoder encoder_;
    EIEL eiel_;
    HTGN htgn_;
    nn::Dense decoder_;
};

//! Forecasts and ground truth over every window of a span, in real units.
struct SeriesForecast
{
    Matrix predicted;  //!< windows x N
    Matrix truth;      //!< windows x N
    Matrix last_observed;  //!< windows x N, x_t at each anchor (persistence forecast)
    std::vector<Eigen::Index> anchors;
};

//! `span` holds raw counts; it is normalized with `stats`, windowed and forecast h steps ahead.
inline SeriesForecast predict_series(const Forecaster& model, const GeoAdjacency& adj, const EpidemicSeries& span,
                                     const NormalizationStats& stats, int horizon, WindowOptions opts = {})
{
    const int w = static_cast<int>(model.config().window);
    if (span.steps() < w + horizon) {
        throw ConfigError("forecast span of " + std::to_string(span.steps()) + " rows is shorter than w + h = " +
                          std::to_string(w + horizon));
    }
    const Matrix normalized = apply_normalization(span.values, stats);
    const auto windows      = make_windows(normalized, w, horizon, opts);
    const Matrix prop       = normalized_laplacian_operator(adj);
    const auto rows         = static_cast<Eigen::Index>(windows.size());
    Matrix pred(rows, span.locations());
    SeriesForecast out;
    out.truth.resize(rows, span.locations());
    out.last_observed.resize(rows, span.locations());
    for (Eigen::Index k = 0; k < rows; ++k) {
        const auto& s = windows[static_cast<std::size_t>(k)];
        pred.row(k)   = model.predict(s.history, prop).y_hat.transpose();
        out.truth.row(k)         = span.values.row(s.anchor + horizon);
        out.last_observed.row(k) = span.values.row(s.anchor);
        out.anchors.push_back(s.anchor);
    }
    out.predicted = invert_normalization(pred, stats);
    return out;
}

} // namespace epimag
