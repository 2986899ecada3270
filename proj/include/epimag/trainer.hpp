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

// Mini-batch Adam training with validation-based early stopping.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "epimag/losses.hpp"
#include "epimag/model.hpp"

namespace epimag
{

struct TrainConfig
{
    double lr           = 1e-3;
    double weight_decay = 5e-4;
    int batch_size      = 32;
    int max_epochs      = 1500;
    int patience        = 200;
    double lambda       = 0.5;
    std::uint64_t seed  = 42;
    ResidualMode residual      = ResidualMode::ObservedPrevious;
    double conservation_weight = 0.0;
    double conservation_total  = 1.0;

    void validate() const
    {
        if (!(lr > 0) || weight_decay < 0 || batch_size <= 0 || max_epochs <= 0 || patience <= 0) {
            throw ConfigError("training settings must be positive (weight decay may be 0)");
        }
        check_lambda(lambda);
        if (conservation_weight < 0) {
            throw ConfigError("conservation weight must be >= 0");
        }
    }
};

//! Adam with L2 weight decay folded into the gradient.
class Adam
{
public:
    Adam(const ad::ParameterStore& store, double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
        : lr_(lr)
        , weight_decay_(weight_decay)
        , beta1_(beta1)
        , beta2_(beta2)
        , eps_(eps)
        , m_(store.zero_gradients())
        , v_(store.zero_gradients())
    {
    }

    void step(ad::ParameterStore& store, const ad::Gradients& grads)
    {
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, t_);
        const double c2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < store.size(); ++i) {
            Matrix& p     = store[i].value;
            const Matrix g = grads[i] + weight_decay_ * p;
            m_[i]          = beta1_ * m_[i] + (1.0 - beta1_) * g;
            v_[i]          = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseAbs2();
            p.array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
        }
    }

    int steps() const
    {
        return t_;
    }

private:
    double lr_;
    double weight_decay_;
    double beta1_;
    double beta2_;
    double eps_;
    int t_ = 0;
    ad::Gradients m_;
    ad::Gradients v_;
};

struct EpochRecord
{
    int epoch = 0;
    LossBreakdown train;  //!< means over the epoch's training samples
    double val_loss = 0;  //!< validation forecast MAE, normalized units
};

struct TrainingHistory
{
    std::vector<EpochRecord> epochs;
    int best_epoch       = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    int stopped_epoch    = 0;
    bool early_stopped   = false;
};

//! Anything the early-stopping loop can drive.
template <class T>
concept Trainable = requires(T task, int epoch) {
    { task.run_epoch(epoch) } -> std::convertible_to<LossBreakdown>;
    { task.validate() } -> std::convertible_to<double>;
    task.restore(task.snapshot());
};

//! Runs epochs 1..max_epochs, keeps the parameters of the best validation epoch and stops
//! once `patience` epochs pass without strict improvement. Epoch numbers are 1-based.
template <Trainable Task>
TrainingHistory fit_with_early_stopping(Task& task, int max_epochs, int patience,
                                        const std::function<void(const EpochRecord&)>& on_epoch = {})
{
    TrainingHistory hist;
    auto best = task.snapshot();
    for (int epoch = 1; epoch <= max_epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch    = epoch;
        rec.train    = task.run_epoch(epoch);
        rec.val_loss = task.validate();
        if (!std::isfinite(rec.val_loss)) {
            throw DivergenceError(epoch, "validation l_g", rec.val_loss);
        }
        hist.epochs.push_back(rec);
        if (on_epoch) {
            on_epoch(rec);
        }
        hist.stopped_epoch = epoch;
        if (rec.val_loss < hist.best_val_loss) {
            hist.best_val_loss = rec.val_loss;
            hist.best_epoch    = epoch;
            best               = task.snapshot();
        }
        else if (epoch - hist.best_epoch >= patience) {
            hist.early_stopped = true;
            break;
        }
    }
    task.restore(best);
    return hist;
}

//! Recorded losses of one sample, plus the total that is differentiated.
struct SampleLoss
{
    ad::Var total;
    LossBreakdown breakdown;
};

//! Builds the objective on `tape` for one window; `lambda` is the effective weight.
inline SampleLoss sample_objective(ad::Tape& tape, const ForwardGraph& g, const WindowedSample& s, double lambda,
                                   const TrainConfig& cfg)
{
    auto target    = tape.constant(Matrix(s.target));
    auto l_g       = ad::forecast_loss(g.y_hat, target);
    ad::Var total  = l_g;
    double l_d = 0, l_o = 0, l_c = 0;
    if (g.sir) {
        auto prev = tape.constant(Matrix(s.prev_target));
        auto vd   = ad::data_loss(*g.sir, target);
        auto vo   = ad::ode_residual_loss(*g.sir, prev, cfg.residual);
        l_d       = vd.value()(0, 0);
        l_o       = vo.value()(0, 0);
        if (lambda > 0.0) {
            total = ad::add(total, ad::scale(ad::add(vd, vo), lambda));
        }
        if (cfg.conservation_weight > 0.0) {
            auto vc = ad::conservation_loss(*g.sir, cfg.conservation_total);
            l_c     = vc.value()(0, 0);
            total   = ad::add(total, ad::scale(vc, cfg.conservation_weight));
        }
    }
    auto b = combined_loss(l_g.value()(0, 0), l_d, l_o, lambda, l_c, cfg.conservation_weight);
    return {total, b};
}

inline void check_finite(const LossBreakdown& b, int epoch)
{
    const std::pair<const char*, double> terms[] = {
        {"l_g", b.l_g}, {"l_d", b.l_d}, {"l_o", b.l_o}, {"l_c", b.l_c}, {"total", b.total}};
    for (const auto& [name, v] : terms) {
        if (!std::isfinite(v)) {
            throw DivergenceError(epoch, name, v);
        }
    }
}

//! Effective physics-loss weight for the model's variant.
inline double effective_lambda(const ModelConfig& model, const TrainConfig& cfg)
{
    return model.uses_physics_loss() ? cfg.lambda : 0.0;
}

//! Trainable adapter binding a Forecaster to its windows.
class ForecasterTask
{
public:
    ForecasterTask(Forecaster& model, const std::vector<WindowedSample>& train, const std::vector<WindowedSample>& val,
                   const GeoAdjacency& adj, const TrainConfig& cfg)
        : model_(model)
        , train_(train)
        , val_(val)
        , prop_(normalized_laplacian_operator(adj))
        , cfg_(cfg)
        , adam_(model.parameters(), cfg.lr, cfg.weight_decay)
        , rng_(cfg.seed ^ 0x9e3779b97f4a7c15ULL)
        , lambda_(effective_lambda(model.config(), cfg))
        , order_(train.size())
    {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
    }

    LossBreakdown run_epoch(int epoch)
    {
        std::shuffle(order_.begin(), order_.end(), rng_);
        LossBreakdown sum;
        auto& store = model_.parameters();
        const auto batch = static_cast<std::size_t>(cfg_.batch_size);
        for (std::size_t start = 0; start < order_.size(); start += batch) {
            const std::size_t stop = std::min(order_.size(), start + batch);
            const double weight    = 1.0 / static_cast<double>(stop - start);
            auto grads             = store.zero_gradients();
            for (std::size_t k = start; k < stop; ++k) {
                const auto& s = train_[order_[k]];
                ad::Tape tape;
                auto g    = model_.forward(tape, tape.constant(prop_), tape.constant(nn::stack_history(s.history)));
                auto loss = sample_objective(tape, g, s, lambda_, cfg_);
                check_finite(loss.breakdown, epoch);
                tape.backward(loss.total, &grads, weight);
                accumulate(sum, loss.breakdown);
            }
            adam_.step(store, grads);
        }
        return mean_of(sum, order_.size());
    }

    double validate() const
    {
        double total = 0.0;
        for (const auto& s : val_) {
            total += forecast_loss(model_.predict(s.history, prop_).y_hat, s.target);
        }
        return total / static_cast<double>(val_.size());
    }

    std::vector<Matrix> snapshot() const
    {
        return model_.parameters().snapshot();
    }

    void restore(const std::vector<Matrix>& values)
    {
        model_.parameters().restore(values);
    }

private:
    static void accumulate(LossBreakdown& sum, const LossBreakdown& b)
    {
        sum.l_g += b.l_g;
        sum.l_d += b.l_d;
        sum.l_o += b.l_o;
        sum.l_p += b.l_p;
        sum.l_c += b.l_c;
        sum.total += b.total;
        sum.lambda = b.lambda;
    }

    static LossBreakdown mean_of(LossBreakdown sum, std::size_t n)
    {
        const double k = 1.0 / static_cast<double>(n);
        sum.l_g *= k;
        sum.l_d *= k;
        sum.l_o *= k;
        sum.l_p *= k;
        sum.l_c *= k;
        sum.total *= k;
        return sum;
    }

    Forecaster& model_;
    const std::vector<WindowedSample>& train_;
    const std::vector<WindowedSample>& val_;
    Matrix prop_;
    TrainConfig cfg_;
    Adam adam_;
    std::mt19937_64 rng_;
    double lambda_;
    std::vector<std::size_t> order_;
};

//! Xavier-initializes `model` from cfg.seed and trains it; the best validation epoch's
//! parameters are left in the model.
inline TrainingHistory train(Forecaster& model, const std::vector<WindowedSample>& train_windows,
                             const std::vector<WindowedSample>& val_windows, const GeoAdjacency& adj,
                             const TrainConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch = {})
{
    cfg.validate();
    if (train_windows.empty() || val_windows.empty()) {
        throw ConfigError("training and validation windows must be non-empty");
    }
    model.initialize(cfg.seed);
    ForecasterTask task(model, train_windows, val_windows, adj, cfg);
    return fit_with_early_stopping(task, cfg.max_epochs, cfg.patience, on_epoch);
}

struct GridSearchResult
{
    std::size_t best_index = 0;
    std::vector<double> scores;
};

//! Exhaustive search minimizing `score(cfg)` (validation RMSE); ties keep the earliest entry.
template <class Config, class Score>
GridSearchResult grid_search(const std::vector<Config>& grid, Score&& score)
{
    if (grid.empty()) {
        throw ConfigError("grid search needs at least one configuration");
    }
    GridSearchResult r;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        r.scores.push_back(score(grid[i]));
        if (r.scores[i] < r.scores[r.best_index]) {
            r.best_index = i;
        }
    }
    return r;
}

} // namespace epimag
