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

// Forecast accuracy in real units, and the statistical reference forecasters.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "epimag/data.hpp"

namespace epimag
{

struct MetricReport
{
    double rmse = 0;
    std::optional<double> pcc;  //!< empty when either side has zero variance
    Eigen::Index n_samples = 0;
};

inline double rmse(const Vector& pred, const Vector& truth)
{
    if (pred.size() != truth.size()) {
        throw ShapeError("rmse: size mismatch");
    }
    if (pred.size() == 0) {
        throw ConfigError("rmse: empty input");
    }
    return std::sqrt((pred - truth).squaredNorm() / static_cast<double>(pred.size()));
}

//! Pearson correlation; std::nullopt when either vector is constant.
inline std::optional<double> pcc(const Vector& pred, const Vector& truth)
{
    if (pred.size() != truth.size()) {
        throw ShapeError("pcc: size mismatch");
    }
    if (pred.size() == 0) {
        throw ConfigError("pcc: empty input");
    }
    const Vector dp  = pred.array() - pred.mean();
    const Vector dt  = truth.array() - truth.mean();
    const double sp  = dp.norm();
    const double st  = dt.norm();
    if (sp == 0.0 || st == 0.0) {
        return std::nullopt;
    }
    return std::clamp(dp.dot(dt) / (sp * st), -1.0, 1.0);
}

inline Vector flatten(const Matrix& m)
{
    return Eigen::Map<const Vector>(m.data(), m.size());
}

//! Metrics over all (window, location) cells pooled together.
inline MetricReport evaluate(const Matrix& predicted, const Matrix& truth)
{
    if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols()) {
        throw ShapeError("evaluate: prediction and truth shapes differ");
    }
    const Vector p = flatten(predicted);
    const Vector t = flatten(truth);
    return {rmse(p, t), pcc(p, t), p.size()};
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

enum class BaselineKind
{
    Persistence,  //!< x(t+h) = x(t)
    AR,           //!< per-location least-squares lags
    GAR,          //!< one lag vector shared by all locations
};

inline BaselineKind parse_baseline(const std::string& s)
{
    if (s == "persistence") {
        return BaselineKind::Persistence;
    }
    if (s == "ar") {
        return BaselineKind::AR;
    }
    if (s == "gar") {
        return BaselineKind::GAR;
    }
    throw ConfigError("unknown baseline '" + s + "' (expected persistence, ar or gar)");
}

inline const char* to_string(BaselineKind k)
{
    switch (k) {
    case BaselineKind::Persistence:
        return "persistence";
    case BaselineKind::AR:
        return "ar";
    case BaselineKind::GAR:
        return "gar";
    }
    return "?";
}

struct BaselineForecast
{
    MetricReport report;
    Matrix predicted;  //!< test windows x N, real units
    Matrix truth;
};

namespace detail
{
//! Least squares through the normal equations, falling back to a 1e-6 ridge when singular.
inline Vector solve_least_squares(const Matrix& x, const Vector& y, const std::string& what)
{
    Matrix gram       = x.transpose() * x;
    const Vector rhs  = x.transpose() * y;
    Eigen::FullPivLU<Matrix> lu(gram);
    if (lu.rank() < gram.rows()) {
        warn(what + ": singular normal equations; using ridge 1e-6");
        gram.diagonal().array() += 1e-6;
    }
    return gram.ldlt().solve(rhs);
}

//! Lag features [x(t), x(t-1), ..., x(t-order+1), 1] of one location.
inline Eigen::RowVectorXd lag_features(const Matrix& values, Eigen::Index t, Eigen::Index loc, int order)
{
    Eigen::RowVectorXd f(order + 1);
    for (int k = 0; k < order; ++k) {
        f(k) = values(t - k, loc);
    }
    f(order) = 1.0;
    return f;
}
} // namespace detail

//! Direct h-step baseline fitted on train + validation (normalized with training
//! statistics) and scored on the test windows. `order` defaults to the window length.
inline BaselineForecast run_baseline(const EpidemicSeries& series, BaselineKind kind, int w, int h, int order = 0,
                                     const SplitSpec& split = {}, WindowOptions opts = {})
{
    if (order <= 0) {
        order = w;
    }
    if (order > w) {
        throw ConfigError("baseline order " + std::to_string(order) + " exceeds window " + std::to_string(w));
    }
    const auto parts   = chronological_split(series, split, w + h);
    const auto stats   = fit_normalization(parts.train);
    const Eigen::Index fit_rows = parts.train.steps() + parts.val.steps();
    const Matrix fit   = apply_normalization(series.values.topRows(fit_rows), stats);
    const Matrix test  = apply_normalization(parts.test.values, stats);
    const auto windows = make_windows(test, w, h, opts);
    const Eigen::Index n = series.locations();

    const Eigen::Index fit_samples = fit_rows - h - (order - 1);
    if (kind != BaselineKind::Persistence && fit_samples <= order) {
        throw ConfigError("not enough fitting rows for a lag order of " + std::to_string(order));
    }

    Matrix coef(order + 1, n);
    if (kind == BaselineKind::AR) {
        for (Eigen::Index i = 0; i < n; ++i) {
            Matrix x(fit_samples, order + 1);
            Vector y(fit_samples);
            for (Eigen::Index r = 0; r < fit_samples; ++r) {
                const Eigen::Index t = r + order - 1;
                x.row(r)             = detail::lag_features(fit, t, i, order);
                y(r)                 = fit(t + h, i);
            }
            coef.col(i) = detail::solve_least_squares(x, y, "AR location " + series.location_ids[static_cast<std::size_t>(i)]);
        }
    }
    else if (kind == BaselineKind::GAR) {
        Matrix x(fit_samples * n, order + 1);
        Vector y(fit_samples * n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index r = 0; r < fit_samples; ++r) {
                const Eigen::Index t = r + order - 1;
                x.row(i * fit_samples + r) = detail::lag_features(fit, t, i, order);
                y(i * fit_samples + r)     = fit(t + h, i);
            }
        }
        const Vector shared = detail::solve_least_squares(x, y, "GAR");
        coef                = shared.replicate(1, n);
    }

    const auto rows = static_cast<Eigen::Index>(windows.size());
    Matrix pred(rows, n);
    Matrix truth(rows, n);
    for (Eigen::Index k = 0; k < rows; ++k) {
        const auto& s = windows[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 0; i < n; ++i) {
            if (kind == BaselineKind::Persistence) {
                pred(k, i) = s.history(w - 1, i);
            }
            else {
                pred(k, i) = detail::lag_features(s.history, w - 1, i, order).dot(coef.col(i));
            }
        }
        truth.row(k) = parts.test.values.row(s.anchor + h);
    }
    BaselineForecast out;
    out.predicted = invert_normalization(pred, stats);
    out.truth     = truth;
    out.report    = evaluate(out.predicted, out.truth);
    return out;
}

} // namespace epimag
