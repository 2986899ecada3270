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

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "epimag/autodiff.hpp"
#include "epimag/data.hpp"
#include "epimag/geo_graph.hpp"
#include "epimag/model.hpp"
#include "epimag/trainer.hpp"

namespace epimag::fixtures
{

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) {
        m.data()[k] = u(rng);
    }
    return m;
}

inline double relative_error(double a, double b, double floor = 1e-6)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

//! Collapses any matrix to a smooth scalar: sum(out .* weights).
inline ad::Var weighted_sum(ad::Var out, const Matrix& weights)
{
    auto& tape = out.tape();
    auto prod  = ad::mul(out, tape.constant(weights));
    auto rows  = ad::matmul(tape.constant(Matrix::Ones(1, out.rows())), prod);
    return ad::matmul(rows, tape.constant(Matrix::Ones(out.cols(), 1)));
}

using OpFn = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

//! Worst relative error between reverse-mode and central-difference gradients of
//! weighted_sum(op(inputs)) over every input entry.
inline double op_gradient_error(const OpFn& op, std::vector<Matrix> inputs, std::mt19937_64& rng,
                                double eps = 1e-6)
{
    Matrix weights;
    const auto evaluate = [&](const std::vector<Matrix>& in, std::vector<Matrix>* grads) {
        ad::Tape tape;
        std::vector<ad::Var> vars;
        for (const auto& m : in) {
            vars.push_back(tape.variable(m));
        }
        auto out = op(tape, vars);
        if (weights.size() == 0) {
            weights = random_matrix(out.rows(), out.cols(), rng);
        }
        auto s = weighted_sum(out, weights);
        if (grads) {
            tape.backward(s);
            for (const auto& v : vars) {
                grads->push_back(tape.grad(v));
            }
        }
        return s.value()(0, 0);
    };
    std::vector<Matrix> analytic;
    evaluate(inputs, &analytic);
    double worst = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (Eigen::Index k = 0; k < inputs[i].size(); ++k) {
            const double keep   = inputs[i].data()[k];
            inputs[i].data()[k] = keep + eps;
            const double up     = evaluate(inputs, nullptr);
            inputs[i].data()[k] = keep - eps;
            const double down   = evaluate(inputs, nullptr);
            inputs[i].data()[k] = keep;
            worst = std::max(worst, relative_error(analytic[i].data()[k], (up - down) / (2 * eps)));
        }
    }
    return worst;
}

enum class LossTerm
{
    Forecast,
    Data,
    OdeResidual,
    Total
};

//! Value of one loss term for one window; fills `grads` when given.
inline double loss_term(const Forecaster& model, const WindowedSample& s, const Matrix& prop, LossTerm term,
                        const TrainConfig& cfg, ad::Gradients* grads = nullptr, Matrix* mag = nullptr)
{
    ad::Tape tape;
    auto g    = model.forward(tape, tape.constant(prop), tape.constant(nn::stack_history(s.history)));
    auto loss = sample_objective(tape, g, s, effective_lambda(model.config(), cfg), cfg);
    ad::Var v = loss.total;
    if (term != LossTerm::Total) {
        auto target = tape.constant(Matrix(s.target));
        if (term == LossTerm::Forecast) {
            v = ad::forecast_loss(g.y_hat, target);
        }
        else if (term == LossTerm::Data) {
            v = ad::data_loss(*g.sir, target);
        }
        else {
            v = ad::ode_residual_loss(*g.sir, tape.constant(Matrix(s.prev_target)), cfg.residual);
        }
    }
    if (mag && g.affinity) {
        *mag = g.affinity->value();
    }
    if (grads) {
        tape.backward(v, grads);
    }
    return v.value()(0, 0);
}

inline Matrix path_adjacency(Eigen::Index n)
{
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        a(i, i + 1) = a(i + 1, i) = 1.0;
    }
    return a;
}

inline Matrix random_adjacency(Eigen::Index n, std::mt19937_64& rng, double p = 0.4)
{
    std::bernoulli_distribution edge(p);
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (edge(rng)) {
                a(i, j) = a(j, i) = 1.0;
            }
        }
    }
    return a;
}

inline std::vector<int> random_permutation(int n, std::mt19937_64& rng)
{
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        p[static_cast<std::size_t>(i)] = i;
    }
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

//! Columns (locations) reordered: out.col(i) = m.col(perm[i]).
inline Matrix permute_cols(const Matrix& m, const std::vector<int>& perm)
{
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.cols(); ++i) {
        out.col(i) = m.col(perm[static_cast<std::size_t>(i)]);
    }
    return out;
}

inline Matrix permute_rows(const Matrix& m, const std::vector<int>& perm)
{
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out.row(i) = m.row(perm[static_cast<std::size_t>(i)]);
    }
    return out;
}

//! A small model configuration used by gradient and equivariance checks.
inline ModelConfig small_model_config(Variant v = Variant::Full)
{
    ModelConfig c;
    c.window        = 10;
    c.st_dim        = 8;
    c.head_dim      = 4;
    c.htgn_dim      = 8;
    c.htgn_channels = 6;
    c.variant       = v;
    return c;
}

inline WindowedSample random_sample(Eigen::Index window, Eigen::Index n, std::mt19937_64& rng)
{
    WindowedSample s;
    s.history     = random_matrix(window, n, rng, 0.0, 1.0);
    s.target      = random_matrix(n, 1, rng, 0.0, 1.0);
    s.prev_target = random_matrix(n, 1, rng, 0.0, 1.0);
    s.anchor      = window - 1;
    return s;
}

} // namespace epimag::fixtures
