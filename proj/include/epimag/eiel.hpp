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

// Epidemiology-informed embeddings: five independent fully connected stacks map each
// location's ST embedding to per-variable embeddings for S, I, R, beta and gamma, and
// one output layer per head predicts the variable itself.

#include <array>
#include <string>
#include <vector>

#include "epimag/layers.hpp"

namespace epimag
{

enum class SirHead : int
{
    Susceptible = 0,
    Infected    = 1,
    Recovered   = 2,
    InfectionRate = 3,
    RecoveryRate  = 4,
};

inline constexpr int kSirHeads = 5;

//! Per-location SIR quantities at the target step, in normalized infection units.
struct SIRPrediction
{
    Vector S;
    Vector I_prev;  //!< infected at t+h-1
    Vector I;       //!< infected at t+h
    Vector R;
    Vector beta;
    Vector gamma;
};

//! Graph-side handles of an SIRPrediction, each N x 1.
struct SirVars
{
    ad::Var S;
    ad::Var I_prev;
    ad::Var I;
    ad::Var R;
    ad::Var beta;
    ad::Var gamma;

    SIRPrediction values() const
    {
        return {S.value().col(0), I_prev.value().col(0), I.value().col(0),
                R.value().col(0), beta.value().col(0),   gamma.value().col(0)};
    }
};

class EIEL
{
public:
    EIEL() = default;

    EIEL(ad::ParameterStore& store, Eigen::Index in_dim, Eigen::Index head_dim, int layers = 2)
        : head_dim_(head_dim)
    {
        static constexpr std::array<const char*, kSirHeads> names{"S", "I", "R", "beta", "gamma"};
        for (int j = 0; j < kSirHeads; ++j) {
            const std::string prefix = std::string("eiel.") + names[static_cast<std::size_t>(j)];
            std::vector<nn::Dense> stack;
            for (int l = 0; l < layers; ++l) {
                stack.emplace_back(store, prefix + ".hidden" + std::to_string(l), l == 0 ? in_dim : head_dim, head_dim);
            }
            hidden_[static_cast<std::size_t>(j)] = std::move(stack);
            // the infected head also predicts the previous step for the derivative term
            output_[static_cast<std::size_t>(j)] =
                nn::Dense(store, prefix + ".output", head_dim, j == static_cast<int>(SirHead::Infected) ? 2 : 1);
        }
    }

    Eigen::Index head_dim() const
    {
        return head_dim_;
    }

    //! N x D1 -> N x 5*D2, blocks ordered (S, I, R, beta, gamma).
    ad::Var embed(ad::Tape& tape, const ad::ParameterStore& store, ad::Var st) const
    {
        std::vector<ad::Var> blocks;
        for (const auto& stack : hidden_) {
            ad::Var h = st;
            for (const auto& layer : stack) {
                h = ad::tanh(layer(tape, store, h));
            }
            blocks.push_back(h);
        }
        return ad::concat_cols(blocks);
    }

    //! Softplus for S, I_prev, I, R; logistic sigmoid for beta and gamma.
    SirVars predict(ad::Tape& tape, const ad::ParameterStore& store, ad::Var embedding) const
    {
        if (embedding.cols() != kSirHeads * head_dim_) {
            throw ShapeError("EIEL::predict: embedding has " + std::to_string(embedding.cols()) + " columns, expected " +
                             std::to_string(kSirHeads * head_dim_));
        }
        const auto head = [&](SirHead j) {
            const auto k = static_cast<std::size_t>(j);
            return output_[k](tape, store, ad::slice_cols(embedding, static_cast<Eigen::Index>(k) * head_dim_, head_dim_));
        };
        SirVars out;
        out.S        = ad::softplus(head(SirHead::Susceptible));
        auto infected = ad::softplus(head(SirHead::Infected));
        out.I_prev   = ad::slice_cols(infected, 0, 1);
        out.I        = ad::slice_cols(infected, 1, 1);
        out.R        = ad::softplus(head(SirHead::Recovered));
        out.beta     = ad::sigmoid(head(SirHead::InfectionRate));
        out.gamma    = ad::sigmoid(head(SirHead::RecoveryRate));
        return out;
    }

    Matrix embed(const Matrix& st, const ad::ParameterStore& store) const
    {
        ad::Tape tape;
        return embed(tape, store, tape.constant(st)).value();
    }

    SIRPrediction predict_sir(const Matrix& embedding, const ad::ParameterStore& store) const
    {
        ad::Tape tape;
        return predict(tape, store, tape.constant(embedding)).values();
    }

    //! Parameter handles owned by head j (hidden layers then output layer).
    std::vector<std::size_t> head_parameters(SirHead j) const
    {
        std::vector<std::size_t> ids;
        const auto k = static_cast<std::size_t>(j);
        for (const auto& layer : hidden_[k]) {
            ids.push_back(layer.weight);
            ids.push_back(layer.bias);
        }
        ids.push_back(output_[k].weight);
        ids.push_back(output_[k].bias);
        return ids;
    }

private:
    Eigen::Index head_dim_ = 0;
    std::array<std::vector<nn::Dense>, kSirHeads> hidden_;
    std::array<nn::Dense, kSirHeads> output_;
};

} // namespace epimag
