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

// Training objective: forecast MAE, the physics loss (infected data term plus the dI/dt
// residual of the time-varying SIR equations) and their weighted combination.

#include <string>

#include "epimag/eiel.hpp"

namespace epimag
{

//! Discretization of dI/dt over one week.
enum class ResidualMode
{
    ObservedPrevious,   //!< I(t+h) - x(t+h-1), the observed previous week
    PredictedPrevious,  //!< I(t+h) - I_prev(t+h-1), both from the infected head
};

inline ResidualMode parse_residual_mode(const std::string& s)
{
    if (s == "observed") {
        return ResidualMode::ObservedPrevious;
    }
    if (s == "predicted") {
        return ResidualMode::PredictedPrevious;
    }
    throw ConfigError("unknown residual mode '" + s + "' (expected observed or predicted)");
}

inline const char* to_string(ResidualMode m)
{
    return m == ResidualMode::ObservedPrevious ? "observed" : "predicted";
}

struct LossBreakdown
{
    double l_g    = 0;
    double l_d    = 0;
    double l_o    = 0;
    double l_p    = 0;
    double total  = 0;
    double lambda = 0;
    double l_c    = 0;  //!< optional population-conservation residual, weighted separately
};

inline void check_lambda(double lambda)
{
    if (!(lambda >= 0.0)) {
        throw ConfigError("loss weight lambda must be >= 0, got " + std::to_string(lambda));
    }
}

inline double forecast_loss(const Vector& y_hat, const Vector& target)
{
    if (y_hat.size() != target.size()) {
        throw ShapeError("forecast_loss: size mismatch");
    }
    return (y_hat - target).cwiseAbs().mean();
}

inline double data_loss(const SIRPrediction& sir, const Vector& target)
{
    return forecast_loss(sir.I, target);
}

inline double ode_residual_loss(const SIRPrediction& sir, const Vector& prev_target,
                                ResidualMode mode = ResidualMode::ObservedPrevious)
{
    if (sir.I.size() != prev_target.size()) {
        throw ShapeError("ode_residual_loss: size mismatch");
    }
    const Vector& previous = mode == ResidualMode::ObservedPrevious ? prev_target : sir.I_prev;
    const Vector d_infected = sir.I - previous;
    const Vector rhs = sir.beta.cwiseProduct(sir.S).cwiseProduct(sir.I) - sir.gamma.cwiseProduct(sir.I);
    return (d_infected - rhs).cwiseAbs().mean();
}

//! mean |S + I + R - total|; off unless a conservation weight is configured.
inline double conservation_loss(const SIRPrediction& sir, double total)
{
    return ((sir.S + sir.I + sir.R).array() - total).abs().mean();
}

inline LossBreakdown combined_loss(double l_g, double l_d, double l_o, double lambda, double l_c = 0.0,
                                   double conservation_weight = 0.0)
{
    check_lambda(lambda);
    LossBreakdown b;
    b.l_g    = l_g;
    b.l_d    = l_d;
    b.l_o    = l_o;
    b.l_p    = l_d + l_o;
    b.lambda = lambda;
    b.l_c    = l_c;
    b.total  = l_g + lambda * b.l_p + conservation_weight * l_c;
    return b;
}

namespace ad
{

inline Var forecast_loss(Var y_hat, Var target)
{
    return mean_abs(sub(y_hat, target));
}

inline Var data_loss(const SirVars& sir, Var target)
{
    return mean_abs(sub(sir.I, target));
}

inline Var ode_residual_loss(const SirVars& sir, Var prev_target, ResidualMode mode = ResidualMode::ObservedPrevious)
{
    Var previous = mode == ResidualMode::ObservedPrevious ? prev_target : sir.I_prev;
    Var growth   = mul(mul(sir.beta, sir.S), sir.I);
    Var recovery = mul(sir.gamma, sir.I);
    return mean_abs(sub(sub(sir.I, previous), sub(growth, recovery)));
}

inline Var conservation_loss(const SirVars& sir, double total)
{
    Var sum = add(add(sir.S, sir.I), sir.R);
    return mean_abs(sub(sum, sum.tape().constant(Matrix::Constant(sum.rows(), 1, total))));
}

} // namespace ad

} // namespace epimag
