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

#include <gtest/gtest.h>

#include "epimag/losses.hpp"
#include "test_support.hpp"

using namespace epimag;
using namespace epimag::fixtures;

namespace
{

SIRPrediction prediction(Eigen::Index n, double s, double i, double beta, double gamma, double i_prev = 0.0)
{
    return {Vector::Constant(n, s), Vector::Constant(n, i_prev), Vector::Constant(n, i), Vector::Zero(n),
            Vector::Constant(n, beta), Vector::Constant(n, gamma)};
}

double brute_ode(const SIRPrediction& p, const Vector& prev)
{
    double sum = 0;
    for (Eigen::Index i = 0; i < prev.size(); ++i) {
        sum += std::abs(p.I(i) - prev(i) - (p.beta(i) * p.S(i) * p.I(i) - p.gamma(i) * p.I(i)));
    }
    return sum / static_cast<double>(prev.size());
}

} // namespace

TEST(DataLoss, Oracles)
{
    std::mt19937_64 rng(71);
    const Vector t = random_matrix(6, 1, rng);
    auto p         = prediction(6, 1, 0, 0, 0);
    p.I            = t;
    EXPECT_DOUBLE_EQ(data_loss(p, t), 0.0);
    p.I = t.array() + 1.0;
    EXPECT_NEAR(data_loss(p, t), 1.0, 1e-15);
    p.I = random_matrix(6, 1, rng);
    double oracle = 0;
    for (int i = 0; i < 6; ++i) {
        oracle += std::abs(p.I(i) - t(i)) / 6.0;
    }
    EXPECT_NEAR(data_loss(p, t), oracle, 1e-12);
}

TEST(OdeResidual, Oracles)
{
    EXPECT_NEAR(ode_residual_loss(prediction(1, 1.0, 0.6, 0.5, 0.3), Vector::Constant(1, 0.5)), 0.02, 1e-15);
    // beta * S = gamma and no change in I
    EXPECT_NEAR(ode_residual_loss(prediction(3, 0.6, 0.4, 0.5, 0.3), Vector::Constant(3, 0.4)), 0.0, 1e-15);

    std::mt19937_64 rng(72);
    for (int rep = 0; rep < 50; ++rep) {
        SIRPrediction p{random_matrix(5, 1, rng, 0, 1), random_matrix(5, 1, rng, 0, 1), random_matrix(5, 1, rng, 0, 1),
                        random_matrix(5, 1, rng, 0, 1), random_matrix(5, 1, rng, 0, 1), random_matrix(5, 1, rng, 0, 1)};
        const Vector prev = random_matrix(5, 1, rng, 0, 1);
        EXPECT_NEAR(ode_residual_loss(p, prev), brute_ode(p, prev), 1e-12);
        EXPECT_NEAR(ode_residual_loss(p, prev, ResidualMode::PredictedPrevious), brute_ode(p, p.I_prev), 1e-12);
    }
}

TEST(ForecastLoss, Oracles)
{
    Vector a(2), b(2);
    a << 1.2, 0.6;
    b << 1.0, 1.0;
    EXPECT_NEAR(forecast_loss(a, b), 0.3, 1e-15);
    EXPECT_DOUBLE_EQ(forecast_loss(a, a), 0.0);
    Vector ra(2), rb(2);
    ra << 0.6, 1.2;
    rb << 1.0, 1.0;
    EXPECT_DOUBLE_EQ(forecast_loss(ra, rb), forecast_loss(a, b));
    EXPECT_THROW(forecast_loss(a, Vector::Zero(3)), ShapeError);
}

TEST(CombinedLoss, Oracles)
{
    EXPECT_DOUBLE_EQ(combined_loss(1.0, 0.5, 0.5, 0.5).total, 1.5);
    EXPECT_DOUBLE_EQ(combined_loss(0.7, 0.5, 0.5, 0.0).total, 0.7);
    const auto b = combined_loss(0.7, 0.2, 0.3, 1.0);
    EXPECT_DOUBLE_EQ(b.total, 1.2);
    EXPECT_DOUBLE_EQ(b.l_p, 0.5);
    EXPECT_THROW(combined_loss(1, 1, 1, -0.1), ConfigError);
    EXPECT_DOUBLE_EQ(combined_loss(1.0, 0, 0, 0.5, 0.4, 2.0).total, 1.8);
}

TEST(Losses, GraphFormsAgreeWithPlainForms)
{
    std::mt19937_64 rng(73);
    ad::Tape tape;
    const auto c = [&](Eigen::Index n) { return tape.variable(random_matrix(n, 1, rng, 0, 1)); };
    SirVars v{c(4), c(4), c(4), c(4), c(4), c(4)};
    auto target = tape.constant(random_matrix(4, 1, rng, 0, 1));
    auto prev   = tape.constant(random_matrix(4, 1, rng, 0, 1));
    const auto plain = v.values();
    EXPECT_NEAR(ad::data_loss(v, target).value()(0, 0), data_loss(plain, target.value().col(0)), 1e-15);
    EXPECT_NEAR(ad::ode_residual_loss(v, prev).value()(0, 0), ode_residual_loss(plain, prev.value().col(0)), 1e-15);
    EXPECT_NEAR(ad::conservation_loss(v, 1.0).value()(0, 0), conservation_loss(plain, 1.0), 1e-15);
}

TEST(ResidualMode, Parse)
{
    EXPECT_EQ(parse_residual_mode("observed"), ResidualMode::ObservedPrevious);
    EXPECT_EQ(parse_residual_mode("predicted"), ResidualMode::PredictedPrevious);
    EXPECT_THROW(parse_residual_mode("other"), ConfigError);
}
