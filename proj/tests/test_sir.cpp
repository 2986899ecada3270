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

#include "epimag/sir.hpp"

using namespace epimag;
using namespace epimag::sir;

namespace
{

State single(double s, double i)
{
    return {Vector::Constant(1, s), Vector::Constant(1, i), Vector::Constant(1, 1.0 - s - i)};
}

SimulationSpec constant_spec(double beta, double gamma, double i0, int weeks, int substeps = 1)
{
    SimulationSpec spec;
    spec.locations        = 2;
    spec.weeks            = weeks;
    spec.beta             = [beta](int, int) { return beta; };
    spec.gamma            = [gamma](int, int) { return gamma; };
    spec.initial_infected = Vector::Constant(2, i0);
    spec.population       = Vector::Constant(2, 1e5);
    spec.substeps         = substeps;
    return spec;
}

} // namespace

TEST(SirStep, NoDynamicsIsIdentity)
{
    const auto s0 = single(0.7, 0.2);
    const auto s1 = step(s0, Vector::Zero(1), Vector::Zero(1), 1.0);
    EXPECT_DOUBLE_EQ(s1.I(0), 0.2);
    EXPECT_DOUBLE_EQ(s1.S(0), 0.7);
}

TEST(SirStep, RecoveryOnlyDecay)
{
    const auto s1 = step(single(0.5, 0.5), Vector::Zero(1), Vector::Constant(1, 0.1), 1.0);
    EXPECT_NEAR(s1.I(0), 0.5 * std::exp(-0.1), 1e-6);
}

TEST(SirStep, NoSusceptiblesMeansNoGrowth)
{
    auto s = single(0.0, 0.3);
    for (int t = 0; t < 30; ++t) {
        const auto next = step(s, Vector::Constant(1, 0.9), Vector::Constant(1, 0.05), 1.0);
        EXPECT_LE(next.I(0), s.I(0));
        s = next;
    }
}

TEST(SirStep, RejectsBadRates)
{
    EXPECT_THROW(step(single(0.5, 0.5), Vector::Constant(1, -0.1), Vector::Zero(1), 1.0), ConfigError);
    EXPECT_THROW(step(single(0.5, 0.5), Vector::Zero(1), Vector::Constant(1, -1.5), 1.0), ConfigError);
    EXPECT_THROW(step(single(0.5, 0.5), Vector::Zero(1), Vector::Zero(1), 0.0), ConfigError);
}

TEST(Simulate, ClassicEpidemicCurve)
{
    const auto r = simulate(constant_spec(0.3, 0.1, 0.01, 200));
    const Vector i = r.trajectory.I.col(0);
    Eigen::Index peak = 0;
    i.maxCoeff(&peak);
    EXPECT_GT(peak, 0);
    EXPECT_LT(peak, 199);
    for (Eigen::Index t = 1; t <= peak; ++t) {
        EXPECT_GE(i(t), i(t - 1));
    }
    for (Eigen::Index t = peak + 1; t < i.size(); ++t) {
        EXPECT_LE(i(t), i(t - 1));
    }
    EXPECT_EQ(r.trajectory.I.col(0), r.trajectory.I.col(1));
    EXPECT_EQ(r.counts.values.col(0), r.counts.values.col(1));
}

TEST(Simulate, StepSizeConvergence)
{
    const auto coarse = simulate(constant_spec(0.3, 0.1, 0.01, 200, 1));
    const auto fine   = simulate(constant_spec(0.3, 0.1, 0.01, 200, 10));
    EXPECT_LT((coarse.trajectory.I - fine.trajectory.I).cwiseAbs().maxCoeff(), 1e-4);
    EXPECT_LT((coarse.trajectory.S - fine.trajectory.S).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Simulate, Conservation)
{
    for (const auto& spec : {constant_spec(0.3, 0.1, 0.01, 200), default_benchmark()}) {
        const auto r     = simulate(spec);
        const Matrix sum = r.trajectory.S + r.trajectory.I + r.trajectory.R;
        EXPECT_LT((sum.array() - 1.0).abs().maxCoeff(), 1e-9);
        EXPECT_GE(r.trajectory.I.minCoeff(), 0.0);
    }
}

TEST(Simulate, CountsAreRoundedInfected)
{
    const auto r = simulate(constant_spec(0.3, 0.1, 0.01, 50));
    EXPECT_DOUBLE_EQ(r.counts.values(0, 0), 1000.0);
    EXPECT_EQ(r.counts.values, (r.trajectory.I * 1e5).array().round().matrix());
}

TEST(Simulate, InvalidSpecs)
{
    auto spec = constant_spec(0.3, 0.1, 0.01, 50);
    spec.initial_infected = Vector::Constant(3, 0.01);
    EXPECT_THROW(simulate(spec), ShapeError);
    spec       = constant_spec(0.3, 0.1, 0.01, 50);
    spec.beta  = {};
    EXPECT_THROW(simulate(spec), ConfigError);
    EXPECT_THROW(simulate(constant_spec(0.3, 0.1, 1.5, 50)), ConfigError);
}

TEST(DefaultBenchmark, Shape)
{
    const auto spec = default_benchmark();
    const auto r    = simulate(spec);
    EXPECT_EQ(r.counts.steps(), 200);
    EXPECT_EQ(r.counts.locations(), 5);
    EXPECT_EQ(r.trajectory.gamma, Matrix::Constant(200, 5, 0.2));
    // recurring seasons keep the test span active
    EXPECT_GT(r.counts.values.bottomRows(40).maxCoeff(), 0.25 * r.counts.values.topRows(120).maxCoeff());
    EXPECT_EQ(default_benchmark(7).population, spec.population);
    EXPECT_NE(default_benchmark(8).population, spec.population);
    const Matrix a = default_benchmark_adjacency();
    EXPECT_EQ(a.sum(), 8.0);
}
