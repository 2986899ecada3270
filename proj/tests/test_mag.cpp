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

#include "epimag/mag.hpp"
#include "test_support.hpp"

using namespace epimag;
using namespace epimag::fixtures;

TEST(CosineAffinity, HandOracles)
{
    Matrix e(3, 2);
    e << 1, 0, 1, 1, 0, 1;
    const Matrix m = cosine_affinity(e);
    EXPECT_NEAR(m(0, 1), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_DOUBLE_EQ(m(0, 2), 0.0);
    EXPECT_DOUBLE_EQ(m(1, 1), 1.0);

    Matrix same(2, 3);
    same << 0.3, -2, 5, 0.3, -2, 5;
    EXPECT_DOUBLE_EQ(cosine_affinity(same)(0, 1), 1.0);
}

TEST(CosineAffinity, NegativeSimilarityClamped)
{
    Matrix e(2, 2);
    e << 1, 0, -1, 0.1;
    EXPECT_DOUBLE_EQ(cosine_affinity(e)(0, 1), 0.0);
}

TEST(CosineAffinity, ZeroRowsWarnAndIsolate)
{
    int warnings = 0;
    set_warning_sink([&](const std::string&) { ++warnings; });
    Matrix e(3, 2);
    e << 1, 0, 0, 0, 1, 1;
    const Matrix m = cosine_affinity(e);
    set_warning_sink({});
    EXPECT_EQ(warnings, 1);
    EXPECT_DOUBLE_EQ(m(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(m(1, 1), 1.0);
}

TEST(NormalizeAffinity, HandOracles)
{
    EXPECT_DOUBLE_EQ(normalize_affinity(Matrix::Identity(1, 1))(0, 0), 1.0);
    EXPECT_TRUE(normalize_affinity(Matrix::Ones(2, 2)).isApprox(Matrix::Constant(2, 2, 0.5), 1e-15));
    Matrix z = Matrix::Zero(2, 2);
    z(0, 0)  = 4.0;
    const Matrix n = normalize_affinity(z);
    EXPECT_DOUBLE_EQ(n(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(n(1, 1), 0.0);
}

TEST(NormalizeAffinity, SymmetricAndBounded)
{
    std::mt19937_64 rng(61);
    for (int rep = 0; rep < 100; ++rep) {
        const auto n = 1 + static_cast<Eigen::Index>(rng() % 20);
        Matrix m     = random_matrix(n, n, rng, 0, 1);
        m            = ((m + m.transpose()) / 2).eval();
        const Matrix out = normalize_affinity(m);
        EXPECT_LT((out - out.transpose()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE(out.maxCoeff(), 1.0 + 1e-12);
    }
}

TEST(Sparsify, HandOracles)
{
    Matrix m(2, 2);
    m << 0.5, 0.1, 0.1, 0.5;
    Matrix expected(2, 2);
    expected << 0.5, 0, 0, 0.5;
    EXPECT_EQ(sparsify(m, 0.2).matrix, expected);
    EXPECT_EQ(sparsify(m, 0.0).matrix, m);
    EXPECT_TRUE(sparsify(m, 1.0).matrix.isZero());
    EXPECT_DOUBLE_EQ(sparsify(m, 0.3).threshold_used, 0.3);
    EXPECT_THROW(sparsify(m, -0.1), ConfigError);
    EXPECT_THROW(sparsify(m, 1.01), ConfigError);
}

TEST(MagPipeline, Properties)
{
    std::mt19937_64 rng(62);
    for (int rep = 0; rep < 100; ++rep) {
        const auto n = 2 + static_cast<Eigen::Index>(rng() % 30);
        const Matrix e = random_matrix(n, 6, rng, -1, 1);
        Eigen::Index previous = n * n + 1;
        for (int k = 0; k <= 8; ++k) {
            const double delta = 0.1 * k;
            const auto g       = build_affinity_graph(e, delta);
            EXPECT_LT((g.matrix - g.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-9);
            EXPECT_GE(g.matrix.minCoeff(), 0.0);
            EXPECT_LE(g.matrix.maxCoeff(), 1.0);
            const auto nz = count_nonzero(g.matrix);
            EXPECT_LE(nz, previous);
            previous = nz;
            EXPECT_EQ(sparsify(g.matrix, delta).matrix, g.matrix);
        }
    }
}

TEST(MagPipeline, GradientsMatchFiniteDifferences)
{
    std::mt19937_64 rng(63);
    auto cosine = [](ad::Tape&, const std::vector<ad::Var>& v) { return ad::cosine_affinity(v[0]); };
    auto norm   = [](ad::Tape&, const std::vector<ad::Var>& v) { return ad::normalize_affinity(v[0]); };
    auto loops  = [](ad::Tape&, const std::vector<ad::Var>& v) { return ad::self_loop_propagation(v[0]); };
    for (int rep = 0; rep < 5; ++rep) {
        // positive entries keep the clamp inactive so the map is smooth
        EXPECT_LT(op_gradient_error(cosine, {random_matrix(5, 4, rng, 0.1, 1.0)}, rng), 1e-6);
        Matrix m = random_matrix(5, 5, rng, 0.1, 1.0);
        EXPECT_LT(op_gradient_error(norm, {m}, rng), 1e-6);
        EXPECT_LT(op_gradient_error(loops, {m}, rng), 1e-6);
    }
}

TEST(MagPipeline, SparsifyGradientMasked)
{
    ad::Tape tape;
    Matrix m(2, 2);
    m << 0.5, 0.1, 0.1, 0.5;
    auto x = tape.variable(m);
    tape.backward(ad::mean_abs(ad::sparsify(x, 0.2)));
    const Matrix g = tape.grad(x);
    EXPECT_DOUBLE_EQ(g(0, 0), 0.25);
    EXPECT_DOUBLE_EQ(g(0, 1), 0.0);
}
