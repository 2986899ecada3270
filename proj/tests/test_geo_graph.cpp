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

#include <Eigen/Eigenvalues>

#include "epimag/geo_graph.hpp"
#include "test_support.hpp"

using namespace epimag;

TEST(GeoAdjacency, SmallestGraph)
{
    Matrix a(2, 2);
    a << 0, 1, 1, 0;
    EXPECT_EQ(GeoAdjacency::from_matrix(a).size(), 2);
}

TEST(GeoAdjacency, RejectsNonBinaryAndNonSquare)
{
    Matrix a(2, 2);
    a << 0, 0.5, 0.5, 0;
    EXPECT_THROW(GeoAdjacency::from_matrix(a), DataError);
    EXPECT_THROW(GeoAdjacency::from_matrix(Matrix::Zero(2, 3)), DataError);
}

TEST(GeoAdjacency, RepairsWithWarnings)
{
    std::vector<std::string> warnings;
    set_warning_sink([&](const std::string& m) { warnings.push_back(m); });
    Matrix a(3, 3);
    a << 1, 1, 0, 0, 0, 1, 0, 0, 0;
    const auto g = GeoAdjacency::from_matrix(a);
    set_warning_sink({});
    EXPECT_EQ(warnings.size(), 2u);
    EXPECT_EQ(g.matrix(), g.matrix().transpose());
    EXPECT_DOUBLE_EQ(g.matrix()(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(g.matrix()(0, 0), 0.0);
}

TEST(PropagationOperator, HandOracles)
{
    const Matrix single = normalized_laplacian_operator(GeoAdjacency::from_matrix(Matrix::Zero(1, 1)));
    EXPECT_DOUBLE_EQ(single(0, 0), 1.0);

    Matrix a(2, 2);
    a << 0, 1, 1, 0;
    const Matrix p = normalized_laplacian_operator(GeoAdjacency::from_matrix(a));
    EXPECT_TRUE(p.isApprox(Matrix::Constant(2, 2, 0.5), 1e-15));
}

TEST(PropagationOperator, SymmetricNonnegativeContractive)
{
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const auto n   = 2 + static_cast<Eigen::Index>(rng() % 12);
        const Matrix p = normalized_laplacian_operator(GeoAdjacency::from_matrix(fixtures::random_adjacency(n, rng)));
        EXPECT_LT((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_GE(p.minCoeff(), 0.0);
        Eigen::SelfAdjointEigenSolver<Matrix> es(p);
        EXPECT_LE(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0 + 1e-12);
    }
}

TEST(GeoAdjacency, PermutationMatchesOperator)
{
    std::mt19937_64 rng(12);
    const auto g    = GeoAdjacency::from_matrix(fixtures::random_adjacency(7, rng));
    const auto perm = fixtures::random_permutation(7, rng);
    const Matrix p  = normalized_laplacian_operator(g);
    const Matrix pp = normalized_laplacian_operator(g.permuted(perm));
    EXPECT_LT((fixtures::permute_cols(fixtures::permute_rows(p, perm), perm) - pp).cwiseAbs().maxCoeff(), 1e-15);
}
