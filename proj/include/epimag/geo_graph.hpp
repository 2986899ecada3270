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

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "epimag/common.hpp"
#include "epimag/data.hpp"

namespace epimag
{

//! Binary symmetric N x N adjacency with zero diagonal. Self-loops are added by consumers.
class GeoAdjacency
{
public:
    GeoAdjacency() = default;

    //! Validates a 0/1 square matrix; an asymmetric input is symmetrized by logical OR with
    //! a warning, and a nonzero diagonal is cleared with a warning.
    static GeoAdjacency from_matrix(Matrix m)
    {
        if (m.rows() != m.cols() || m.rows() == 0) {
            throw DataError("adjacency must be a non-empty square matrix, got " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
        }
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                const double v = m(r, c);
                if (v != 0.0 && v != 1.0) {
                    throw DataError("adjacency entry (" + std::to_string(r) + "," + std::to_string(c) +
                                    ") = " + std::to_string(v) + " is not 0 or 1");
                }
            }
        }
        if (m != m.transpose()) {
            warn("adjacency is not symmetric; symmetrizing by logical OR");
            m = m.cwiseMax(m.transpose());
        }
        if (m.diagonal().any()) {
            warn("adjacency has self-loops; clearing the diagonal");
            m.diagonal().setZero();
        }
        GeoAdjacency a;
        a.matrix_ = std::move(m);
        return a;
    }

    const Matrix& matrix() const
    {
        return matrix_;
    }
    Eigen::Index size() const
    {
        return matrix_.rows();
    }

    //! Same graph with nodes relabelled: result(i, j) = this(perm[i], perm[j]).
    GeoAdjacency permuted(const std::vector<int>& perm) const
    {
        GeoAdjacency a;
        a.matrix_.resize(size(), size());
        for (Eigen::Index i = 0; i < size(); ++i) {
            for (Eigen::Index j = 0; j < size(); ++j) {
                a.matrix_(i, j) = matrix_(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
            }
        }
        return a;
    }

private:
    Matrix matrix_;
};

//! Adjacency CSV: N rows of N comma-separated 0/1 values, no header.
inline GeoAdjacency load_adjacency(const std::filesystem::path& path, std::optional<Eigen::Index> expected_size = {})
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    Matrix m = detail::read_numeric_rows(in, path.string(), 1, -1, nullptr);
    auto adj = GeoAdjacency::from_matrix(std::move(m));
    if (expected_size && adj.size() != *expected_size) {
        throw DataError(path.string() + ": adjacency has " + std::to_string(adj.size()) + " nodes, dataset has " +
                        std::to_string(*expected_size) + " locations");
    }
    return adj;
}

inline void save_adjacency(const std::filesystem::path& path, const GeoAdjacency& adj)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    const auto& m = adj.matrix();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out << (c ? "," : "") << static_cast<int>(m(r, c));
        }
        out << '\n';
    }
}

//! Graph-convolution propagation matrix D^{-1/2} (A + I) D^{-1/2}, D the degree matrix of A + I.
inline Matrix normalized_laplacian_operator(const GeoAdjacency& adj)
{
    const Eigen::Index n = adj.size();
    Matrix a             = adj.matrix() + Matrix::Identity(n, n);
    const Vector inv_sqrt_deg = a.rowwise().sum().cwiseSqrt().cwiseInverse();
    return inv_sqrt_deg.asDiagonal() * a * inv_sqrt_deg.asDiagonal();
}

} // namespace epimag
