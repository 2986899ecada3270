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

// Mechanistic affinity graph: cosine similarity between epidemiology-informed location
// embeddings, negative values clamped to zero, symmetric degree normalization, and
// threshold sparsification. Plain-matrix versions serve inspection and tests; the ad::
// versions reuse the same forward code and add hand-derived backward passes.

#include <cmath>
#include <string>
#include <vector>

#include "epimag/autodiff.hpp"

namespace epimag
{

struct AffinityGraph
{
    Matrix matrix;
    double threshold_used = 0.0;
};

//! m_ij = max(0, cos(h_i, h_j)), m_ii = 1. Zero-norm rows get zero off-diagonal entries.
inline Matrix cosine_affinity(const Matrix& embedding, bool warn_on_zero_rows = true)
{
    const Eigen::Index n = embedding.rows();
    Matrix unit          = embedding;
    int zero_rows        = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = embedding.row(i).norm();
        if (norm > 0.0) {
            unit.row(i) /= norm;
        }
        else {
            unit.row(i).setZero();
            ++zero_rows;
        }
    }
    if (zero_rows > 0 && warn_on_zero_rows) {
        warn("cosine_affinity: " + std::to_string(zero_rows) + " zero-norm embedding row(s); treating as unrelated");
    }
    Matrix m = (unit * unit.transpose()).cwiseMax(0.0);
    // rounding can push self-similarity of unit rows a hair past 1
    m = m.cwiseMin(1.0);
    m.diagonal().setOnes();
    return m;
}

//! D^{-1/2} M D^{-1/2} with D_ii = sum_j M_ij; zero-degree rows stay zero.
inline Matrix normalize_affinity(const Matrix& m)
{
    if (m.rows() != m.cols()) {
        throw ShapeError("normalize_affinity: matrix is not square");
    }
    const Vector degree = m.rowwise().sum();
    const Vector scale  = degree.unaryExpr([](double d) { return d > 0.0 ? 1.0 / std::sqrt(d) : 0.0; });
    return scale.asDiagonal() * m * scale.asDiagonal();
}

inline void check_threshold(double delta)
{
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw ConfigError("sparsity threshold must lie in [0, 1], got " + std::to_string(delta));
    }
}

//! Entries below delta become 0; the rest are kept verbatim. The diagonal is not exempt.
inline AffinityGraph sparsify(const Matrix& m, double delta)
{
    check_threshold(delta);
    AffinityGraph g;
    g.matrix         = m.unaryExpr([delta](double v) { return v >= delta ? v : 0.0; });
    g.threshold_used = delta;
    return g;
}

inline AffinityGraph build_affinity_graph(const Matrix& embedding, double delta)
{
    return sparsify(normalize_affinity(cosine_affinity(embedding)), delta);
}

inline Eigen::Index count_nonzero(const Matrix& m)
{
    return (m.array() != 0.0).count();
}

namespace ad
{

inline Var cosine_affinity(Var embedding)
{
    const Matrix& e      = embedding.value();
    const Eigen::Index n = e.rows();
    Vector norms         = e.rowwise().norm();
    Matrix out           = epimag::cosine_affinity(e);
    return embedding.tape().record(out, {embedding}, [embedding, norms, out, n](Tape& t, const Matrix& g) {
        const Matrix& e = embedding.value();
        Matrix unit     = e;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (norms(i) > 0.0) {
                unit.row(i) /= norms(i);
            }
            else {
                unit.row(i).setZero();
            }
        }
        // only live off-diagonal entries carry gradient: the diagonal is pinned at 1 and
        // clamped (or saturated) entries are locally constant
        Matrix gc = Matrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i != j && out(i, j) > 0.0 && out(i, j) < 1.0) {
                    gc(i, j) = g(i, j);
                }
            }
        }
        const Matrix du = (gc + gc.transpose()) * unit;
        Matrix de       = Matrix::Zero(e.rows(), e.cols());
        for (Eigen::Index i = 0; i < n; ++i) {
            if (norms(i) > 0.0) {
                de.row(i) = (du.row(i) - unit.row(i) * unit.row(i).dot(du.row(i))) / norms(i);
            }
        }
        t.accumulate(embedding, de);
    });
}

inline Var normalize_affinity(Var m)
{
    const Vector degree = m.value().rowwise().sum();
    const Vector scale  = degree.unaryExpr([](double d) { return d > 0.0 ? 1.0 / std::sqrt(d) : 0.0; });
    return m.tape().record(epimag::normalize_affinity(m.value()), {m}, [m, scale](Tape& t, const Matrix& g) {
        const Matrix& mv = m.value();
        Matrix dm        = scale.asDiagonal() * g * scale.asDiagonal();
        // scale_i appears in row i and column i of the output
        const Matrix gm   = g.cwiseProduct(mv);
        const Vector dscale = gm * scale + gm.transpose() * scale;
        const Vector ddegree = (dscale.array() * -0.5 * scale.array().cube()).matrix();
        dm.colwise() += ddegree;
        t.accumulate(m, dm);
    });
}

inline Var sparsify(Var m, double delta)
{
    check_threshold(delta);
    Matrix mask = m.value().unaryExpr([delta](double v) { return v >= delta ? 1.0 : 0.0; });
    return m.tape().record(m.value().cwiseProduct(mask), {m}, [m, mask](Tape& t, const Matrix& g) {
        t.accumulate(m, g.cwiseProduct(mask));
    });
}

//! Renormalized propagation over M + I, so every node keeps its own signal.
inline Var self_loop_propagation(Var m)
{
    const Eigen::Index n = m.rows();
    return normalize_affinity(add(m, m.tape().constant(Matrix::Identity(n, n))));
}

} // namespace ad

} // namespace epimag
