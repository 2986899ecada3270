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

// Building blocks shared by the encoders. Spatio-temporal tensors use the time-stacked
// layout from autodiff.hpp: a (T*N) x C matrix, row t*N + i = location i at step t.

#include <string>
#include <vector>

#include "epimag/autodiff.hpp"

namespace epimag::nn
{

using ad::Index;
using ad::ParameterStore;
using ad::Tape;
using ad::Var;

//! w x N history window -> (w*N) x 1 time-stacked column.
inline Matrix stack_history(const Matrix& history)
{
    const Matrix transposed = history.transpose();
    return Eigen::Map<const Matrix>(transposed.data(), history.size(), 1);
}

//! Affine map x W + b.
struct Dense
{
    std::size_t weight = 0;
    std::size_t bias   = 0;
    Index in           = 0;
    Index out          = 0;

    Dense() = default;
    Dense(ParameterStore& store, const std::string& name, Index in_dim, Index out_dim)
        : weight(store.add(name + ".weight", in_dim, out_dim,
                           ad::InitRule::xavier(static_cast<double>(in_dim), static_cast<double>(out_dim))))
        , bias(store.add(name + ".bias", 1, out_dim))
        , in(in_dim)
        , out(out_dim)
    {
    }

    Var operator()(Tape& tape, const ParameterStore& store, Var x) const
    {
        return ad::add_row(ad::matmul(x, tape.parameter(store, weight)), tape.parameter(store, bias));
    }
};

//! Causal 1-D convolution over time, applied independently per location. Step t sees
//! steps t, t-1, ..., t-kernel+1 with zero padding before the window start.
struct TemporalConv
{
    std::size_t weight = 0;  //!< (kernel*in) x out, tap k occupies rows [k*in, (k+1)*in)
    std::size_t bias   = 0;
    Index in           = 0;
    Index out          = 0;
    Index kernel       = 3;

    TemporalConv() = default;
    TemporalConv(ParameterStore& store, const std::string& name, Index in_dim, Index out_dim, Index kernel_size = 3)
        : weight(store.add(name + ".weight", kernel_size * in_dim, out_dim,
                           ad::InitRule::xavier(static_cast<double>(in_dim * kernel_size),
                                                static_cast<double>(out_dim * kernel_size))))
        , bias(store.add(name + ".bias", 1, out_dim))
        , in(in_dim)
        , out(out_dim)
        , kernel(kernel_size)
    {
    }

    Var operator()(Tape& tape, const ParameterStore& store, Var x, Index locations) const
    {
        std::vector<Var> taps{x};
        for (Index k = 1; k < kernel; ++k) {
            taps.push_back(ad::shift_rows(x, k * locations));
        }
        Var stacked = taps.size() == 1 ? x : ad::concat_cols(taps);
        return ad::add_row(ad::matmul(stacked, tape.parameter(store, weight)), tape.parameter(store, bias));
    }
};

//! Graph convolution prop * x * W + b on every time block.
struct GraphConv
{
    Dense linear;

    GraphConv() = default;
    GraphConv(ParameterStore& store, const std::string& name, Index in_dim, Index out_dim)
        : linear(store, name, in_dim, out_dim)
    {
    }

    Var operator()(Tape& tape, const ParameterStore& store, Var prop, Var x) const
    {
        Var projected = ad::matmul(x, tape.parameter(store, linear.weight));
        return ad::add_row(ad::block_propagate(prop, projected), tape.parameter(store, linear.bias));
    }
};

//! Learned per-channel weighting over the window, initialized to the temporal mean.
struct TemporalReadout
{
    std::size_t weight = 0;
    Index steps        = 0;

    TemporalReadout() = default;
    TemporalReadout(ParameterStore& store, const std::string& name, Index window, Index channels)
        : weight(store.add(name + ".weight", window, channels, ad::InitRule::fill(1.0 / static_cast<double>(window))))
        , steps(window)
    {
    }

    Var operator()(Tape& tape, const ParameterStore& store, Var x, Index locations) const
    {
        return ad::temporal_readout(x, tape.parameter(store, weight), locations);
    }
};

} // namespace epimag::nn
