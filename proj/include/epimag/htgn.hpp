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

// Heterogeneous transmission graph network: two STGCN-style sandwich blocks (gated
// temporal convolution, graph convolution over the self-loop-augmented affinity graph,
// temporal convolution) and a learned temporal readout to N x D3.

#include "epimag/layers.hpp"
#include "epimag/mag.hpp"

namespace epimag
{

class HTGN
{
public:
    HTGN() = default;

    HTGN(ad::ParameterStore& store, Eigen::Index window, Eigen::Index channels, Eigen::Index out_dim)
        : window_(window)
        , out_dim_(out_dim)
        , block1_(store, "htgn.block1", 1, channels, out_dim)
        , block2_(store, "htgn.block2", out_dim, channels, out_dim)
        , readout_(store, "htgn.readout", window, out_dim)
    {
    }

    Eigen::Index dim() const
    {
        return out_dim_;
    }

    //! `affinity` is the sparsified N x N graph, `history` the (w*N) x 1 stacked window.
    ad::Var forward(ad::Tape& tape, const ad::ParameterStore& store, ad::Var affinity, ad::Var history) const
    {
        const Eigen::Index n = affinity.rows();
        if (affinity.cols() != n || history.rows() != window_ * n || history.cols() != 1) {
            throw ShapeError("HTGN: affinity graph and history disagree on the number of locations");
        }
        auto prop = ad::self_loop_propagation(affinity);
        auto x    = block1_.forward(tape, store, prop, history, n);
        x         = block2_.forward(tape, store, prop, x, n);
        return readout_(tape, store, x, n);
    }

    Matrix st_blocks(const AffinityGraph& mag, const Matrix& history, const ad::ParameterStore& store) const
    {
        require_shape(history, window_, mag.matrix.rows(), "HTGN::st_blocks history");
        ad::Tape tape;
        return forward(tape, store, tape.constant(mag.matrix), tape.constant(nn::stack_history(history))).value();
    }

private:
    struct Block
    {
        nn::TemporalConv gated;  //!< in -> 2*channels, split into value and gate halves
        nn::GraphConv graph;
        nn::TemporalConv temporal;
        Eigen::Index channels = 0;

        Block() = default;
        Block(ad::ParameterStore& store, const std::string& name, Eigen::Index in, Eigen::Index ch, Eigen::Index out)
            : gated(store, name + ".gated", in, 2 * ch)
            , graph(store, name + ".graph", ch, ch)
            , temporal(store, name + ".temporal", ch, out)
            , channels(ch)
        {
        }

        ad::Var forward(ad::Tape& tape, const ad::ParameterStore& store, ad::Var prop, ad::Var x, Eigen::Index n) const
        {
            auto z     = gated(tape, store, x, n);
            auto glu   = ad::mul(ad::slice_cols(z, 0, channels), ad::sigmoid(ad::slice_cols(z, channels, channels)));
            auto mixed = ad::tanh(graph(tape, store, prop, glu));
            return ad::tanh(temporal(tape, store, mixed, n));
        }
    };

    Eigen::Index window_  = 0;
    Eigen::Index out_dim_ = 0;
    Block block1_;
    Block block2_;
    nn::TemporalReadout readout_;
};

} // namespace epimag
