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

// Spatio-temporal encoder: location-wise causal temporal convolutions followed by
// residual graph convolutions over the geographic propagation operator, read out over
// the window into one D1-dimensional embedding per location.

#include "epimag/geo_graph.hpp"
#include "epimag/layers.hpp"

namespace epimag
{

class STEncoder
{
public:
    STEncoder() = default;

    STEncoder(ad::ParameterStore& store, Eigen::Index window, Eigen::Index dim)
        : window_(window)
        , dim_(dim)
        , temporal1_(store, "st.temporal1", 1, dim)
        , temporal2_(store, "st.temporal2", dim, dim)
        , graph1_(store, "st.graph1", dim, dim)
        , graph2_(store, "st.graph2", dim, dim)
        , readout_(store, "st.readout", window, dim)
    {
    }

    Eigen::Index dim() const
    {
        return dim_;
    }
    Eigen::Index window() const
    {
        return window_;
    }

    //! `prop` is the N x N propagation operator, `history` the (w*N) x 1 stacked window.
    ad::Var forward(ad::Tape& tape, const ad::ParameterStore& store, ad::Var prop, ad::Var history) const
    {
        const Eigen::Index n = prop.rows();
        if (history.rows() != window_ * n || history.cols() != 1) {
            throw ShapeError("STEncoder: history does not match window " + std::to_string(window_) + " x " +
                             std::to_string(n) + " locations");
        }
        auto h  = ad::tanh(temporal1_(tape, store, history, n));
        h       = ad::tanh(temporal2_(tape, store, h, n));
        auto g1 = ad::add(h, ad::tanh(graph1_(tape, store, prop, h)));
        auto g2 = ad::tanh(ad::add(g1, graph2_(tape, store, prop, g1)));
        return readout_(tape, store, g2, n);
    }

    //! N x D1 embedding for a w x N history window.
    Matrix encode(const GeoAdjacency& adj, const Matrix& history, const ad::ParameterStore& store) const
    {
        require_shape(history, window_, adj.size(), "STEncoder::encode history");
        ad::Tape tape;
        auto prop = tape.constant(normalized_laplacian_operator(adj));
        auto x    = tape.constant(nn::stack_history(history));
        return forward(tape, store, prop, x).value();
    }

private:
    Eigen::Index window_ = 0;
    Eigen::Index dim_    = 0;
    nn::TemporalConv temporal1_;
    nn::TemporalConv temporal2_;
    nn::GraphConv graph1_;
    nn::GraphConv graph2_;
    nn::TemporalReadout readout_;
};

} // namespace epimag
