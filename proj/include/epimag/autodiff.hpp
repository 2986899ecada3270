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

// Minimal reverse-mode automatic differentiation over dense Eigen matrices.
//
// A Tape records one forward evaluation. Every recorded node stores its value and a
// closure that maps the node's output gradient onto its inputs. Nodes are appended in
// creation order, which is a valid topological order, so backward() is a single reverse
// sweep. Parameters live outside the tape in a ParameterStore; the tape only copies
// their values and routes gradients back into a caller-owned Gradients buffer, which
// keeps forward evaluation free of writes to the model.

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "epimag/common.hpp"

namespace epimag::ad
{

using Index = Eigen::Index;

//! How a parameter is (re)initialized by initialize().
struct InitRule
{
    enum class Kind
    {
        Zero,
        Xavier,
        Constant
    };
    Kind kind       = Kind::Zero;
    double fan_in   = 0;
    double fan_out  = 0;
    double constant = 0;

    static InitRule xavier(double fan_in, double fan_out)
    {
        return {Kind::Xavier, fan_in, fan_out, 0.0};
    }
    static InitRule fill(double v)
    {
        return {Kind::Constant, 0, 0, v};
    }
};

struct Parameter
{
    std::string name;
    Matrix value;
    InitRule init;
};

using Gradients = std::vector<Matrix>;

class ParameterStore
{
public:
    //! Registers a zero-initialized parameter and returns its handle.
    std::size_t add(std::string name, Index rows, Index cols, InitRule init = {})
    {
        params_.push_back({std::move(name), Matrix::Zero(rows, cols), init});
        return params_.size() - 1;
    }

    //! Applies every parameter's InitRule; Xavier draws U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
    template <class Rng>
    void initialize(Rng& rng)
    {
        for (auto& p : params_) {
            switch (p.init.kind) {
            case InitRule::Kind::Zero:
                p.value.setZero();
                break;
            case InitRule::Kind::Constant:
                p.value.setConstant(p.init.constant);
                break;
            case InitRule::Kind::Xavier: {
                const double a = std::sqrt(6.0 / (p.init.fan_in + p.init.fan_out));
                std::uniform_real_distribution<double> dist(-a, a);
                for (Index k = 0; k < p.value.size(); ++k) {
                    p.value.data()[k] = dist(rng);
                }
                break;
            }
            }
        }
    }

    Parameter& operator[](std::size_t i)
    {
        return params_[i];
    }
    const Parameter& operator[](std::size_t i) const
    {
        return params_[i];
    }
    std::size_t size() const
    {
        return params_.size();
    }
    auto begin() const
    {
        return params_.begin();
    }
    auto end() const
    {
        return params_.end();
    }

    std::optional<std::size_t> find(const std::string& name) const
    {
        for (std::size_t i = 0; i < params_.size(); ++i) {
            if (params_[i].name == name) {
                return i;
            }
        }
        return std::nullopt;
    }

    //! Total number of scalar entries over all parameters.
    std::size_t scalar_count() const
    {
        std::size_t n = 0;
        for (const auto& p : params_) {
            n += static_cast<std::size_t>(p.value.size());
        }
        return n;
    }

    Gradients zero_gradients() const
    {
        Gradients g;
        g.reserve(params_.size());
        for (const auto& p : params_) {
            g.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
        }
        return g;
    }

    std::vector<Matrix> snapshot() const
    {
        std::vector<Matrix> values;
        values.reserve(params_.size());
        for (const auto& p : params_) {
            values.push_back(p.value);
        }
        return values;
    }

    void restore(const std::vector<Matrix>& values)
    {
        if (values.size() != params_.size()) {
            throw ShapeError("parameter snapshot has " + std::to_string(values.size()) + " entries, store has " +
                             std::to_string(params_.size()));
        }
        for (std::size_t i = 0; i < params_.size(); ++i) {
            require_shape(values[i], params_[i].value.rows(), params_[i].value.cols(), params_[i].name.c_str());
            params_[i].value = values[i];
        }
    }

private:
    std::vector<Parameter> params_;
};

class Tape;

//! Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var
{
public:
    Var() = default;

    const Matrix& value() const;
    Index rows() const
    {
        return value().rows();
    }
    Index cols() const
    {
        return value().cols();
    }
    Tape& tape() const
    {
        return *tape_;
    }
    int id() const
    {
        return id_;
    }
    bool valid() const
    {
        return tape_ != nullptr;
    }

private:
    friend class Tape;
    Var(Tape* tape, int id)
        : tape_(tape)
        , id_(id)
    {
    }
    Tape* tape_ = nullptr;
    int id_     = -1;
};

class Tape
{
public:
    using BackwardFn = std::function<void(Tape&, const Matrix&)>;

    Tape() = default;
    Tape(const Tape&)            = delete;
    Tape& operator=(const Tape&) = delete;

    //! Value that never receives a gradient.
    Var constant(Matrix value)
    {
        return push(std::move(value), false, {}, -1);
    }

    //! Free input whose gradient can be read back with grad().
    Var variable(Matrix value)
    {
        return push(std::move(value), true, {}, -1);
    }

    //! Leaf bound to a store parameter; backward() adds its gradient into Gradients[index].
    Var parameter(const ParameterStore& store, std::size_t index)
    {
        return push(store[index].value, true, {}, static_cast<int>(index));
    }

    //! Records an operation result. The node requires a gradient if any input does.
    Var record(Matrix value, std::initializer_list<Var> inputs, BackwardFn fn)
    {
        bool needs = false;
        for (const auto& v : inputs) {
            needs = needs || nodes_[v.id_].requires_grad;
        }
        return push(std::move(value), needs, needs ? std::move(fn) : BackwardFn{}, -1);
    }

    //! Variadic-input form of record() for ops over a runtime list of inputs.
    Var record(Matrix value, const std::vector<Var>& inputs, BackwardFn fn)
    {
        bool needs = false;
        for (const auto& v : inputs) {
            needs = needs || nodes_[v.id_].requires_grad;
        }
        return push(std::move(value), needs, needs ? std::move(fn) : BackwardFn{}, -1);
    }

    bool requires_grad(Var v) const
    {
        return nodes_[v.id_].requires_grad;
    }

    const Matrix& value(Var v) const
    {
        return nodes_[v.id_].value;
    }

    //! Gradient buffer of v, zero-initialized on first access.
    Matrix& grad_buffer(Var v)
    {
        auto& n = nodes_[v.id_];
        if (n.grad.size() == 0) {
            n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
        }
        return n.grad;
    }

    template <class Derived>
    void accumulate(Var v, const Eigen::MatrixBase<Derived>& g)
    {
        if (!nodes_[v.id_].requires_grad) {
            return;
        }
        auto& n = nodes_[v.id_];
        if (n.grad.size() == 0) {
            n.grad = g;
        }
        else {
            n.grad += g;
        }
    }

    //! Gradient of the last backward() target with respect to v (zeros if unreached).
    Matrix grad(Var v) const
    {
        const auto& n = nodes_[v.id_];
        if (n.grad.size() == 0) {
            return Matrix::Zero(n.value.rows(), n.value.cols());
        }
        return n.grad;
    }

    //! Reverse sweep from `out`, seeded with `seed` in every entry of out's gradient.
    void backward(Var out, Gradients* param_grads = nullptr, double seed = 1.0)
    {
        for (auto& n : nodes_) {
            n.grad.resize(0, 0);
        }
        auto& root = nodes_[out.id_];
        root.grad  = Matrix::Constant(root.value.rows(), root.value.cols(), seed);
        for (int i = out.id_; i >= 0; --i) {
            auto& n = nodes_[i];
            if (!n.requires_grad || n.grad.size() == 0) {
                continue;
            }
            if (n.backward) {
                n.backward(*this, n.grad);
            }
            if (n.param_index >= 0 && param_grads != nullptr) {
                (*param_grads)[static_cast<std::size_t>(n.param_index)] += n.grad;
            }
        }
    }

    std::size_t size() const
    {
        return nodes_.size();
    }

private:
    struct Node
    {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        BackwardFn backward;
        int param_index = -1;
    };

    Var push(Matrix value, bool requires_grad, BackwardFn fn, int param_index)
    {
        nodes_.push_back({std::move(value), Matrix{}, requires_grad, std::move(fn), param_index});
        return Var(this, static_cast<int>(nodes_.size() - 1));
    }

    std::vector<Node> nodes_;
};

inline const Matrix& Var::value() const
{
    return tape_->value(*this);
}

// ---------------------------------------------------------------------------
// Elementary operations
// ---------------------------------------------------------------------------

inline Var matmul(Var a, Var b)
{
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ");
    }
    return a.tape().record(a.value() * b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a, g * b.value().transpose());
        t.accumulate(b, a.value().transpose() * g);
    });
}

inline Var add(Var a, Var b)
{
    require_shape(b.value(), a.rows(), a.cols(), "add");
    return a.tape().record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

inline Var sub(Var a, Var b)
{
    require_shape(b.value(), a.rows(), a.cols(), "sub");
    return a.tape().record(a.value() - b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a, g);
        t.accumulate(b, -g);
    });
}

//! Elementwise product.
inline Var mul(Var a, Var b)
{
    require_shape(b.value(), a.rows(), a.cols(), "mul");
    return a.tape().record(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a, g.cwiseProduct(b.value()));
        t.accumulate(b, g.cwiseProduct(a.value()));
    });
}

inline Var scale(Var a, double s)
{
    return a.tape().record(a.value() * s, {a}, [a, s](Tape& t, const Matrix& g) {
        t.accumulate(a, g * s);
    });
}

//! Adds a 1xC row to every row of a.
inline Var add_row(Var a, Var row)
{
    require_shape(row.value(), 1, a.cols(), "add_row");
    Matrix out = a.value().rowwise() + row.value().row(0);
    return a.tape().record(std::move(out), {a, row}, [a, row](Tape& t, const Matrix& g) {
        t.accumulate(a, g);
        t.accumulate(row, g.colwise().sum());
    });
}

inline Var tanh(Var a)
{
    Matrix out = a.value().array().tanh().matrix();
    Matrix y   = out;
    return a.tape().record(std::move(out), {a}, [a, y = std::move(y)](Tape& t, const Matrix& g) {
        t.accumulate(a, (g.array() * (1.0 - y.array().square())).matrix());
    });
}

inline double sigmoid_scalar(double x)
{
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus_scalar(double x)
{
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline Var sigmoid(Var a)
{
    Matrix out = a.value().unaryExpr(&sigmoid_scalar);
    Matrix y   = out;
    return a.tape().record(std::move(out), {a}, [a, y = std::move(y)](Tape& t, const Matrix& g) {
        t.accumulate(a, (g.array() * y.array() * (1.0 - y.array())).matrix());
    });
}

inline Var softplus(Var a)
{
    return a.tape().record(a.value().unaryExpr(&softplus_scalar), {a}, [a](Tape& t, const Matrix& g) {
        t.accumulate(a, g.cwiseProduct(a.value().unaryExpr(&sigmoid_scalar)));
    });
}

//! Mean of |a| over all entries, as a 1x1 result. The subgradient at 0 is 0.
inline Var mean_abs(Var a)
{
    const double n = static_cast<double>(a.value().size());
    Matrix out(1, 1);
    out(0, 0) = a.value().cwiseAbs().sum() / n;
    return a.tape().record(std::move(out), {a}, [a, n](Tape& t, const Matrix& g) {
        Matrix sign = a.value().unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
        t.accumulate(a, sign * (g(0, 0) / n));
    });
}

inline Var concat_cols(const std::vector<Var>& parts)
{
    if (parts.empty()) {
        throw ShapeError("concat_cols: no inputs");
    }
    const Index rows = parts.front().rows();
    Index cols       = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) {
            throw ShapeError("concat_cols: row counts differ");
        }
        cols += p.cols();
    }
    Matrix out(rows, cols);
    Index c = 0;
    for (const auto& p : parts) {
        out.middleCols(c, p.cols()) = p.value();
        c += p.cols();
    }
    return parts.front().tape().record(std::move(out), parts, [parts](Tape& t, const Matrix& g) {
        Index c = 0;
        for (const auto& p : parts) {
            t.accumulate(p, g.middleCols(c, p.cols()));
            c += p.cols();
        }
    });
}

inline Var slice_cols(Var a, Index start, Index count)
{
    if (start < 0 || count < 0 || start + count > a.cols()) {
        throw ShapeError("slice_cols: range out of bounds");
    }
    return a.tape().record(a.value().middleCols(start, count), {a}, [a, start, count](Tape& t, const Matrix& g) {
        if (!t.requires_grad(a)) {
            return;
        }
        t.grad_buffer(a).middleCols(start, count) += g;
    });
}

// ---------------------------------------------------------------------------
// Time-stacked layout helpers
//
// A spatio-temporal feature tensor of T steps, N locations and C channels is stored as
// a (T*N) x C matrix whose row t*N + i holds location i at step t.
// ---------------------------------------------------------------------------

//! Shifts rows down by `k` (earlier rows move later), zero-filling the first k rows.
inline Var shift_rows(Var a, Index k)
{
    const Index rows = a.rows();
    Matrix out       = Matrix::Zero(rows, a.cols());
    if (k < rows) {
        out.bottomRows(rows - k) = a.value().topRows(rows - k);
    }
    return a.tape().record(std::move(out), {a}, [a, k, rows](Tape& t, const Matrix& g) {
        if (!t.requires_grad(a) || k >= rows) {
            return;
        }
        t.grad_buffer(a).topRows(rows - k) += g.bottomRows(rows - k);
    });
}

//! Applies the NxN operator `prop` to every time block of a (T*N) x C tensor.
inline Var block_propagate(Var prop, Var x)
{
    const Index n = prop.rows();
    if (prop.cols() != n || n == 0 || x.rows() % n != 0) {
        throw ShapeError("block_propagate: operator is not square or does not tile the input rows");
    }
    const Index steps = x.rows() / n;
    Matrix out(x.rows(), x.cols());
    for (Index s = 0; s < steps; ++s) {
        out.middleRows(s * n, n).noalias() = prop.value() * x.value().middleRows(s * n, n);
    }
    return x.tape().record(std::move(out), {prop, x}, [prop, x, n, steps](Tape& t, const Matrix& g) {
        if (t.requires_grad(x)) {
            Matrix& gx = t.grad_buffer(x);
            for (Index s = 0; s < steps; ++s) {
                gx.middleRows(s * n, n).noalias() += prop.value().transpose() * g.middleRows(s * n, n);
            }
        }
        if (t.requires_grad(prop)) {
            Matrix& gp = t.grad_buffer(prop);
            for (Index s = 0; s < steps; ++s) {
                gp.noalias() += g.middleRows(s * n, n) * x.value().middleRows(s * n, n).transpose();
            }
        }
    });
}

//! Per-channel weighted sum over time: out(i, c) = sum_t weights(t, c) * x(t*N + i, c).
inline Var temporal_readout(Var x, Var weights, Index locations)
{
    const Index steps = weights.rows();
    if (locations <= 0 || x.rows() != steps * locations || weights.cols() != x.cols()) {
        throw ShapeError("temporal_readout: weights do not match the input layout");
    }
    Matrix out = Matrix::Zero(locations, x.cols());
    for (Index s = 0; s < steps; ++s) {
        out.array() += x.value().middleRows(s * locations, locations).array().rowwise() * weights.value().row(s).array();
    }
    return x.tape().record(std::move(out), {x, weights}, [x, weights, locations, steps](Tape& t, const Matrix& g) {
        if (t.requires_grad(x)) {
            Matrix& gx = t.grad_buffer(x);
            for (Index s = 0; s < steps; ++s) {
                gx.middleRows(s * locations, locations).array() += g.array().rowwise() * weights.value().row(s).array();
            }
        }
        if (t.requires_grad(weights)) {
            Matrix& gw = t.grad_buffer(weights);
            for (Index s = 0; s < steps; ++s) {
                gw.row(s) += (g.array() * x.value().middleRows(s * locations, locations).array()).colwise().sum().matrix();
            }
        }
    });
}

} // namespace epimag::ad
