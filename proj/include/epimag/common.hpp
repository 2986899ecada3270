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

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace epimag
{

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

//! Invalid configuration or argument combination (CLI exit code 1).
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

//! Input data failed validation: malformed file, negative counts, bad shapes (exit code 2).
class DataError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

//! Training produced a non-finite loss (exit code 3).
class DivergenceError : public std::runtime_error
{
public:
    DivergenceError(int epoch, std::string term, double value)
        : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ": loss term '" + term +
                             "' = " + std::to_string(value))
        , epoch_(epoch)
        , term_(std::move(term))
    {
    }
    int epoch() const
    {
        return epoch_;
    }
    const std::string& term() const
    {
        return term_;
    }

private:
    int epoch_;
    std::string term_;
};

//! Operands with incompatible dimensions.
class ShapeError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

using WarningSink = std::function<void(const std::string&)>;

namespace detail
{
inline WarningSink& warning_sink()
{
    static WarningSink sink = [](const std::string& msg) {
        std::cerr << "warning: " << msg << '\n';
    };
    return sink;
}
} // namespace detail

//! Replace the process-wide warning sink; returns the previous one.
inline WarningSink set_warning_sink(WarningSink sink)
{
    auto prev = std::move(detail::warning_sink());
    detail::warning_sink() = std::move(sink);
    return prev;
}

inline void warn(const std::string& msg)
{
    if (detail::warning_sink()) {
        detail::warning_sink()(msg);
    }
}

inline void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what)
{
    if (m.rows() != rows || m.cols() != cols) {
        throw ShapeError(std::string(what) + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                          ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

} // namespace epimag
