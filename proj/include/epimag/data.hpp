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

// Weekly count matrices: CSV I/O, chronological splitting, per-location min-max
// normalization fitted on training rows, and sliding-window sample extraction.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "epimag/common.hpp"
#include "epimag/key_value.hpp"

namespace epimag
{

//! T x N weekly counts; row t is week t, column i is location i.
struct EpidemicSeries
{
    Matrix values;
    std::vector<std::string> location_ids;
    std::vector<std::string> time_index;

    Eigen::Index steps() const
    {
        return values.rows();
    }
    Eigen::Index locations() const
    {
        return values.cols();
    }

    //! Rows [first, first + count) with matching labels.
    EpidemicSeries slice(Eigen::Index first, Eigen::Index count) const
    {
        EpidemicSeries out;
        out.values       = values.middleRows(first, count);
        out.location_ids = location_ids;
        out.time_index.assign(time_index.begin() + first, time_index.begin() + first + count);
        return out;
    }
};

inline std::vector<std::string> default_location_ids(Eigen::Index n)
{
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < n; ++i) {
        ids.push_back("loc" + std::to_string(i));
    }
    return ids;
}

inline std::vector<std::string> default_time_index(Eigen::Index t)
{
    std::vector<std::string> idx;
    for (Eigen::Index i = 0; i < t; ++i) {
        idx.push_back(std::to_string(i));
    }
    return idx;
}

inline EpidemicSeries make_series(Matrix values)
{
    EpidemicSeries s;
    s.location_ids = default_location_ids(values.cols());
    s.time_index   = default_time_index(values.rows());
    s.values       = std::move(values);
    return s;
}

//! Throws DataError unless the series has >= 2 locations and finite, nonnegative counts.
inline void validate_series(const EpidemicSeries& s)
{
    if (s.locations() < 2) {
        throw DataError("series needs at least 2 locations, got " + std::to_string(s.locations()));
    }
    if (s.steps() < 1) {
        throw DataError("series has no rows");
    }
    if (static_cast<Eigen::Index>(s.location_ids.size()) != s.locations() ||
        static_cast<Eigen::Index>(s.time_index.size()) != s.steps()) {
        throw DataError("series labels do not match the value matrix");
    }
    for (Eigen::Index t = 0; t < s.steps(); ++t) {
        for (Eigen::Index i = 0; i < s.locations(); ++i) {
            const double v = s.values(t, i);
            if (!std::isfinite(v)) {
                throw DataError("non-finite value at row " + std::to_string(t) + ", location " + s.location_ids[i]);
            }
            if (v < 0.0) {
                throw DataError("negative value " + std::to_string(v) + " at row " + std::to_string(t) +
                                ", location " + s.location_ids[i]);
            }
        }
    }
}

namespace detail
{
inline std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

inline double parse_number(const std::string& field, const std::string& where)
{
    if (field.empty()) {
        throw DataError(where + ": empty field");
    }
    char* end      = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size()) {
        throw DataError(where + ": not a number: '" + field + "'");
    }
    return v;
}

//! Reads a rectangular numeric table; `first_line` is the 1-based line number of the first row.
inline Matrix read_numeric_rows(std::istream& in, const std::string& origin, int first_line, Eigen::Index expected_cols,
                                std::vector<std::string>* leading_labels)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = first_line - 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_fields(line);
        const std::string where = origin + ":" + std::to_string(lineno);
        std::size_t offset      = 0;
        if (leading_labels != nullptr) {
            if (fields.empty()) {
                throw DataError(where + ": missing week label");
            }
            leading_labels->push_back(fields.front());
            offset = 1;
        }
        const auto cols = static_cast<Eigen::Index>(fields.size() - offset);
        if (expected_cols < 0) {
            expected_cols = cols;
        }
        if (cols != expected_cols) {
            throw DataError(where + ": expected " + std::to_string(expected_cols) + " values, found " +
                            std::to_string(cols));
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t k = offset; k < fields.size(); ++k) {
            row.push_back(parse_number(fields[k], where));
        }
        rows.push_back(std::move(row));
    }
    const Eigen::Index ncols = expected_cols < 0 ? 0 : expected_cols;
    Matrix m(static_cast<Eigen::Index>(rows.size()), ncols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (Eigen::Index c = 0; c < ncols; ++c) {
            m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
        }
    }
    return m;
}
} // namespace detail

//! Reads a counts CSV. With a header the first line names the locations; a leading
//! header field named "week" marks a first column of week labels.
inline EpidemicSeries read_series_csv(std::istream& in, const std::string& origin = "<stream>", bool has_header = true)
{
    EpidemicSeries s;
    Eigen::Index expected = -1;
    bool labelled         = false;
    int first_line        = 1;
    if (has_header) {
        std::string header;
        if (!std::getline(in, header)) {
            throw DataError(origin + ": empty file");
        }
        if (!header.empty() && header.back() == '\r') {
            header.pop_back();
        }
        auto ids = detail::split_fields(header);
        if (!ids.empty() && (ids.front() == "week" || ids.front() == "Week")) {
            labelled = true;
            ids.erase(ids.begin());
        }
        s.location_ids = ids;
        expected       = static_cast<Eigen::Index>(ids.size());
        first_line     = 2;
    }
    std::vector<std::string> labels;
    s.values = detail::read_numeric_rows(in, origin, first_line, expected, labelled ? &labels : nullptr);
    if (!has_header) {
        s.location_ids = default_location_ids(s.values.cols());
    }
    s.time_index = labelled ? labels : default_time_index(s.values.rows());
    validate_series(s);
    return s;
}

inline EpidemicSeries load_csv(const std::filesystem::path& path, bool has_header = true)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    return read_series_csv(in, path.string(), has_header);
}

inline void write_series_csv(std::ostream& out, const EpidemicSeries& s)
{
    out.precision(17);
    out << "week";
    for (const auto& id : s.location_ids) {
        out << ',' << id;
    }
    out << '\n';
    for (Eigen::Index t = 0; t < s.steps(); ++t) {
        out << s.time_index[static_cast<std::size_t>(t)];
        for (Eigen::Index i = 0; i < s.locations(); ++i) {
            out << ',' << s.values(t, i);
        }
        out << '\n';
    }
}

inline void save_csv(const std::filesystem::path& path, const EpidemicSeries& s)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    write_series_csv(out, s);
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

struct SplitSpec
{
    double train_frac = 0.6;
    double val_frac   = 0.2;
    double test_frac  = 0.2;

    void validate() const
    {
        if (train_frac < 0 || val_frac < 0 || test_frac < 0) {
            throw ConfigError("split fractions must be nonnegative");
        }
        if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
            throw ConfigError("split fractions must sum to 1");
        }
    }
};

struct SplitSizes
{
    Eigen::Index train = 0;
    Eigen::Index val   = 0;
    Eigen::Index test  = 0;
};

//! train = floor(train_frac*T), val = floor(val_frac*T), test = the remainder.
inline SplitSizes split_sizes(Eigen::Index steps, const SplitSpec& spec)
{
    spec.validate();
    // the epsilon absorbs representation error such as 0.6 * 785 = 470.999...
    const auto floor_of = [steps](double frac) {
        return static_cast<Eigen::Index>(std::floor(frac * static_cast<double>(steps) + 1e-9));
    };
    SplitSizes sz;
    sz.train = floor_of(spec.train_frac);
    sz.val   = floor_of(spec.val_frac);
    sz.test  = steps - sz.train - sz.val;
    return sz;
}

struct SeriesSplit
{
    EpidemicSeries train;
    EpidemicSeries val;
    EpidemicSeries test;
};

//! Chronological partition; every part must hold at least `min_length` rows (w + h).
inline SeriesSplit chronological_split(const EpidemicSeries& series, const SplitSpec& spec, Eigen::Index min_length)
{
    const auto sz = split_sizes(series.steps(), spec);
    const auto check = [min_length](Eigen::Index len, const char* name) {
        if (len < min_length) {
            throw ConfigError(std::string(name) + " split has " + std::to_string(len) + " rows, fewer than w + h = " +
                              std::to_string(min_length));
        }
    };
    check(sz.train, "train");
    check(sz.val, "validation");
    check(sz.test, "test");
    return {series.slice(0, sz.train), series.slice(sz.train, sz.val), series.slice(sz.train + sz.val, sz.test)};
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

struct NormalizationStats
{
    Vector per_location_min;
    Vector per_location_max;

    Eigen::Index locations() const
    {
        return per_location_min.size();
    }
};

inline NormalizationStats fit_normalization(const EpidemicSeries& train)
{
    if (train.steps() == 0) {
        throw DataError("cannot fit normalization on an empty training split");
    }
    return {train.values.colwise().minCoeff().transpose(), train.values.colwise().maxCoeff().transpose()};
}

//! (x - min) / (max - min) per location; constant locations map to 0. Values outside the
//! training range are not clipped.
inline Matrix apply_normalization(const Matrix& values, const NormalizationStats& stats)
{
    if (values.cols() != stats.locations()) {
        throw ShapeError("apply_normalization: " + std::to_string(values.cols()) + " columns vs " +
                         std::to_string(stats.locations()) + " fitted locations");
    }
    Matrix out(values.rows(), values.cols());
    for (Eigen::Index i = 0; i < values.cols(); ++i) {
        const double lo    = stats.per_location_min(i);
        const double range = stats.per_location_max(i) - lo;
        if (range > 0.0) {
            out.col(i) = (values.col(i).array() - lo) / range;
        }
        else {
            out.col(i).setZero();
        }
    }
    return out;
}

inline EpidemicSeries apply_normalization(const EpidemicSeries& series, const NormalizationStats& stats)
{
    EpidemicSeries out = series;
    out.values         = apply_normalization(series.values, stats);
    return out;
}

inline Matrix invert_normalization(const Matrix& normalized, const NormalizationStats& stats)
{
    if (normalized.cols() != stats.locations()) {
        throw ShapeError("invert_normalization: column count does not match fitted locations");
    }
    Matrix out(normalized.rows(), normalized.cols());
    for (Eigen::Index i = 0; i < normalized.cols(); ++i) {
        const double lo    = stats.per_location_min(i);
        const double range = stats.per_location_max(i) - lo;
        out.col(i)         = (normalized.col(i).array() * range + lo).matrix();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Windowing
// ---------------------------------------------------------------------------

struct WindowedSample
{
    Matrix history;      //!< w x N, rows anchor-w+1 .. anchor
    Vector target;       //!< row anchor + h
    Vector prev_target;  //!< row anchor + h - 1
    Eigen::Index anchor = 0;
};

struct WindowOptions
{
    //! Horizon 1 is excluded from the forecasting protocol; sensitivity sweeps may opt in.
    bool allow_single_step = false;
};

inline Eigen::Index window_count(Eigen::Index steps, int w, int h)
{
    return steps - w - h + 1;
}

inline std::vector<WindowedSample> make_windows(const Matrix& values, int w, int h, WindowOptions opts = {})
{
    if (w <= 0) {
        throw ConfigError("window must be positive, got " + std::to_string(w));
    }
    if (h < 1 || (h == 1 && !opts.allow_single_step)) {
        throw ConfigError("horizon must be at least 2, got " + std::to_string(h));
    }
    const Eigen::Index steps = values.rows();
    if (steps < w + h) {
        throw ConfigError("series of length " + std::to_string(steps) + " is shorter than w + h = " +
                          std::to_string(w + h));
    }
    std::vector<WindowedSample> out;
    out.reserve(static_cast<std::size_t>(window_count(steps, w, h)));
    for (Eigen::Index anchor = w - 1; anchor + h < steps; ++anchor) {
        WindowedSample s;
        s.history     = values.middleRows(anchor - w + 1, w);
        s.target      = values.row(anchor + h).transpose();
        s.prev_target = values.row(anchor + h - 1).transpose();
        s.anchor      = anchor;
        out.push_back(std::move(s));
    }
    return out;
}

inline std::vector<WindowedSample> make_windows(const EpidemicSeries& series, int w, int h, WindowOptions opts = {})
{
    return make_windows(series.values, w, h, opts);
}

// ---------------------------------------------------------------------------
// Summary statistics and dataset registry
// ---------------------------------------------------------------------------

struct SeriesSummary
{
    Eigen::Index locations = 0;
    Eigen::Index steps     = 0;
    double min             = 0;
    double max             = 0;
    double mean            = 0;
    double sd              = 0;  //!< population standard deviation over all entries
};

inline SeriesSummary summarize(const EpidemicSeries& s)
{
    SeriesSummary sum;
    sum.locations = s.locations();
    sum.steps     = s.steps();
    sum.min       = s.values.minCoeff();
    sum.max       = s.values.maxCoeff();
    sum.mean      = s.values.mean();
    sum.sd        = std::sqrt((s.values.array() - sum.mean).square().mean());
    return sum;
}

struct DatasetEntry
{
    std::filesystem::path counts;
    std::filesystem::path adjacency;
};

//! Registry file: "<name>.counts = path" and "<name>.adjacency = path"; relative paths
//! resolve against the registry's directory.
inline std::map<std::string, DatasetEntry> load_registry(const std::filesystem::path& path)
{
    const auto kv   = load_key_values(path);
    const auto base = path.parent_path();
    std::map<std::string, DatasetEntry> reg;
    for (const auto& [key, value] : kv) {
        const auto dot = key.rfind('.');
        if (dot == std::string::npos) {
            throw ConfigError(path.string() + ": registry key '" + key + "' is not <name>.counts or <name>.adjacency");
        }
        const auto name  = key.substr(0, dot);
        const auto field = key.substr(dot + 1);
        std::filesystem::path p(value);
        if (p.is_relative()) {
            p = base / p;
        }
        if (field == "counts") {
            reg[name].counts = p;
        }
        else if (field == "adjacency") {
            reg[name].adjacency = p;
        }
        else {
            throw ConfigError(path.string() + ": unknown registry field '" + field + "'");
        }
    }
    for (const auto& [name, entry] : reg) {
        if (entry.counts.empty() || entry.adjacency.empty()) {
            throw ConfigError(path.string() + ": dataset '" + name + "' needs both counts and adjacency");
        }
    }
    return reg;
}

} // namespace epimag
