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

// Minimal SVG line charts: forecast against truth per location, and metric against a
// swept hyperparameter.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "epimag/common.hpp"

namespace epimag
{

struct PlotSeries
{
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed       = false;
    bool markers      = false;
};

struct PlotPanel
{
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
};

struct PlotLayout
{
    int panel_width  = 420;
    int panel_height = 260;
    int columns      = 2;
};

namespace detail
{

inline std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::pair<double, double> padded_range(double lo, double hi)
{
    if (!(hi > lo)) {
        const double pad = std::abs(lo) > 0 ? std::abs(lo) * 0.1 : 1.0;
        return {lo - pad, hi + pad};
    }
    const double pad = (hi - lo) * 0.05;
    return {lo - pad, hi + pad};
}

inline std::string fmt_tick(double v)
{
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

inline void render_panel(std::ostream& out, const PlotPanel& panel, double ox, double oy, double width,
                         double height)
{
    const double left = 58, right = 12, top = 26, bottom = 40;
    const double pw = width - left - right;
    const double ph = height - top - bottom;

    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    for (const auto& s : panel.series) {
        if (s.x.size() != s.y.size()) {
            throw ShapeError("plot series '" + s.label + "' has mismatched x/y lengths");
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) {
                continue;
            }
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    }
    if (!std::isfinite(x_lo)) {
        x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    }
    if (!(x_hi > x_lo)) {
        x_lo -= 0.5, x_hi += 0.5;
    }
    std::tie(y_lo, y_hi) = padded_range(y_lo, y_hi);

    auto px = [&](double x) { return ox + left + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double y) { return oy + top + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

    out << "<rect x=\"" << ox + left << "\" y=\"" << oy + top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << ox + left + pw / 2 << "\" y=\"" << oy + 16
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(panel.title) << "</text>\n";
    out << "<text x=\"" << ox + left + pw / 2 << "\" y=\"" << oy + height - 6
        << "\" text-anchor=\"middle\" font-size=\"11\">" << xml_escape(panel.x_label) << "</text>\n";
    out << "<text transform=\"translate(" << ox + 12 << ',' << oy + top + ph / 2
        << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"11\">" << xml_escape(panel.y_label) << "</text>\n";

    constexpr int ticks = 4;
    for (int k = 0; k <= ticks; ++k) {
        const double xv = x_lo + (x_hi - x_lo) * k / ticks;
        const double yv = y_lo + (y_hi - y_lo) * k / ticks;
        out << "<text x=\"" << px(xv) << "\" y=\"" << oy + top + ph + 14
            << "\" text-anchor=\"middle\" font-size=\"9\">" << fmt_tick(xv) << "</text>\n";
        out << "<text x=\"" << ox + left - 4 << "\" y=\"" << py(yv) + 3
            << "\" text-anchor=\"end\" font-size=\"9\">" << fmt_tick(yv) << "</text>\n";
    }

    double legend_y = oy + top + 12;
    for (const auto& s : panel.series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
        if (s.dashed) {
            out << " stroke-dasharray=\"5,3\"";
        }
        out << " points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (std::isfinite(s.y[i])) {
                out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            }
        }
        out << "\"/>\n";
        if (s.markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (std::isfinite(s.y[i])) {
                    out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\""
                        << s.color << "\"/>\n";
                }
            }
        }
        out << "<text x=\"" << ox + left + pw - 6 << "\" y=\"" << legend_y << "\" text-anchor=\"end\" font-size=\"10\" fill=\""
            << s.color << "\">" << xml_escape(s.label) << "</text>\n";
        legend_y += 12;
    }
}

} // namespace detail

inline std::string render_svg(const std::vector<PlotPanel>& panels, const PlotLayout& layout = {})
{
    const int cols   = std::max(1, std::min(layout.columns, static_cast<int>(std::max<std::size_t>(panels.size(), 1))));
    const int rows   = static_cast<int>((panels.size() + static_cast<std::size_t>(cols) - 1) / static_cast<std::size_t>(cols));
    const int width  = cols * layout.panel_width;
    const int height = std::max(1, rows) * layout.panel_height;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i) {
        const double ox = static_cast<double>(static_cast<int>(i) % cols * layout.panel_width);
        const double oy = static_cast<double>(static_cast<int>(i) / cols * layout.panel_height);
        detail::render_panel(out, panels[i], ox, oy, layout.panel_width, layout.panel_height);
    }
    out << "</svg>\n";
    return out.str();
}

inline void write_svg(const std::filesystem::path& path, const std::vector<PlotPanel>& panels,
                      const PlotLayout& layout = {})
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << render_svg(panels, layout);
}

/// One panel per location: truth as a solid line, forecast dashed.
inline std::vector<PlotPanel> forecast_panels(const Matrix& truth, const Matrix& predicted,
                                              const std::vector<double>& x,
                                              const std::vector<std::string>& location_ids)
{
    require_shape(predicted, truth.rows(), truth.cols(), "forecast");
    if (static_cast<Eigen::Index>(x.size()) != truth.rows()) {
        throw ShapeError("forecast plot needs one x value per row");
    }
    std::vector<PlotPanel> panels;
    for (Eigen::Index j = 0; j < truth.cols(); ++j) {
        PlotPanel p;
        p.title   = j < static_cast<Eigen::Index>(location_ids.size()) ? location_ids[static_cast<std::size_t>(j)]
                                                                      : "location " + std::to_string(j);
        p.x_label = "week";
        p.y_label = "count";
        PlotSeries t{"truth", x, {}, "#222222", false, false};
        PlotSeries f{"forecast", x, {}, "#d62728", true, false};
        for (Eigen::Index r = 0; r < truth.rows(); ++r) {
            t.y.push_back(truth(r, j));
            f.y.push_back(predicted(r, j));
        }
        p.series = {std::move(t), std::move(f)};
        panels.push_back(std::move(p));
    }
    return panels;
}

} // namespace epimag
