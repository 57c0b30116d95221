/*
   Copyright 2026 The wedge-intensity Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

// Minimal line-chart writer: axes, ticks, one polyline per series, legend.

namespace wedge::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;  // NaN leaves a gap
    bool markers = false;   // draw points instead of a line
};

namespace detail {

inline std::string fmt(const char* f, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

// Tick step of 1, 2 or 5 times a power of ten giving about n ticks.
inline double tick_step(double span, int n) {
    const double raw = span / n;
    const double p = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0})
        if (m * p >= raw)
            return m * p;
    return 10.0 * p;
}

}  // namespace detail

inline std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                              const std::vector<Series>& series) {
    constexpr double W = 720, H = 480, L = 70, R = 180, T = 40, B = 50;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = 0.0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.y[i])) {
                x0 = std::min(x0, s.x[i]);
                x1 = std::max(x1, s.x[i]);
                y0 = std::min(y0, s.y[i]);
                y1 = std::max(y1, s.y[i]);
            }
    if (!(x1 > x0)) {
        x0 = 0.0;
        x1 = 1.0;
    }
    if (!(y1 > y0))
        y1 = y0 + 1.0;
    const double ystep = detail::tick_step(y1 - y0, 5);
    y1 = std::ceil(y1 / ystep) * ystep;
    const double xstep = detail::tick_step(x1 - x0, 8);

    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    auto f2 = [](double v) { return detail::fmt("%.2f", v); };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" viewBox=\"0 0 720 480\">\n";
    out += "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
    out += "<text x=\"" + f2(W / 2 - R / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\">" + detail::escape(title) + "</text>\n";
    out += "<g stroke=\"black\" stroke-width=\"1\">\n";
    out += "<line x1=\"" + f2(L) + "\" y1=\"" + f2(H - B) + "\" x2=\"" + f2(W - R) + "\" y2=\"" + f2(H - B) + "\"/>\n";
    out += "<line x1=\"" + f2(L) + "\" y1=\"" + f2(T) + "\" x2=\"" + f2(L) + "\" y2=\"" + f2(H - B) + "\"/>\n";
    out += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (double x = std::ceil(x0 / xstep) * xstep; x <= x1 + 1e-9 * xstep; x += xstep) {
        out += "<line x1=\"" + f2(px(x)) + "\" y1=\"" + f2(H - B) + "\" x2=\"" + f2(px(x)) + "\" y2=\"" +
               f2(H - B + 5) + "\" stroke=\"black\"/>";
        out += "<text x=\"" + f2(px(x)) + "\" y=\"" + f2(H - B + 18) + "\" text-anchor=\"middle\">" +
               detail::fmt("%g", std::abs(x) < 1e-12 ? 0.0 : x) + "</text>\n";
    }
    for (double y = y0; y <= y1 + 1e-9 * ystep; y += ystep) {
        out += "<line x1=\"" + f2(L - 5) + "\" y1=\"" + f2(py(y)) + "\" x2=\"" + f2(L) + "\" y2=\"" + f2(py(y)) +
               "\" stroke=\"black\"/>";
        out += "<text x=\"" + f2(L - 8) + "\" y=\"" + f2(py(y) + 4) + "\" text-anchor=\"end\">" +
               detail::fmt("%g", std::abs(y) < 1e-12 ? 0.0 : y) + "</text>\n";
    }
    out += "<text x=\"" + f2((L + W - R) / 2) + "\" y=\"" + f2(H - 12) + "\" text-anchor=\"middle\">" +
           detail::escape(x_label) + "</text>\n";
    out += "<text transform=\"translate(18," + f2((T + H - B) / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
           detail::escape(y_label) + "</text>\n</g>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const Series& s = series[k];
        const std::string color = colors[k % 6];
        if (s.markers) {
            out += "<g fill=\"" + color + "\">\n";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                if (std::isfinite(s.y[i]))
                    out += "<circle cx=\"" + f2(px(s.x[i])) + "\" cy=\"" + f2(py(s.y[i])) + "\" r=\"2.5\"/>\n";
            out += "</g>\n";
        } else {
            std::string pts;
            auto flush = [&] {
                if (!pts.empty())
                    out += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" + pts +
                           "\"/>\n";
                pts.clear();
            };
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.y[i])) {
                    flush();
                    continue;
                }
                if (!pts.empty())
                    pts += ' ';
                pts += f2(px(s.x[i])) + "," + f2(py(s.y[i]));
            }
            flush();
        }
        const double ly = T + 10 + 20.0 * static_cast<double>(k);
        out += "<line x1=\"" + f2(W - R + 15) + "\" y1=\"" + f2(ly) + "\" x2=\"" + f2(W - R + 40) + "\" y2=\"" +
               f2(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>";
        out += "<text x=\"" + f2(W - R + 46) + "\" y=\"" + f2(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + detail::escape(s.label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace wedge::svg
