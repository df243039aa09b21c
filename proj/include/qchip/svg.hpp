// Copyright 2026 The qchip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qchip/util.hpp"

namespace qchip::svg {

struct Series {
    std::string name;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    bool points = false;
};

namespace detail {
inline std::string num(double v) { return fmt_fixed(v, 2); }
inline void header(std::ostream& os, int w, int h, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << w / 2 << "\" y=\"18\" text-anchor=\"middle\">" << title << "</text>\n";
}
inline void axes(std::ostream& os, double x0, double y0, double x1, double y1, const std::string& xl, const std::string& yl,
                 double xmin, double xmax, double ymin, double ymax) {
    os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0) << "\" height=\"" << num(y0 - y1)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(y0 + 34) << "\" text-anchor=\"middle\">" << xl << "</text>\n";
    os << "<text x=\"14\" y=\"" << num((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << num((y0 + y1) / 2) << ")\">"
       << yl << "</text>\n";
    os << "<text x=\"" << num(x0) << "\" y=\"" << num(y0 + 16) << "\" text-anchor=\"middle\">" << fmt_fixed(xmin, 3) << "</text>\n";
    os << "<text x=\"" << num(x1) << "\" y=\"" << num(y0 + 16) << "\" text-anchor=\"middle\">" << fmt_fixed(xmax, 3) << "</text>\n";
    os << "<text x=\"" << num(x0 - 4) << "\" y=\"" << num(y0) << "\" text-anchor=\"end\">" << fmt_fixed(ymin, 3) << "</text>\n";
    os << "<text x=\"" << num(x0 - 4) << "\" y=\"" << num(y1 + 10) << "\" text-anchor=\"end\">" << fmt_fixed(ymax, 3) << "</text>\n";
}
}  // namespace detail

inline void plot(std::ostream& os, const std::vector<Series>& series, const std::string& title, const std::string& xl,
                 const std::string& yl) {
    const int W = 640, H = 420;
    const double x0 = 70, x1 = W - 20, y0 = H - 50, y1 = 30;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]), xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]), ymax = std::max(ymax, s.y[i]);
        }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    auto X = [&](double v) { return x0 + (v - xmin) / (xmax - xmin) * (x1 - x0); };
    auto Y = [&](double v) { return y0 - (v - ymin) / (ymax - ymin) * (y0 - y1); };
    detail::header(os, W, H, title);
    detail::axes(os, x0, y0, x1, y1, xl, yl, xmin, xmax, ymin, ymax);
    int row = 0;
    for (auto& s : series) {
        if (s.points) {
            for (std::size_t i = 0; i < s.x.size(); ++i)
                os << "<circle cx=\"" << detail::num(X(s.x[i])) << "\" cy=\"" << detail::num(Y(s.y[i])) << "\" r=\"1.5\" fill=\"" << s.color
                   << "\" fill-opacity=\"0.5\"/>\n";
        } else {
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) os << detail::num(X(s.x[i])) << "," << detail::num(Y(s.y[i])) << " ";
            os << "\"/>\n";
        }
        os << "<text x=\"" << detail::num(x1 - 6) << "\" y=\"" << 46 + 14 * row++ << "\" text-anchor=\"end\" fill=\"" << s.color << "\">" << s.name
           << "</text>\n";
    }
    os << "</svg>\n";
}

// z(i, j) at x[i], y[j]; grey scale, NaN cells drawn hatched red.
inline void heatmap(std::ostream& os, const std::vector<double>& x, const std::vector<double>& y, const Eigen::MatrixXd& z,
                    const std::string& title, const std::string& xl, const std::string& yl) {
    const int W = 640, H = 480;
    const double x0 = 70, x1 = W - 20, y0 = H - 50, y1 = 30;
    double zmin = 1e300, zmax = -1e300;
    for (Eigen::Index i = 0; i < z.size(); ++i)
        if (std::isfinite(z.data()[i])) zmin = std::min(zmin, z.data()[i]), zmax = std::max(zmax, z.data()[i]);
    if (!(zmax > zmin)) zmax = zmin + 1;
    detail::header(os, W, H, title);
    const double cw = (x1 - x0) / static_cast<double>(x.size()), ch = (y0 - y1) / static_cast<double>(y.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) {
            double v = z(i, j);
            std::string fill = "#ff000040";
            if (std::isfinite(v)) {
                int g = static_cast<int>(std::lround(255 * (1 - (v - zmin) / (zmax - zmin))));
                char buf[16];
                std::snprintf(buf, sizeof buf, "#%02x%02x%02x", g, g, 255);
                fill = buf;
            }
            os << "<rect x=\"" << detail::num(x0 + i * cw) << "\" y=\"" << detail::num(y0 - (j + 1) * ch) << "\" width=\"" << detail::num(cw + 0.3)
               << "\" height=\"" << detail::num(ch + 0.3) << "\" fill=\"" << fill << "\"/>\n";
        }
    detail::axes(os, x0, y0, x1, y1, xl, yl, x.front(), x.back(), y.front(), y.back());
    os << "</svg>\n";
}

}  // namespace qchip::svg
