#pragma once

// Minimal static SVG line chart for the sweep commands.

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace sleeper::plot {

struct Series {
    std::string name;
    std::vector<double> y;
};

inline std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                                  const std::vector<double>& x, const std::vector<Series>& series) {
    const double W = 640, H = 400, left = 70, right = 20, top = 40, bottom = 60;
    double xmin = x.empty() ? 0 : *std::min_element(x.begin(), x.end());
    double xmax = x.empty() ? 1 : *std::max_element(x.begin(), x.end());
    double ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (ymin > ymax) ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    const double pad = std::max(0.01, 0.1 * (ymax - ymin));
    ymin -= pad;
    ymax += pad;
    auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (W - left - right); };
    auto py = [&](double v) { return H - bottom - (v - ymin) / (ymax - ymin) * (H - top - bottom); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"};
    std::ostringstream os;
    char buf[256];
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", left,
                  H - bottom, W - right, H - bottom);
    os << buf;
    std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", left, top,
                  left, H - bottom);
    os << buf;
    for (double v : x) {
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%g</text>\n", px(v),
                      H - bottom + 18, v);
        os << buf;
    }
    for (int t = 0; t <= 4; ++t) {
        const double v = ymin + (ymax - ymin) * t / 4.0;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.3f</text>\n", left - 6,
                      py(v) + 4, v);
        os << buf;
    }
    os << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << x_label
       << "</text>\n";
    os << "<text x=\"18\" y=\"" << (top + H - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << (top + H - bottom) / 2 << ")\">" << y_label << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % 4];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < x.size() && i < series[s].y.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(x[i]), py(series[s].y[i]));
            os << buf;
        }
        os << "\"/>\n";
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" fill=\"%s\">%s</text>\n", W - right - 150,
                      top + 16.0 * (s + 1), color, series[s].name.c_str());
        os << buf;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace sleeper::plot
