// Minimal static SVG line charts. Best effort; CSV remains the contract.
#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include "gridspin/csv.hpp"

namespace gridspin {

struct ChartSeries {
    std::string label;
    std::vector<double> y;
};

inline void write_line_chart_svg(const std::string& path, const std::string& title,
                                 const std::string& x_label, const std::string& y_label,
                                 const std::vector<double>& x,
                                 const std::vector<ChartSeries>& series) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    const double w = 760, h = 440, ml = 70, mr = 160, mt = 40, mb = 50;
    double xmin = x.empty() ? 0 : x.front(), xmax = x.empty() ? 1 : x.back();
    if (xmax == xmin) xmax = xmin + 1;
    double ymin = 0.0, ymax = 1e-12;
    for (const auto& s : series)
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    const double px = (w - ml - mr) / (xmax - xmin);
    const double py = (h - mt - mb) / (ymax - ymin);
    auto X = [&](double v) { return ml + (v - xmin) * px; };
    auto Y = [&](double v) { return h - mb - (v - ymin) * py; };

    std::ofstream out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
        << h << "' viewBox='0 0 " << w << " " << h << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='15'>"
        << title << "</text>\n";

    // axes and ticks
    out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
        << h - mb << "' stroke='black'/>\n"
        << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr
        << "' y2='" << h - mb << "' stroke='black'/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        out << "<text x='" << X(xv) << "' y='" << h - mb + 18
            << "' text-anchor='middle' font-size='11'>" << fmt_g(xv) << "</text>\n";
        out << "<text x='" << ml - 6 << "' y='" << Y(yv) + 4
            << "' text-anchor='end' font-size='11'>" << fmt_g(yv) << "</text>\n";
        out << "<line x1='" << ml << "' y1='" << Y(yv) << "' x2='" << w - mr
            << "' y2='" << Y(yv) << "' stroke='#dddddd'/>\n";
    }
    out << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 12
        << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n"
        << "<text x='18' y='" << (mt + h - mb) / 2
        << "' text-anchor='middle' font-size='12' transform='rotate(-90 18 "
        << (mt + h - mb) / 2 << ")'>" << y_label << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % 8];
        out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < series[s].y.size() && i < x.size(); ++i)
            out << X(x[i]) << "," << Y(series[s].y[i]) << " ";
        out << "'/>\n";
        out << "<text x='" << w - mr + 8 << "' y='" << mt + 16 * (s + 1)
            << "' font-size='11' fill='" << color << "'>" << series[s].label
            << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace gridspin
