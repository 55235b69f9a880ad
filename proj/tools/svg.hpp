#pragma once

// Minimal line-chart SVG writer for the figures command. CSV stays the
// normative output; these files are just quick visual checks.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkdcal_cli {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

class LineChart {
public:
    LineChart(std::string title, std::string x_label, std::string y_label, bool log_x = false)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)),
          log_x_(log_x) {}

    void add(Series s) { series_.push_back(std::move(s)); }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");

        double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
        for (const auto& s : series_) {
            for (size_t i = 0; i < s.x.size(); ++i) {
                const double x = tx(s.x[i]);
                x_min = std::min(x_min, x);
                x_max = std::max(x_max, x);
                y_min = std::min(y_min, s.y[i]);
                y_max = std::max(y_max, s.y[i]);
            }
        }
        if (x_max <= x_min) x_max = x_min + 1.0;
        if (y_max <= y_min) y_max = y_min + 1.0;

        const double w = 640, h = 480, ml = 70, mr = 20, mt = 40, mb = 50;
        const auto px = [&](double x) {
            return ml + (tx(x) - x_min) / (x_max - x_min) * (w - ml - mr);
        };
        const auto py = [&](double y) {
            return h - mb - (y - y_min) / (y_max - y_min) * (h - mt - mb);
        };

        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
            << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
        out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr
            << "\" height=\"" << h - mt - mb
            << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
            << title_ << "</text>\n";
        out << "<text x=\"" << w / 2 << "\" y=\"" << h - 12
            << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label_ << "</text>\n";
        out << "<text x=\"16\" y=\"" << h / 2
            << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
            << h / 2 << ")\">" << y_label_ << "</text>\n";

        for (int i = 0; i <= 4; ++i) {
            const double fx = x_min + (x_max - x_min) * i / 4.0;
            const double fy = y_min + (y_max - y_min) * i / 4.0;
            const double gx = ml + (w - ml - mr) * i / 4.0;
            const double gy = h - mb - (h - mt - mb) * i / 4.0;
            out << "<text x=\"" << gx << "\" y=\"" << h - mb + 18
                << "\" text-anchor=\"middle\" font-size=\"11\">" << num(inv_tx(fx))
                << "</text>\n";
            out << "<text x=\"" << ml - 6 << "\" y=\"" << gy + 4
                << "\" text-anchor=\"end\" font-size=\"11\">" << num(fy) << "</text>\n";
        }

        static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                        "#ff7f0e", "#8c564b"};
        for (size_t si = 0; si < series_.size(); ++si) {
            const auto& s = series_[si];
            out << "<polyline fill=\"none\" stroke=\"" << kColors[si % 6]
                << "\" stroke-width=\"1.5\" points=\"";
            for (size_t i = 0; i < s.x.size(); ++i) {
                out << num(px(s.x[i])) << "," << num(py(s.y[i]));
                if (i + 1 < s.x.size()) out << " ";
            }
            out << "\"/>\n";
            out << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 18 + 16 * si
                << "\" font-size=\"12\" fill=\"" << kColors[si % 6] << "\">" << s.label
                << "</text>\n";
        }
        out << "</svg>\n";
    }

private:
    double tx(double x) const { return log_x_ ? std::log10(x) : x; }
    double inv_tx(double x) const { return log_x_ ? std::pow(10.0, x) : x; }

    static std::string num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return buf;
    }

    std::string title_, x_label_, y_label_;
    bool log_x_;
    std::vector<Series> series_;
};

}  // namespace qkdcal_cli
