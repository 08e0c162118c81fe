#include "ionmirror/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ionmirror/csv.hpp"

namespace ionmirror::io {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    if (span <= 0.0) return {lo};
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 0.5 * step; t += step) {
        ticks.push_back(t);
    }
    return ticks;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::add_series(std::string name, std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size() || x.empty()) {
        throw std::invalid_argument("svg series needs matching nonempty samples");
    }
    series_.push_back({std::move(name), std::move(x), std::move(y)});
}

void SvgPlot::add_reference_line(std::string name, double y) {
    references_.emplace_back(std::move(name), y);
}

std::string SvgPlot::render(int width, int height) const {
    const double ml = 72, mr = 24, mt = 40, mb = 56;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const Series& s : series_) {
        for (double v : s.x) {
            xlo = std::min(xlo, v);
            xhi = std::max(xhi, v);
        }
        for (double v : s.y) {
            ylo = std::min(ylo, v);
            yhi = std::max(yhi, v);
        }
    }
    for (const auto& [name, y] : references_) {
        ylo = std::min(ylo, y);
        yhi = std::max(yhi, y);
    }
    if (series_.empty()) xlo = ylo = 0.0, xhi = yhi = 1.0;
    if (xhi == xlo) xhi = xlo + 1.0;
    if (yhi == ylo) yhi = ylo + 1.0;
    const double ypad = 0.05 * (yhi - ylo);
    ylo -= ypad;
    yhi += ypad;

    auto px = [&](double x) { return ml + (x - xlo) / (xhi - xlo) * pw; };
    auto py = [&](double y) { return mt + ph - (y - ylo) / (yhi - ylo) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title_ << "</text>\n";

    for (double t : nice_ticks(xlo, xhi)) {
        const double x = px(t);
        svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(x)
            << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"#dddddd\"/>\n"
            << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(mt + ph + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(t) << "</text>\n";
    }
    for (double t : nice_ticks(ylo, yhi)) {
        const double y = py(t);
        svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(ml + pw)
            << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\"/>\n"
            << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
            << "</text>\n";
    }
    svg << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
        << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"#333333\"/>\n"
        << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(height - 12.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label_
        << "</text>\n"
        << "<text x=\"16\" y=\"" << fmt(mt + ph / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 16 " << fmt(mt + ph / 2) << ")\">" << y_label_ << "</text>\n";

    std::size_t color = 0;
    for (const auto& [name, yv] : references_) {
        const char* c = kPalette[(color + series_.size()) % 8];
        svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py(yv)) << "\" x2=\"" << fmt(ml + pw)
            << "\" y2=\"" << fmt(py(yv)) << "\" stroke=\"" << c
            << "\" stroke-dasharray=\"6 4\"/>\n";
        ++color;
    }
    for (std::size_t i = 0; i < series_.size(); ++i) {
        svg << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 8]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t j = 0; j < series_[i].x.size(); ++j) {
            if (j) svg << ' ';
            svg << fmt(px(series_[i].x[j])) << ',' << fmt(py(series_[i].y[j]));
        }
        svg << "\"/>\n";
    }

    double ly = mt + 14;
    for (std::size_t i = 0; i < series_.size(); ++i) {
        svg << "<line x1=\"" << fmt(ml + pw - 130) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
            << fmt(ml + pw - 108) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\""
            << kPalette[i % 8] << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << fmt(ml + pw - 102) << "\" y=\"" << fmt(ly)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << series_[i].name
            << "</text>\n";
        ly += 16;
    }
    for (std::size_t i = 0; i < references_.size(); ++i) {
        const char* c = kPalette[(i + series_.size()) % 8];
        svg << "<line x1=\"" << fmt(ml + pw - 130) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
            << fmt(ml + pw - 108) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << c
            << "\" stroke-dasharray=\"6 4\"/>\n"
            << "<text x=\"" << fmt(ml + pw - 102) << "\" y=\"" << fmt(ly)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << references_[i].first
            << "</text>\n";
        ly += 16;
    }
    svg << "</svg>\n";
    return svg.str();
}

void SvgPlot::write(const std::filesystem::path& path, int width, int height) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << render(width, height);
}

}  // namespace ionmirror::io
