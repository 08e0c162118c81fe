#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ionmirror::io {

/// Minimal self-contained SVG line plot: axes, tick labels, legend, polylines.
/// No external references, deterministic output.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label);

    void add_series(std::string name, std::vector<double> x, std::vector<double> y);
    /// Horizontal reference line with a legend entry (e.g. a diffraction limit).
    void add_reference_line(std::string name, double y);

    std::string render(int width = 720, int height = 480) const;
    void write(const std::filesystem::path& path, int width = 720, int height = 480) const;

private:
    struct Series {
        std::string name;
        std::vector<double> x, y;
    };
    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
    std::vector<std::pair<std::string, double>> references_;
};

}  // namespace ionmirror::io
