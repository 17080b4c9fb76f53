#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace sepclust {

/// Minimal static SVG line plot: labeled axes, ticks, one polyline per series.
struct SvgLinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::string comment; // embedded self-description

    struct Series {
        std::string name;
        std::vector<std::pair<double, double>> points;
    };
    std::vector<Series> series;

    void write(const std::filesystem::path& path) const;
};

} // namespace sepclust
