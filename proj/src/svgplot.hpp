#pragma once

#include <string>
#include <vector>

namespace gridfdd {

/// Minimal standalone SVG line plot: labeled axes, grid, legend, one polyline
/// per series. Series must share the x vector.
struct PlotSeries {
    std::string name;
    std::string color;
    const std::vector<double>* y = nullptr;
};

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<double>& x, const std::vector<PlotSeries>& series);

} // namespace gridfdd
