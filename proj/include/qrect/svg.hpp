#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qrect {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    int width = 640;
    int height = 420;
};

// Polyline chart; non-positive values are dropped on log axes.
void write_svg_plot(std::span<const PlotSeries> series, const PlotOptions& opt, std::ostream& out);

}  // namespace qrect
