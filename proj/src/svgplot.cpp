#include "svgplot.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace gridfdd {

namespace {

struct Extent {
    double lo, hi;
};

Extent extent_of(const std::vector<double>& v) {
    Extent e{v.front(), v.front()};
    for (double x : v) {
        e.lo = std::min(e.lo, x);
        e.hi = std::max(e.hi, x);
    }
    if (e.hi - e.lo < 1e-12) {
        e.lo -= 1.0;
        e.hi += 1.0;
    }
    return e;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

} // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<double>& x, const std::vector<PlotSeries>& series) {
    if (x.empty() || series.empty())
        throw ContractError("svg plot: nothing to draw");
    for (const auto& s : series)
        if (!s.y || s.y->size() != x.size())
            throw ContractError("svg plot: series length mismatch");

    constexpr double W = 960, H = 480;
    constexpr double ml = 70, mr = 20, mt = 40, mb = 55;
    const double pw = W - ml - mr, ph = H - mt - mb;

    Extent ex = extent_of(x);
    Extent ey{series[0].y->front(), series[0].y->front()};
    for (const auto& s : series) {
        Extent e = extent_of(*s.y);
        ey.lo = std::min(ey.lo, e.lo);
        ey.hi = std::max(ey.hi, e.hi);
    }
    const double pad = 0.05 * (ey.hi - ey.lo);
    ey.lo -= pad;
    ey.hi += pad;

    auto px = [&](double v) { return ml + (v - ex.lo) / (ex.hi - ex.lo) * pw; };
    auto py = [&](double v) { return mt + (ey.hi - v) / (ey.hi - ey.lo) * ph; };

    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);

    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

    // Grid and tick labels.
    for (int i = 0; i <= 5; ++i) {
        const double gx = ml + pw * i / 5.0;
        const double gy = mt + ph * i / 5.0;
        const double xv = ex.lo + (ex.hi - ex.lo) * i / 5.0;
        const double yv = ey.hi - (ey.hi - ey.lo) * i / 5.0;
        f << "<line x1=\"" << gx << "\" y1=\"" << mt << "\" x2=\"" << gx << "\" y2=\""
          << mt + ph << "\" stroke=\"#ddd\"/>\n"
          << "<line x1=\"" << ml << "\" y1=\"" << gy << "\" x2=\"" << ml + pw << "\" y2=\""
          << gy << "\" stroke=\"#ddd\"/>\n"
          << "<text x=\"" << gx << "\" y=\"" << H - mb + 18
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << fmt(xv) << "</text>\n"
          << "<text x=\"" << ml - 8 << "\" y=\"" << gy + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
          << fmt(yv) << "</text>\n";
    }
    f << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
      << "</text>\n"
      << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">" << y_label << "</text>\n";

    for (const auto& s : series) {
        f << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1\" points=\"";
        // Decimate to at most ~4 points per horizontal pixel.
        const std::size_t step = std::max<std::size_t>(1, x.size() / 4000);
        for (std::size_t i = 0; i < x.size(); i += step)
            f << px(x[i]) << ',' << py((*s.y)[i]) << ' ';
        f << "\"/>\n";
    }

    double lx = ml + 12;
    for (const auto& s : series) {
        f << "<line x1=\"" << lx << "\" y1=\"" << mt + 14 << "\" x2=\"" << lx + 24
          << "\" y2=\"" << mt + 14 << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n"
          << "<text x=\"" << lx + 30 << "\" y=\"" << mt + 18
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name << "</text>\n";
        lx += 30 + 9.0 * static_cast<double>(s.name.size()) + 24;
    }
    f << "</svg>\n";
    if (!f) throw IoError("short write: " + path);
}

} // namespace gridfdd
