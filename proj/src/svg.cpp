#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "specnet/experiments.hpp"

namespace specnet {

namespace {

constexpr double width = 640.0;
constexpr double height = 480.0;
constexpr double left = 80.0;
constexpr double right = 180.0;
constexpr double top = 40.0;
constexpr double bottom = 60.0;

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Axis {
    double lo = 0.0; // log10 bounds
    double hi = 1.0;
    double px0 = 0.0;
    double px1 = 1.0;

    double map(double v) const { return px0 + (std::log10(v) - lo) / (hi - lo) * (px1 - px0); }
};

} // namespace

std::string render_svg(const SvgPlot& plot)
{
    if (plot.series.empty()) throw std::invalid_argument("render_svg: no series");
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : plot.series) {
        if (s.x.empty() || s.x.size() != s.y.size()) {
            throw std::invalid_argument("render_svg: series '" + s.name + "' is empty or ragged");
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                throw std::invalid_argument("render_svg: non-positive value in series '" + s.name + "'");
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    Axis ax{std::floor(std::log10(xmin)), std::ceil(std::log10(xmax)), left, width - right};
    Axis ay{std::floor(std::log10(ymin)), std::ceil(std::log10(ymax)), height - bottom, top};
    if (ax.hi <= ax.lo) ax.hi = ax.lo + 1.0;
    if (ay.hi <= ay.lo) ay.hi = ay.lo + 1.0;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
       << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<defs><clipPath id=\"plot\"><rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\""
       << num(width - left - right) << "\" height=\"" << num(height - top - bottom) << "\"/></clipPath></defs>\n";
    if (!plot.title.empty()) {
        os << "<text x=\"" << num(0.5 * (left + width - right)) << "\" y=\"24\" text-anchor=\"middle\">"
           << escape(plot.title) << "</text>\n";
    }
    // Decade grid and tick labels.
    for (int e = static_cast<int>(ax.lo); e <= static_cast<int>(ax.hi); ++e) {
        const double x = ax.map(std::pow(10.0, e));
        os << "<line x1=\"" << num(x) << "\" y1=\"" << num(top) << "\" x2=\"" << num(x) << "\" y2=\""
           << num(height - bottom) << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << num(x) << "\" y=\"" << num(height - bottom + 16) << "\" text-anchor=\"middle\">1e" << e
           << "</text>\n";
    }
    for (int e = static_cast<int>(ay.lo); e <= static_cast<int>(ay.hi); ++e) {
        const double y = ay.map(std::pow(10.0, e));
        os << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(width - right) << "\" y2=\""
           << num(y) << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">1e" << e << "</text>\n";
    }
    os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(width - left - right)
       << "\" height=\"" << num(height - top - bottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(0.5 * (left + width - right)) << "\" y=\"" << num(height - 16)
       << "\" text-anchor=\"middle\">" << escape(plot.xlabel) << "</text>\n";
    os << "<text x=\"20\" y=\"" << num(0.5 * (top + height - bottom)) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
       << num(0.5 * (top + height - bottom)) << ")\">" << escape(plot.ylabel) << "</text>\n";

    double legend_y = top + 10;
    const double legend_x = width - right + 12;
    for (std::size_t g = 0; g < plot.guides.size(); ++g) {
        const auto& gd = plot.guides[g];
        auto y_at = [&](double x) { return gd.y0 * std::pow(x / gd.x0, gd.slope); };
        const double xa = std::pow(10.0, ax.lo);
        const double xb = std::pow(10.0, ax.hi);
        os << "<line clip-path=\"url(#plot)\" x1=\"" << num(ax.map(xa)) << "\" y1=\"" << num(ay.map(y_at(xa)))
           << "\" x2=\"" << num(ax.map(xb)) << "\" y2=\"" << num(ay.map(y_at(xb)))
           << "\" stroke=\"#555555\" stroke-dasharray=\"6 4\"/>\n";
        os << "<line x1=\"" << num(legend_x) << "\" y1=\"" << num(legend_y) << "\" x2=\"" << num(legend_x + 24)
           << "\" y2=\"" << num(legend_y) << "\" stroke=\"#555555\" stroke-dasharray=\"6 4\"/>\n";
        os << "<text x=\"" << num(legend_x + 30) << "\" y=\"" << num(legend_y + 4) << "\">"
           << escape(gd.label.empty() ? "slope " + num(gd.slope) : gd.label) << "</text>\n";
        legend_y += 18;
    }
    for (std::size_t s = 0; s < plot.series.size(); ++s) {
        const auto& sr = plot.series[s];
        const char* color = palette[s % std::size(palette)];
        if (sr.x.size() > 1) {
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < sr.x.size(); ++i) {
                os << (i ? " " : "") << num(ax.map(sr.x[i])) << ',' << num(ay.map(sr.y[i]));
            }
            os << "\"/>\n";
        }
        for (std::size_t i = 0; i < sr.x.size(); ++i) {
            os << "<circle cx=\"" << num(ax.map(sr.x[i])) << "\" cy=\"" << num(ay.map(sr.y[i])) << "\" r=\"3\" fill=\""
               << color << "\"/>\n";
        }
        os << "<line x1=\"" << num(legend_x) << "\" y1=\"" << num(legend_y) << "\" x2=\"" << num(legend_x + 24)
           << "\" y2=\"" << num(legend_y) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
        os << "<text x=\"" << num(legend_x + 30) << "\" y=\"" << num(legend_y + 4) << "\">" << escape(sr.name)
           << "</text>\n";
        legend_y += 18;
    }
    os << "</svg>\n";
    return os.str();
}

void emit_svg(const SvgPlot& plot, const std::string& path)
{
    const std::string text = render_svg(plot);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("emit_svg: cannot open " + path);
    os << text;
}

} // namespace specnet
