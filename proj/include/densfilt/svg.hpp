#pragma once

// Plain SVG output for complexes and barcodes. Output is a pure function of
// the input so files can be diffed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "densfilt/alpha.hpp"
#include "densfilt/persistence.hpp"

namespace densfilt::svg {

namespace detail {

inline std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

/// t in [0,1] -> dark blue .. yellow, through teal and green.
inline std::string heat(double t)
{
    static constexpr std::array<std::array<double, 3>, 5> stops{
        {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    t = std::clamp(std::isfinite(t) ? t : 1.0, 0.0, 1.0) * static_cast<double>(stops.size() - 1);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
    const double u = t - static_cast<double>(k);
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(stops[k][0] * (1 - u) + stops[k + 1][0] * u)),
                  static_cast<int>(std::lround(stops[k][1] * (1 - u) + stops[k + 1][1] * u)),
                  static_cast<int>(std::lround(stops[k][2] * (1 - u) + stops[k + 1][2] * u)));
    return buf;
}

inline std::string header(double w, double h)
{
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " +
           num(w) + " " + num(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

} // namespace detail

struct ComplexPlotOptions {
    double width = 600.0;
    double height = 600.0;
    bool fill_triangles = true;
    /// per-simplex values used for colour (defaults to alpha weights)
    std::optional<std::vector<double>> simplex_values;
    /// per-vertex scalars; when set, vertices are coloured by them
    std::optional<std::vector<double>> vertex_values;
};

/// Draws the 1-skeleton (and optionally 2-simplices) at the given 2D vertex
/// coordinates, one row per landmark.
inline std::string plot_complex(const AlphaComplex& cx, const RowMatrix& coords, const ComplexPlotOptions& opt = {})
{
    if (coords.cols() < 2) throw InputError("plot coordinates must have at least two columns");
    if (static_cast<std::size_t>(coords.rows()) != cx.diagram.landmarks.size())
        throw InputError("plot coordinates must have one row per landmark");
    const auto& sx = cx.simplices;
    std::vector<double> val(sx.size());
    if (opt.simplex_values) {
        if (opt.simplex_values->size() != sx.size()) throw InputError("simplex value count does not match complex");
        val = *opt.simplex_values;
    } else {
        for (std::size_t i = 0; i < sx.size(); ++i) val[i] = sx[i].alpha_weight;
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : val)
        if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    const double range = hi > lo ? hi - lo : 1.0;

    double x0 = coords.col(0).minCoeff(), x1 = coords.col(0).maxCoeff();
    double y0 = coords.col(1).minCoeff(), y1 = coords.col(1).maxCoeff();
    const double span = std::max({x1 - x0, y1 - y0, 1e-12});
    const double margin = 20.0;
    const double scale = std::min(opt.width, opt.height) - 2 * margin;
    auto px = [&](std::size_t i) { return margin + (coords(static_cast<Eigen::Index>(i), 0) - x0) / span * scale; };
    auto py = [&](std::size_t i) { return opt.height - margin - (coords(static_cast<Eigen::Index>(i), 1) - y0) / span * scale; };

    std::string out = detail::header(opt.width, opt.height);
    if (opt.fill_triangles) {
        out += "<g class=\"triangles\" stroke=\"none\" fill-opacity=\"0.25\">\n";
        for (std::size_t i = 0; i < sx.size(); ++i) {
            if (sx[i].dim() != 2) continue;
            const auto& v = sx[i].vertices;
            out += "<polygon points=\"" + detail::num(px(v[0])) + "," + detail::num(py(v[0])) + " " + detail::num(px(v[1])) +
                   "," + detail::num(py(v[1])) + " " + detail::num(px(v[2])) + "," + detail::num(py(v[2])) + "\" fill=\"" +
                   detail::heat((val[i] - lo) / range) + "\"/>\n";
        }
        out += "</g>\n";
    }
    out += "<g class=\"edges\" stroke-width=\"1\">\n";
    for (std::size_t i = 0; i < sx.size(); ++i) {
        if (sx[i].dim() != 1) continue;
        const auto& v = sx[i].vertices;
        out += "<line x1=\"" + detail::num(px(v[0])) + "\" y1=\"" + detail::num(py(v[0])) + "\" x2=\"" + detail::num(px(v[1])) +
               "\" y2=\"" + detail::num(py(v[1])) + "\" stroke=\"" + detail::heat((val[i] - lo) / range) + "\"/>\n";
    }
    out += "</g>\n<g class=\"vertices\">\n";
    double vlo = lo, vrange = range;
    if (opt.vertex_values) {
        if (opt.vertex_values->size() != cx.diagram.landmarks.size()) throw InputError("vertex value count does not match landmarks");
        const auto [a, b] = std::minmax_element(opt.vertex_values->begin(), opt.vertex_values->end());
        vlo = *a;
        vrange = *b > *a ? *b - *a : 1.0;
    }
    for (std::size_t i = 0; i < sx.size(); ++i) {
        if (sx[i].dim() != 0) continue;
        const std::size_t v = sx[i].vertices[0];
        const double t = opt.vertex_values ? ((*opt.vertex_values)[v] - vlo) / vrange : (val[i] - lo) / range;
        out += "<circle cx=\"" + detail::num(px(v)) + "\" cy=\"" + detail::num(py(v)) + "\" r=\"2.5\" fill=\"" + detail::heat(t) +
               "\"/>\n";
    }
    out += "</g>\n</svg>\n";
    return out;
}

struct BarcodePlotOptions {
    double width = 640.0;
    double row_height = 6.0;
    /// x-axis range in -log density; defaults to the finite extent of the bars
    std::optional<double> x_min;
    std::optional<double> x_max;
};

/// Horizontal bars grouped by dimension. Essential bars run to the right edge
/// and end in an arrowhead.
inline std::string plot_barcode(const Barcode& bc, const BarcodePlotOptions& opt = {})
{
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& i : bc.intervals) {
        lo = std::min(lo, i.birth);
        hi = std::max(hi, i.essential() ? i.birth : i.death);
    }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi <= lo) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo = opt.x_min.value_or(lo);
    hi = opt.x_max.value_or(hi + pad);
    const double left = 50.0, right = 20.0, top = 20.0, gap = 18.0;
    const double plot_w = opt.width - left - right;
    auto x = [&](double v) { return left + (std::clamp(v, lo, hi) - lo) / (hi - lo) * plot_w; };

    std::vector<std::vector<const Interval*>> groups(bc.intervals.empty() ? 0 : bc.max_dim() + 1);
    for (const auto& i : bc.intervals) groups[i.dim].push_back(&i);
    double height = top + 30.0;
    for (const auto& g : groups) height += static_cast<double>(g.size()) * opt.row_height + gap;

    std::string out = detail::header(opt.width, height);
    out += "<defs><marker id=\"arrow\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" orient=\"auto\">"
           "<path d=\"M0,0 L6,3 L0,6 z\" fill=\"black\"/></marker></defs>\n";
    double yy = top;
    for (std::size_t d = 0; d < groups.size(); ++d) {
        if (groups[d].empty()) continue;
        out += "<text x=\"4\" y=\"" + detail::num(yy + 10) + "\" font-size=\"11\" font-family=\"sans-serif\">H" +
               std::to_string(d) + "</text>\n";
        for (const Interval* i : groups[d]) {
            yy += opt.row_height;
            const double x1 = i->essential() ? left + plot_w : x(i->death);
            out += "<line class=\"bar dim" + std::to_string(d) + "\" x1=\"" + detail::num(x(i->birth)) + "\" y1=\"" +
                   detail::num(yy) + "\" x2=\"" + detail::num(x1) + "\" y2=\"" + detail::num(yy) +
                   "\" stroke=\"black\" stroke-width=\"" + detail::num(opt.row_height * 0.6) + "\"" +
                   (i->essential() ? " marker-end=\"url(#arrow)\"" : "") + "/>\n";
        }
        yy += gap;
    }
    const double axis_y = yy;
    out += "<line class=\"axis\" x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(axis_y) + "\" x2=\"" +
           detail::num(left + plot_w) + "\" y2=\"" + detail::num(axis_y) + "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        out += "<text x=\"" + detail::num(x(v)) + "\" y=\"" + detail::num(axis_y + 14) +
               "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"middle\">" + detail::num(v) + "</text>\n";
    }
    out += "<text x=\"" + detail::num(left + plot_w / 2) + "\" y=\"" + detail::num(axis_y + 27) +
           "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"middle\">-log density</text>\n";
    out += "</svg>\n";
    return out;
}

} // namespace densfilt::svg
