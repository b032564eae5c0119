#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "odc/errors.hpp"
#include "odc/io.hpp"

namespace odc {

// polyline drawn over a heatmap, in data coordinates
struct SvgOverlay {
    std::vector<std::pair<double, double>> points;  // (horizontal, vertical)
    std::string color = "#d84a4a";
    std::string label;
};

struct SvgLegendEntry {
    std::string color;
    std::string label;
};

struct SvgHeatmapSpec {
    std::vector<double> hx;  // horizontal cell-centre coordinates, ascending
    std::vector<double> vy;  // vertical cell-centre coordinates, ascending
    // category index per cell, mapped through `colors`
    std::function<std::size_t(std::size_t ih, std::size_t iv)> category;
    std::vector<std::string> colors;
    std::vector<SvgLegendEntry> legend;
    std::vector<SvgOverlay> overlays;
    std::string title;
    std::string h_label;
    std::string v_label;
};

namespace detail_svg {

inline std::string esc(const std::string& s) {
    std::string out;
    out.reserve(s.size());
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

inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    std::vector<double> ticks;
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    }
    const double first = std::ceil(lo / step) * step;
    for (double t = first; t <= hi + 1e-9 * step; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return ticks;
}

}  // namespace detail_svg

// Self-contained SVG heatmap: cells of equal category are merged into
// horizontal run rectangles, axes get tick labels, overlays are drawn as
// polylines. Output is deterministic for identical input.
inline std::string render_heatmap(const SvgHeatmapSpec& spec) {
    const std::size_t nh = spec.hx.size(), nv = spec.vy.size();
    if (nh < 2 || nv < 2)
        throw domain_error("render_heatmap: need at least a 2x2 grid");
    if (!spec.category || spec.colors.empty())
        throw domain_error("render_heatmap: category map and colors required");

    const double ml = 62.0, mr = 24.0, mt = 40.0, mb = 50.0;
    const double pw = 640.0, ph = 460.0;
    const double width = ml + pw + mr, height = mt + ph + mb;
    const double h_lo = spec.hx.front(), h_hi = spec.hx.back();
    const double v_lo = spec.vy.front(), v_hi = spec.vy.back();
    const auto px = [&](double h) {
        return ml + (h - h_lo) / (h_hi - h_lo) * pw;
    };
    const auto py = [&](double v) {
        return mt + (v_hi - v) / (v_hi - v_lo) * ph;
    };
    const auto f = [](double v) { return format_compact(v, 7); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f(width) +
         "\" height=\"" + f(height) + "\" viewBox=\"0 0 " + f(width) + " " +
         f(height) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + f(width) + "\" height=\"" +
         f(height) + "\" fill=\"#ffffff\"/>\n";

    // cell edges sit halfway between centres, clamped to the data range
    const auto edge = [](const std::vector<double>& c, std::size_t k) {
        if (k == 0) return c.front();
        if (k == c.size()) return c.back();
        return 0.5 * (c[k - 1] + c[k]);
    };
    for (std::size_t iv = 0; iv < nv; ++iv) {
        const double y0 = py(edge(spec.vy, iv + 1));
        const double y1 = py(edge(spec.vy, iv));
        std::size_t run_start = 0;
        std::size_t run_cat = spec.category(0, iv);
        for (std::size_t ih = 1; ih <= nh; ++ih) {
            const std::size_t cat =
                ih < nh ? spec.category(ih, iv) : static_cast<std::size_t>(-1);
            if (cat != run_cat) {
                if (run_cat < spec.colors.size()) {
                    const double x0 = px(edge(spec.hx, run_start));
                    const double x1 = px(edge(spec.hx, ih));
                    s += "<rect x=\"" + f(x0) + "\" y=\"" + f(y0) +
                         "\" width=\"" + f(x1 - x0) + "\" height=\"" +
                         f(y1 - y0) + "\" fill=\"" + spec.colors[run_cat] +
                         "\"/>\n";
                }
                run_start = ih;
                run_cat = cat;
            }
        }
    }

    for (const auto& ov : spec.overlays) {
        if (ov.points.size() < 2) continue;
        std::string pts;
        for (const auto& [h, v] : ov.points) {
            if (!pts.empty()) pts += ' ';
            pts += f(px(std::clamp(h, h_lo, h_hi))) + ',' +
                   f(py(std::clamp(v, v_lo, v_hi)));
        }
        s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
             ov.color + "\" stroke-width=\"2\"/>\n";
    }

    // frame and ticks
    s += "<rect x=\"" + f(ml) + "\" y=\"" + f(mt) + "\" width=\"" + f(pw) +
         "\" height=\"" + f(ph) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
    for (double t : detail_svg::nice_ticks(h_lo, h_hi)) {
        const double X = px(t);
        s += "<line x1=\"" + f(X) + "\" y1=\"" + f(mt + ph) + "\" x2=\"" +
             f(X) + "\" y2=\"" + f(mt + ph + 5) +
             "\" stroke=\"#333333\"/>\n";
        s += "<text x=\"" + f(X) + "\" y=\"" + f(mt + ph + 18) +
             "\" font-family=\"sans-serif\" font-size=\"11\" "
             "text-anchor=\"middle\">" +
             format_compact(t, 6) + "</text>\n";
    }
    for (double t : detail_svg::nice_ticks(v_lo, v_hi)) {
        const double Y = py(t);
        s += "<line x1=\"" + f(ml - 5) + "\" y1=\"" + f(Y) + "\" x2=\"" +
             f(ml) + "\" y2=\"" + f(Y) + "\" stroke=\"#333333\"/>\n";
        s += "<text x=\"" + f(ml - 8) + "\" y=\"" + f(Y + 4) +
             "\" font-family=\"sans-serif\" font-size=\"11\" "
             "text-anchor=\"end\">" +
             format_compact(t, 6) + "</text>\n";
    }
    if (!spec.title.empty())
        s += "<text x=\"" + f(ml + 0.5 * pw) + "\" y=\"24\" "
             "font-family=\"sans-serif\" font-size=\"15\" "
             "text-anchor=\"middle\">" +
             detail_svg::esc(spec.title) + "</text>\n";
    if (!spec.h_label.empty())
        s += "<text x=\"" + f(ml + 0.5 * pw) + "\" y=\"" + f(height - 12) +
             "\" font-family=\"sans-serif\" font-size=\"12\" "
             "text-anchor=\"middle\">" +
             detail_svg::esc(spec.h_label) + "</text>\n";
    if (!spec.v_label.empty())
        s += "<text x=\"16\" y=\"" + f(mt + 0.5 * ph) +
             "\" font-family=\"sans-serif\" font-size=\"12\" "
             "text-anchor=\"middle\" transform=\"rotate(-90 16 " +
             f(mt + 0.5 * ph) + ")\">" +
             detail_svg::esc(spec.v_label) + "</text>\n";

    double lx = ml + 8.0, ly = mt + 14.0;
    for (const auto& entry : spec.legend) {
        s += "<rect x=\"" + f(lx) + "\" y=\"" + f(ly - 9) +
             "\" width=\"12\" height=\"12\" fill=\"" + entry.color +
             "\" stroke=\"#333333\"/>\n";
        s += "<text x=\"" + f(lx + 17) + "\" y=\"" + f(ly + 2) +
             "\" font-family=\"sans-serif\" font-size=\"11\">" +
             detail_svg::esc(entry.label) + "</text>\n";
        ly += 18.0;
    }
    for (const auto& ov : spec.overlays) {
        if (ov.label.empty()) continue;
        s += "<line x1=\"" + f(lx) + "\" y1=\"" + f(ly - 4) + "\" x2=\"" +
             f(lx + 12) + "\" y2=\"" + f(ly - 4) + "\" stroke=\"" + ov.color +
             "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + f(lx + 17) + "\" y=\"" + f(ly + 2) +
             "\" font-family=\"sans-serif\" font-size=\"11\">" +
             detail_svg::esc(ov.label) + "</text>\n";
        ly += 18.0;
    }

    s += "</svg>\n";
    return s;
}

}  // namespace odc
