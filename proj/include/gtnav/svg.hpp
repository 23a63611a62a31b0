#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "gtnav/errors.hpp"
#include "gtnav/geometry.hpp"
#include "gtnav/obstacle_grid.hpp"

namespace gtnav {

/// One bar of a comparison chart: the value plus its interval.
struct BarDatum {
    std::string label;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// An agent to draw in a frame image: all agents render as the same uniform
/// arrow, so the viewer cannot tell the robot from the walkers.
struct ArrowGlyph {
    Vec2 position;
    double heading = 0.0;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string svg_label_num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline std::string svg_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

} // namespace detail

/**
 * @brief Render a bar chart with comparison intervals as a standalone SVG.
 *
 * One bar per datum with a whisker from lo to hi, uniform fill on a gray
 * panel. Output is deterministic: fixed-precision coordinates only.
 */
inline std::string render_bar_chart(const std::string& title, const std::string& y_label,
                                    std::span<const BarDatum> bars) {
    if (bars.empty()) throw DomainError("render_bar_chart: no bars");
    const double width = 480.0;
    const double height = 320.0;
    const double margin_left = 64.0;
    const double margin_right = 20.0;
    const double margin_top = 48.0;
    const double margin_bottom = 44.0;
    const double plot_w = width - margin_left - margin_right;
    const double plot_h = height - margin_top - margin_bottom;

    double lo = 0.0;
    double hi = 0.0;
    for (const auto& b : bars) {
        lo = std::min({lo, b.value, b.lo});
        hi = std::max({hi, b.value, b.hi});
    }
    if (!(hi > lo)) hi = lo + 1.0;
    hi += (hi - lo) * 0.08;

    const auto y_px = [&](double v) {
        return margin_top + plot_h * (1.0 - (v - lo) / (hi - lo));
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) +
           "\" height=\"" + detail::svg_num(height) + "\" viewBox=\"0 0 " +
           detail::svg_num(width) + " " + detail::svg_num(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#f2f2f2\"/>\n";
    out += "<rect x=\"" + detail::svg_num(margin_left) + "\" y=\"" +
           detail::svg_num(margin_top) + "\" width=\"" + detail::svg_num(plot_w) +
           "\" height=\"" + detail::svg_num(plot_h) + "\" fill=\"#d9d9d9\"/>\n";
    out += "<text x=\"" + detail::svg_num(margin_left) + "\" y=\"22\" font-family=\"sans-serif\""
           " font-size=\"15\" fill=\"#222222\">" +
           detail::svg_escape(title) + "</text>\n";
    out += "<text x=\"" + detail::svg_num(margin_left) + "\" y=\"40\" font-family=\"sans-serif\""
           " font-size=\"11\" fill=\"#555555\">" +
           detail::svg_escape(y_label) + "</text>\n";

    const int tick_count = 4;
    for (int i = 0; i <= tick_count; ++i) {
        const double v = lo + (hi - lo) * i / tick_count;
        const double y = y_px(v);
        out += "<line x1=\"" + detail::svg_num(margin_left) + "\" y1=\"" + detail::svg_num(y) +
               "\" x2=\"" + detail::svg_num(margin_left + plot_w) + "\" y2=\"" +
               detail::svg_num(y) + "\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + detail::svg_num(margin_left - 6.0) + "\" y=\"" +
               detail::svg_num(y + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\""
               " text-anchor=\"end\">" +
               detail::svg_label_num(v) + "</text>\n";
    }

    const double slot = plot_w / static_cast<double>(bars.size());
    const double bar_w = slot * 0.45;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const BarDatum& b = bars[i];
        const double cx = margin_left + slot * (static_cast<double>(i) + 0.5);
        const double top = y_px(std::max(b.value, 0.0));
        const double bottom = y_px(std::min(b.value, 0.0));
        out += "<rect x=\"" + detail::svg_num(cx - bar_w / 2.0) + "\" y=\"" +
               detail::svg_num(top) + "\" width=\"" + detail::svg_num(bar_w) +
               "\" height=\"" + detail::svg_num(std::max(bottom - top, 0.5)) +
               "\" fill=\"#4a7ab5\"/>\n";
        const double y_lo = y_px(b.lo);
        const double y_hi = y_px(b.hi);
        out += "<line x1=\"" + detail::svg_num(cx) + "\" y1=\"" + detail::svg_num(y_lo) +
               "\" x2=\"" + detail::svg_num(cx) + "\" y2=\"" + detail::svg_num(y_hi) +
               "\" stroke=\"#222222\" stroke-width=\"1.5\"/>\n";
        for (const double y : {y_lo, y_hi})
            out += "<line x1=\"" + detail::svg_num(cx - bar_w * 0.3) + "\" y1=\"" +
                   detail::svg_num(y) + "\" x2=\"" + detail::svg_num(cx + bar_w * 0.3) +
                   "\" y2=\"" + detail::svg_num(y) +
                   "\" stroke=\"#222222\" stroke-width=\"1.5\"/>\n";
        out += "<text x=\"" + detail::svg_num(cx) + "\" y=\"" +
               detail::svg_num(margin_top + plot_h + 18.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222222\""
               " text-anchor=\"middle\">" +
               detail::svg_escape(b.label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

/**
 * @brief Render one animation frame: the world as a gray field, obstacle
 * cells as dark blocks, and every agent as the same blue isoceles arrow.
 *
 * An optional caption (e.g. the tick time) is drawn in the corner; an
 * optional goal is drawn as a thin cross.
 */
inline std::string render_frame(const Vec2& world_min, const Vec2& world_max,
                                std::span<const ArrowGlyph> agents,
                                const ObstacleGrid* grid = nullptr,
                                const Vec2* goal = nullptr,
                                const std::string& caption = "") {
    if (!(world_max.x > world_min.x) || !(world_max.y > world_min.y))
        throw DomainError("render_frame: degenerate world bounds");
    const double world_w = world_max.x - world_min.x;
    const double world_h = world_max.y - world_min.y;
    const double width = 640.0;
    const double scale = width / world_w;
    const double height = std::max(64.0, world_h * scale);

    const auto px = [&](const Vec2& p) {
        return Vec2{(p.x - world_min.x) * scale, (world_max.y - p.y) * scale};
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) +
           "\" height=\"" + detail::svg_num(height) + "\" viewBox=\"0 0 " +
           detail::svg_num(width) + " " + detail::svg_num(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#d9d9d9\"/>\n";

    if (grid) {
        for (int cy = 0; cy < grid->height_cells(); ++cy)
            for (int cx = 0; cx < grid->width_cells(); ++cx) {
                if (!grid->occupied(cx, cy)) continue;
                const Vec2 corner{grid->origin().x + cx * grid->cell_size(),
                                  grid->origin().y + (cy + 1) * grid->cell_size()};
                const Vec2 top_left = px(corner);
                out += "<rect x=\"" + detail::svg_num(top_left.x) + "\" y=\"" +
                       detail::svg_num(top_left.y) + "\" width=\"" +
                       detail::svg_num(grid->cell_size() * scale) + "\" height=\"" +
                       detail::svg_num(grid->cell_size() * scale) + "\" fill=\"#5a5a5a\"/>\n";
            }
    }

    if (goal) {
        const Vec2 g = px(*goal);
        const double r = 6.0;
        out += "<line x1=\"" + detail::svg_num(g.x - r) + "\" y1=\"" + detail::svg_num(g.y) +
               "\" x2=\"" + detail::svg_num(g.x + r) + "\" y2=\"" + detail::svg_num(g.y) +
               "\" stroke=\"#8a8a8a\" stroke-width=\"1.5\"/>\n";
        out += "<line x1=\"" + detail::svg_num(g.x) + "\" y1=\"" + detail::svg_num(g.y - r) +
               "\" x2=\"" + detail::svg_num(g.x) + "\" y2=\"" + detail::svg_num(g.y + r) +
               "\" stroke=\"#8a8a8a\" stroke-width=\"1.5\"/>\n";
    }

    for (const auto& agent : agents) {
        const Vec2 dir = heading_vector(agent.heading);
        const Vec2 side{-dir.y, dir.x};
        const Vec2 tip{agent.position.x + dir.x * 0.30, agent.position.y + dir.y * 0.30};
        const Vec2 base{agent.position.x - dir.x * 0.18, agent.position.y - dir.y * 0.18};
        const Vec2 left{base.x + side.x * 0.14, base.y + side.y * 0.14};
        const Vec2 right{base.x - side.x * 0.14, base.y - side.y * 0.14};
        const Vec2 a = px(tip);
        const Vec2 b = px(left);
        const Vec2 c = px(right);
        out += "<polygon points=\"" + detail::svg_num(a.x) + "," + detail::svg_num(a.y) +
               " " + detail::svg_num(b.x) + "," + detail::svg_num(b.y) + " " +
               detail::svg_num(c.x) + "," + detail::svg_num(c.y) +
               "\" fill=\"#2f5fa3\"/>\n";
    }

    if (!caption.empty())
        out += "<text x=\"8\" y=\"" + detail::svg_num(height - 8.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">" +
               detail::svg_escape(caption) + "</text>\n";
    out += "</svg>\n";
    return out;
}

} // namespace gtnav
