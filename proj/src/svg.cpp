#include "mdm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "mdm/instance.hpp"

namespace mdm {

namespace {

std::string fmt(double v) {
    if (std::fabs(v) < 5e-7) v = 0.0;  // avoid "-0.000000"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
}

// SVG y grows downward; negate y so the picture matches math orientation.
std::string attr_xy(const char* ax, const char* ay, Point2 p) {
    return std::string(ax) + "=\"" + fmt(p.x) + "\" " + ay + "=\"" + fmt(-p.y) + "\"";
}

}  // namespace

std::string render_svg(const Network& net, const CompactSample& m) {
    validate(m);
    double lo_x = m.points.front().x, hi_x = lo_x;
    double lo_y = m.points.front().y, hi_y = lo_y;
    for (const Point2& p : m.points) {
        lo_x = std::min(lo_x, p.x);
        hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_y = std::max(hi_y, p.y);
    }
    lo_x -= m.r;
    hi_x += m.r;
    lo_y -= m.r;
    hi_y += m.r;
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
    const double pad = 0.02 * span;
    lo_x -= pad;
    hi_x += pad;
    lo_y -= pad;
    hi_y += pad;
    const double w = hi_x - lo_x, h = hi_y - lo_y;
    const double stroke = span / 400.0;
    const double dot = span / 200.0;

    std::vector<Point2> witness_centers;
    if (!net.empty()) {
        for (const Point2& v : net.vertices()) {
            if (!is_energetic(m, net, v)) continue;
            for (const Point2& y : corresponding_points(m, net, v)) {
                bool dup = false;
                for (const Point2& c : witness_centers)
                    if (dist(c, y) < 1e-9 * std::max(1.0, m.r)) dup = true;
                if (!dup) witness_centers.push_back(y);
            }
        }
        std::sort(witness_centers.begin(), witness_centers.end(), [](Point2 a, Point2 b) {
            return a.x != b.x ? a.x < b.x : a.y < b.y;
        });
    }

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + fmt(lo_x) + " " + fmt(-hi_y) +
         " " + fmt(w) + " " + fmt(h) + "\" width=\"800\" height=\"" +
         std::to_string(static_cast<int>(std::lround(800.0 * h / w))) + "\">\n";

    s += "  <g class=\"witness\" fill=\"none\" stroke=\"#9ecae1\" stroke-width=\"" + fmt(stroke) +
         "\">\n";
    for (const Point2& c : witness_centers)
        s += "    <circle " + attr_xy("cx", "cy", c) + " r=\"" + fmt(m.r) + "\"/>\n";
    s += "  </g>\n";

    s += "  <g class=\"network\" stroke=\"#d62728\" stroke-width=\"" + fmt(stroke) +
         "\" stroke-linecap=\"round\">\n";
    if (!net.empty()) {
        for (const auto& e : net.edges()) {
            const Point2 a = net.vertices()[static_cast<std::size_t>(e.first)];
            const Point2 b = net.vertices()[static_cast<std::size_t>(e.second)];
            s += "    <line " + attr_xy("x1", "y1", a) + " " + attr_xy("x2", "y2", b) + "/>\n";
        }
        if (net.edges().empty())
            for (const Point2& v : net.vertices())
                s += "    <circle class=\"vertex\" " + attr_xy("cx", "cy", v) + " r=\"" +
                     fmt(dot) + "\" fill=\"#d62728\"/>\n";
    }
    s += "  </g>\n";

    s += "  <g class=\"samples\" fill=\"#1f77b4\">\n";
    for (const Point2& p : m.points)
        s += "    <circle " + attr_xy("cx", "cy", p) + " r=\"" + fmt(dot * 0.6) + "\"/>\n";
    s += "  </g>\n";
    s += "</svg>\n";
    return s;
}

void emit_svg(const Network& net, const CompactSample& m, const std::string& path) {
    write_text_file(path, render_svg(net, m));
}

}  // namespace mdm
