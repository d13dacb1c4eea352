// SPDX-License-Identifier: Apache-2.0
#include "v6drift/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace v6drift {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 36;
constexpr int kMarginBottom = 56;

// Color-blind-friendly line palette.
constexpr const char* kPalette[] = {"#0072b2", "#d55e00", "#009e73", "#cc79a7",
                                    "#e69f00", "#56b4e9", "#f0e442", "#000000"};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[40];
    if (v != 0 && (std::fabs(v) >= 100000 || std::fabs(v) < 0.01))
        std::snprintf(buf, sizeof(buf), "%.1e", v);
    else if (v == std::floor(v))
        std::snprintf(buf, sizeof(buf), "%.0f", v);
    else
        std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void xml_escape_into(std::string& out, const std::string& s) {
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
}

class Svg {
public:
    Svg(int w, int h) : w_(w), h_(h) {
        body_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
                 std::to_string(w) + "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " +
                 std::to_string(w) + " " + std::to_string(h) + "\">\n";
        body_ += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(w) + "\" height=\"" +
                 std::to_string(h) + "\" fill=\"white\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill) {
        body_ += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) +
                 "\" height=\"" + fmt(h) + "\" fill=\"" + fill + "\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0) {
        body_ += "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) +
                 "\" y2=\"" + fmt(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
                 fmt(width) + "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
        if (pts.empty())
            return;
        body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : pts) {
            body_ += fmt(x);
            body_ += ',';
            body_ += fmt(y);
            body_ += ' ';
        }
        body_.pop_back();
        body_ += "\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size = 12,
              const std::string& anchor = "start", const std::string& extra = "") {
        body_ += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-family=\"sans-serif\"" +
                 " font-size=\"" + std::to_string(size) + "\" text-anchor=\"" + anchor + "\"" +
                 extra + ">";
        xml_escape_into(body_, s);
        body_ += "</text>\n";
    }

    void write(const std::string& path) {
        body_ += "</svg>\n";
        std::ofstream out(path, std::ios::trunc | std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot open " + path);
        out << body_;
    }

private:
    int w_, h_;
    std::string body_;
};

struct Axis {
    double lo, hi;
    double px0, px1;
    double to_px(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

std::vector<double> linear_ticks(double lo, double hi, int target = 5) {
    double span = hi - lo;
    if (span <= 0)
        return {lo};
    double raw = span / target;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    }
    std::vector<double> ticks;
    for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step)
        ticks.push_back(v);
    return ticks;
}

void draw_frame(Svg& svg, const Axis& x, const Axis& y, const std::string& title,
                const std::string& x_label, const std::string& y_label) {
    svg.line(x.px0, y.px0, x.px1, y.px0, "black");  // x axis (y.px0 is the bottom)
    svg.line(x.px0, y.px0, x.px0, y.px1, "black");  // y axis
    svg.text(kWidth / 2.0, 20, title, 14, "middle");
    svg.text((x.px0 + x.px1) / 2.0, kHeight - 12, x_label, 12, "middle");
    svg.text(16, (y.px0 + y.px1) / 2.0, y_label, 12, "middle",
             " transform=\"rotate(-90 16 " + fmt((y.px0 + y.px1) / 2.0) + ")\"");
}

}  // namespace

std::optional<FigureKind> figure_kind_from_string(std::string_view s) {
    if (s == "allocation-heatmap")
        return FigureKind::AllocationHeatmap;
    if (s == "cdf-alloc-bits")
        return FigureKind::CdfAllocBits;
    if (s == "cdf-pool-vs-bgp")
        return FigureKind::CdfPoolVsBgp;
    if (s == "cdf-prefixes-per-iid")
        return FigureKind::CdfPrefixesPerIid;
    if (s == "cdf-homogeneity")
        return FigureKind::CdfHomogeneity;
    if (s == "iid-timeline")
        return FigureKind::IidTimeline;
    if (s == "density-by-day")
        return FigureKind::DensityByDay;
    return std::nullopt;
}

uint32_t responder_color(Ipv6Addr128 responder) {
    uint32_t color =
        uint32_t(mix64(responder.high64() * 0x9e3779b97f4a7c15ULL ^ responder.low64())) &
        0xffffff;
    uint32_t r = color >> 16, g = (color >> 8) & 0xff, b = color & 0xff;
    if (r + g + b < 96)
        color |= 0x404040;  // keep every responder distinguishable from black
    return color;
}

void emit_allocation_heatmap(const std::string& path, std::span<const Observation> observations,
                             const Ipv6Prefix& prefix48, const std::string& title) {
    // cell index = bytes 7 and 8 of the target: row = byte 7, col = byte 8.
    std::vector<std::optional<Ipv6Addr128>> grid(256 * 256);
    size_t in_prefix = 0;
    for (const Observation& obs : observations) {
        if (!prefix48.contains(obs.target))
            continue;
        ++in_prefix;
        int row = obs.target.byte(6);
        int col = obs.target.byte(7);
        if (obs.responder)
            grid[size_t(row) * 256 + col] = obs.responder;
    }

    const double cell = 1.6;
    const int grid_px = int(256 * cell);
    const int left = 70, top = 36;
    Svg svg(left + grid_px + 30, top + grid_px + 56);
    svg.text((left + grid_px / 2.0), 20, title.empty() ? prefix48.str() : title, 14, "middle");
    svg.rect(left, top, grid_px, grid_px, "black");
    if (in_prefix == 0)
        svg.text(left + grid_px / 2.0, top + grid_px / 2.0, "no data", 16, "middle",
                 " fill=\"white\"");
    char color_buf[10];
    for (int row = 0; row < 256; ++row) {
        double y = top + (255 - row) * cell;  // byte value 0 at the bottom
        int col = 0;
        while (col < 256) {
            const auto& responder = grid[size_t(row) * 256 + col];
            if (!responder) {
                ++col;
                continue;
            }
            int run = col + 1;
            while (run < 256 && grid[size_t(row) * 256 + run] == responder)
                ++run;
            std::snprintf(color_buf, sizeof(color_buf), "#%06x", responder_color(*responder));
            svg.rect(left + col * cell, y, (run - col) * cell, cell, color_buf);
            col = run;
        }
    }
    svg.text(left + grid_px / 2.0, top + grid_px + 36, "address byte 8", 12, "middle");
    svg.text(20, top + grid_px / 2.0, "address byte 7", 12, "middle",
             " transform=\"rotate(-90 20 " + fmt(top + grid_px / 2.0) + ")\"");
    // A few scale marks.
    for (int v : {0, 64, 128, 192, 255}) {
        svg.text(left + v * cell, top + grid_px + 14, std::to_string(v), 10, "middle");
        svg.text(left - 6, top + (255 - v) * cell + 4, std::to_string(v), 10, "end");
    }
    svg.write(path);
}

std::vector<std::pair<double, double>> cdf_points(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> points;
    double n = double(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        if (i + 1 < values.size() && values[i + 1] == values[i])
            continue;  // collapse ties to the last occurrence
        points.push_back({values[i], double(i + 1) / n});
    }
    return points;
}

void emit_cdf_figure(const std::string& path, const std::string& title,
                     const std::string& x_label, std::vector<CdfSeries> series, bool log_x) {
    Svg svg(kWidth, kHeight);
    double lo = 0, hi = 1;
    bool any = false;
    for (auto& s : series) {
        std::sort(s.values.begin(), s.values.end());
        for (double v : s.values) {
            double x = log_x ? std::log10(std::max(v, 1e-12)) : v;
            if (!any) {
                lo = hi = x;
                any = true;
            } else {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        }
    }
    if (!any) {
        svg.text(kWidth / 2.0, kHeight / 2.0, "no data", 16, "middle");
        svg.text(kWidth / 2.0, 20, title, 14, "middle");
        svg.write(path);
        return;
    }
    if (hi == lo)
        hi = lo + 1;
    double pad = (hi - lo) * 0.04;
    Axis x{lo - pad, hi + pad, double(kMarginLeft), double(kWidth - kMarginRight)};
    Axis y{0.0, 1.0, double(kHeight - kMarginBottom), double(kMarginTop)};
    draw_frame(svg, x, y, title, x_label, "CDF");

    std::vector<double> ticks =
        log_x ? [&] {
            std::vector<double> t;
            for (int e = int(std::floor(lo)); e <= int(std::ceil(hi)); ++e)
                t.push_back(double(e));
            return t;
        }()
              : linear_ticks(x.lo, x.hi);
    for (double t : ticks) {
        if (t < x.lo || t > x.hi)
            continue;
        svg.line(x.to_px(t), y.px0, x.to_px(t), y.px0 + 4, "black");
        std::string label = log_x ? ("1e" + fmt_tick(t)) : fmt_tick(t);
        svg.text(x.to_px(t), y.px0 + 18, label, 10, "middle");
    }
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        svg.line(x.px0 - 4, y.to_px(t), x.px0, y.to_px(t), "black");
        svg.text(x.px0 - 8, y.to_px(t) + 4, fmt_tick(t), 10, "end");
        svg.line(x.px0, y.to_px(t), x.px1, y.to_px(t), "#dddddd", 0.5);
    }

    for (size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        if (s.values.empty())
            continue;
        std::vector<std::pair<double, double>> pts;
        pts.reserve(s.values.size() * 2 + 1);
        double n = double(s.values.size());
        double prev_y = 0.0;
        for (size_t j = 0; j < s.values.size(); ++j) {
            double vx = log_x ? std::log10(std::max(s.values[j], 1e-12)) : s.values[j];
            pts.push_back({x.to_px(vx), y.to_px(prev_y)});
            prev_y = double(j + 1) / n;
            pts.push_back({x.to_px(vx), y.to_px(prev_y)});
        }
        pts.push_back({x.px1, y.to_px(1.0)});
        const char* color = kPalette[i % 8];
        svg.polyline(pts, color);
        svg.text(x.px0 + 10, kMarginTop + 16 + 16 * double(i), s.name, 11, "start",
                 std::string(" fill=\"") + color + "\"");
    }
    svg.write(path);
}

void emit_timeline_figure(const std::string& path, const std::string& title,
                          const std::string& y_label, std::vector<TimelineSeries> series) {
    Svg svg(kWidth, kHeight);
    bool any = false;
    double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
    for (const auto& s : series) {
        for (const auto& [px, py] : s.points) {
            if (!any) {
                xlo = xhi = px;
                ylo = yhi = py;
                any = true;
            } else {
                xlo = std::min(xlo, px);
                xhi = std::max(xhi, px);
                ylo = std::min(ylo, py);
                yhi = std::max(yhi, py);
            }
        }
    }
    if (!any) {
        svg.text(kWidth / 2.0, kHeight / 2.0, "no data", 16, "middle");
        svg.text(kWidth / 2.0, 20, title, 14, "middle");
        svg.write(path);
        return;
    }
    if (xhi == xlo)
        xhi = xlo + 1;
    if (yhi == ylo)
        yhi = ylo + 1;
    double xpad = (xhi - xlo) * 0.04, ypad = (yhi - ylo) * 0.06;
    Axis x{xlo - xpad, xhi + xpad, double(kMarginLeft), double(kWidth - kMarginRight)};
    Axis y{ylo - ypad, yhi + ypad, double(kHeight - kMarginBottom), double(kMarginTop)};
    draw_frame(svg, x, y, title, "day", y_label);
    for (double t : linear_ticks(x.lo, x.hi)) {
        svg.line(x.to_px(t), y.px0, x.to_px(t), y.px0 + 4, "black");
        svg.text(x.to_px(t), y.px0 + 18, fmt_tick(t), 10, "middle");
    }
    for (double t : linear_ticks(y.lo, y.hi)) {
        svg.line(x.px0 - 4, y.to_px(t), x.px0, y.to_px(t), "black");
        svg.text(x.px0 - 8, y.to_px(t) + 4, fmt_tick(t), 10, "end");
    }
    for (size_t i = 0; i < series.size(); ++i) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(series[i].points.size());
        for (const auto& [px, py] : series[i].points)
            pts.push_back({x.to_px(px), y.to_px(py)});
        const char* color = kPalette[i % 8];
        svg.polyline(pts, color);
        svg.text(x.px1 - 8, kMarginTop + 16 + 16 * double(i), series[i].name, 11, "end",
                 std::string(" fill=\"") + color + "\"");
    }
    svg.write(path);
}

}  // namespace v6drift
