#include "gridbrake/plot.hpp"

#include "gridbrake/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

namespace gridbrake {

namespace {

constexpr double kWidth = 900.0;
constexpr double kPanelHeight = 220.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kGap = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};

std::string num(double v, int decimals = 2) {
    if (v == 0.0) v = 0.0;
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    return std::string(buf, r.ptr);
}

std::string tick_label(double v, double step) {
    int decimals = 0;
    while (decimals < 6 && std::abs(step * std::pow(10.0, decimals) - std::round(step * std::pow(10.0, decimals))) > 1e-6)
        ++decimals;
    return num(v, decimals);
}

std::string escape(const std::string& s) {
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

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

double nice_step(double span, int target) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
    return nice * mag;
}

Range padded(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = std::max(1e-3, std::abs(lo) * 0.01);
        return {lo - pad, hi + pad};
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

class Svg {
public:
    Svg(double w, double h) : w_(w), h_(h) {}

    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0,
              const std::string& extra = "") {
        body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
                 "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"" + extra + "/>\n";
    }
    void text(double x, double y, const std::string& s, const std::string& anchor = "start", int size = 12,
              const std::string& extra = "") {
        body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) +
                 "\" text-anchor=\"" + anchor + "\"" + extra + ">" + escape(s) + "</text>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke) {
        body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
                 "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
    }
    void circle(double x, double y, double r, const std::string& fill) {
        body_ += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) + "\" fill=\"" + fill + "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
        if (pts.empty()) return;
        body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) body_ += ' ';
            body_ += num(pts[i].first) + "," + num(pts[i].second);
        }
        body_ += "\"/>\n";
    }
    std::string str() const {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w_, 0) + "\" height=\"" + num(h_, 0) +
               "\" viewBox=\"0 0 " + num(w_, 0) + " " + num(h_, 0) + "\" font-family=\"sans-serif\">\n" +
               "<rect x=\"0\" y=\"0\" width=\"" + num(w_, 0) + "\" height=\"" + num(h_, 0) + "\" fill=\"white\"/>\n" +
               body_ + "</svg>\n";
    }

private:
    double w_;
    double h_;
    std::string body_;
};

/// Draws frame, grid and tick labels; returns the data-to-pixel maps.
struct Frame {
    double x0, y0, w, h;
    Range xr, yr;
    double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
    double py(double y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }
};

void draw_axes(Svg& svg, const Frame& f, const std::string& x_label, const std::string& y_label) {
    svg.rect(f.x0, f.y0, f.w, f.h, "none", "#444444");
    const double xs = nice_step(f.xr.hi - f.xr.lo, 8);
    for (double v = std::ceil(f.xr.lo / xs) * xs; v <= f.xr.hi + 1e-12; v += xs) {
        const double x = f.px(v);
        svg.line(x, f.y0, x, f.y0 + f.h, "#e0e0e0");
        svg.text(x, f.y0 + f.h + 15, tick_label(v, xs), "middle", 11);
    }
    const double ys = nice_step(f.yr.hi - f.yr.lo, 5);
    for (double v = std::ceil(f.yr.lo / ys) * ys; v <= f.yr.hi + 1e-12 * std::max(1.0, std::abs(f.yr.hi)); v += ys) {
        const double y = f.py(v);
        svg.line(f.x0, y, f.x0 + f.w, y, "#e0e0e0");
        svg.text(f.x0 - 6, y + 4, tick_label(v, ys), "end", 11);
    }
    svg.text(f.x0 + f.w / 2, f.y0 + f.h + 32, x_label, "middle", 12);
    svg.text(f.x0 - 58, f.y0 + f.h / 2, y_label, "middle", 12,
             " transform=\"rotate(-90 " + num(f.x0 - 58) + " " + num(f.y0 + f.h / 2) + ")\"");
}

/// Keeps the first, min, max and last sample per pixel column.
std::vector<std::pair<double, double>> decimate(const Frame& f, const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<std::pair<double, double>> out;
    std::size_t i = 0;
    const std::size_t n = std::min(x.size(), y.size());
    while (i < n) {
        const long col = std::lround(f.px(x[i]));
        std::size_t j = i;
        std::size_t lo = i;
        std::size_t hi = i;
        while (j < n && std::lround(f.px(x[j])) == col) {
            if (y[j] < y[lo]) lo = j;
            if (y[j] > y[hi]) hi = j;
            ++j;
        }
        std::vector<std::size_t> keep{i, lo, hi, j - 1};
        std::sort(keep.begin(), keep.end());
        keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
        for (auto k : keep) {
            if (std::isfinite(y[k])) out.emplace_back(f.px(x[k]), f.py(y[k]));
        }
        i = j;
    }
    return out;
}

}  // namespace

CsvTable trace_table(const SimTrace& trace) {
    CsvTable t;
    t.header.push_back("time_s");
    t.columns.push_back(trace.time);
    for (std::size_t c = 0; c < trace.channel_names.size(); ++c) {
        t.header.push_back(trace.channel_names[c]);
        t.columns.push_back(trace.channels[c]);
    }
    return t;
}

std::vector<PlotMarker> event_markers(const SimTrace& trace) {
    static const std::map<std::string, std::string> shown{{"load_step", "load loss"},
                                                          {"breaker_closed", "close"},
                                                          {"breaker_opened", "open"},
                                                          {"voltage_dip_start", "dip"},
                                                          {"voltage_dip_end", "dip end"}};
    std::vector<PlotMarker> out;
    for (const auto& e : trace.events) {
        auto it = shown.find(e.kind);
        if (it == shown.end()) continue;
        std::string label = it->second;
        if (e.kind.rfind("breaker_", 0) == 0) label = e.detail + " " + label;
        // one marker per instant; labels at the same time are joined
        if (!out.empty() && out.back().time_s == e.time) {
            if (out.back().label.find(label) == std::string::npos) out.back().label += ", " + label;
            continue;
        }
        out.push_back({e.time, label});
    }
    return out;
}

std::string render_trace_svg(const std::vector<LabeledTable>& tables, const PlotSpec& spec) {
    if (tables.empty()) throw ConfigError("render: nothing to plot");
    if (spec.channels.empty()) throw ConfigError("render: no channels requested");
    for (const auto& t : tables) {
        if (t.table.header.empty() || t.table.columns.empty() || t.table.columns.front().empty())
            throw ConfigError("render: trace '" + t.label + "' is empty");
        t.table.column("time_s");
        for (const auto& c : spec.channels) {
            if (std::find(t.table.header.begin(), t.table.header.end(), c) == t.table.header.end())
                throw ConfigError("render: trace '" + t.label + "' has no channel '" + c + "'");
        }
    }

    double t_lo = INFINITY;
    double t_hi = -INFINITY;
    for (const auto& t : tables) {
        const auto& time = t.table.column("time_s");
        t_lo = std::min(t_lo, time.front());
        t_hi = std::max(t_hi, time.back());
    }
    const Range xr = t_hi > t_lo ? Range{t_lo, t_hi} : padded(t_lo, t_hi);

    const double plot_w = kWidth - kLeft - kRight;
    const double height = kTop + spec.channels.size() * (kPanelHeight + kGap) + 10.0;
    Svg svg(kWidth, height);
    if (!spec.title.empty()) svg.text(kWidth / 2, 24, spec.title, "middle", 15);

    for (std::size_t p = 0; p < spec.channels.size(); ++p) {
        const auto& ch = spec.channels[p];
        double lo = INFINITY;
        double hi = -INFINITY;
        for (const auto& t : tables) {
            for (double v : t.table.column(ch)) {
                if (!std::isfinite(v)) continue;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (!std::isfinite(lo)) lo = hi = 0.0;
        Frame f{kLeft, kTop + p * (kPanelHeight + kGap), plot_w, kPanelHeight, xr, padded(lo, hi)};
        const std::string y_label = p < spec.y_labels.size() ? spec.y_labels[p] : ch;
        draw_axes(svg, f, spec.x_label, y_label);

        for (std::size_t m = 0; m < spec.markers.size(); ++m) {
            const auto& mk = spec.markers[m];
            if (mk.time_s < xr.lo || mk.time_s > xr.hi) continue;
            const double x = f.px(mk.time_s);
            svg.line(x, f.y0, x, f.y0 + f.h, "#888888", 1.0, " stroke-dasharray=\"4 3\"");
            if (p == 0) svg.text(x + 3, f.y0 + 12 + 12.0 * static_cast<double>(m % 4), mk.label, "start", 10);
        }
        for (std::size_t k = 0; k < tables.size(); ++k) {
            const auto& t = tables[k];
            svg.polyline(decimate(f, t.table.column("time_s"), t.table.column(ch)), kPalette[k % std::size(kPalette)]);
        }
        if (p == 0) {
            for (std::size_t k = 0; k < tables.size(); ++k) {
                const double y = f.y0 + 10 + 18.0 * static_cast<double>(k);
                svg.line(f.x0 + f.w + 12, y, f.x0 + f.w + 34, y, kPalette[k % std::size(kPalette)], 2.0);
                svg.text(f.x0 + f.w + 40, y + 4, tables[k].label, "start", 11);
            }
        }
    }
    return svg.str();
}

std::string render_eigen_svg(const CsvTable& eigen, const std::string& title) {
    const auto& scr = eigen.column("scr");
    const auto& re = eigen.column("re_1_per_s");
    const auto& im = eigen.column("im_rad_per_s");
    if (scr.empty()) throw ConfigError("render: eigen table is empty");

    std::vector<double> series;
    for (double s : scr) {
        if (std::find(series.begin(), series.end(), s) == series.end()) series.push_back(s);
    }
    Range xr = padded(*std::min_element(re.begin(), re.end()), std::max(0.0, *std::max_element(re.begin(), re.end())));
    Range yr = padded(*std::min_element(im.begin(), im.end()), *std::max_element(im.begin(), im.end()));

    const double plot_h = 480.0;
    Svg svg(kWidth, kTop + plot_h + 60.0);
    if (!title.empty()) svg.text(kWidth / 2, 24, title, "middle", 15);
    Frame f{kLeft, kTop, kWidth - kLeft - kRight, plot_h, xr, yr};
    draw_axes(svg, f, "real part (1/s)", "imaginary part (rad/s)");
    if (xr.lo < 0.0 && xr.hi > 0.0) svg.line(f.px(0.0), f.y0, f.px(0.0), f.y0 + f.h, "#444444");
    if (yr.lo < 0.0 && yr.hi > 0.0) svg.line(f.x0, f.py(0.0), f.x0 + f.w, f.py(0.0), "#444444");

    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = kPalette[k % std::size(kPalette)];
        for (std::size_t i = 0; i < scr.size(); ++i) {
            if (scr[i] == series[k]) svg.circle(f.px(re[i]), f.py(im[i]), 3.0, color);
        }
        const double y = f.y0 + 10 + 18.0 * static_cast<double>(k);
        svg.circle(f.x0 + f.w + 20, y, 4.0, color);
        svg.text(f.x0 + f.w + 30, y + 4, "SCR " + tick_label(series[k], 0.1), "start", 11);
    }
    return svg.str();
}

}  // namespace gridbrake
