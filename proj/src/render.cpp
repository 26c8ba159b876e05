#include "ccshap/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ccshap/rng.hpp"
#include "ccshap/util.hpp"

namespace ccshap {

namespace {

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string color(double t) {
    const auto lerp = [&](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", lerp(0x1e, 0xff), lerp(0x88, 0x00), lerp(0xe5, 0x52));
    return buf;
}

} // namespace

std::string render_beeswarm_svg(const AttributionResult& result, const std::string& title) {
    const double left = 120.0;
    const double plot_width = 600.0;
    const double row_height = 60.0;
    const double top = 50.0;
    const double height = top + row_height * static_cast<double>(result.features.size()) + 50.0;

    double lo = 0.0;
    double hi = 0.0;
    for (const auto& p : result.phi)
        for (double v : p) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const auto x_of = [&](double v) { return left + (v - lo) / (hi - lo) * plot_width; };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(left + plot_width + 40, 0) << "\" height=\""
       << fixed(height, 0) << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << fixed(left) << "\" y=\"25\" font-size=\"16\" font-family=\"sans-serif\">" << escape(title)
       << "</text>\n"
       << "<line x1=\"" << fixed(x_of(0.0)) << "\" y1=\"" << fixed(top - 10) << "\" x2=\"" << fixed(x_of(0.0))
       << "\" y2=\"" << fixed(height - 40) << "\" stroke=\"#999\"/>\n";

    for (std::size_t k = 0; k < result.features.size(); ++k) {
        const double center = top + row_height * (static_cast<double>(k) + 0.5);
        const auto& name = result.features[k];
        os << "<text x=\"" << fixed(left - 10) << "\" y=\"" << fixed(center + 4) << "\" text-anchor=\"end\" "
           << "font-size=\"13\" font-family=\"sans-serif\">" << escape(name) << "</text>\n";
        const auto col = result.eval.column(result.eval.index_of(name));
        double vlo = col.empty() ? 0.0 : *std::ranges::min_element(col);
        double vhi = col.empty() ? 1.0 : *std::ranges::max_element(col);
        if (vhi - vlo < 1e-12) vhi = vlo + 1.0;
        os << "<g>\n";
        for (std::size_t r = 0; r < result.eval.rows(); ++r) {
            const auto h = splitmix64(stable_hash(name) ^ splitmix64(r));
            const double jitter = (static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5) * row_height * 0.7;
            os << "<circle cx=\"" << fixed(x_of(result.phi[k][r])) << "\" cy=\"" << fixed(center + jitter)
               << "\" r=\"2\" fill=\"" << color((col[r] - vlo) / (vhi - vlo)) << "\" fill-opacity=\"0.6\"/>\n";
        }
        os << "</g>\n";
    }
    const double axis_y = height - 30;
    os << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(axis_y) << "\" x2=\"" << fixed(left + plot_width)
       << "\" y2=\"" << fixed(axis_y) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = lo + (hi - lo) * i / 4.0;
        os << "<text x=\"" << fixed(x_of(v)) << "\" y=\"" << fixed(axis_y + 16)
           << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << fixed(v, 3) << "</text>\n";
    }
    os << "<text x=\"" << fixed(left + plot_width / 2) << "\" y=\"" << fixed(height - 2)
       << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << escape(to_string(result.method))
       << " value (color: feature value, blue low, red high)</text>\n"
       << "</svg>\n";
    return os.str();
}

} // namespace ccshap
