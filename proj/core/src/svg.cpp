#include "tagprof/svg.hpp"

#include "tagprof/csv.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace tagprof {

namespace {

std::string num(double v) { return csv::format_fixed(v, 2); }

std::string escape_xml(const std::string& text) {
    std::string out;
    for (const char c : text) {
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

void open_svg(std::ostream& out, double width, double height) {
    out << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << num(width) << R"(" height=")" << num(height)
        << R"(" viewBox="0 0 )" << num(width) << ' ' << num(height) << R"(" font-family="sans-serif" font-size="11">)"
        << '\n'
        << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
}

void text(std::ostream& out, double x, double y, const std::string& s, const char* anchor = "start") {
    out << R"(<text x=")" << num(x) << R"(" y=")" << num(y) << R"(" text-anchor=")" << anchor << R"(">)"
        << escape_xml(s) << "</text>\n";
}

void line(std::ostream& out, double x1, double y1, double x2, double y2, const char* stroke,
          const char* extra = "") {
    out << R"(<line x1=")" << num(x1) << R"(" y1=")" << num(y1) << R"(" x2=")" << num(x2) << R"(" y2=")"
        << num(y2) << R"(" stroke=")" << stroke << '"' << extra << "/>\n";
}

}  // namespace

void write_reachability_svg(std::ostream& out, const ReachabilityOrdering& ordering, double eps_cut) {
    const double width = 800.0;
    const double height = 300.0;
    const double left = 50.0;
    const double bottom = 260.0;
    const double top = 20.0;
    const std::size_t n = ordering.order.size();

    double peak = std::isfinite(eps_cut) ? eps_cut : 0.0;
    for (const double r : ordering.reachability) {
        if (std::isfinite(r)) {
            peak = std::max(peak, r);
        }
    }
    if (peak <= 0.0) {
        peak = 1.0;
    }
    peak *= 1.1;
    const double bar = n > 0 ? (width - left - 10.0) / static_cast<double>(n) : 0.0;

    open_svg(out, width, height);
    text(out, width / 2.0, 14.0, "Reachability profile", "middle");
    line(out, left, bottom, width - 10.0, bottom, "black");
    line(out, left, top, left, bottom, "black");
    text(out, left - 4.0, top + 4.0, num(peak), "end");
    text(out, left - 4.0, bottom, "0", "end");
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ordering.reachability[i];
        const bool undefined = !std::isfinite(r);
        const double h = (undefined ? peak : r) / peak * (bottom - top);
        out << R"(<rect x=")" << num(left + bar * static_cast<double>(i)) << R"(" y=")" << num(bottom - h)
            << R"(" width=")" << num(std::max(bar, 0.5)) << R"(" height=")" << num(h) << R"(" fill=")"
            << (undefined ? "#bbbbbb" : "#3a6ea5") << R"("/>)" << '\n';
    }
    if (std::isfinite(eps_cut)) {
        const double y = bottom - eps_cut / peak * (bottom - top);
        line(out, left, y, width - 10.0, y, "#c0392b", R"( stroke-dasharray="4 3")");
        text(out, width - 12.0, y - 3.0, "eps = " + num(eps_cut), "end");
    }
    text(out, width / 2.0, bottom + 30.0, "ordering position", "middle");
    out << "</svg>\n";
}

void write_projection_svg(std::ostream& out, const ProfileProjection& projection) {
    const double size = 500.0;
    const double margin = 50.0;
    const auto& xy = projection.coordinates;
    double extent = 1e-9;
    for (Eigen::Index i = 0; i < xy.rows(); ++i) {
        for (Eigen::Index j = 0; j < xy.cols(); ++j) {
            extent = std::max(extent, std::abs(xy(i, j)));
        }
    }
    extent *= 1.15;
    const double half = (size - 2.0 * margin) / 2.0;
    const double cx = size / 2.0;
    const double cy = size / 2.0;
    auto px = [&](double v) { return cx + v / extent * half; };
    auto py = [&](double v) { return cy - v / extent * half; };

    open_svg(out, size, size);
    text(out, cx, 20.0, "Genre personality profiles, principal components", "middle");
    line(out, margin, cy, size - margin, cy, "#999999");
    line(out, cx, margin, cx, size - margin, "#999999");
    text(out, size - margin, cy + 16.0,
         "PC1 (" + num(100.0 * projection.explained(0)) + "%)", "end");
    text(out, cx + 6.0, margin - 6.0, "PC2 (" + num(100.0 * projection.explained(1)) + "%)");
    for (Eigen::Index i = 0; i < xy.rows(); ++i) {
        const double x = px(xy(i, 0));
        const double y = py(xy.cols() > 1 ? xy(i, 1) : 0.0);
        out << R"(<circle cx=")" << num(x) << R"(" cy=")" << num(y) << R"(" r="4" fill="#3a6ea5"/>)" << '\n';
        text(out, x + 6.0, y - 6.0, projection.labels[static_cast<std::size_t>(i)]);
    }
    out << "</svg>\n";
}

void write_profiles_svg(std::ostream& out, const std::vector<GenreProfile>& profiles) {
    const double cell = 40.0;
    const double label_width = 180.0;
    const double header = 60.0;
    const double width = label_width + cell * static_cast<double>(kTraitCount) + 20.0;
    const double height = header + cell * static_cast<double>(profiles.size()) + 20.0;

    double extent = 1e-9;
    for (const auto& p : profiles) {
        for (const double v : p.normalized) {
            extent = std::max(extent, std::abs(v));
        }
    }

    open_svg(out, width, height);
    text(out, width / 2.0, 16.0, "Normalized genre trait profiles", "middle");
    for (std::size_t t = 0; t < kTraitCount; ++t) {
        text(out, label_width + cell * (static_cast<double>(t) + 0.5), header - 8.0,
             std::string(trait_name(static_cast<Trait>(t))).substr(0, 5), "middle");
    }
    for (std::size_t g = 0; g < profiles.size(); ++g) {
        const double y = header + cell * static_cast<double>(g);
        text(out, label_width - 6.0, y + cell / 2.0 + 4.0, profiles[g].label, "end");
        for (std::size_t t = 0; t < kTraitCount; ++t) {
            const double v = profiles[g].normalized[t] / extent;
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(v))));
            const std::string color = v >= 0.0 ? "rgb(255," + std::to_string(shade) + "," + std::to_string(shade) + ")"
                                               : "rgb(" + std::to_string(shade) + "," + std::to_string(shade) + ",255)";
            out << R"(<rect x=")" << num(label_width + cell * static_cast<double>(t)) << R"(" y=")" << num(y)
                << R"(" width=")" << num(cell) << R"(" height=")" << num(cell) << R"(" fill=")" << color
                << R"(" stroke="white"/>)" << '\n';
            text(out, label_width + cell * (static_cast<double>(t) + 0.5), y + cell / 2.0 + 4.0,
                 num(profiles[g].normalized[t]), "middle");
        }
    }
    out << "</svg>\n";
}

}  // namespace tagprof
