#include "repsim/heatmap.hpp"

#include "repsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

namespace repsim {

HeatmapFormat heatmap_format_from_string(const std::string& s) {
    if (s == "pgm") return HeatmapFormat::pgm;
    if (s == "svg") return HeatmapFormat::svg;
    raise(ErrorKind::usage, "unknown heatmap format '" + s + "' (pgm or svg)");
}

Palette palette_from_string(const std::string& s) {
    if (s == "gray") return Palette::gray;
    if (s == "viridis") return Palette::viridis;
    raise(ErrorKind::usage, "unknown palette '" + s + "' (gray or viridis)");
}

namespace {

// Linear map of v from [lo, hi] to 0..255, saturating outside.
int intensity(double v, double lo, double hi) {
    const double unit = (v - lo) / (hi - lo);
    const double clamped = std::clamp(unit, 0.0, 1.0);
    return static_cast<int>(std::lround(clamped * 255.0));
}

struct RgbColor {
    int r, g, b;
};

// Eight viridis anchors, linearly interpolated.
RgbColor viridis(double unit) {
    static constexpr RgbColor anchors[] = {
        {68, 1, 84},   {70, 50, 127},  {54, 92, 141},  {39, 127, 142},
        {31, 161, 135}, {74, 194, 109}, {159, 218, 58}, {253, 231, 37},
    };
    constexpr int segments = 7;
    const double pos = std::clamp(unit, 0.0, 1.0) * segments;
    const int seg = std::min(static_cast<int>(pos), segments - 1);
    const double w = pos - seg;
    const RgbColor& a = anchors[seg];
    const RgbColor& b = anchors[seg + 1];
    return {static_cast<int>(std::lround(a.r + w * (b.r - a.r))),
            static_cast<int>(std::lround(a.g + w * (b.g - a.g))),
            static_cast<int>(std::lround(a.b + w * (b.b - a.b)))};
}

void write_pgm(const Eigen::MatrixXd& values, const std::filesystem::path& path, double lo,
               double hi) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io, "cannot write " + path.string());
    out << "P5\n" << values.cols() << " " << values.rows() << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(values.cols()));
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            row[static_cast<std::size_t>(j)] =
                static_cast<unsigned char>(intensity(values(i, j), lo, hi));
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) raise(ErrorKind::io, "write failed for " + path.string());
}

void write_svg(const Eigen::MatrixXd& values, const std::filesystem::path& path, Palette palette,
               double lo, double hi) {
    constexpr int cell = 16;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io, "cannot write " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << values.cols() * cell
        << "\" height=\"" << values.rows() * cell << "\">\n";
    char color[16];
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (palette == Palette::gray) {
                const int v = intensity(values(i, j), lo, hi);
                std::snprintf(color, sizeof(color), "#%02x%02x%02x", v, v, v);
            } else {
                const double unit = std::clamp((values(i, j) - lo) / (hi - lo), 0.0, 1.0);
                const RgbColor c = viridis(unit);
                std::snprintf(color, sizeof(color), "#%02x%02x%02x", c.r, c.g, c.b);
            }
            out << "  <rect x=\"" << j * cell << "\" y=\"" << i * cell << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"" << color << "\"/>\n";
        }
    }
    out << "</svg>\n";
    if (!out) raise(ErrorKind::io, "write failed for " + path.string());
}

}  // namespace

void render_heatmap(const Eigen::MatrixXd& values, const std::filesystem::path& path,
                    Palette palette, double clamp_lo, double clamp_hi, HeatmapFormat format) {
    if (values.size() == 0) raise(ErrorKind::argument, "render_heatmap: empty matrix");
    if (!values.allFinite()) raise(ErrorKind::data, "render_heatmap: non-finite values");
    if (!(clamp_hi > clamp_lo)) {
        raise(ErrorKind::argument, "render_heatmap: clamp range must have hi > lo");
    }
    if (format == HeatmapFormat::pgm) {
        write_pgm(values, path, clamp_lo, clamp_hi);  // PGM is grayscale by definition
    } else {
        write_svg(values, path, palette, clamp_lo, clamp_hi);
    }
}

}  // namespace repsim
