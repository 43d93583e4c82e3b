#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>

namespace repsim {

enum class HeatmapFormat { pgm, svg };
enum class Palette { gray, viridis };

HeatmapFormat heatmap_format_from_string(const std::string& s);
Palette palette_from_string(const std::string& s);

/// Render a similarity grid, one cell per matrix entry, cell (i,j) at
/// raster row i / column j. Values map linearly from [clamp_lo, clamp_hi]
/// to intensity (lighter = more similar) and saturate outside the range.
/// PGM output is always grayscale; SVG honors the palette and emits one
/// rect per cell.
void render_heatmap(const Eigen::MatrixXd& values, const std::filesystem::path& path,
                    Palette palette = Palette::gray, double clamp_lo = 0.0,
                    double clamp_hi = 1.0, HeatmapFormat format = HeatmapFormat::pgm);

}  // namespace repsim
