#include "partpose/hop.hpp"

#include <cmath>
#include <numbers>

#include "partpose/errors.hpp"

namespace partpose {

HopConfig HopConfig::from_bin_size(double bin_size_deg, int grid_cells) {
  if (bin_size_deg <= 0.0 || bin_size_deg > 360.0) {
    throw InputError("HopConfig: bin size must lie in (0, 360]");
  }
  HopConfig cfg;
  cfg.grid_cells = grid_cells;
  cfg.orientation_bins = static_cast<int>(std::lround(360.0 / bin_size_deg));
  if (cfg.orientation_bins < 1) cfg.orientation_bins = 1;
  return cfg;
}

FeatureDiagnostics& FeatureDiagnostics::operator+=(const FeatureDiagnostics& other) {
  origin_parts += other.origin_parts;
  near_zero_norm_parts += other.near_zero_norm_parts;
  out_of_bounds_parts += other.out_of_bounds_parts;
  return *this;
}

double part_orientation(const PartRealization& part, FeatureDiagnostics* diag) {
  if (part.x == 0.0 && part.y == 0.0) {
    if (diag != nullptr) ++diag->origin_parts;
    return 0.0;
  }
  double deg = std::atan2(part.y, part.x) * (180.0 / std::numbers::pi);
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;  // atan2 rounding at the wrap
  return deg;
}

Eigen::VectorXd hop_features(std::span<const PartRealization> parts,
                             const HopConfig& cfg, int image_width,
                             int image_height, bool weight_by_score,
                             FeatureDiagnostics* diag) {
  if (cfg.grid_cells < 1 || cfg.orientation_bins < 1) {
    throw InputError("hop_features: grid cells and bins must be positive");
  }
  if (image_width <= 0 || image_height <= 0) {
    throw InputError("hop_features: non-positive image dimensions");
  }

  const int m = cfg.grid_cells;
  const int bins = cfg.orientation_bins;
  const double bin_width = 360.0 / bins;
  const double cell_w = static_cast<double>(image_width) / m;
  const double cell_h = static_cast<double>(image_height) / m;

  Eigen::VectorXd hist = Eigen::VectorXd::Zero(cfg.dim());
  for (const PartRealization& p : parts) {
    PixelPoint px = to_pixel_coords(p.x, p.y, image_width, image_height);
    if (px.col < 0.0 || px.col >= image_width || px.row < 0.0 ||
        px.row >= image_height) {
      if (diag != nullptr) ++diag->out_of_bounds_parts;
      continue;
    }
    int cx = std::min(static_cast<int>(px.col / cell_w), m - 1);
    int cy = std::min(static_cast<int>(px.row / cell_h), m - 1);

    double theta = part_orientation(p, diag);
    int bin = static_cast<int>(theta / bin_width) % bins;  // 360 wraps to 0

    Eigen::Index idx = (static_cast<Eigen::Index>(cy) * m + cx) * bins + bin;
    hist[idx] += weight_by_score ? p.score : 1.0;
  }
  return hist;
}

}  // namespace partpose
