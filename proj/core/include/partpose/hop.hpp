#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>

#include "partpose/types.hpp"

namespace partpose {

/// Orientation-histogram grid: the image is split into an M x M grid of
/// uniform cells and each cell accumulates a B-bin histogram of part
/// orientations measured from the image center.
struct HopConfig {
  int grid_cells = 8;        // M, cells per image axis
  int orientation_bins = 8;  // B

  /// B = lround(360 / bin_size_deg); the effective bin width is 360/B so the
  /// bins always tile the circle exactly.
  static HopConfig from_bin_size(double bin_size_deg, int grid_cells);

  double bin_size_deg() const { return 360.0 / orientation_bins; }
  Eigen::Index dim() const {
    return static_cast<Eigen::Index>(grid_cells) * grid_cells * orientation_bins;
  }
};

/// Degenerate-input counters accumulated during feature extraction.
struct FeatureDiagnostics {
  std::size_t origin_parts = 0;         // parts exactly at the frame origin
  std::size_t near_zero_norm_parts = 0; // parts dropped from the part graph
  std::size_t out_of_bounds_parts = 0;  // parts outside the image frame

  FeatureDiagnostics& operator+=(const FeatureDiagnostics& other);
};

/// Four-quadrant orientation of the part position, degrees in [0, 360).
/// A part exactly at the origin gets angle 0 and bumps the diagnostic counter.
double part_orientation(const PartRealization& part, FeatureDiagnostics* diag = nullptr);

/// Per-cell orientation histograms, cells row-major (top-left first), the
/// B bins of one cell contiguous. Each in-frame part contributes 1 (or its
/// score when weight_by_score is set) to bin floor(theta / binWidth) of its
/// cell; out-of-frame parts are skipped and counted in the diagnostics.
Eigen::VectorXd hop_features(std::span<const PartRealization> parts,
                             const HopConfig& cfg, int image_width,
                             int image_height, bool weight_by_score = false,
                             FeatureDiagnostics* diag = nullptr);

}  // namespace partpose
