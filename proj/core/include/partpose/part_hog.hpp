#pragma once

#include <Eigen/Core>
#include <span>

#include "partpose/types.hpp"

namespace partpose {

/// HOG over the part-activation map: square cells, unsigned gradients,
/// 2x2-cell blocks at one-cell stride, L2 block normalization with clipping.
struct HogConfig {
  int cell_px = 8;
  int bins = 9;       // unsigned orientation bins over [0, 180)
  double clip = 0.2;  // block-normalization clipping threshold

  /// Companion settings for an orientation-grid config: cell = width / M
  /// (at least 1 px), same bin count.
  static HogConfig derived(int hop_grid_cells, int hop_bins, int image_width);

  int cells_x(int image_width) const { return image_width / cell_px; }
  int cells_y(int image_height) const { return image_height / cell_px; }
  int blocks_x(int image_width) const { return cells_x(image_width) - 1; }
  int blocks_y(int image_height) const { return cells_y(image_height) - 1; }

  /// Descriptor length; throws InputError if the image holds less than one
  /// 2x2 block of cells.
  Eigen::Index dim(int image_width, int image_height) const;
};

/// Real-valued W x H map (row-major rows top to bottom): score-weighted
/// impulses at the parts' nearest pixels, smoothed with a 3x3 triangle
/// kernel. Out-of-frame parts are dropped.
Eigen::MatrixXd part_activation_map(std::span<const PartRealization> parts,
                                    int image_width, int image_height);

/// HOG descriptor of the activation map. Blocks are concatenated row-major
/// (top-left block first); inside a block the four cell histograms are
/// row-major too. A zero map yields the zero vector.
Eigen::VectorXd part_hog_features(std::span<const PartRealization> parts,
                                  int image_width, int image_height,
                                  const HogConfig& cfg);

/// The same descriptor computed from an arbitrary map (raster images reuse
/// this path).
Eigen::VectorXd hog_descriptor(const Eigen::MatrixXd& map, const HogConfig& cfg);

}  // namespace partpose
