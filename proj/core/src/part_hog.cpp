#include "partpose/part_hog.hpp"

#include <cmath>
#include <numbers>

#include "partpose/errors.hpp"

namespace partpose {

HogConfig HogConfig::derived(int hop_grid_cells, int hop_bins, int image_width) {
  HogConfig cfg;
  cfg.cell_px = std::max(1, image_width / std::max(1, hop_grid_cells));
  cfg.bins = std::max(1, hop_bins);
  return cfg;
}

Eigen::Index HogConfig::dim(int image_width, int image_height) const {
  if (cell_px < 1 || bins < 1) {
    throw InputError("HogConfig: cell size and bin count must be positive");
  }
  int bx = blocks_x(image_width);
  int by = blocks_y(image_height);
  if (bx < 1 || by < 1) {
    throw InputError("hog: image smaller than one 2x2-cell block");
  }
  return static_cast<Eigen::Index>(bx) * by * 4 * bins;
}

Eigen::MatrixXd part_activation_map(std::span<const PartRealization> parts,
                                    int image_width, int image_height) {
  if (image_width <= 0 || image_height <= 0) {
    throw InputError("part_activation_map: non-positive image dimensions");
  }
  Eigen::MatrixXd impulses = Eigen::MatrixXd::Zero(image_height, image_width);
  for (const PartRealization& p : parts) {
    PixelPoint px = to_pixel_coords(p.x, p.y, image_width, image_height);
    int col = static_cast<int>(std::lround(px.col));
    int row = static_cast<int>(std::lround(px.row));
    if (col < 0 || col >= image_width || row < 0 || row >= image_height) continue;
    impulses(row, col) += p.score;
  }

  // 3x3 triangle kernel [1 2 1]/4 per axis, zero padding.
  static const double k[3] = {0.25, 0.5, 0.25};
  Eigen::MatrixXd tmp = Eigen::MatrixXd::Zero(image_height, image_width);
  for (int r = 0; r < image_height; ++r) {
    for (int c = 0; c < image_width; ++c) {
      double acc = 0.0;
      for (int d = -1; d <= 1; ++d) {
        int cc = c + d;
        if (cc < 0 || cc >= image_width) continue;
        acc += k[d + 1] * impulses(r, cc);
      }
      tmp(r, c) = acc;
    }
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(image_height, image_width);
  for (int r = 0; r < image_height; ++r) {
    for (int c = 0; c < image_width; ++c) {
      double acc = 0.0;
      for (int d = -1; d <= 1; ++d) {
        int rr = r + d;
        if (rr < 0 || rr >= image_height) continue;
        acc += k[d + 1] * tmp(rr, c);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

Eigen::VectorXd hog_descriptor(const Eigen::MatrixXd& map, const HogConfig& cfg) {
  const int h = static_cast<int>(map.rows());
  const int w = static_cast<int>(map.cols());
  const Eigen::Index out_dim = cfg.dim(w, h);

  const int ncx = cfg.cells_x(w);
  const int ncy = cfg.cells_y(h);
  const int bins = cfg.bins;
  const double bin_width = 180.0 / bins;

  // Cell histograms, hard-assigned by unsigned gradient orientation.
  Eigen::MatrixXd cells = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ncy) * ncx, bins);
  auto at = [&](int r, int c) -> double {
    if (r < 0 || r >= h || c < 0 || c >= w) return 0.0;
    return map(r, c);
  };
  for (int cy = 0; cy < ncy; ++cy) {
    for (int cx = 0; cx < ncx; ++cx) {
      Eigen::Index cell = static_cast<Eigen::Index>(cy) * ncx + cx;
      for (int r = cy * cfg.cell_px; r < (cy + 1) * cfg.cell_px; ++r) {
        for (int c = cx * cfg.cell_px; c < (cx + 1) * cfg.cell_px; ++c) {
          double gx = at(r, c + 1) - at(r, c - 1);
          double gy = at(r + 1, c) - at(r - 1, c);
          double mag = std::sqrt(gx * gx + gy * gy);
          if (mag == 0.0) continue;
          double ang = std::atan2(gy, gx) * (180.0 / std::numbers::pi);
          if (ang < 0.0) ang += 180.0;
          if (ang >= 180.0) ang -= 180.0;
          int bin = static_cast<int>(ang / bin_width) % bins;
          cells(cell, bin) += mag;
        }
      }
    }
  }

  const int nbx = cfg.blocks_x(w);
  const int nby = cfg.blocks_y(h);
  const Eigen::Index block_len = 4 * static_cast<Eigen::Index>(bins);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(out_dim);
  Eigen::VectorXd block(block_len);
  constexpr double kZeroNorm = 1e-12;
  for (int by = 0; by < nby; ++by) {
    for (int bx = 0; bx < nbx; ++bx) {
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          Eigen::Index cell = static_cast<Eigen::Index>(by + dy) * ncx + (bx + dx);
          block.segment(static_cast<Eigen::Index>(dy * 2 + dx) * bins, bins) =
              cells.row(cell);
        }
      }
      double norm = block.norm();
      if (norm > kZeroNorm) {
        block /= norm;
        block = block.cwiseMin(cfg.clip);
        double renorm = block.norm();
        if (renorm > kZeroNorm) block /= renorm;
      } else {
        block.setZero();  // zero block stays zero
      }
      out.segment((static_cast<Eigen::Index>(by) * nbx + bx) * block_len, block_len) = block;
    }
  }
  return out;
}

Eigen::VectorXd part_hog_features(std::span<const PartRealization> parts,
                                  int image_width, int image_height,
                                  const HogConfig& cfg) {
  cfg.dim(image_width, image_height);  // validate early
  Eigen::MatrixXd map = part_activation_map(parts, image_width, image_height);
  return hog_descriptor(map, cfg);
}

}  // namespace partpose
