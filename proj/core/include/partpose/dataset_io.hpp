#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "partpose/types.hpp"

namespace partpose {

/// JSON Lines part files: one part per line, floats at 17 significant
/// digits, LF endings. Records round-trip field-exact.
void write_parts(const std::vector<ImageRecord>& records, const std::string& path);
std::vector<ImageRecord> read_parts(const std::string& path);

/// Dataset manifest JSON:
///   {"L": int, "categories": [...], "records": [part-file paths],
///    "splits": {"train": [...], "test": [...]}}
/// Paths are relative to the manifest. save_dataset writes one part file
/// per object under <dir>/parts/ plus <dir>/manifest.json.
void save_dataset(const DatasetManifest& manifest, const std::string& dir);
DatasetManifest load_dataset(const std::string& manifest_path);

/// 8-bit grayscale raster, rows top to bottom.
struct GrayImage {
  int width = 0;
  int height = 0;
  int max_value = 255;
  std::vector<std::uint8_t> pixels;  // row-major

  double at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * width + col] /
           static_cast<double>(max_value);
  }
};

/// Binary PGM (P5), max value up to 255.
GrayImage read_pgm(const std::string& path);
void write_pgm(const GrayImage& image, const std::string& path);

/// Oriented-edge detector standing in for a learned first layer.
struct EdgeDetectorConfig {
  int n_orientations = 6;
  double threshold = 0.05;  // on responses of a [0,1]-scaled image
  double nms_radius = 3.0;  // pixels
};

/// 7x7 odd-symmetric difference-of-offset-Gaussians kernel for an edge
/// whose tangent points along `angle_deg`: two sigma=1.5 Gaussians offset
/// +-1 px along the edge normal, L2-normalized.
Eigen::MatrixXd edge_kernel(double angle_deg);

struct EdgeResponse {
  Eigen::MatrixXd response;     // max |correlation| over orientations
  Eigen::MatrixXi orientation;  // argmax orientation index
};

/// Dense responses where the kernel fully fits (3-px border left at zero).
EdgeResponse oriented_edge_response(const GrayImage& image,
                                    const EdgeDetectorConfig& cfg);

/// Threshold + greedy non-max suppression; emitted parts sit at layer 1 in
/// centered coordinates, score = response, part_id = orientation index.
/// A constant image yields no parts. Requires at least 16x16 pixels.
std::vector<PartRealization> detect_layer1(const GrayImage& image,
                                           const EdgeDetectorConfig& cfg,
                                           const std::string& image_id = "");

}  // namespace partpose
