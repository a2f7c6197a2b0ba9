#pragma once

#include <string>
#include <vector>

namespace partpose {

/// Turntable pose in degrees, [0, 360).
struct PoseLabel {
  double degrees = 0.0;
};

/// 1-based category index.
struct CategoryLabel {
  int value = 0;
};

/// One detected part at one layer of the hierarchy. Positions live in the
/// image-centered frame (origin at the image center, y pointing up).
struct PartRealization {
  std::string image_id;
  int layer = 1;  // 1..L
  int part_id = 0;
  double x = 0.0;  // pixels, centered frame
  double y = 0.0;
  double score = 1.0;  // activation strength, >= 0
};

/// All part realizations of one image, grouped by layer.
struct ImageRecord {
  std::string image_id;
  std::string object_id;
  CategoryLabel category;
  PoseLabel pose;
  int image_width = 0;
  int image_height = 0;
  std::vector<std::vector<PartRealization>> parts_by_layer;  // [0] is layer 1

  int num_layers() const { return static_cast<int>(parts_by_layer.size()); }
  /// Parts at a 1-based layer; empty for layers beyond what was detected.
  const std::vector<PartRealization>& parts_at(int layer) const;
};

/// Object-wise train/test partition. The two sets never share an object.
struct SplitSpec {
  std::vector<std::string> train_objects;
  std::vector<std::string> test_objects;

  bool is_train(const std::string& object_id) const;
  bool is_test(const std::string& object_id) const;
};

struct DatasetManifest {
  int num_layers = 0;
  std::vector<std::string> categories;  // index + 1 == CategoryLabel::value
  std::vector<ImageRecord> records;
  SplitSpec split;
};

struct CenteredPoint {
  double x = 0.0;
  double y = 0.0;
};

struct PixelPoint {
  double col = 0.0;
  double row = 0.0;
};

/// Pixel grid -> centered frame: x = col - width/2, y = (height-1)/2 - row.
/// Throws InputError when (col, row) lies outside the image.
CenteredPoint to_centered_coords(double col, double row, int width, int height);

/// Exact inverse of to_centered_coords (no bounds check).
PixelPoint to_pixel_coords(double x, double y, int width, int height);

/// Reduce an angle to [0, 360).
double wrap_degrees(double degrees);

/// Checks layer bounds, per-part image ids and score signs.
/// Throws InputError on the first violation.
void validate_record(const ImageRecord& record, int num_layers);

/// Record-level checks plus split disjointness (hard error).
void validate_manifest(const DatasetManifest& manifest);

}  // namespace partpose
