#include "partpose/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "partpose/errors.hpp"

namespace partpose {

const std::vector<PartRealization>& ImageRecord::parts_at(int layer) const {
  static const std::vector<PartRealization> kEmpty;
  if (layer < 1 || layer > num_layers()) return kEmpty;
  return parts_by_layer[static_cast<std::size_t>(layer - 1)];
}

bool SplitSpec::is_train(const std::string& object_id) const {
  return std::find(train_objects.begin(), train_objects.end(), object_id) !=
         train_objects.end();
}

bool SplitSpec::is_test(const std::string& object_id) const {
  return std::find(test_objects.begin(), test_objects.end(), object_id) !=
         test_objects.end();
}

CenteredPoint to_centered_coords(double col, double row, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw InputError("to_centered_coords: non-positive image dimensions");
  }
  if (col < 0.0 || col >= static_cast<double>(width) || row < 0.0 ||
      row >= static_cast<double>(height)) {
    std::ostringstream msg;
    msg << "to_centered_coords: pixel (" << col << ", " << row
        << ") outside " << width << "x" << height << " image";
    throw InputError(msg.str());
  }
  return {col - width / 2.0, (height - 1) / 2.0 - row};
}

PixelPoint to_pixel_coords(double x, double y, int width, int height) {
  return {x + width / 2.0, (height - 1) / 2.0 - y};
}

double wrap_degrees(double degrees) {
  double w = std::fmod(degrees, 360.0);
  if (w < 0.0) w += 360.0;
  return w;
}

void validate_record(const ImageRecord& record, int num_layers) {
  if (record.image_width <= 0 || record.image_height <= 0) {
    throw InputError("record " + record.image_id + ": non-positive image dimensions");
  }
  if (record.num_layers() > num_layers) {
    throw InputError("record " + record.image_id + ": has parts above layer " +
                     std::to_string(num_layers));
  }
  for (int l = 1; l <= record.num_layers(); ++l) {
    for (const PartRealization& p : record.parts_at(l)) {
      if (p.layer != l) {
        throw InputError("record " + record.image_id +
                         ": part stored at layer " + std::to_string(l) +
                         " claims layer " + std::to_string(p.layer));
      }
      if (p.image_id != record.image_id) {
        throw InputError("record " + record.image_id +
                         ": contains part of image " + p.image_id);
      }
      if (p.score < 0.0) {
        throw InputError("record " + record.image_id + ": negative part score");
      }
    }
  }
}

void validate_manifest(const DatasetManifest& manifest) {
  if (manifest.num_layers < 1) {
    throw InputError("manifest: layer count must be at least 1");
  }
  for (const ImageRecord& r : manifest.records) {
    validate_record(r, manifest.num_layers);
    if (r.category.value < 1 ||
        r.category.value > static_cast<int>(manifest.categories.size())) {
      throw InputError("record " + r.image_id + ": category index " +
                       std::to_string(r.category.value) + " out of range");
    }
  }
  std::set<std::string> train(manifest.split.train_objects.begin(),
                              manifest.split.train_objects.end());
  for (const std::string& id : manifest.split.test_objects) {
    if (train.count(id) != 0) {
      throw InputError("manifest: object " + id + " appears in both splits");
    }
  }
}

}  // namespace partpose
