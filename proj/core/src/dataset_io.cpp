#include "partpose/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "partpose/errors.hpp"

namespace partpose {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* kPartFields[] = {"image_id", "object_id", "category", "pose_deg",
                             "layer",    "part_id",   "x",        "y",
                             "score",    "img_w",     "img_h"};

}  // namespace

void write_parts(const std::vector<ImageRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("write_parts: cannot write " + path);
  for (const ImageRecord& rec : records) {
    for (const auto& layer : rec.parts_by_layer) {
      for (const PartRealization& p : layer) {
        // Field order fixed; floats carry 17 significant digits.
        out << "{\"image_id\":" << json(rec.image_id).dump()
            << ",\"object_id\":" << json(rec.object_id).dump()
            << ",\"category\":" << rec.category.value
            << ",\"pose_deg\":" << fmt17(rec.pose.degrees)
            << ",\"layer\":" << p.layer << ",\"part_id\":" << p.part_id
            << ",\"x\":" << fmt17(p.x) << ",\"y\":" << fmt17(p.y)
            << ",\"score\":" << fmt17(p.score) << ",\"img_w\":" << rec.image_width
            << ",\"img_h\":" << rec.image_height << "}\n";
      }
    }
  }
}

std::vector<ImageRecord> read_parts(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("read_parts: cannot open " + path);

  std::vector<ImageRecord> records;
  std::vector<std::string> order;  // first-seen image ids
  auto find_record = [&](const std::string& id) -> ImageRecord& {
    for (ImageRecord& r : records) {
      if (r.image_id == id) return r;
    }
    records.emplace_back();
    records.back().image_id = id;
    order.push_back(id);
    return records.back();
  };

  std::set<std::string> warned;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError("read_parts: " + path + " line " + std::to_string(line_no) +
                       ": " + e.what());
    }
    auto fail = [&](const std::string& what) -> InputError {
      return InputError("read_parts: " + path + " line " + std::to_string(line_no) +
                        ": " + what);
    };
    for (const char* field : kPartFields) {
      if (!obj.contains(field)) throw fail(std::string("missing field ") + field);
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = std::any_of(std::begin(kPartFields), std::end(kPartFields),
                               [&](const char* f) { return it.key() == f; });
      if (!known && warned.insert(it.key()).second) {
        std::cerr << "read_parts: " << path << ": ignoring unknown field '"
                  << it.key() << "'\n";
      }
    }

    int layer = obj["layer"].get<int>();
    if (layer < 1) throw fail("layer " + std::to_string(layer) + " out of range");
    int part_id = obj["part_id"].get<int>();
    if (part_id < 0) throw fail("negative part_id");
    double score = obj["score"].get<double>();
    if (score < 0.0) throw fail("negative score");

    ImageRecord& rec = find_record(obj["image_id"].get<std::string>());
    std::string object_id = obj["object_id"].get<std::string>();
    int category = obj["category"].get<int>();
    double pose = obj["pose_deg"].get<double>();
    int img_w = obj["img_w"].get<int>();
    int img_h = obj["img_h"].get<int>();
    if (rec.object_id.empty()) {
      rec.object_id = object_id;
      rec.category = CategoryLabel{category};
      rec.pose = PoseLabel{pose};
      rec.image_width = img_w;
      rec.image_height = img_h;
    } else if (rec.object_id != object_id || rec.category.value != category ||
               rec.pose.degrees != pose || rec.image_width != img_w ||
               rec.image_height != img_h) {
      throw fail("inconsistent image-level fields for " + rec.image_id);
    }

    if (rec.num_layers() < layer) {
      rec.parts_by_layer.resize(static_cast<std::size_t>(layer));
    }
    rec.parts_by_layer[static_cast<std::size_t>(layer - 1)].push_back(
        {rec.image_id, layer, part_id, obj["x"].get<double>(),
         obj["y"].get<double>(), score});
  }
  return records;
}

void save_dataset(const DatasetManifest& manifest, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "parts");

  // One part file per object, keeping the manifest record order.
  std::vector<std::string> object_order;
  for (const ImageRecord& r : manifest.records) {
    if (std::find(object_order.begin(), object_order.end(), r.object_id) ==
        object_order.end()) {
      object_order.push_back(r.object_id);
    }
  }

  json record_paths = json::array();
  for (const std::string& object_id : object_order) {
    std::vector<ImageRecord> group;
    for (const ImageRecord& r : manifest.records) {
      if (r.object_id == object_id) group.push_back(r);
    }
    std::string rel = "parts/" + object_id + ".jsonl";
    write_parts(group, (fs::path(dir) / rel).string());
    record_paths.push_back(rel);
  }

  json doc;
  doc["L"] = manifest.num_layers;
  doc["categories"] = manifest.categories;
  doc["records"] = record_paths;
  doc["splits"] = {{"train", manifest.split.train_objects},
                   {"test", manifest.split.test_objects}};
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!out) throw InputError("save_dataset: cannot write manifest in " + dir);
  out << doc.dump(2) << "\n";
}

DatasetManifest load_dataset(const std::string& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw InputError("load_dataset: cannot open " + manifest_path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError("load_dataset: " + manifest_path + ": " + e.what());
  }

  DatasetManifest manifest;
  try {
    manifest.num_layers = doc.at("L").get<int>();
    manifest.categories = doc.at("categories").get<std::vector<std::string>>();
    if (doc.contains("splits")) {
      manifest.split.train_objects =
          doc["splits"].value("train", std::vector<std::string>{});
      manifest.split.test_objects =
          doc["splits"].value("test", std::vector<std::string>{});
    }
    fs::path base = fs::path(manifest_path).parent_path();
    for (const json& rel : doc.at("records")) {
      std::vector<ImageRecord> records =
          read_parts((base / rel.get<std::string>()).string());
      for (ImageRecord& r : records) manifest.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw InputError("load_dataset: " + manifest_path + ": " + e.what());
  }
  validate_manifest(manifest);
  return manifest;
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("read_pgm: cannot open " + path);

  auto next_token = [&]() -> std::string {
    std::string tok;
    char c;
    while (in.get(c)) {
      if (c == '#') {  // comment to end of line
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok += c;
    }
    return tok;
  };

  if (next_token() != "P5") throw InputError("read_pgm: " + path + " is not binary PGM");
  GrayImage img;
  try {
    img.width = std::stoi(next_token());
    img.height = std::stoi(next_token());
    img.max_value = std::stoi(next_token());
  } catch (const std::exception&) {
    throw InputError("read_pgm: malformed header in " + path);
  }
  if (img.width <= 0 || img.height <= 0) {
    throw InputError("read_pgm: bad dimensions in " + path);
  }
  if (img.max_value <= 0 || img.max_value > 255) {
    throw InputError("read_pgm: only 8-bit PGM supported (" + path + ")");
  }
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw InputError("read_pgm: truncated pixel data in " + path);
  }
  return img;
}

void write_pgm(const GrayImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("write_pgm: cannot write " + path);
  out << "P5\n" << image.width << " " << image.height << "\n" << image.max_value << "\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
}

Eigen::MatrixXd edge_kernel(double angle_deg) {
  constexpr int kSize = 7;
  constexpr int kHalf = kSize / 2;
  constexpr double kSigma = 1.5;
  constexpr double kOffset = 1.0;

  // Normal to the edge tangent; the two Gaussians sit at +-offset along it.
  double rad = angle_deg * std::numbers::pi / 180.0;
  double nx = -std::sin(rad);
  double ny = std::cos(rad);

  Eigen::MatrixXd k(kSize, kSize);
  for (int r = 0; r < kSize; ++r) {
    for (int c = 0; c < kSize; ++c) {
      double u = c - kHalf;
      double v = r - kHalf;
      auto gauss = [&](double du, double dv) {
        double dx = u - du, dy = v - dv;
        return std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
      };
      k(r, c) = gauss(kOffset * nx, kOffset * ny) - gauss(-kOffset * nx, -kOffset * ny);
    }
  }
  double norm = k.norm();
  if (norm > 0.0) k /= norm;
  return k;
}

EdgeResponse oriented_edge_response(const GrayImage& image,
                                    const EdgeDetectorConfig& cfg) {
  if (cfg.n_orientations < 2) {
    throw InputError("oriented_edge_response: need at least 2 orientations");
  }
  constexpr int kHalf = 3;
  const int h = image.height;
  const int w = image.width;

  std::vector<Eigen::MatrixXd> kernels;
  for (int j = 0; j < cfg.n_orientations; ++j) {
    kernels.push_back(edge_kernel(180.0 * j / cfg.n_orientations));
  }

  EdgeResponse out;
  out.response = Eigen::MatrixXd::Zero(h, w);
  out.orientation = Eigen::MatrixXi::Zero(h, w);
  for (int r = kHalf; r < h - kHalf; ++r) {
    for (int c = kHalf; c < w - kHalf; ++c) {
      double best = 0.0;
      int best_j = 0;
      for (int j = 0; j < cfg.n_orientations; ++j) {
        const Eigen::MatrixXd& k = kernels[static_cast<std::size_t>(j)];
        double acc = 0.0;
        for (int dr = -kHalf; dr <= kHalf; ++dr) {
          for (int dc = -kHalf; dc <= kHalf; ++dc) {
            acc += k(dr + kHalf, dc + kHalf) * image.at(r + dr, c + dc);
          }
        }
        double mag = std::abs(acc);
        if (mag > best) {
          best = mag;
          best_j = j;
        }
      }
      out.response(r, c) = best;
      out.orientation(r, c) = best_j;
    }
  }
  return out;
}

std::vector<PartRealization> detect_layer1(const GrayImage& image,
                                           const EdgeDetectorConfig& cfg,
                                           const std::string& image_id) {
  if (image.width < 16 || image.height < 16) {
    throw InputError("detect_layer1: image must be at least 16x16");
  }
  if (cfg.threshold <= 0.0) throw InputError("detect_layer1: threshold must be > 0");

  EdgeResponse resp = oriented_edge_response(image, cfg);

  struct Candidate {
    int row, col, orientation;
    double response;
  };
  std::vector<Candidate> candidates;
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      if (resp.response(r, c) > cfg.threshold) {
        candidates.push_back({r, c, resp.orientation(r, c), resp.response(r, c)});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  });

  std::vector<Candidate> kept;
  const double r2 = cfg.nms_radius * cfg.nms_radius;
  for (const Candidate& c : candidates) {
    bool suppressed = false;
    for (const Candidate& k : kept) {
      double dr = c.row - k.row;
      double dc = c.col - k.col;
      if (dr * dr + dc * dc <= r2) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(c);
  }

  std::vector<PartRealization> parts;
  parts.reserve(kept.size());
  for (const Candidate& c : kept) {
    CenteredPoint p = to_centered_coords(c.col, c.row, image.width, image.height);
    parts.push_back({image_id, 1, c.orientation, p.x, p.y, c.response});
  }
  return parts;
}

}  // namespace partpose
