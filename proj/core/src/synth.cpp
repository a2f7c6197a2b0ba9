#include "partpose/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "partpose/digest.hpp"
#include "partpose/errors.hpp"
#include "partpose/rng.hpp"

namespace partpose {

namespace {

using nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Point3 ring_point(double radius, double azimuth_deg, double z) {
  return {radius * std::cos(azimuth_deg * kDegToRad),
          radius * std::sin(azimuth_deg * kDegToRad), z};
}

Point3 sphere_point(double radius, double azimuth_deg, double latitude_deg) {
  double c = std::cos(latitude_deg * kDegToRad);
  return {radius * c * std::cos(azimuth_deg * kDegToRad),
          radius * c * std::sin(azimuth_deg * kDegToRad),
          radius * std::sin(latitude_deg * kDegToRad)};
}

}  // namespace

TurntableSpec TurntableSpec::defaults() {
  TurntableSpec tt;
  tt.poses_deg = full_turn(5.0);
  tt.image_width = 64;
  tt.image_height = 64;
  tt.elevation_deg = 20.0;
  tt.px_per_mm = 0.85;
  return tt;
}

std::vector<double> TurntableSpec::full_turn(double step_deg) {
  if (step_deg <= 0.0) throw InputError("full_turn: step must be positive");
  std::vector<double> poses;
  for (double p = 0.0; p < 360.0 - 1e-9; p += step_deg) poses.push_back(p);
  return poses;
}

bool arc_contains(double arc_begin_deg, double arc_end_deg, double pose_deg) {
  double b = wrap_degrees(arc_begin_deg);
  double e = wrap_degrees(arc_end_deg);
  double p = wrap_degrees(pose_deg);
  if (b <= e) return p >= b && p <= e;
  return p >= b || p <= e;  // wrapping arc
}

SyntheticObjectSpec materialize_object(const SyntheticObjectSpec& tmpl,
                                       int category_value, int instance) {
  Rng rng(derive_seed(tmpl.seed, "object",
                      (static_cast<std::uint64_t>(category_value) << 20) |
                          static_cast<std::uint64_t>(instance)));
  double scale = tmpl.object_scale_low == tmpl.object_scale_high
                     ? tmpl.object_scale_low
                     : rng.uniform(tmpl.object_scale_low, tmpl.object_scale_high);

  auto perturb = [&](const Point3& p) -> Point3 {
    Point3 q;
    for (std::size_t i = 0; i < 3; ++i) {
      q[i] = scale * p[i] +
             (tmpl.object_jitter_mm > 0.0 ? rng.normal(0.0, tmpl.object_jitter_mm) : 0.0);
    }
    return q;
  };

  SyntheticObjectSpec obj = tmpl;
  for (Point3& p : obj.anchors) p = perturb(p);
  for (AsymmetryFeature& f : obj.asymmetries) {
    for (Point3& p : f.points) p = perturb(p);
  }
  obj.object_scale_low = obj.object_scale_high = 1.0;
  obj.object_jitter_mm = 0.0;
  obj.seed = derive_seed(tmpl.seed, "instance",
                         (static_cast<std::uint64_t>(category_value) << 20) |
                             static_cast<std::uint64_t>(instance));
  return obj;
}

ImageRecord render_parts(const SyntheticObjectSpec& obj, PoseLabel pose,
                         const TurntableSpec& tt, const std::string& object_id,
                         CategoryLabel category) {
  if (obj.anchors.size() < 4) {
    throw InputError("render_parts: template needs at least 4 anchors");
  }
  if (obj.num_layers < 1) throw InputError("render_parts: num_layers < 1");

  std::vector<Point3> points = obj.anchors;
  std::vector<double> scores = obj.anchor_scores;
  scores.resize(obj.anchors.size(), 1.0);
  for (const AsymmetryFeature& f : obj.asymmetries) {
    if (!arc_contains(f.arc_begin_deg, f.arc_end_deg, pose.degrees)) continue;
    for (const Point3& p : f.points) {
      points.push_back(p);
      scores.push_back(1.0);
    }
  }

  const double c = std::cos(pose.degrees * kDegToRad);
  const double s = std::sin(pose.degrees * kDegToRad);
  const double se = std::sin(tt.elevation_deg * kDegToRad);
  const double ce = std::cos(tt.elevation_deg * kDegToRad);

  char img_id[128];
  std::snprintf(img_id, sizeof(img_id), "%s_p%05.1f", object_id.c_str(), pose.degrees);

  Rng jitter(derive_seed(obj.seed, "render",
                         static_cast<std::uint64_t>(std::llround(pose.degrees * 1000.0))));

  ImageRecord rec;
  rec.image_id = img_id;
  rec.object_id = object_id;
  rec.category = category;
  rec.pose = pose;
  rec.image_width = tt.image_width;
  rec.image_height = tt.image_height;
  rec.parts_by_layer.resize(static_cast<std::size_t>(obj.num_layers));

  std::vector<PartRealization>& layer1 = rec.parts_by_layer[0];
  int in_frame = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point3& p = points[i];
    double rx = c * p[0] - s * p[1];
    double ry = s * p[0] + c * p[1];
    double u = tt.px_per_mm * rx;
    double v = tt.px_per_mm * (ry * se + p[2] * ce);
    if (obj.noise_px > 0.0) {
      u += jitter.normal(0.0, obj.noise_px);
      v += jitter.normal(0.0, obj.noise_px);
    }
    layer1.push_back({rec.image_id, 1, static_cast<int>(i), u, v, scores[i]});
    if (std::abs(u) <= tt.image_width / 2.0 && std::abs(v) <= tt.image_height / 2.0) {
      ++in_frame;
    }
  }
  if (in_frame == 0) {
    throw InputError("render_parts: object " + object_id +
                     " projects entirely outside the frame");
  }

  for (int l = 2; l <= obj.num_layers; ++l) {
    std::size_t chunk = static_cast<std::size_t>(1) << (l - 1);
    std::vector<PartRealization>& layer = rec.parts_by_layer[static_cast<std::size_t>(l - 1)];
    for (std::size_t begin = 0, id = 0; begin < layer1.size(); begin += chunk, ++id) {
      std::size_t end = std::min(begin + chunk, layer1.size());
      double sx = 0.0, sy = 0.0, sc = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        sx += layer1[i].x;
        sy += layer1[i].y;
        sc += layer1[i].score;
      }
      double n = static_cast<double>(end - begin);
      layer.push_back({rec.image_id, l, static_cast<int>(id), sx / n, sy / n, sc / n});
    }
  }
  return rec;
}

DatasetManifest generate_dataset(const std::vector<SyntheticObjectSpec>& categories,
                                 int objects_per_category, const TurntableSpec& tt) {
  if (categories.empty()) throw InputError("generate_dataset: no categories");
  if (objects_per_category < 1) {
    throw InputError("generate_dataset: objects_per_category < 1");
  }
  if (tt.poses_deg.size() < 2) {
    throw InputError("generate_dataset: need at least 2 poses");
  }

  DatasetManifest manifest;
  manifest.num_layers = categories[0].num_layers;
  std::set<std::string> seen;
  for (const SyntheticObjectSpec& spec : categories) {
    if (spec.num_layers != manifest.num_layers) {
      throw InputError("generate_dataset: templates disagree on layer count");
    }
    if (!seen.insert(spec.template_id).second) {
      throw InputError("generate_dataset: duplicate template id " + spec.template_id);
    }
    manifest.categories.push_back(spec.template_id);
  }

  for (std::size_t c = 0; c < categories.size(); ++c) {
    CategoryLabel label{static_cast<int>(c) + 1};
    for (int o = 0; o < objects_per_category; ++o) {
      SyntheticObjectSpec obj = materialize_object(categories[c], label.value, o);
      char object_id[96];
      std::snprintf(object_id, sizeof(object_id), "%s_%02d",
                    obj.template_id.c_str(), o);
      for (double pose : tt.poses_deg) {
        manifest.records.push_back(
            render_parts(obj, PoseLabel{pose}, tt, object_id, label));
      }
      if (o + 1 == objects_per_category && objects_per_category > 1) {
        manifest.split.test_objects.push_back(object_id);
      } else {
        manifest.split.train_objects.push_back(object_id);
      }
    }
  }
  validate_manifest(manifest);
  return manifest;
}

namespace {

std::map<int, std::vector<std::string>> objects_by_category(const DatasetManifest& m) {
  std::map<int, std::vector<std::string>> out;
  for (const ImageRecord& r : m.records) {
    std::vector<std::string>& v = out[r.category.value];
    if (std::find(v.begin(), v.end(), r.object_id) == v.end()) {
      v.push_back(r.object_id);
    }
  }
  return out;
}

void shuffle_ids(std::vector<std::string>& ids, Rng& rng) {
  for (std::size_t i = ids.size(); i > 1; --i) {
    std::swap(ids[i - 1], ids[rng.below(i)]);
  }
}

}  // namespace

SplitSpec make_object_split(const DatasetManifest& manifest, int n_train_per_category,
                            std::uint64_t seed) {
  if (n_train_per_category < 1) {
    throw InputError("make_object_split: n_train_per_category < 1");
  }
  SplitSpec split;
  for (auto& [cat, ids] : objects_by_category(manifest)) {
    if (static_cast<int>(ids.size()) <= n_train_per_category) {
      throw InputError("make_object_split: category " + std::to_string(cat) +
                       " has no object left for testing");
    }
    std::vector<std::string> shuffled = ids;
    Rng rng(derive_seed(seed, "split", static_cast<std::uint64_t>(cat)));
    shuffle_ids(shuffled, rng);
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
      if (i < static_cast<std::size_t>(n_train_per_category)) {
        split.train_objects.push_back(shuffled[i]);
      } else {
        split.test_objects.push_back(shuffled[i]);
      }
    }
  }
  return split;
}

SplitSpec make_unbalanced_split(const DatasetManifest& manifest, std::uint64_t seed) {
  SplitSpec split;
  for (auto& [cat, ids] : objects_by_category(manifest)) {
    if (ids.size() < 2) {
      throw InputError("make_unbalanced_split: category " + std::to_string(cat) +
                       " needs at least 2 objects");
    }
    std::vector<std::string> shuffled = ids;
    Rng rng(derive_seed(seed, "unbalanced", static_cast<std::uint64_t>(cat)));
    shuffle_ids(shuffled, rng);
    split.test_objects.push_back(shuffled[0]);
    for (std::size_t i = 1; i < shuffled.size(); ++i) {
      split.train_objects.push_back(shuffled[i]);
    }
  }
  return split;
}

std::uint64_t manifest_digest(const DatasetManifest& manifest) {
  std::string buf;
  buf.reserve(1 << 16);
  buf += "L=" + std::to_string(manifest.num_layers) + ";";
  for (const std::string& c : manifest.categories) buf += c + ",";
  for (const std::string& o : manifest.split.train_objects) buf += "tr:" + o + ",";
  for (const std::string& o : manifest.split.test_objects) buf += "te:" + o + ",";
  for (const ImageRecord& r : manifest.records) {
    buf += r.image_id + "|" + r.object_id + "|" + std::to_string(r.category.value) +
           "|" + format_double(r.pose.degrees) + "|" + std::to_string(r.image_width) +
           "x" + std::to_string(r.image_height) + ";";
    for (const auto& layer : r.parts_by_layer) {
      for (const PartRealization& p : layer) {
        buf += std::to_string(p.layer) + "," + std::to_string(p.part_id) + "," +
               format_double(p.x) + "," + format_double(p.y) + "," +
               format_double(p.score) + ";";
      }
    }
  }
  return fnv1a64(buf);
}

SyntheticObjectSpec make_builtin_template(const std::string& name) {
  SyntheticObjectSpec spec;
  spec.template_id = name;
  spec.num_layers = 3;
  spec.noise_px = 0.5;
  spec.object_scale_low = 0.92;
  spec.object_scale_high = 1.08;
  spec.object_jitter_mm = 0.8;
  spec.seed = fnv1a64(name);

  if (name == "cup") {
    // Irregular azimuths keep every pose identifiable.
    const double az[] = {0, 26, 58, 95, 137, 173, 204, 236, 275, 310, 341};
    for (double z : {-16.0, 0.0, 16.0}) {
      for (double a : az) spec.anchors.push_back(ring_point(17.0, a, z));
    }
    for (double a : {15.0, 112.0, 198.0, 290.0}) {
      spec.anchors.push_back(ring_point(15.0, a, 20.0));
    }
    AsymmetryFeature handle;
    handle.arc_begin_deg = 180.0;
    handle.arc_end_deg = 300.0;
    for (double z : {-8.0, 0.0, 8.0}) {
      handle.points.push_back(ring_point(25.0, 236.0, z));
      handle.points.push_back(ring_point(29.0, 242.0, z));
    }
    handle.points.push_back(ring_point(27.0, 228.0, 4.0));
    handle.points.push_back(ring_point(27.0, 250.0, -4.0));
    spec.asymmetries.push_back(handle);
    return spec;
  }
  if (name == "ball") {
    // Five-fold symmetric surface pattern: poses 72 degrees apart look alike.
    for (double lat : {-40.0, 0.0, 40.0}) {
      for (int k = 0; k < 5; ++k) {
        spec.anchors.push_back(sphere_point(20.0, 72.0 * k, lat));
        spec.anchors.push_back(sphere_point(20.0, 72.0 * k + 33.0, lat));
      }
    }
    return spec;
  }
  if (name == "box") {
    const double hx = 14.0, hy = 9.0, hz = 11.0;
    for (double sx : {-1.0, 1.0}) {
      for (double sy : {-1.0, 1.0}) {
        for (double sz : {-1.0, 1.0}) {
          spec.anchors.push_back({sx * hx, sy * hy, sz * hz});
        }
      }
    }
    for (double sy : {-1.0, 1.0}) {
      for (double sz : {-1.0, 1.0}) spec.anchors.push_back({0.0, sy * hy, sz * hz});
    }
    for (double sx : {-1.0, 1.0}) {
      for (double sz : {-1.0, 1.0}) spec.anchors.push_back({sx * hx, 0.0, sz * hz});
    }
    for (double sx : {-1.0, 1.0}) spec.anchors.push_back({sx * hx, 0.0, 0.0});
    for (double sy : {-1.0, 1.0}) spec.anchors.push_back({0.0, sy * hy, 0.0});
    return spec;
  }
  if (name == "bottle") {
    const double az[] = {0, 49, 105, 160, 212, 266, 315};
    for (double z : {-24.0, -12.0, 0.0, 12.0}) {
      for (double a : az) spec.anchors.push_back(ring_point(9.0, a, z));
    }
    for (double a : {20.0, 140.0, 260.0}) {
      spec.anchors.push_back(ring_point(4.0, a, 22.0));
    }
    AsymmetryFeature label;
    label.arc_begin_deg = 0.0;
    label.arc_end_deg = 120.0;
    for (double z : {-6.0, 0.0, 6.0}) {
      label.points.push_back(ring_point(10.5, 55.0, z));
      label.points.push_back(ring_point(10.5, 65.0, z));
    }
    spec.asymmetries.push_back(label);
    return spec;
  }
  if (name == "shoe") {
    for (double x : {-22.0, -14.0, -6.0, 2.0, 10.0, 18.0, 24.0}) {
      spec.anchors.push_back({x, 3.0 * std::sin(x / 10.0), -8.0});
    }
    for (double x : {-18.0, -8.0, 0.0, 8.0, 14.0}) {
      spec.anchors.push_back({x, -2.5 * std::cos(x / 14.0), 1.0});
    }
    spec.anchors.push_back({-21.0, 0.0, 8.0});  // heel top
    spec.anchors.push_back({-17.0, 2.0, 12.0});
    spec.anchors.push_back({-12.0, -2.0, 10.0});
    spec.anchors.push_back({22.0, 2.0, -2.0});  // toe cap
    spec.anchors.push_back({25.0, -1.0, -5.0});
    spec.anchors.push_back({5.0, 4.0, 4.0});    // tongue
    spec.anchors.push_back({1.0, -4.5, 5.0});
    return spec;
  }
  throw InputError("make_builtin_template: unknown template " + name);
}

std::vector<std::string> builtin_template_names() {
  return {"cup", "ball", "box", "bottle", "shoe"};
}

SyntheticObjectSpec load_object_template(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("load_object_template: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError("load_object_template: " + path + ": " + e.what());
  }
  try {
    SyntheticObjectSpec spec;
    spec.template_id = doc.at("template_id").get<std::string>();
    spec.num_layers = doc.at("num_layers").get<int>();
    spec.noise_px = doc.value("noise_px", 0.0);
    if (doc.contains("object_scale_range")) {
      spec.object_scale_low = doc["object_scale_range"].at(0).get<double>();
      spec.object_scale_high = doc["object_scale_range"].at(1).get<double>();
    }
    spec.object_jitter_mm = doc.value("object_jitter_mm", 0.0);
    spec.seed = doc.value("seed", std::uint64_t{0});
    for (const json& a : doc.at("anchors")) {
      spec.anchors.push_back({a.at(0).get<double>(), a.at(1).get<double>(),
                              a.at(2).get<double>()});
    }
    if (doc.contains("anchor_scores")) {
      for (const json& s : doc["anchor_scores"]) {
        spec.anchor_scores.push_back(s.get<double>());
      }
    }
    if (doc.contains("asymmetries")) {
      for (const json& f : doc["asymmetries"]) {
        AsymmetryFeature feat;
        feat.arc_begin_deg = f.at("arc").at(0).get<double>();
        feat.arc_end_deg = f.at("arc").at(1).get<double>();
        for (const json& p : f.at("points")) {
          feat.points.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                                 p.at(2).get<double>()});
        }
        spec.asymmetries.push_back(feat);
      }
    }
    return spec;
  } catch (const json::exception& e) {
    throw InputError("load_object_template: " + path + ": " + e.what());
  }
}

void save_object_template(const SyntheticObjectSpec& spec, const std::string& path) {
  json doc;
  doc["template_id"] = spec.template_id;
  doc["num_layers"] = spec.num_layers;
  doc["noise_px"] = spec.noise_px;
  doc["object_scale_range"] = {spec.object_scale_low, spec.object_scale_high};
  doc["object_jitter_mm"] = spec.object_jitter_mm;
  doc["seed"] = spec.seed;
  json anchors = json::array();
  for (const Point3& p : spec.anchors) anchors.push_back({p[0], p[1], p[2]});
  doc["anchors"] = anchors;
  if (!spec.anchor_scores.empty()) doc["anchor_scores"] = spec.anchor_scores;
  json feats = json::array();
  for (const AsymmetryFeature& f : spec.asymmetries) {
    json points = json::array();
    for (const Point3& p : f.points) points.push_back({p[0], p[1], p[2]});
    feats.push_back({{"arc", {f.arc_begin_deg, f.arc_end_deg}}, {"points", points}});
  }
  doc["asymmetries"] = feats;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("save_object_template: cannot write " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace partpose
