#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "partpose/types.hpp"

namespace partpose {

using Point3 = std::array<double, 3>;  // virtual mm, z up (turntable axis)

/// A cluster of surface points visible only while the pose lies on a closed
/// arc (a cup handle, a label patch).
struct AsymmetryFeature {
  std::vector<Point3> points;
  double arc_begin_deg = 0.0;
  double arc_end_deg = 360.0;
};

/// Deterministic description of one object category. Instances of the
/// category are derived variants: a uniform scale plus a per-anchor
/// perturbation, both seeded.
struct SyntheticObjectSpec {
  std::string template_id;
  std::vector<Point3> anchors;
  std::vector<double> anchor_scores;  // empty = all 1.0
  std::vector<AsymmetryFeature> asymmetries;
  int num_layers = 3;  // layer l keeps centroids of 2^(l-1)-point chunks
  double noise_px = 0.0;            // per-image positional jitter
  double object_scale_low = 1.0;    // per-object scale drawn from this range
  double object_scale_high = 1.0;
  double object_jitter_mm = 0.0;    // per-object anchor perturbation
  std::uint64_t seed = 0;
};

/// Orthographic turntable camera at a fixed elevation.
struct TurntableSpec {
  std::vector<double> poses_deg;  // default full turn at 5 degrees
  int image_width = 64;
  int image_height = 64;
  double elevation_deg = 20.0;
  double px_per_mm = 1.0;

  static TurntableSpec defaults();
  /// {0, step, 2*step, ...} below 360.
  static std::vector<double> full_turn(double step_deg);
};

/// Wrap-aware containment test for a closed pose arc.
bool arc_contains(double arc_begin_deg, double arc_end_deg, double pose_deg);

/// The per-object variant of a template: anchors scaled and jittered with a
/// seed derived from (template seed, category, instance). The result renders
/// identically on every call.
SyntheticObjectSpec materialize_object(const SyntheticObjectSpec& tmpl,
                                       int category_value, int instance);

/// Rotates the object about the vertical axis, projects orthographically,
/// culls asymmetry clusters outside their arc, applies seeded jitter and
/// emits layers 1..num_layers (layer l holds the centroids of consecutive
/// 2^(l-1)-point chunks of layer 1). Throws InputError when every part
/// falls outside the frame.
ImageRecord render_parts(const SyntheticObjectSpec& obj, PoseLabel pose,
                         const TurntableSpec& tt,
                         const std::string& object_id,
                         CategoryLabel category = CategoryLabel{1});

/// |poses| records per object instance; objects are named
/// <template_id>_<instance>. The default split keeps the last instance of
/// every category for testing.
DatasetManifest generate_dataset(const std::vector<SyntheticObjectSpec>& categories,
                                 int objects_per_category, const TurntableSpec& tt);

/// Object-wise split: n_train random objects per category train, the rest
/// test. Deterministic under seed.
SplitSpec make_object_split(const DatasetManifest& manifest, int n_train_per_category,
                            std::uint64_t seed);

/// One random test object per category, every other object trains.
SplitSpec make_unbalanced_split(const DatasetManifest& manifest, std::uint64_t seed);

/// Content digest over layers, categories, records and parts.
std::uint64_t manifest_digest(const DatasetManifest& manifest);

/// Built-in template library: cup, ball, box, bottle, shoe.
SyntheticObjectSpec make_builtin_template(const std::string& name);
std::vector<std::string> builtin_template_names();

/// Template JSON files (the shipped configs/templates/*.json).
SyntheticObjectSpec load_object_template(const std::string& path);
void save_object_template(const SyntheticObjectSpec& spec, const std::string& path);

}  // namespace partpose
