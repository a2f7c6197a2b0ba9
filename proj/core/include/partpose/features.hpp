#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "partpose/hop.hpp"
#include "partpose/part_hog.hpp"
#include "partpose/types.hpp"

namespace partpose {

struct FeatureConfig {
  HopConfig hop;
  HogConfig hog;
  bool weight_by_score = false;

  /// hop grid + bins with the HOG settings derived from them.
  static FeatureConfig derived(const HopConfig& hop, int image_width);

  /// Stable digest of every field, for cache keys.
  std::uint64_t digest() const;
};

/// Per-layer feature block: orientation histograms, activation-map HOG and
/// the part-graph entropy scalar.
struct LayerFeatureVector {
  Eigen::VectorXd hop;
  Eigen::VectorXd hog;
  double entropy = 0.0;
  int layer = 1;

  Eigen::Index dim() const { return hop.size() + hog.size() + 1; }
  Eigen::VectorXd concat() const;
};

LayerFeatureVector layer_feature_vector(const ImageRecord& record, int layer,
                                        const FeatureConfig& cfg,
                                        FeatureDiagnostics* diag = nullptr);

/// Half-open column span owned by one layer.
struct ColumnRange {
  int layer = 1;
  Eigen::Index begin = 0;
  Eigen::Index end = 0;

  Eigen::Index size() const { return end - begin; }
};

struct RowMeta {
  std::string image_id;
  std::string object_id;
  CategoryLabel category;
  PoseLabel pose;
};

/// Raw (unstandardized) stacked features: row i is the concatenation of the
/// record's L layer blocks.
struct RawFeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<ColumnRange> groups;
  std::vector<RowMeta> rows;
  int image_width = 0;
  int image_height = 0;
};

RawFeatureMatrix assemble_raw_features(std::span<const ImageRecord> records,
                                       int num_layers, const FeatureConfig& cfg,
                                       int threads = 1);

/// Column-standardized design matrix with the layer group map. The stored
/// means/scales invert the standardization exactly on demand.
struct GroupedDesignMatrix {
  Eigen::MatrixXd values;
  std::vector<ColumnRange> groups;
  Eigen::VectorXd column_means;
  Eigen::VectorXd column_scales;
  std::vector<RowMeta> rows;
  std::vector<Eigen::Index> train_rows;  // rows the statistics were fit on

  Eigen::Index num_rows() const { return values.rows(); }
  Eigen::Index num_cols() const { return values.cols(); }

  Eigen::VectorXd raw_row(Eigen::Index i) const;
  Eigen::VectorXd standardize(const Eigen::VectorXd& raw) const;
};

/// Standardizes to zero mean / unit variance over `train_rows` (population
/// variance). Constant columns are centered and left at zero (scale 1).
GroupedDesignMatrix standardize_design(const RawFeatureMatrix& raw,
                                       std::span<const Eigen::Index> train_rows);

/// Features for every manifest record, standardized over the manifest's
/// training split (over all rows when the split is empty).
GroupedDesignMatrix build_design_matrix(const DatasetManifest& manifest,
                                        const FeatureConfig& cfg, int threads = 1);

/// Row indices whose object id belongs to the train (resp. test) split.
std::vector<Eigen::Index> split_rows(const DatasetManifest& manifest, bool train);

}  // namespace partpose
