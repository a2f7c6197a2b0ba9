#include "partpose/features.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>

#include "partpose/digest.hpp"
#include "partpose/errors.hpp"
#include "partpose/parallel.hpp"
#include "partpose/part_graph.hpp"

namespace partpose {

FeatureConfig FeatureConfig::derived(const HopConfig& hop, int image_width) {
  FeatureConfig cfg;
  cfg.hop = hop;
  cfg.hog = HogConfig::derived(hop.grid_cells, hop.orientation_bins, image_width);
  return cfg;
}

std::uint64_t FeatureConfig::digest() const {
  char buf[160];
  int n = std::snprintf(buf, sizeof(buf), "hop:%d,%d;hog:%d,%d,%.17g;ws:%d",
                        hop.grid_cells, hop.orientation_bins, hog.cell_px,
                        hog.bins, hog.clip, weight_by_score ? 1 : 0);
  return fnv1a64(std::string_view(buf, static_cast<std::size_t>(n)));
}

Eigen::VectorXd LayerFeatureVector::concat() const {
  Eigen::VectorXd out(dim());
  out.head(hop.size()) = hop;
  out.segment(hop.size(), hog.size()) = hog;
  out[out.size() - 1] = entropy;
  return out;
}

LayerFeatureVector layer_feature_vector(const ImageRecord& record, int layer,
                                        const FeatureConfig& cfg,
                                        FeatureDiagnostics* diag) {
  const std::vector<PartRealization>& parts = record.parts_at(layer);
  LayerFeatureVector f;
  f.layer = layer;
  f.hop = hop_features(parts, cfg.hop, record.image_width, record.image_height,
                       cfg.weight_by_score, diag);
  f.hog = part_hog_features(parts, record.image_width, record.image_height, cfg.hog);
  f.entropy = von_neumann_entropy(part_graph_weights(parts, diag));
  return f;
}

RawFeatureMatrix assemble_raw_features(std::span<const ImageRecord> records,
                                       int num_layers, const FeatureConfig& cfg,
                                       int threads) {
  if (records.empty()) throw InputError("assemble_raw_features: no records");
  if (num_layers < 1) throw InputError("assemble_raw_features: num_layers < 1");

  const int w = records[0].image_width;
  const int h = records[0].image_height;
  for (const ImageRecord& r : records) {
    if (r.image_width != w || r.image_height != h) {
      throw InputError("assemble_raw_features: image dimensions differ across records (" +
                       r.image_id + ")");
    }
  }

  const Eigen::Index layer_dim = cfg.hop.dim() + cfg.hog.dim(w, h) + 1;
  const Eigen::Index total = layer_dim * num_layers;

  RawFeatureMatrix out;
  out.values.resize(static_cast<Eigen::Index>(records.size()), total);
  out.rows.resize(records.size());
  out.image_width = w;
  out.image_height = h;
  for (int l = 1; l <= num_layers; ++l) {
    out.groups.push_back({l, (l - 1) * layer_dim, l * layer_dim});
  }

  parallel_for(records.size(), threads, [&](std::size_t i) {
    const ImageRecord& rec = records[i];
    Eigen::Index row = static_cast<Eigen::Index>(i);
    for (int l = 1; l <= num_layers; ++l) {
      LayerFeatureVector f = layer_feature_vector(rec, l, cfg, nullptr);
      if (f.dim() != layer_dim) {
        throw InputError("assemble_raw_features: inconsistent feature dimension for " +
                         rec.image_id);
      }
      out.values.row(row).segment((l - 1) * layer_dim, layer_dim) = f.concat();
    }
    out.rows[i] = {rec.image_id, rec.object_id, rec.category, rec.pose};
  });
  return out;
}

GroupedDesignMatrix standardize_design(const RawFeatureMatrix& raw,
                                       std::span<const Eigen::Index> train_rows) {
  if (train_rows.empty()) {
    throw InputError("standardize_design: no training rows");
  }
  const Eigen::Index cols = raw.values.cols();
  const double n = static_cast<double>(train_rows.size());

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index r : train_rows) mean += raw.values.row(r);
  mean /= n;

  Eigen::VectorXd var = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index r : train_rows) {
    var += (raw.values.row(r).transpose() - mean).array().square().matrix();
  }
  var /= n;

  Eigen::VectorXd scale(cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    double s = std::sqrt(var[c]);
    scale[c] = s > 0.0 ? s : 1.0;  // constant columns stay centered at zero
  }

  GroupedDesignMatrix out;
  out.groups = raw.groups;
  out.rows = raw.rows;
  out.column_means = mean;
  out.column_scales = scale;
  out.train_rows.assign(train_rows.begin(), train_rows.end());
  out.values = (raw.values.rowwise() - mean.transpose()).array().rowwise() /
               scale.transpose().array();
  return out;
}

Eigen::VectorXd GroupedDesignMatrix::raw_row(Eigen::Index i) const {
  return values.row(i).transpose().cwiseProduct(column_scales) + column_means;
}

Eigen::VectorXd GroupedDesignMatrix::standardize(const Eigen::VectorXd& raw) const {
  if (raw.size() != column_means.size()) {
    throw InputError("standardize: feature dimension mismatch");
  }
  return (raw - column_means).cwiseQuotient(column_scales);
}

std::vector<Eigen::Index> split_rows(const DatasetManifest& manifest, bool train) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const std::string& obj = manifest.records[i].object_id;
    bool take = train ? manifest.split.is_train(obj) : manifest.split.is_test(obj);
    if (take) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

GroupedDesignMatrix build_design_matrix(const DatasetManifest& manifest,
                                        const FeatureConfig& cfg, int threads) {
  RawFeatureMatrix raw =
      assemble_raw_features(manifest.records, manifest.num_layers, cfg, threads);
  std::vector<Eigen::Index> train = split_rows(manifest, true);
  if (train.empty()) {
    train.resize(manifest.records.size());
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
      train[i] = static_cast<Eigen::Index>(i);
    }
  }
  return standardize_design(raw, train);
}

}  // namespace partpose
