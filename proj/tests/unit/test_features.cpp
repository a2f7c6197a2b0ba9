#include <doctest.h>

#include "partpose/errors.hpp"
#include "partpose/features.hpp"
#include "partpose/rng.hpp"

using namespace partpose;

namespace {

ImageRecord make_record(std::uint64_t seed, const std::string& id, int layers,
                        int parts_per_layer, int dims = 64) {
  Rng rng(seed);
  ImageRecord rec;
  rec.image_id = id;
  rec.object_id = "obj_" + id;
  rec.category = {1};
  rec.pose = {rng.uniform(0, 360)};
  rec.image_width = rec.image_height = dims;
  rec.parts_by_layer.resize(static_cast<std::size_t>(layers));
  for (int l = 1; l <= layers; ++l) {
    for (int i = 0; i < parts_per_layer; ++i) {
      rec.parts_by_layer[static_cast<std::size_t>(l - 1)].push_back(
          {id, l, i, rng.uniform(-dims / 2.0 + 1, dims / 2.0 - 1),
           rng.uniform(-dims / 2.0 + 1, dims / 2.0 - 1), rng.uniform(0.1, 2.0)});
    }
  }
  return rec;
}

FeatureConfig small_config() {
  return FeatureConfig::derived(HopConfig{4, 8}, 64);
}

}  // namespace

TEST_CASE("an empty layer yields the zero block") {
  ImageRecord rec = make_record(1, "img0", 2, 6);
  rec.parts_by_layer[1].clear();
  FeatureConfig cfg = small_config();
  LayerFeatureVector f = layer_feature_vector(rec, 2, cfg);
  CHECK(f.hop.isZero(0.0));
  CHECK(f.hog.isZero(0.0));
  CHECK(f.entropy == 0.0);
}

TEST_CASE("layer feature dimension is hop + hog + 1 for every layer") {
  ImageRecord rec = make_record(2, "img0", 3, 9);
  FeatureConfig cfg = small_config();
  Eigen::Index expect = cfg.hop.dim() + cfg.hog.dim(64, 64) + 1;
  for (int l = 1; l <= 3; ++l) {
    CHECK(layer_feature_vector(rec, l, cfg).dim() == expect);
    CHECK(layer_feature_vector(rec, l, cfg).concat().size() == expect);
  }
}

TEST_CASE("feature values are finite over randomized part sets") {
  FeatureConfig cfg = small_config();
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    ImageRecord rec = make_record(seed, "img", 2, static_cast<int>(seed % 30));
    for (int l = 1; l <= 2; ++l) {
      CHECK(layer_feature_vector(rec, l, cfg).concat().allFinite());
    }
  }
}

TEST_CASE("design matrix layout and standardization") {
  DatasetManifest m;
  m.num_layers = 3;
  m.categories = {"a"};
  for (int i = 0; i < 10; ++i) {
    m.records.push_back(make_record(100 + static_cast<std::uint64_t>(i),
                                    "img" + std::to_string(i), 3, 12));
  }
  FeatureConfig cfg = small_config();
  GroupedDesignMatrix d = build_design_matrix(m, cfg);

  Eigen::Index layer_dim = cfg.hop.dim() + cfg.hog.dim(64, 64) + 1;
  CHECK(d.values.rows() == 10);
  CHECK(d.values.cols() == 3 * layer_dim);
  REQUIRE(d.groups.size() == 3);
  Eigen::Index expect_begin = 0;
  for (const ColumnRange& g : d.groups) {
    CHECK(g.begin == expect_begin);
    CHECK(g.size() == layer_dim);
    expect_begin = g.end;
  }
  CHECK(expect_begin == d.values.cols());

  // Standardized training columns: mean ~0, variance ~1 unless constant.
  for (Eigen::Index c = 0; c < d.values.cols(); ++c) {
    double mean = d.values.col(c).mean();
    CHECK(std::fabs(mean) < 1e-10);
    double var = d.values.col(c).squaredNorm() / 10.0;
    bool constant = d.column_scales[c] == 1.0 && var == 0.0;
    if (!constant) CHECK(var == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("stored standardization reproduces raw features") {
  DatasetManifest m;
  m.num_layers = 2;
  m.categories = {"a"};
  for (int i = 0; i < 6; ++i) {
    m.records.push_back(make_record(200 + static_cast<std::uint64_t>(i),
                                    "img" + std::to_string(i), 2, 8));
  }
  FeatureConfig cfg = small_config();
  RawFeatureMatrix raw = assemble_raw_features(m.records, m.num_layers, cfg);
  std::vector<Eigen::Index> train{0, 1, 2, 3};
  GroupedDesignMatrix d = standardize_design(raw, train);

  for (Eigen::Index r = 0; r < d.values.rows(); ++r) {
    Eigen::VectorXd back = d.raw_row(r);
    Eigen::VectorXd original = raw.values.row(r).transpose();
    CHECK((back - original).cwiseAbs().maxCoeff() < 1e-12);
    // standardize() inverts raw_row().
    CHECK((d.standardize(back) - d.values.row(r).transpose()).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("mismatched image dimensions are rejected") {
  DatasetManifest m;
  m.num_layers = 1;
  m.categories = {"a"};
  m.records.push_back(make_record(1, "img0", 1, 5, 64));
  m.records.push_back(make_record(2, "img1", 1, 5, 48));
  CHECK_THROWS_AS(build_design_matrix(m, small_config()), InputError);
}

TEST_CASE("feature extraction is identical across thread counts") {
  DatasetManifest m;
  m.num_layers = 2;
  m.categories = {"a"};
  for (int i = 0; i < 8; ++i) {
    m.records.push_back(make_record(300 + static_cast<std::uint64_t>(i),
                                    "img" + std::to_string(i), 2, 10));
  }
  FeatureConfig cfg = small_config();
  RawFeatureMatrix a = assemble_raw_features(m.records, 2, cfg, 1);
  RawFeatureMatrix b = assemble_raw_features(m.records, 2, cfg, 4);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
}
