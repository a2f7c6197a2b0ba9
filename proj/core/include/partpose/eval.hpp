#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "partpose/models.hpp"
#include "partpose/synth.hpp"
#include "partpose/types.hpp"

namespace partpose {

enum class PoseErrorKind {
  kCircularAbsolute,  // min(|d|, 360 - |d|), degrees (default)
  kCircularSquared,
};

/// Circular pose error in [0, 180] degrees (or its square).
double pose_error(PoseLabel truth, double predicted_deg,
                  PoseErrorKind kind = PoseErrorKind::kCircularAbsolute);

/// Percent correct; throws InputError on empty or mismatched input.
double accuracy(std::span<const CategoryLabel> predicted,
                std::span<const CategoryLabel> truth);

enum class TaskKind { kPose, kCategory };

struct GridSearchSpec {
  std::vector<double> bin_sizes = {8, 16, 32, 64};  // degrees
  std::vector<int> grid_cells = {8, 16, 32, 64};    // M
  std::vector<double> alphas = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};

  bool single_point() const {
    return bin_sizes.size() == 1 && grid_cells.size() == 1 && alphas.size() == 1;
  }
};

struct GridSearchResult {
  double bin_size = 0.0;
  int grid_cells = 0;
  double alpha = 0.0;

  struct Evaluation {
    double bin_size;
    int grid_cells;
    double alpha;
    double cv_error;
  };
  std::vector<Evaluation> trace;  // every candidate evaluated, in sweep order
};

/// Coordinate-wise greedy sweep (bin size, then grid cells, then alpha) under
/// 3-fold object-wise cross validation on the manifest's objects; folds
/// degenerate to leave-one-object-out when they would hold fewer than two
/// objects. Ties go to the smaller parameter. Single-point grids return
/// immediately without training.
GridSearchResult greedy_grid_search(const DatasetManifest& train_manifest,
                                    TaskKind task, const GridSearchSpec& grids,
                                    const AdmmConfig& admm, std::uint64_t seed,
                                    int threads = 1);

enum class Protocol {
  kObjectWise,
  kCategoryWiseBalanced,
  kCategoryWiseUnbalanced,
};

/// A training method evaluated by run_experiment.
///  - proposed: all layers, one group per layer
///  - single layer: one layer's columns, lasso (singleton groups)
///  - hog only: the layer-1 HOG span, lasso
struct Method {
  enum Kind { kProposed, kSingleLayer, kHogOnly } kind = kProposed;
  int layer = 0;  // single-layer methods

  std::string name() const;
  static Method proposed() { return {kProposed, 0}; }
  static Method single_layer(int layer) { return {kSingleLayer, layer}; }
  static Method hog_only() { return {kHogOnly, 0}; }
  /// proposed + one single-layer method per layer.
  static std::vector<Method> standard_set(int num_layers);
};

struct ExperimentConfig {
  Protocol protocol = Protocol::kCategoryWiseBalanced;
  TaskKind task = TaskKind::kPose;
  std::vector<int> c_schedule = {2};          // category counts, incremental
  std::vector<int> n_train_schedule = {1, 2, 3, 4};
  int n_test_per_category = 1;
  int repeats = 2;
  GridSearchSpec grids;  // single-point grids pin the hyperparameters
  AdmmConfig admm;
  PoseErrorKind pose_error_kind = PoseErrorKind::kCircularAbsolute;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ResultCell {
  std::string protocol;
  int num_categories = 0;
  int n_train = 0;  // -1 means "all remaining objects" (unbalanced protocol)
  std::string method;
  int repeat = 0;
  std::string metric;  // pose_error_deg | accuracy_pct
  double value = 0.0;
  bool failed = false;
  std::string reason;
};

struct ResultTable {
  std::vector<ResultCell> cells;

  std::uint64_t digest() const;
  /// Mean over repeats of the matching cells; NaN when none match.
  double mean(const std::string& method, int num_categories, int n_train,
              const std::string& metric) const;
};

/// Runs the protocol schedule over the manifest. Within a cell the split is
/// drawn per repeat (seeded); hyperparameters come from greedy_grid_search
/// on the training part. Failed cells are recorded with their reason.
ResultTable run_experiment(const DatasetManifest& manifest,
                           const ExperimentConfig& cfg,
                           std::span<const Method> methods);

/// CSV with the fixed header protocol,C,n_train,method,repeat,metric,value;
/// per-repeat rows followed by mean rows (repeat column "mean").
void write_result_csv(const ResultTable& table, const std::string& path);
void write_result_json(const ResultTable& table, const ExperimentConfig& cfg,
                       const std::string& path);
/// Mean metric per method grouped by category count.
void write_bar_chart_svg(const ResultTable& table, const std::string& path);
/// Mean metric per method as a function of the training-object count.
void write_trend_svg(const ResultTable& table, const std::string& path);

/// The shipped synthetic benchmark: cup + shoe, 5 objects each, a full
/// 5-degree turn. Acceptance and the default CLI experiment share it.
DatasetManifest benchmark_dataset(std::uint64_t seed);
ExperimentConfig benchmark_config(std::uint64_t seed);

}  // namespace partpose
