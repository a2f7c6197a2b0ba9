#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "partpose/features.hpp"
#include "partpose/solver.hpp"

namespace partpose {

/// Group-lasso pose regressor. Weights act on standardized features; the
/// training-target mean removed by centering is re-added at prediction time.
struct PoseModel {
  Eigen::VectorXd omega;
  std::vector<ColumnRange> groups;
  Eigen::VectorXd column_means;
  Eigen::VectorXd column_scales;
  double target_mean = 0.0;
  double rho = 1.0;
  double lambda = 0.0;
  double alpha = 0.0;

  // Optional circular parametrization: omega carries the cosine-target
  // weights and omega_sin the sine-target weights.
  bool circular = false;
  Eigen::VectorXd omega_sin;
  double cos_mean = 0.0;
  double sin_mean = 0.0;

  // Feature settings the model was trained with, so a stored model can be
  // applied to new part files.
  FeatureConfig features;

  Eigen::VectorXd standardize(const Eigen::VectorXd& raw) const;
};

/// One-vs-rest l1-logistic classifier; one weight row per class.
struct CategoryModel {
  Eigen::MatrixXd omega;  // C x (L*D)
  std::vector<ColumnRange> groups;
  Eigen::VectorXd column_means;
  Eigen::VectorXd column_scales;
  double rho = 1.0;
  double lambda = 0.0;
  double alpha = 0.0;
  FeatureConfig features;

  int num_classes() const { return static_cast<int>(omega.rows()); }
  Eigen::VectorXd standardize(const Eigen::VectorXd& raw) const;
  /// Per-class scores h_c = f . omega_c.
  Eigen::VectorXd scores(const Eigen::VectorXd& standardized) const;
};

/// z_hat = f . omega + mean(train targets). Input must already be
/// standardized with the model's record; the raw value is returned (wrap
/// with wrap_degrees for reporting).
double predict_pose(const PoseModel& model, const Eigen::VectorXd& standardized);

/// argmax_c of the class scores; ties go to the smallest class index.
CategoryLabel predict_category(const CategoryModel& model,
                               const Eigen::VectorXd& standardized);

struct TrainOptions {
  AdmmConfig admm;
  std::optional<double> lambda;  // bypasses alpha * lambda_max when set
  bool circular = false;         // pose only
};

/// Fits the pose regressor on the given design rows (targets taken from the
/// row metadata). Targets are centered; lambda = alpha * lambda_max unless
/// given explicitly.
PoseModel train_pose_model(const GroupedDesignMatrix& design,
                           std::span<const Eigen::Index> rows,
                           const TrainOptions& opts);

/// One-vs-rest training over classes 1..num_classes. A single lambda is
/// shared by all classes: alpha * max_c lambda_max(class c).
CategoryModel train_category_model(const GroupedDesignMatrix& design,
                                   std::span<const Eigen::Index> rows,
                                   int num_classes, const TrainOptions& opts);

using Model = std::variant<PoseModel, CategoryModel>;

/// Versioned JSON model files; field names: groups, omega, col_means,
/// col_scales, rho, lambda, alpha.
void save_model_json(const Model& model, const std::string& path);
Model load_model_json(const std::string& path);

}  // namespace partpose
