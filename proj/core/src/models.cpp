#include "partpose/models.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "partpose/errors.hpp"
#include "partpose/parallel.hpp"

namespace partpose {

namespace {

using nlohmann::json;

Eigen::VectorXd standardize_with(const Eigen::VectorXd& raw,
                                 const Eigen::VectorXd& means,
                                 const Eigen::VectorXd& scales) {
  if (raw.size() != means.size()) {
    throw InputError("model: feature dimension mismatch");
  }
  return (raw - means).cwiseQuotient(scales);
}

Eigen::MatrixXd subset_rows(const Eigen::MatrixXd& values,
                            std::span<const Eigen::Index> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = values.row(rows[i]);
  }
  return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  Eigen::Index i = 0;
  for (const json& x : arr) v[i++] = x.get<double>();
  return v;
}

json groups_to_json(const std::vector<ColumnRange>& groups) {
  json arr = json::array();
  for (const ColumnRange& g : groups) {
    arr.push_back({{"layer", g.layer},
                   {"begin", static_cast<std::int64_t>(g.begin)},
                   {"end", static_cast<std::int64_t>(g.end)}});
  }
  return arr;
}

std::vector<ColumnRange> groups_from_json(const json& arr) {
  std::vector<ColumnRange> groups;
  for (const json& g : arr) {
    groups.push_back({g.at("layer").get<int>(),
                      g.at("begin").get<std::int64_t>(),
                      g.at("end").get<std::int64_t>()});
  }
  return groups;
}

/// Weights stored one array per group, aligned with "groups".
json omega_to_json(const Eigen::VectorXd& omega, const std::vector<ColumnRange>& groups) {
  json arr = json::array();
  for (const ColumnRange& g : groups) {
    arr.push_back(vector_to_json(omega.segment(g.begin, g.size())));
  }
  return arr;
}

json features_to_json(const FeatureConfig& cfg) {
  return {{"grid_cells", cfg.hop.grid_cells},
          {"orientation_bins", cfg.hop.orientation_bins},
          {"hog_cell", cfg.hog.cell_px},
          {"hog_bins", cfg.hog.bins},
          {"hog_clip", cfg.hog.clip},
          {"weight_by_score", cfg.weight_by_score}};
}

FeatureConfig features_from_json(const json& j) {
  FeatureConfig cfg;
  cfg.hop.grid_cells = j.at("grid_cells").get<int>();
  cfg.hop.orientation_bins = j.at("orientation_bins").get<int>();
  cfg.hog.cell_px = j.at("hog_cell").get<int>();
  cfg.hog.bins = j.at("hog_bins").get<int>();
  cfg.hog.clip = j.at("hog_clip").get<double>();
  cfg.weight_by_score = j.at("weight_by_score").get<bool>();
  return cfg;
}

Eigen::VectorXd omega_from_json(const json& arr, const std::vector<ColumnRange>& groups) {
  Eigen::Index total = groups.empty() ? 0 : groups.back().end;
  Eigen::VectorXd omega = Eigen::VectorXd::Zero(total);
  std::size_t i = 0;
  for (const ColumnRange& g : groups) {
    Eigen::VectorXd seg = vector_from_json(arr.at(i++));
    if (seg.size() != g.size()) throw InputError("model: group weight size mismatch");
    omega.segment(g.begin, g.size()) = seg;
  }
  return omega;
}

}  // namespace

Eigen::VectorXd PoseModel::standardize(const Eigen::VectorXd& raw) const {
  return standardize_with(raw, column_means, column_scales);
}

Eigen::VectorXd CategoryModel::standardize(const Eigen::VectorXd& raw) const {
  return standardize_with(raw, column_means, column_scales);
}

Eigen::VectorXd CategoryModel::scores(const Eigen::VectorXd& standardized) const {
  if (standardized.size() != omega.cols()) {
    throw InputError("predict_category: dimension mismatch");
  }
  return omega * standardized;
}

double predict_pose(const PoseModel& model, const Eigen::VectorXd& standardized) {
  if (standardized.size() != model.omega.size()) {
    throw InputError("predict_pose: dimension mismatch");
  }
  if (model.circular) {
    double c = standardized.dot(model.omega) + model.cos_mean;
    double s = standardized.dot(model.omega_sin) + model.sin_mean;
    return wrap_degrees(std::atan2(s, c) * (180.0 / std::numbers::pi));
  }
  return standardized.dot(model.omega) + model.target_mean;
}

CategoryLabel predict_category(const CategoryModel& model,
                               const Eigen::VectorXd& standardized) {
  Eigen::VectorXd h = model.scores(standardized);
  int best = 0;
  for (int c = 1; c < model.num_classes(); ++c) {
    if (h[c] > h[best]) best = c;
  }
  return CategoryLabel{best + 1};
}

PoseModel train_pose_model(const GroupedDesignMatrix& design,
                           std::span<const Eigen::Index> rows,
                           const TrainOptions& opts) {
  if (rows.empty()) throw InputError("train_pose_model: no training rows");
  Eigen::MatrixXd train = subset_rows(design.values, rows);

  PoseModel model;
  model.groups = design.groups;
  model.column_means = design.column_means;
  model.column_scales = design.column_scales;
  model.rho = opts.admm.rho;
  model.alpha = opts.admm.alpha;
  model.circular = opts.circular;

  auto fit_centered = [&](const Eigen::VectorXd& targets, double* mean_out) {
    double mean = targets.mean();
    Eigen::VectorXd centered = targets.array() - mean;
    double lambda = opts.lambda
                        ? *opts.lambda
                        : opts.admm.alpha *
                              lambda_max_regression(train, design.groups, centered);
    AdmmSolution sol =
        admm_group_lasso(train, design.groups, centered, lambda, opts.admm);
    *mean_out = mean;
    model.lambda = lambda;
    return sol.omega;
  };

  Eigen::VectorXd degrees(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    degrees[static_cast<Eigen::Index>(i)] = design.rows[static_cast<std::size_t>(rows[i])].pose.degrees;
  }

  if (opts.circular) {
    constexpr double kRad = std::numbers::pi / 180.0;
    Eigen::VectorXd cos_t = (degrees.array() * kRad).cos();
    Eigen::VectorXd sin_t = (degrees.array() * kRad).sin();
    model.omega = fit_centered(cos_t, &model.cos_mean);
    model.omega_sin = fit_centered(sin_t, &model.sin_mean);
  } else {
    model.omega = fit_centered(degrees, &model.target_mean);
  }
  return model;
}

CategoryModel train_category_model(const GroupedDesignMatrix& design,
                                   std::span<const Eigen::Index> rows,
                                   int num_classes, const TrainOptions& opts) {
  if (rows.empty()) throw InputError("train_category_model: no training rows");
  if (num_classes < 2) throw InputError("train_category_model: needs >= 2 classes");
  Eigen::MatrixXd train = subset_rows(design.values, rows);

  std::vector<Eigen::VectorXd> labels(static_cast<std::size_t>(num_classes));
  for (int c = 1; c <= num_classes; ++c) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      y[static_cast<Eigen::Index>(i)] =
          design.rows[static_cast<std::size_t>(rows[i])].category.value == c ? 1.0 : 0.0;
    }
    labels[static_cast<std::size_t>(c - 1)] = y;
  }

  double lambda;
  if (opts.lambda) {
    lambda = *opts.lambda;
  } else {
    double lmax = 0.0;
    for (const Eigen::VectorXd& y : labels) {
      lmax = std::max(lmax, lambda_max_logistic(train, y));
    }
    lambda = opts.admm.alpha * lmax;
  }

  CategoryModel model;
  model.groups = design.groups;
  model.column_means = design.column_means;
  model.column_scales = design.column_scales;
  model.rho = opts.admm.rho;
  model.lambda = lambda;
  model.alpha = opts.admm.alpha;
  model.omega.resize(num_classes, design.values.cols());

  // One-vs-rest problems are independent; run them in parallel and keep the
  // block loops inside each solve serial.
  AdmmConfig inner = opts.admm;
  int class_threads = 1;
  if (opts.admm.threads > 1) {
    class_threads = opts.admm.threads;
    inner.threads = 1;
  }
  parallel_for(static_cast<std::size_t>(num_classes), class_threads, [&](std::size_t c) {
    AdmmSolution sol = admm_sparse_logistic(train, design.groups, labels[c],
                                            lambda, inner);
    model.omega.row(static_cast<Eigen::Index>(c)) = sol.omega.transpose();
  });
  return model;
}

void save_model_json(const Model& model, const std::string& path) {
  json doc;
  doc["version"] = 1;
  if (std::holds_alternative<PoseModel>(model)) {
    const PoseModel& m = std::get<PoseModel>(model);
    doc["kind"] = "pose";
    doc["groups"] = groups_to_json(m.groups);
    doc["omega"] = omega_to_json(m.omega, m.groups);
    doc["col_means"] = vector_to_json(m.column_means);
    doc["col_scales"] = vector_to_json(m.column_scales);
    doc["rho"] = m.rho;
    doc["lambda"] = m.lambda;
    doc["alpha"] = m.alpha;
    doc["target_mean"] = m.target_mean;
    doc["circular"] = m.circular;
    doc["features"] = features_to_json(m.features);
    if (m.circular) {
      doc["omega_sin"] = omega_to_json(m.omega_sin, m.groups);
      doc["cos_mean"] = m.cos_mean;
      doc["sin_mean"] = m.sin_mean;
    }
  } else {
    const CategoryModel& m = std::get<CategoryModel>(model);
    doc["kind"] = "category";
    doc["groups"] = groups_to_json(m.groups);
    json omega = json::array();
    for (Eigen::Index c = 0; c < m.omega.rows(); ++c) {
      omega.push_back(omega_to_json(m.omega.row(c).transpose(), m.groups));
    }
    doc["omega"] = omega;
    doc["col_means"] = vector_to_json(m.column_means);
    doc["col_scales"] = vector_to_json(m.column_scales);
    doc["rho"] = m.rho;
    doc["lambda"] = m.lambda;
    doc["alpha"] = m.alpha;
    doc["num_classes"] = m.num_classes();
    doc["features"] = features_to_json(m.features);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("save_model_json: cannot write " + path);
  out << doc.dump(2) << "\n";
}

Model load_model_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("load_model_json: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError("load_model_json: " + path + ": " + e.what());
  }
  try {
    if (doc.at("version").get<int>() != 1) {
      throw InputError("load_model_json: unsupported version in " + path);
    }
    std::string kind = doc.at("kind").get<std::string>();
    if (kind == "pose") {
      PoseModel m;
      m.groups = groups_from_json(doc.at("groups"));
      m.omega = omega_from_json(doc.at("omega"), m.groups);
      m.column_means = vector_from_json(doc.at("col_means"));
      m.column_scales = vector_from_json(doc.at("col_scales"));
      m.rho = doc.at("rho").get<double>();
      m.lambda = doc.at("lambda").get<double>();
      m.alpha = doc.at("alpha").get<double>();
      m.target_mean = doc.at("target_mean").get<double>();
      m.circular = doc.value("circular", false);
      if (doc.contains("features")) m.features = features_from_json(doc["features"]);
      if (m.circular) {
        m.omega_sin = omega_from_json(doc.at("omega_sin"), m.groups);
        m.cos_mean = doc.at("cos_mean").get<double>();
        m.sin_mean = doc.at("sin_mean").get<double>();
      }
      return m;
    }
    if (kind == "category") {
      CategoryModel m;
      m.groups = groups_from_json(doc.at("groups"));
      m.column_means = vector_from_json(doc.at("col_means"));
      m.column_scales = vector_from_json(doc.at("col_scales"));
      m.rho = doc.at("rho").get<double>();
      m.lambda = doc.at("lambda").get<double>();
      m.alpha = doc.at("alpha").get<double>();
      if (doc.contains("features")) m.features = features_from_json(doc["features"]);
      const json& omega = doc.at("omega");
      int classes = doc.at("num_classes").get<int>();
      if (static_cast<int>(omega.size()) != classes) {
        throw InputError("load_model_json: class count mismatch in " + path);
      }
      Eigen::Index cols = m.groups.empty() ? 0 : m.groups.back().end;
      m.omega.resize(classes, cols);
      for (int c = 0; c < classes; ++c) {
        m.omega.row(c) = omega_from_json(omega.at(static_cast<std::size_t>(c)), m.groups).transpose();
      }
      return m;
    }
    throw InputError("load_model_json: unknown kind in " + path);
  } catch (const json::exception& e) {
    throw InputError("load_model_json: " + path + ": " + e.what());
  }
}

}  // namespace partpose
