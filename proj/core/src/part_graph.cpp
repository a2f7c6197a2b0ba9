#include "partpose/part_graph.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <vector>

#include "partpose/errors.hpp"

namespace partpose {

namespace {
constexpr double kMinPositionNorm = 1e-9;
}

PartGraph part_graph_weights(std::span<const PartRealization> parts,
                             FeatureDiagnostics* diag) {
  std::vector<Eigen::Vector2d> dirs;
  dirs.reserve(parts.size());
  for (const PartRealization& p : parts) {
    Eigen::Vector2d pos(p.x, p.y);
    double norm = pos.norm();
    if (norm < kMinPositionNorm) {
      if (diag != nullptr) ++diag->near_zero_norm_parts;
      continue;
    }
    dirs.push_back(pos / norm);
  }

  const int k = static_cast<int>(dirs.size());
  PartGraph g;
  g.weights = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      double cosine = dirs[static_cast<std::size_t>(i)].dot(dirs[static_cast<std::size_t>(j)]);
      cosine = std::clamp(cosine, -1.0, 1.0);
      double w = std::acos(cosine);
      g.weights(i, j) = w;
      g.weights(j, i) = w;
    }
  }
  return g;
}

Eigen::MatrixXd normalized_laplacian(const PartGraph& graph) {
  const int k = graph.size();
  if (k < 2) {
    throw InputError("normalized_laplacian: needs at least 2 nodes");
  }
  Eigen::VectorXd degree = graph.weights.colwise().sum();
  Eigen::MatrixXd lap = -graph.weights;
  lap.diagonal() += degree;
  lap /= static_cast<double>(k) * (k - 1);
  return lap;
}

double von_neumann_entropy(const PartGraph& graph) {
  if (graph.size() <= 1) return 0.0;
  Eigen::MatrixXd lap = normalized_laplacian(graph);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "von_neumann_entropy: eigensolver failed on a " << graph.size()
        << "-node graph (|L|_max = " << lap.cwiseAbs().maxCoeff() << ")";
    throw NumericalError(msg.str());
  }
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    double nu = solver.eigenvalues()[i];
    if (nu <= 0.0) continue;  // clamp spectral noise; 0 log2 0 = 0
    entropy -= nu * std::log2(nu);
  }
  return entropy;
}

}  // namespace partpose
