#pragma once

#include <Eigen/Core>
#include <span>

#include "partpose/hop.hpp"
#include "partpose/types.hpp"

namespace partpose {

/// Complete weighted graph over part realizations; the weight of an edge is
/// the angle between the two positions seen from the image center.
struct PartGraph {
  Eigen::MatrixXd weights;  // K x K, symmetric, zero diagonal, entries in [0, pi]

  int size() const { return static_cast<int>(weights.rows()); }
};

/// w(k', k) = arccos(pos_k' . pos_k / (|pos_k'| |pos_k|)), the cosine clamped
/// to [-1, 1]. Parts with |pos| < 1e-9 have no direction; they are dropped
/// and counted in the diagnostics.
PartGraph part_graph_weights(std::span<const PartRealization> parts,
                             FeatureDiagnostics* diag = nullptr);

/// (D - W) / (K (K - 1)) with D the diagonal of column sums. Symmetric PSD
/// with zero row sums. Requires K >= 2.
Eigen::MatrixXd normalized_laplacian(const PartGraph& graph);

/// -sum_k nu_k log2 nu_k over the Laplacian spectrum, with 0 log2 0 = 0.
/// Graphs with K <= 1 have entropy 0.
double von_neumann_entropy(const PartGraph& graph);

}  // namespace partpose
