#pragma once

// Independent reference implementations used only by tests. They share no
// solver code with the library: plain (non-accelerated) proximal gradient,
// cyclic Jacobi eigenvalues, quadruple-loop convolution, direct
// least-squares solves.

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "partpose/features.hpp"

namespace oracles {

/// Plain proximal gradient on 0.5*||F w - z||^2 + lambda * sum_g ||w_g||_2.
Eigen::VectorXd prox_grad_group_lasso(const Eigen::MatrixXd& design,
                                      const std::vector<partpose::ColumnRange>& groups,
                                      const Eigen::VectorXd& targets, double lambda,
                                      int iters);

/// Plain proximal gradient on sum_i [log(1+e^h) - y h] + lambda * ||w||_1.
Eigen::VectorXd prox_grad_l1_logistic(const Eigen::MatrixXd& design,
                                      const Eigen::VectorXd& labels, double lambda,
                                      int iters);

/// Unregularized logistic regression by fixed-step gradient descent.
Eigen::VectorXd gradient_descent_logistic(const Eigen::MatrixXd& design,
                                          const Eigen::VectorXd& labels, int iters);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a);

/// Valid-region correlation: out(r, c) = sum_k kernel .* image patch, zero
/// where the kernel does not fit.
Eigen::MatrixXd naive_correlate_valid(const Eigen::MatrixXd& image,
                                      const Eigen::MatrixXd& kernel);

/// Least squares via the normal equations (LDLT).
Eigen::VectorXd normal_equations(const Eigen::MatrixXd& design,
                                 const Eigen::VectorXd& targets);

/// Minimum-norm least squares via complete orthogonal decomposition.
Eigen::VectorXd pseudo_inverse_solve(const Eigen::MatrixXd& design,
                                     const Eigen::VectorXd& targets);

/// Seeded dense Gaussian matrix (deterministic across platforms).
Eigen::MatrixXd random_matrix(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols);
Eigen::VectorXd random_vector(std::uint64_t seed, Eigen::Index size);

struct RegressionInstance {
  Eigen::MatrixXd design;  // standardized columns
  std::vector<partpose::ColumnRange> groups;
  Eigen::VectorXd targets;  // centered
  Eigen::VectorXd true_omega;
};

/// Standardized random instance with block-sparse ground truth (the last
/// group is zero) and mild noise.
RegressionInstance make_regression_instance(std::uint64_t seed, Eigen::Index rows,
                                            int num_groups, Eigen::Index group_dim);

}  // namespace oracles
