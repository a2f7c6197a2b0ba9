#pragma once

#include <Eigen/Core>
#include <vector>

#include "partpose/features.hpp"

namespace partpose {

enum class PenaltyKind {
  kGroupL2,  // lambda * ||w||_2 over the whole block
  kL1,       // lambda * ||w||_1 elementwise
};

/// Scalar consensus update used by the logistic path.
enum class LogisticPhiUpdate {
  kScaled,    // quadratic coupling carries the block count (default)
  kUnscaled,  // raw quadratic coupling
};

struct AdmmConfig {
  double rho = 1.0;        // consensus penalty parameter
  int max_iters = 1000;    // hard iteration cap T
  double tol_primal = 1e-4;
  double tol_dual = 1e-4;
  int inner_iters = 200;   // per-block proximal-gradient budget
  double alpha = 1e-3;     // lambda = alpha * lambda_max unless given directly
  int threads = 1;         // parallelism across block subproblems
  LogisticPhiUpdate phi_update = LogisticPhiUpdate::kScaled;
};

struct AdmmIterate {
  int iter = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
};

/// Solver state after the last completed iteration.
struct AdmmState {
  std::vector<Eigen::VectorXd> omega;  // per-block weight vectors
  Eigen::VectorXd phi_bar;             // consensus estimate
  Eigen::VectorXd dual;                // scaled dual vector
  Eigen::VectorXd block_average;       // (1/L) sum_l F_l omega_l
  int iter = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

struct AdmmSolution {
  Eigen::VectorXd omega;  // concatenated block weights
  std::vector<AdmmIterate> trace;
  AdmmState state;
  bool converged = false;
};

/// Largest singular value, by power iteration on F^T F (deterministic start).
double spectral_norm(const Eigen::MatrixXd& m);

/// Proximal map of tau * ||.||_2: u * max(0, 1 - tau / ||u||_2).
Eigen::VectorXd block_soft_threshold(const Eigen::VectorXd& u, double tau);

/// Elementwise soft threshold.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& u, double tau);

/// Approximate minimizer of  rho * ||F w - v||_2^2 + lambda * penalty(w)
/// by accelerated proximal gradient with step 1/(2 rho sigma_max(F)^2),
/// stopping at gradient-map norm <= 1e-8 or the iteration budget.
/// Pass sigma_max when precomputed (< 0 recomputes); single-column blocks
/// use the closed form.
Eigen::VectorXd block_subproblem(const Eigen::MatrixXd& block,
                                 const Eigen::VectorXd& v, double lambda,
                                 double rho, PenaltyKind penalty, int budget,
                                 const Eigen::VectorXd* warm_start = nullptr,
                                 double sigma_max = -1.0);

/// Smallest lambda with an all-zero group-lasso solution:
/// max_l ||F_l^T z||_2. Requires standardized F and centered z.
double lambda_max_regression(const Eigen::MatrixXd& design,
                             const std::vector<ColumnRange>& groups,
                             const Eigen::VectorXd& targets);

/// Smallest lambda with an all-zero l1-logistic solution:
/// ||F^T (y - mean(y))||_inf.
double lambda_max_logistic(const Eigen::MatrixXd& design,
                           const Eigen::VectorXd& labels);

/// 0.5 * ||F w - z||_2^2 + lambda * sum_l ||w_l||_2.
double group_lasso_objective(const Eigen::MatrixXd& design,
                             const std::vector<ColumnRange>& groups,
                             const Eigen::VectorXd& targets, double lambda,
                             const Eigen::VectorXd& omega);

/// sum_i [softplus(h_i) - y_i h_i] + lambda * ||w||_1 with h = F w.
double sparse_logistic_objective(const Eigen::MatrixXd& design,
                                 const Eigen::VectorXd& labels, double lambda,
                                 const Eigen::VectorXd& omega);

/// Value and gradient of the smooth logistic part (no penalty).
void logistic_smooth_value_grad(const Eigen::MatrixXd& design,
                                const Eigen::VectorXd& labels,
                                const Eigen::VectorXd& omega, double* value,
                                Eigen::VectorXd* grad);

/// Sharing-form ADMM for the group-lasso regression objective. Per
/// iteration: every block solves its penalized least-squares subproblem
/// against the shared residual target, the consensus vector is refreshed
/// from the block average, and the scaled dual absorbs the gap.
/// Requires standardized F, centered z and lambda >= 0.
AdmmSolution admm_group_lasso(const Eigen::MatrixXd& design,
                              const std::vector<ColumnRange>& groups,
                              const Eigen::VectorXd& targets, double lambda,
                              const AdmmConfig& cfg,
                              const Eigen::VectorXd* warm_start = nullptr);

/// Same skeleton for l1-penalized logistic regression on 0/1 labels; the
/// consensus update solves a per-coordinate scalar problem by safeguarded
/// Newton with bisection fallback.
AdmmSolution admm_sparse_logistic(const Eigen::MatrixXd& design,
                                  const std::vector<ColumnRange>& groups,
                                  const Eigen::VectorXd& labels, double lambda,
                                  const AdmmConfig& cfg,
                                  const Eigen::VectorXd* warm_start = nullptr);

/// Overflow-safe sigmoid of f . omega.
double logistic_prob(const Eigen::VectorXd& features, const Eigen::VectorXd& omega);

/// log(1 + exp(x)) without overflow.
double softplus(double x);

double sigmoid(double x);

}  // namespace partpose
