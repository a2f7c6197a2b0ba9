#include <cmath>
#include <sstream>

#include "partpose/errors.hpp"
#include "partpose/parallel.hpp"
#include "partpose/solver.hpp"

namespace partpose {

namespace {

constexpr double kGradMapTol = 1e-8;

void check_groups(const Eigen::MatrixXd& design, const std::vector<ColumnRange>& groups) {
  if (groups.empty()) throw InputError("solver: empty group list");
  Eigen::Index expect = 0;
  for (const ColumnRange& g : groups) {
    if (g.begin != expect || g.end <= g.begin) {
      throw InputError("solver: groups must be non-empty and partition the columns");
    }
    expect = g.end;
  }
  if (expect != design.cols()) {
    throw InputError("solver: group map does not cover the design matrix");
  }
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::Index d = m.cols();
  Eigen::VectorXd x(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    x[i] = 1.0 + 1e-3 * static_cast<double>(i % 17);
  }
  x.normalize();
  double value = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd w = m.transpose() * (m * x);
    double norm = w.norm();
    if (norm == 0.0) return 0.0;
    double change = std::abs(norm - value);
    value = norm;
    x = w / norm;
    if (change <= 1e-12 * std::max(1.0, value)) break;
  }
  return std::sqrt(value);
}

Eigen::VectorXd block_soft_threshold(const Eigen::VectorXd& u, double tau) {
  double norm = u.norm();
  if (norm <= tau || norm == 0.0) return Eigen::VectorXd::Zero(u.size());
  return u * (1.0 - tau / norm);
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& u, double tau) {
  return u.unaryExpr([tau](double x) {
    if (x > tau) return x - tau;
    if (x < -tau) return x + tau;
    return 0.0;
  });
}

Eigen::VectorXd block_subproblem(const Eigen::MatrixXd& block,
                                 const Eigen::VectorXd& v, double lambda,
                                 double rho, PenaltyKind penalty, int budget,
                                 const Eigen::VectorXd* warm_start,
                                 double sigma_max) {
  if (lambda < 0.0) throw InputError("block_subproblem: negative lambda");
  if (rho <= 0.0) throw InputError("block_subproblem: rho must be positive");
  if (block.rows() != v.size()) {
    throw InputError("block_subproblem: dimension mismatch");
  }
  const Eigen::Index d = block.cols();

  if (d == 1) {
    // rho*(a w^2 - 2 c w) + lambda*|w| in closed form.
    double a = block.col(0).squaredNorm();
    if (a == 0.0) return Eigen::VectorXd::Zero(1);
    double c = block.col(0).dot(v);
    double ls = c / a;
    double tau = lambda / (2.0 * rho * a);
    Eigen::VectorXd w(1);
    w[0] = ls > tau ? ls - tau : (ls < -tau ? ls + tau : 0.0);
    return w;
  }

  if (sigma_max < 0.0) sigma_max = spectral_norm(block);
  if (sigma_max == 0.0) return Eigen::VectorXd::Zero(d);
  const double lip = 2.0 * rho * sigma_max * sigma_max * (1.0 + 1e-6);
  const double step = 1.0 / lip;

  auto prox = [&](const Eigen::VectorXd& u, double tau) {
    return penalty == PenaltyKind::kGroupL2 ? block_soft_threshold(u, tau)
                                            : soft_threshold(u, tau);
  };

  Eigen::VectorXd x = warm_start != nullptr && warm_start->size() == d
                          ? *warm_start
                          : Eigen::VectorXd::Zero(d);
  Eigen::VectorXd y = x;
  double t = 1.0;
  for (int it = 0; it < budget; ++it) {
    Eigen::VectorXd grad = 2.0 * rho * (block.transpose() * (block * y - v));
    Eigen::VectorXd x_next = prox(y - step * grad, step * lambda);
    double grad_map = (y - x_next).norm() / step;
    if (grad_map <= kGradMapTol) {
      x = x_next;
      break;
    }
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x_next + ((t - 1.0) / t_next) * (x_next - x);
    x = x_next;
    t = t_next;
  }
  return x;
}

double lambda_max_regression(const Eigen::MatrixXd& design,
                             const std::vector<ColumnRange>& groups,
                             const Eigen::VectorXd& targets) {
  check_groups(design, groups);
  double best = 0.0;
  for (const ColumnRange& g : groups) {
    double norm = (design.middleCols(g.begin, g.size()).transpose() * targets).norm();
    best = std::max(best, norm);
  }
  return best;
}

double group_lasso_objective(const Eigen::MatrixXd& design,
                             const std::vector<ColumnRange>& groups,
                             const Eigen::VectorXd& targets, double lambda,
                             const Eigen::VectorXd& omega) {
  double fit = 0.5 * (design * omega - targets).squaredNorm();
  double penalty = 0.0;
  for (const ColumnRange& g : groups) {
    penalty += omega.segment(g.begin, g.size()).norm();
  }
  return fit + lambda * penalty;
}

AdmmSolution admm_group_lasso(const Eigen::MatrixXd& design,
                              const std::vector<ColumnRange>& groups,
                              const Eigen::VectorXd& targets, double lambda,
                              const AdmmConfig& cfg,
                              const Eigen::VectorXd* warm_start) {
  check_groups(design, groups);
  if (lambda < 0.0) throw InputError("admm_group_lasso: negative lambda");
  if (design.rows() != targets.size()) {
    throw InputError("admm_group_lasso: row/target mismatch");
  }

  const std::size_t num_blocks = groups.size();
  const double num_blocks_f = static_cast<double>(num_blocks);
  const Eigen::Index n = design.rows();

  std::vector<double> sigma(num_blocks);
  std::vector<Eigen::VectorXd> omega(num_blocks);
  std::vector<Eigen::VectorXd> block_fit(num_blocks, Eigen::VectorXd::Zero(n));
  for (std::size_t l = 0; l < num_blocks; ++l) {
    const ColumnRange& g = groups[l];
    sigma[l] = spectral_norm(design.middleCols(g.begin, g.size()));
    if (warm_start != nullptr && warm_start->size() == design.cols()) {
      omega[l] = warm_start->segment(g.begin, g.size());
      block_fit[l] = design.middleCols(g.begin, g.size()) * omega[l];
    } else {
      omega[l] = Eigen::VectorXd::Zero(g.size());
    }
  }

  Eigen::VectorXd average = Eigen::VectorXd::Zero(n);
  for (const Eigen::VectorXd& bf : block_fit) average += bf;
  average /= num_blocks_f;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd dual = Eigen::VectorXd::Zero(n);

  auto concat = [&]() {
    Eigen::VectorXd w(design.cols());
    for (std::size_t l = 0; l < num_blocks; ++l) {
      w.segment(groups[l].begin, groups[l].size()) = omega[l];
    }
    return w;
  };

  AdmmSolution sol;
  sol.trace.reserve(static_cast<std::size_t>(cfg.max_iters));

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    // Block updates against the shared residual target; the consensus
    // quadratic enters with weight rho/2 so the three updates share one rho.
    parallel_for(num_blocks, cfg.threads, [&](std::size_t l) {
      const ColumnRange& g = groups[l];
      Eigen::VectorXd v = block_fit[l] + phi - dual - average;
      omega[l] = block_subproblem(design.middleCols(g.begin, g.size()), v,
                                  lambda, cfg.rho / 2.0, PenaltyKind::kGroupL2,
                                  cfg.inner_iters, &omega[l], sigma[l]);
      block_fit[l] = design.middleCols(g.begin, g.size()) * omega[l];
    });

    average.setZero();
    for (const Eigen::VectorXd& bf : block_fit) average += bf;
    average /= num_blocks_f;

    Eigen::VectorXd phi_next =
        (targets + cfg.rho * (average + dual)) / (num_blocks_f + cfg.rho);
    dual += average - phi_next;

    double primal = (average - phi_next).norm();
    double dual_res = cfg.rho * (phi_next - phi).norm();
    phi = phi_next;

    double objective = group_lasso_objective(design, groups, targets, lambda, concat());
    sol.trace.push_back({iter, primal, dual_res, objective});

    if (!std::isfinite(primal) || !std::isfinite(dual_res) ||
        !std::isfinite(objective) || !all_finite(phi) || !all_finite(dual)) {
      std::ostringstream msg;
      msg << "admm_group_lasso: diverged at iteration " << iter
          << " (primal=" << primal << ", dual=" << dual_res << ")";
      throw SolverError(msg.str());
    }

    if (primal <= cfg.tol_primal && dual_res <= cfg.tol_dual) {
      sol.converged = true;
      sol.state.iter = iter;
      sol.state.primal_residual = primal;
      sol.state.dual_residual = dual_res;
      break;
    }
    sol.state.iter = iter;
    sol.state.primal_residual = primal;
    sol.state.dual_residual = dual_res;
  }

  sol.omega = concat();
  sol.state.omega = std::move(omega);
  sol.state.phi_bar = phi;
  sol.state.dual = dual;
  sol.state.block_average = average;
  return sol;
}

}  // namespace partpose
