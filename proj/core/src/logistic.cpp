#include <cmath>
#include <sstream>

#include "partpose/errors.hpp"
#include "partpose/parallel.hpp"
#include "partpose/solver.hpp"

namespace partpose {

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double logistic_prob(const Eigen::VectorXd& features, const Eigen::VectorXd& omega) {
  if (features.size() != omega.size()) {
    throw InputError("logistic_prob: dimension mismatch");
  }
  return sigmoid(features.dot(omega));
}

double lambda_max_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& labels) {
  if (design.rows() != labels.size()) {
    throw InputError("lambda_max_logistic: row/label mismatch");
  }
  double mean = labels.mean();
  return (design.transpose() * (labels.array() - mean).matrix())
      .cwiseAbs()
      .maxCoeff();
}

void logistic_smooth_value_grad(const Eigen::MatrixXd& design,
                                const Eigen::VectorXd& labels,
                                const Eigen::VectorXd& omega, double* value,
                                Eigen::VectorXd* grad) {
  Eigen::VectorXd h = design * omega;
  if (value != nullptr) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      v += softplus(h[i]) - labels[i] * h[i];
    }
    *value = v;
  }
  if (grad != nullptr) {
    Eigen::VectorXd p = h.unaryExpr([](double x) { return sigmoid(x); });
    *grad = design.transpose() * (p - labels);
  }
}

double sparse_logistic_objective(const Eigen::MatrixXd& design,
                                 const Eigen::VectorXd& labels, double lambda,
                                 const Eigen::VectorXd& omega) {
  double value = 0.0;
  logistic_smooth_value_grad(design, labels, omega, &value, nullptr);
  return value + lambda * omega.lpNorm<1>();
}

namespace {

// Root of the consensus optimality condition for one coordinate. psi is
// strictly increasing; [lo, hi] brackets the root. Newton steps that leave
// the bracket fall back to bisection.
template <typename Psi, typename PsiPrime>
double safeguarded_newton(double x0, double lo, double hi, const Psi& psi,
                          const PsiPrime& psi_prime) {
  double flo = psi(lo);
  double fhi = psi(hi);
  if (!(flo <= 0.0 && fhi >= 0.0)) {
    // Widen once; the analytic bracket can be off by rounding only.
    lo -= 1.0;
    hi += 1.0;
    flo = psi(lo);
    fhi = psi(hi);
  }
  double x = std::clamp(x0, lo, hi);
  for (int it = 0; it < 100; ++it) {
    double f = psi(x);
    if (!std::isfinite(f)) break;
    if (std::abs(f) <= 1e-12) return x;
    if (f > 0.0) hi = x; else lo = x;
    double d = psi_prime(x);
    double next = d > 0.0 ? x - f / d : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double f = psi(mid);
    if (!std::isfinite(f)) {
      throw SolverError("logistic consensus update: non-finite objective");
    }
    if (std::abs(f) <= 1e-10 || hi - lo <= 1e-14 * std::max(1.0, std::abs(mid))) {
      return mid;
    }
    if (f > 0.0) hi = mid; else lo = mid;
  }
  throw SolverError("logistic consensus update: root finder failed to converge");
}

}  // namespace

AdmmSolution admm_sparse_logistic(const Eigen::MatrixXd& design,
                                  const std::vector<ColumnRange>& groups,
                                  const Eigen::VectorXd& labels, double lambda,
                                  const AdmmConfig& cfg,
                                  const Eigen::VectorXd* warm_start) {
  if (lambda < 0.0) throw InputError("admm_sparse_logistic: negative lambda");
  if (design.rows() != labels.size()) {
    throw InputError("admm_sparse_logistic: row/label mismatch");
  }
  if (groups.empty()) throw InputError("admm_sparse_logistic: empty group list");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw InputError("admm_sparse_logistic: labels must be 0/1");
    }
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

  const double rho = cfg.rho;
  AdmmSolution sol;
  sol.trace.reserve(static_cast<std::size_t>(cfg.max_iters));

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    parallel_for(num_blocks, cfg.threads, [&](std::size_t l) {
      const ColumnRange& g = groups[l];
      Eigen::VectorXd v = block_fit[l] + phi - dual - average;
      omega[l] = block_subproblem(design.middleCols(g.begin, g.size()), v,
                                  lambda, rho / 2.0, PenaltyKind::kL1,
                                  cfg.inner_iters, &omega[l], sigma[l]);
      block_fit[l] = design.middleCols(g.begin, g.size()) * omega[l];
    });

    average.setZero();
    for (const Eigen::VectorXd& bf : block_fit) average += bf;
    average /= num_blocks_f;

    Eigen::VectorXd phi_next(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double m = average[i] + dual[i];
      double y = labels[i];
      double x0 = phi[i];
      if (cfg.phi_update == LogisticPhiUpdate::kScaled) {
        // argmin (L rho / 2)(phi - m)^2 + softplus(L phi) - y L phi
        auto psi = [&](double p) { return rho * (p - m) + sigmoid(num_blocks_f * p) - y; };
        auto dpsi = [&](double p) {
          double s = sigmoid(num_blocks_f * p);
          return rho + num_blocks_f * s * (1.0 - s);
        };
        phi_next[i] = safeguarded_newton(x0, m + (y - 1.0) / rho - 1e-9,
                                         m + y / rho + 1e-9, psi, dpsi);
      } else {
        // argmin rho (phi - m)^2 + log(1 + exp(-s L phi)), s = +/-1 label
        double s = y > 0.5 ? 1.0 : -1.0;
        auto psi = [&](double p) {
          return 2.0 * rho * (p - m) - s * num_blocks_f * sigmoid(-s * num_blocks_f * p);
        };
        auto dpsi = [&](double p) {
          double sg = sigmoid(s * num_blocks_f * p);
          return 2.0 * rho + num_blocks_f * num_blocks_f * sg * (1.0 - sg);
        };
        double half_width = num_blocks_f / (2.0 * rho) + 1e-9;
        double lo = s > 0.0 ? m - 1e-9 : m - half_width;
        double hi = s > 0.0 ? m + half_width : m + 1e-9;
        phi_next[i] = safeguarded_newton(x0, lo, hi, psi, dpsi);
      }
    }

    dual += average - phi_next;

    double primal = (average - phi_next).norm();
    double dual_res = rho * (phi_next - phi).norm();
    phi = phi_next;

    double objective = sparse_logistic_objective(design, labels, lambda, concat());
    sol.trace.push_back({iter, primal, dual_res, objective});

    if (!std::isfinite(primal) || !std::isfinite(dual_res) || !std::isfinite(objective)) {
      std::ostringstream msg;
      msg << "admm_sparse_logistic: diverged at iteration " << iter
          << " (primal=" << primal << ", dual=" << dual_res << ")";
      throw SolverError(msg.str());
    }

    sol.state.iter = iter;
    sol.state.primal_residual = primal;
    sol.state.dual_residual = dual_res;
    if (primal <= cfg.tol_primal && dual_res <= cfg.tol_dual) {
      sol.converged = true;
      break;
    }
  }

  sol.omega = concat();
  sol.state.omega = std::move(omega);
  sol.state.phi_bar = phi;
  sol.state.dual = dual;
  sol.state.block_average = average;
  return sol;
}

}  // namespace partpose
