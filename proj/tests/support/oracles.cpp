#include "oracles.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "partpose/rng.hpp"

namespace oracles {

namespace {

double spectral_norm_svd(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()[0];
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Eigen::VectorXd prox_grad_group_lasso(const Eigen::MatrixXd& design,
                                      const std::vector<partpose::ColumnRange>& groups,
                                      const Eigen::VectorXd& targets, double lambda,
                                      int iters) {
  double sigma = spectral_norm_svd(design);
  if (sigma == 0.0) return Eigen::VectorXd::Zero(design.cols());
  double step = 1.0 / (sigma * sigma);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(design.cols());
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd grad = design.transpose() * (design * w - targets);
    Eigen::VectorXd u = w - step * grad;
    for (const partpose::ColumnRange& g : groups) {
      auto seg = u.segment(g.begin, g.size());
      double norm = seg.norm();
      double tau = step * lambda;
      if (norm <= tau) {
        seg.setZero();
      } else {
        seg *= 1.0 - tau / norm;
      }
    }
    w = u;
  }
  return w;
}

Eigen::VectorXd prox_grad_l1_logistic(const Eigen::MatrixXd& design,
                                      const Eigen::VectorXd& labels, double lambda,
                                      int iters) {
  double sigma = spectral_norm_svd(design);
  if (sigma == 0.0) return Eigen::VectorXd::Zero(design.cols());
  double step = 4.0 / (sigma * sigma);  // Lipschitz constant sigma^2 / 4

  Eigen::VectorXd w = Eigen::VectorXd::Zero(design.cols());
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd h = design * w;
    Eigen::VectorXd p = h.unaryExpr([](double x) { return sigmoid(x); });
    Eigen::VectorXd grad = design.transpose() * (p - labels);
    Eigen::VectorXd u = w - step * grad;
    double tau = step * lambda;
    w = u.unaryExpr([tau](double x) {
      if (x > tau) return x - tau;
      if (x < -tau) return x + tau;
      return 0.0;
    });
  }
  return w;
}

Eigen::VectorXd gradient_descent_logistic(const Eigen::MatrixXd& design,
                                          const Eigen::VectorXd& labels, int iters) {
  double sigma = spectral_norm_svd(design);
  double step = sigma == 0.0 ? 1.0 : 4.0 / (sigma * sigma);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(design.cols());
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd p = (design * w).unaryExpr([](double x) { return sigmoid(x); });
    w -= step * (design.transpose() * (p - labels));
  }
  return w;
}

std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-26) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        // Rotate rows/columns p and q.
        for (Eigen::Index k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

Eigen::MatrixXd naive_correlate_valid(const Eigen::MatrixXd& image,
                                      const Eigen::MatrixXd& kernel) {
  const Eigen::Index kh = kernel.rows() / 2;
  const Eigen::Index kw = kernel.cols() / 2;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(image.rows(), image.cols());
  for (Eigen::Index r = kh; r < image.rows() - kh; ++r) {
    for (Eigen::Index c = kw; c < image.cols() - kw; ++c) {
      double acc = 0.0;
      for (Eigen::Index dr = -kh; dr <= kh; ++dr) {
        for (Eigen::Index dc = -kw; dc <= kw; ++dc) {
          acc += kernel(dr + kh, dc + kw) * image(r + dr, c + dc);
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

Eigen::VectorXd normal_equations(const Eigen::MatrixXd& design,
                                 const Eigen::VectorXd& targets) {
  return (design.transpose() * design)
      .ldlt()
      .solve(design.transpose() * targets);
}

Eigen::VectorXd pseudo_inverse_solve(const Eigen::MatrixXd& design,
                                     const Eigen::VectorXd& targets) {
  return design.completeOrthogonalDecomposition().solve(targets);
}

Eigen::MatrixXd random_matrix(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols) {
  partpose::Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

Eigen::VectorXd random_vector(std::uint64_t seed, Eigen::Index size) {
  partpose::Rng rng(seed);
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = rng.normal();
  return v;
}

RegressionInstance make_regression_instance(std::uint64_t seed, Eigen::Index rows,
                                            int num_groups, Eigen::Index group_dim) {
  RegressionInstance inst;
  const Eigen::Index cols = num_groups * group_dim;
  inst.design = random_matrix(seed, rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    auto col = inst.design.col(c);
    col.array() -= col.mean();
    double sd = std::sqrt(col.squaredNorm() / static_cast<double>(rows));
    if (sd > 0.0) col /= sd;
  }
  for (int g = 0; g < num_groups; ++g) {
    inst.groups.push_back({g + 1, g * group_dim, (g + 1) * group_dim});
  }

  inst.true_omega = random_vector(seed ^ 0x9e3779b97f4a7c15ull, cols);
  // Zero the last group so exact group sparsity is attainable.
  inst.true_omega.segment((num_groups - 1) * group_dim, group_dim).setZero();

  Eigen::VectorXd noise = 0.05 * random_vector(seed ^ 0x517cc1b727220a95ull, rows);
  inst.targets = inst.design * inst.true_omega + noise;
  inst.targets.array() -= inst.targets.mean();
  return inst;
}

}  // namespace oracles
