#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "partpose/solver.hpp"

using namespace partpose;

namespace {

struct LogisticInstance {
  Eigen::MatrixXd design;
  std::vector<ColumnRange> groups;
  Eigen::VectorXd labels;
};

LogisticInstance make_logistic_instance(std::uint64_t seed, Eigen::Index rows,
                                        int num_groups, Eigen::Index group_dim) {
  LogisticInstance inst;
  const Eigen::Index cols = num_groups * group_dim;
  inst.design = oracles::random_matrix(seed, rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    auto col = inst.design.col(c);
    col.array() -= col.mean();
    double sd = std::sqrt(col.squaredNorm() / static_cast<double>(rows));
    if (sd > 0.0) col /= sd;
  }
  for (int g = 0; g < num_groups; ++g) {
    inst.groups.push_back({g + 1, g * group_dim, (g + 1) * group_dim});
  }
  Eigen::VectorXd w = oracles::random_vector(seed ^ 0xabcdef12u, cols);
  Eigen::VectorXd noise = 0.5 * oracles::random_vector(seed ^ 0x1234u, rows);
  Eigen::VectorXd h = inst.design * w + noise;
  inst.labels = h.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
  return inst;
}

}  // namespace

TEST_CASE("logistic_prob is stable and matches the direct formula") {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  CHECK(logistic_prob(f, w) == 0.5);

  // At h = 50 the true value is 1 - 1.9e-22, which double rounds to 1.
  f << 50.0, 0.0, 0.0;
  double p = logistic_prob(f, w);
  CHECK(std::isfinite(p));
  CHECK(p <= 1.0);
  CHECK(1.0 - p < 1e-20);

  f << -50.0, 0.0, 0.0;
  CHECK(logistic_prob(f, w) < 1e-20);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Eigen::VectorXd fv = oracles::random_vector(seed, 6);
    Eigen::VectorXd wv = oracles::random_vector(seed ^ 77u, 6);
    double h = fv.dot(wv);
    double direct = std::exp(h) / (1.0 + std::exp(h));
    if (!std::isfinite(direct)) continue;
    CHECK(std::fabs(logistic_prob(fv, wv) - direct) < 1e-12);
  }
}

TEST_CASE("large lambda zeroes the solution and predicts one half") {
  LogisticInstance inst = make_logistic_instance(3, 30, 2, 4);
  double lmax = lambda_max_logistic(inst.design, inst.labels);

  AdmmConfig cfg;
  cfg.max_iters = 1000;
  AdmmSolution sol = admm_sparse_logistic(inst.design, inst.groups, inst.labels,
                                          1.05 * lmax, cfg);
  CHECK((sol.omega.array() == 0.0).all());
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(logistic_prob(inst.design.row(i).transpose(), sol.omega) == 0.5);
  }
}

TEST_CASE("a separable toy problem is fit to 100% training accuracy") {
  // Labels split by a hyperplane through the origin with a margin.
  Eigen::MatrixXd f = oracles::random_matrix(91, 30, 4);
  for (Eigen::Index c = 0; c < 4; ++c) f.col(c).array() -= f.col(c).mean();
  Eigen::VectorXd w_true(4);
  w_true << 1.0, -2.0, 0.5, 1.5;
  Eigen::VectorXd h = f * w_true;
  Eigen::VectorXd y(30);
  for (Eigen::Index i = 0; i < 30; ++i) {
    if (std::fabs(h[i]) < 0.25) h[i] = h[i] >= 0 ? 0.25 : -0.25;  // enforce margin
    y[i] = h[i] > 0.0 ? 1.0 : 0.0;
  }
  // Rebuild features so the margin actually holds.
  f.col(0) = h - f.col(1) * w_true[1] - f.col(2) * w_true[2] - f.col(3) * w_true[3];

  double lmax = lambda_max_logistic(f, y);
  AdmmConfig cfg;
  cfg.max_iters = 4000;
  cfg.tol_primal = cfg.tol_dual = 1e-8;
  std::vector<ColumnRange> groups{{1, 0, 4}};
  AdmmSolution sol = admm_sparse_logistic(f, groups, y, 1e-4 * lmax, cfg);

  int correct = 0;
  for (Eigen::Index i = 0; i < 30; ++i) {
    double p = logistic_prob(f.row(i).transpose(), sol.omega);
    if ((p > 0.5) == (y[i] > 0.5)) ++correct;
  }
  CHECK(correct == 30);

  // The unregularized gradient-descent oracle agrees.
  Eigen::VectorXd w_gd = oracles::gradient_descent_logistic(f, y, 20000);
  int correct_gd = 0;
  for (Eigen::Index i = 0; i < 30; ++i) {
    if ((f.row(i).dot(w_gd) > 0.0) == (y[i] > 0.5)) ++correct_gd;
  }
  CHECK(correct_gd == 30);
}

TEST_CASE("objective matches a long-run proximal-gradient oracle") {
  LogisticInstance inst = make_logistic_instance(40, 40, 3, 4);
  double lambda = 0.05 * lambda_max_logistic(inst.design, inst.labels);

  AdmmConfig cfg;
  cfg.max_iters = 4000;
  cfg.tol_primal = cfg.tol_dual = 1e-8;
  cfg.inner_iters = 400;
  AdmmSolution sol =
      admm_sparse_logistic(inst.design, inst.groups, inst.labels, lambda, cfg);

  Eigen::VectorXd oracle =
      oracles::prox_grad_l1_logistic(inst.design, inst.labels, lambda, 100000);
  double got = sparse_logistic_objective(inst.design, inst.labels, lambda, sol.omega);
  double expect = sparse_logistic_objective(inst.design, inst.labels, lambda, oracle);
  CHECK(std::fabs(got - expect) / expect < 1e-4);
}

TEST_CASE("the smooth gradient matches central finite differences") {
  LogisticInstance inst = make_logistic_instance(55, 25, 2, 3);
  Eigen::VectorXd w = 0.5 * oracles::random_vector(56, 6);

  Eigen::VectorXd grad;
  logistic_smooth_value_grad(inst.design, inst.labels, w, nullptr, &grad);

  const double h = 1e-5;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    Eigen::VectorXd wp = w, wm = w;
    wp[i] += h;
    wm[i] -= h;
    double vp, vm;
    logistic_smooth_value_grad(inst.design, inst.labels, wp, &vp, nullptr);
    logistic_smooth_value_grad(inst.design, inst.labels, wm, &vm, nullptr);
    double fd = (vp - vm) / (2.0 * h);
    CHECK(std::fabs(fd - grad[i]) / std::max(1.0, std::fabs(grad[i])) < 1e-5);
  }
}

TEST_CASE("the unscaled consensus variant still solves") {
  LogisticInstance inst = make_logistic_instance(60, 24, 2, 3);
  double lambda = 0.05 * lambda_max_logistic(inst.design, inst.labels);
  AdmmConfig cfg;
  cfg.max_iters = 2000;
  cfg.phi_update = LogisticPhiUpdate::kUnscaled;
  AdmmSolution sol =
      admm_sparse_logistic(inst.design, inst.groups, inst.labels, lambda, cfg);
  CHECK(sol.omega.allFinite());
}

TEST_CASE("logistic solves are deterministic") {
  LogisticInstance inst = make_logistic_instance(70, 20, 2, 3);
  double lambda = 0.1 * lambda_max_logistic(inst.design, inst.labels);
  AdmmConfig cfg;
  cfg.max_iters = 300;
  AdmmSolution a = admm_sparse_logistic(inst.design, inst.groups, inst.labels, lambda, cfg);
  AdmmSolution b = admm_sparse_logistic(inst.design, inst.groups, inst.labels, lambda, cfg);
  for (Eigen::Index i = 0; i < a.omega.size(); ++i) CHECK(a.omega[i] == b.omega[i]);
}
