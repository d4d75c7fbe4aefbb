// Copyright 2026 The vbmix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "vbmix/component.hpp"
#include "vbmix/lowrank.hpp"
#include "vbmix/stiefel.hpp"

namespace vbmix {
namespace {

Eigen::MatrixXd random_matrix(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  return Eigen::MatrixXd::NullaryExpr(r, c, [&] { return normal(rng); });
}

double ortho_error(const Eigen::MatrixXd& W) {
  return (W.transpose() * W - Eigen::MatrixXd::Identity(W.cols(), W.cols())).norm();
}

TEST(Stiefel, InitIsOrthonormalAndSeeded) {
  const Eigen::MatrixXd a = init_orthonormal(30, 5, 9), b = init_orthonormal(30, 5, 9);
  EXPECT_LT(ortho_error(a), 1e-13);
  EXPECT_EQ(a, b);
  EXPECT_THROW(init_orthonormal(3, 4, 1), std::invalid_argument);
}

TEST(Stiefel, GradientMatchesFiniteDifferences) {
  const Eigen::MatrixXd G = random_matrix(9, 7, 1);
  const Eigen::MatrixXd H = G.transpose() * G;
  const Eigen::MatrixXd W = init_orthonormal(7, 3, 2);
  const Eigen::Vector3d linv(0.5, 0.2, 0.1);
  const StiefelValue v = stiefel_objective_grad(W, H, linv, 3.0);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 3; ++j) {
      Eigen::MatrixXd wp = W, wm = W;
      const double h = 1e-6;
      wp(i, j) += h;
      wm(i, j) -= h;
      const double fd = (stiefel_objective_grad(wp, H, linv, 3.0).value -
                         stiefel_objective_grad(wm, H, linv, 3.0).value) / (2 * h);
      EXPECT_NEAR(fd, v.grad(i, j), 1e-6 * v.grad.norm());
    }
  }
}

TEST(Stiefel, CayleyCurveStaysOnManifold) {
  const Eigen::MatrixXd W = init_orthonormal(12, 4, 3);
  const Eigen::MatrixXd D = random_matrix(12, 4, 4);
  EXPECT_LT((cayley_curve(W, D, 0.0) - W).norm(), 1e-14);
  for (double t : {0.01, 0.3, 2.0}) EXPECT_LT(ortho_error(cayley_curve(W, D, t)), 1e-12);
}

TEST(Stiefel, SearchRecoversLowCurvatureSubspace) {
  const Eigen::MatrixXd G = random_matrix(10, 8, 5);
  const Eigen::MatrixXd H = G.transpose() * G;
  const Eigen::Vector2d linv(2.0, 1.0);
  const double tau = 1.5;
  CayleyOptions opts;
  opts.max_iters = 5000;
  opts.grad_tol = 1e-10;
  auto objective = [&](const Eigen::MatrixXd& w) {
    return stiefel_objective_grad(w, H, linv, tau);
  };
  const CayleyResult r = cayley_retract_search(init_orthonormal(8, 2, 6), objective, opts);
  EXPECT_LT(ortho_error(r.W), 1e-10);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G.transpose() * G);
  const Eigen::MatrixXd U = es.eigenvectors().leftCols(2);  // ascending order
  EXPECT_LT((r.W * r.W.transpose() - U * U.transpose()).norm(), 1e-5);
  const double best = -0.5 * tau * (2.0 * es.eigenvalues()(0) + es.eigenvalues()(1));
  EXPECT_NEAR(r.value, best, 1e-8 * std::abs(best));
}

TEST(Stiefel, OrthogonalColumn) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd W = init_orthonormal(6, 3, 7);
  const Eigen::VectorXd v = orthogonal_column(W, rng);
  EXPECT_NEAR(v.norm(), 1.0, 1e-14);
  EXPECT_LT((W.transpose() * v).norm(), 1e-14);
  EXPECT_THROW(orthogonal_column(init_orthonormal(3, 3, 1), rng), std::invalid_argument);
}

MixtureComponent make(int d, int k, std::uint64_t seed, bool residual = true) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 20.0);
  MixtureComponent c;
  c.mu = random_matrix(d, 1, seed + 50);
  c.W = init_orthonormal(d, k, seed);
  c.lambda = Eigen::VectorXd::NullaryExpr(k, [&] { return u(rng); });
  c.lambda0 = Eigen::VectorXd::Constant(k, 0.5);
  c.lambda_eta = u(rng);
  c.lambda0_eta = 0.5;
  c.residual_enabled = residual;
  return c;
}

Eigen::MatrixXd dense_cov(const MixtureComponent& c) {
  Eigen::MatrixXd D = c.W * c.lambda.cwiseInverse().asDiagonal() * c.W.transpose();
  if (c.residual_enabled) D.diagonal().array() += 1.0 / c.lambda_eta;
  return D;
}

TEST(LowRank, MatchesDenseOracle) {
  for (int d : {5, 17, 30}) {
    const auto c = make(d, std::min(4, d - 1), 100 + d);
    const LowRankCovariance cov(c);
    const Eigen::MatrixXd D = dense_cov(c);
    const Eigen::VectorXd v = random_matrix(d, 1, 7);
    EXPECT_LT((cov.apply(v) - D * v).norm(), 1e-8 * (D * v).norm());
    EXPECT_LT((cov.apply_inverse(v) - D.ldlt().solve(v)).norm(),
              1e-8 * D.ldlt().solve(v).norm());
    const double logdet = D.ldlt().vectorD().array().log().sum();
    EXPECT_NEAR(cov.log_det(), logdet, 1e-8 * std::max(1.0, std::abs(logdet)));
    EXPECT_NEAR(cov.trace(), D.trace(), 1e-10 * D.trace());
    EXPECT_LT((cov.dense() - D).norm(), 1e-12 * D.norm());
    const auto o = make(d, std::min(3, d - 1), 200 + d);
    const LowRankCovariance other(o);
    const double ref = (D.ldlt().solve(dense_cov(o))).trace();
    EXPECT_NEAR(cov.trace_inverse_times(other), ref, 1e-8 * std::abs(ref));
  }
}

TEST(LowRank, SquareBasisWithoutResidual) {
  const auto c = make(4, 4, 9, false);
  const LowRankCovariance cov(c);
  const Eigen::MatrixXd D = dense_cov(c);
  EXPECT_NEAR(cov.log_det(), std::log(D.determinant()), 1e-10);
}

double dense_kl(const MixtureComponent& a, const MixtureComponent& b) {
  const Eigen::MatrixXd Da = dense_cov(a), Db = dense_cov(b);
  const Eigen::VectorXd dm = b.mu - a.mu;
  const auto lb = Db.ldlt();
  const double d = static_cast<double>(a.mu.size());
  return 0.5 * (lb.solve(Da).trace() + dm.dot(lb.solve(dm)) - d +
                std::log(Db.determinant()) - std::log(Da.determinant()));
}

TEST(LowRank, DistanceIsNormalizedKl) {
  const auto a = make(12, 3, 1), b = make(12, 2, 2);
  EXPECT_NEAR(component_distance(a, b), dense_kl(a, b) / 12.0, 1e-9);
  EXPECT_NEAR(component_distance(b, a), dense_kl(b, a) / 12.0, 1e-9);
  EXPECT_NEAR(component_distance(a, a), 0.0, 1e-12);
}

TEST(LowRank, ToyModeDistancesHaveTableMagnitudes) {
  // Three well separated 1-D modes: divergences are large, duplicates vanish.
  auto mode = [](double mu, double var) {
    MixtureComponent c;
    c.mu = Eigen::VectorXd::Constant(1, mu);
    c.W = Eigen::MatrixXd::Identity(1, 1);
    c.lambda = Eigen::VectorXd::Constant(1, 1.0 / var);
    c.lambda0 = Eigen::VectorXd::Constant(1, 1e-10);
    c.residual_enabled = false;
    return c;
  };
  const auto s1 = mode(0.84, 0.00135), s2 = mode(-0.37, 0.00590), s3 = mode(-1.74, 0.00162);
  EXPECT_GT(component_distance(s1, s2), 10.0);
  EXPECT_GT(component_distance(s1, s3), 100.0);
  EXPECT_LT(component_distance(s2, mode(-0.37, 0.00590)), 1e-8);
}

}  // namespace
}  // namespace vbmix
