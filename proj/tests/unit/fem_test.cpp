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

#include "vbmix/fem/elasticity.hpp"
#include "vbmix/fem/elastography_model.hpp"
#include "vbmix/fem/material.hpp"
#include "vbmix/fem/mesh.hpp"
#include "vbmix/fem/scenario.hpp"
#include "fem_oracles.hpp"

namespace vbmix::fem {
namespace {

using namespace oracle;

TEST(Material, LameConstantsAndValidation) {
  const Lame l = lame_constants(1e4, 0.3);
  EXPECT_NEAR(l.mu, 1e4 / 2.6, 1e-9);
  EXPECT_NEAR(l.lambda, 1e4 * 0.3 / (1.3 * 0.4), 1e-9);
  EXPECT_THROW(lame_constants(1e4, 0.5), std::invalid_argument);
  EXPECT_THROW(lame_constants(-1.0, 0.3), std::invalid_argument);
}

TEST(Material, StressIsEnergyDerivative) {
  Eigen::Matrix2d green;
  green << 0.013, -0.004, -0.004, 0.021;
  EXPECT_LT(stress_fd_error(green, 2.5e4, 0.3), 1e-6);
  green << 0.2, 0.05, 0.05, -0.1;
  EXPECT_LT(stress_fd_error(green, 1e4, 0.3), 1e-6);
}

TEST(Material, TangentIsStressDerivative) {
  Eigen::Matrix2d green;
  green << 0.01, 0.002, 0.002, -0.005;
  const Eigen::Matrix3d C = material_tangent(1e4, 0.3);
  auto voigt = [](const Eigen::Matrix2d& s) { return Eigen::Vector3d(s(0, 0), s(1, 1), s(0, 1)); };
  // Engineering shear: a unit gamma perturbs E12 and E21 by one half each.
  const double h = 1e-6;
  for (int k = 0; k < 3; ++k) {
    Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
    if (k < 2) d(k, k) = h; else d(0, 1) = d(1, 0) = 0.5 * h;
    const Eigen::Vector3d fd =
        (voigt(pk2_stress(green + d, 1e4, 0.3)) - voigt(pk2_stress(green - d, 1e4, 0.3))) /
        (2 * h);
    EXPECT_LT((fd - C.col(k)).norm(), 1e-6 * C.norm());
  }
}

TEST(Mesh, StructuredLayout) {
  const Mesh m = make_structured_mesh(3, 2, 6.0, 4.0);
  EXPECT_EQ(m.node_count(), 12);
  EXPECT_EQ(m.element_count(), 6);
  EXPECT_NEAR(m.element_area(4), 4.0, 1e-14);
  EXPECT_TRUE(m.centroid(4).isApprox(Eigen::Vector2d(3.0, 3.0)));
}

TEST(Elasticity, ObservationCounts) {
  FemProblem p = square_problem(50);
  EXPECT_EQ(p.d_y(), 2 * 51 * 50);
  p.half_observations = true;
  EXPECT_EQ(p.d_y(), 2550);
}

TEST(Elasticity, InternalForceIsEnergyGradient) {
  const FemProblem p = square_problem(3);
  const Eigen::VectorXd E = random_log_moduli(9, 3).array().exp();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 0.2);
  Eigen::VectorXd u(p.free_dof_count());
  for (int i = 0; i < u.size(); ++i) u(i) = normal(rng);
  const Eigen::VectorXd r = internal_force(p, E, u);
  Eigen::VectorXd fd(u.size());
  for (int i = 0; i < u.size(); ++i) {
    const double h = 1e-6;
    Eigen::VectorXd up = u, um = u;
    up(i) += h;
    um(i) -= h;
    fd(i) = (total_strain_energy(p, E, up) - total_strain_energy(p, E, um)) / (2 * h);
  }
  EXPECT_LT((fd - r).norm() / r.norm(), 1e-7);
}

TEST(Elasticity, TangentIsSymmetricForceDerivative) {
  const FemProblem p = square_problem(3);
  const Eigen::VectorXd E = random_log_moduli(9, 4).array().exp();
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.0, 0.2);
  Eigen::VectorXd u(p.free_dof_count());
  for (int i = 0; i < u.size(); ++i) u(i) = normal(rng);
  const Eigen::MatrixXd K = Eigen::MatrixXd(tangent_matrix(p, E, u));
  EXPECT_LT((K - K.transpose()).norm(), 1e-12 * K.norm());
  Eigen::MatrixXd fd(u.size(), u.size());
  for (int i = 0; i < u.size(); ++i) {
    const double h = 1e-6;
    Eigen::VectorXd up = u, um = u;
    up(i) += h;
    um(i) -= h;
    fd.col(i) = (internal_force(p, E, up) - internal_force(p, E, um)) / (2 * h);
  }
  EXPECT_LT((fd - K).norm() / K.norm(), 1e-7);
}

TEST(Elasticity, SmallLoadMatchesLinearOracle) {
  FemProblem p = square_problem(4);
  p.traction = {0.0, -1e-3};
  const Eigen::VectorXd E = random_log_moduli(16, 7).array().exp();
  const FemState s = solve_forward(p, E);
  const Eigen::VectorXd lin = linear_oracle(p, E);
  EXPECT_LT((s.u - lin).norm() / lin.norm(), 1e-3);
}

TEST(Elasticity, NewtonConvergesQuadratically) {
  const FemProblem p = square_problem(6);
  const Eigen::VectorXd E = Eigen::VectorXd::Constant(36, 1e4);
  const FemState s = solve_forward(p, E);
  ASSERT_GE(s.history.size(), 3u);
  EXPECT_LT(s.residual_norm, p.newton_tol * external_force(p).norm() * 10);
  // Contraction ratio shrinks in the asymptotic regime.
  const auto& h = s.history;
  const std::size_t n = h.size();
  if (n >= 4 && h[n - 2] > 0 && h[n - 3] > 0) {
    EXPECT_LT(h[n - 2] / h[n - 3], 0.1);
  }
}

TEST(Elasticity, HomogeneousSolutionIsMirrorSymmetric) {
  const FemProblem p = square_problem(6);
  const FemState s = solve_forward(p, Eigen::VectorXd::Constant(36, 1e4));
  const Eigen::VectorXd u = nodal_displacements(p, s);
  const Mesh& m = p.mesh;
  double worst = 0.0;
  for (int j = 0; j <= m.ny; ++j) {
    for (int i = 0; i <= m.nx; ++i) {
      const int a = m.node_index(i, j), b = m.node_index(m.nx - i, j);
      worst = std::max(worst, std::abs(u(2 * a) + u(2 * b)));
      worst = std::max(worst, std::abs(u(2 * a + 1) - u(2 * b + 1)));
    }
  }
  EXPECT_LT(worst, 1e-10 * u.cwiseAbs().maxCoeff());
}

TEST(Elasticity, SolverFailureCarriesDiagnostics) {
  FemProblem p = square_problem(3);
  p.max_newton_iterations = 1;
  p.fallback_load_steps = 1;
  try {
    solve_forward(p, Eigen::VectorXd::Constant(9, 1e4));
    FAIL() << "expected SolverFailure";
  } catch (const SolverFailure& e) {
    EXPECT_GT(e.residual(), 0.0);
    EXPECT_FALSE(e.history().empty());
  }
}

TEST(ElastographyModel, JacobianMatchesFiniteDifferences4x4) {
  EXPECT_LT(jacobian_fd_error(4), 1e-4);
}

TEST(ElastographyModel, JacobianMatchesFiniteDifferences8x8) {
  EXPECT_LT(jacobian_fd_error(8), 1e-4);
}

TEST(ElastographyModel, HalfObservationJacobianUsesAdjointPath) {
  // More parameters than observations switches to adjoint solves.
  FemProblem p = square_problem(6);
  p.half_observations = true;
  ElastographyModel model(p);
  ASSERT_GT(model.d_psi(), 0);
  const Eigen::VectorXd psi = random_log_moduli(36, 2);
  const Evaluation ev = model.evaluate_with_jacobian(psi);
  const double h = 1e-5;
  Eigen::VectorXd pp = psi, pm = psi;
  pp(17) += h;
  pm(17) -= h;
  const Eigen::VectorXd fd = (model.evaluate(pp) - model.evaluate(pm)) / (2 * h);
  EXPECT_LT((fd - ev.jacobian.col(17)).norm(), 1e-4 * ev.jacobian.col(17).norm());
}

TEST(Scenario, RasterizeAndTransfer) {
  Scenario sc;
  sc.background = 1e4;
  Inclusion inc;
  inc.center = {25.0, 30.0};
  inc.radii = {8.0, 8.0};
  inc.modulus = 5e4;
  sc.inclusions.push_back(inc);
  const FemProblem coarse = square_problem(10);
  const Eigen::VectorXd lm = rasterize_log_modulus(sc, coarse.mesh);
  const auto mask = inclusion_mask(sc, coarse.mesh);
  int inside = 0;
  for (int e = 0; e < lm.size(); ++e) {
    EXPECT_DOUBLE_EQ(lm(e), std::log(mask[e] ? 5e4 : 1e4));
    inside += mask[e];
  }
  EXPECT_GT(inside, 0);
  EXPECT_LT(inside, 20);

  const FemProblem fine = square_problem(20);
  const Eigen::VectorXd lf = rasterize_log_modulus(sc, fine.mesh);
  const FemState fs = solve_forward(fine, lf.array().exp().matrix());
  const Eigen::VectorXd y = transfer_observations(fine, fs, coarse);
  const Eigen::VectorXd uf = nodal_displacements(fine, fs);
  ASSERT_EQ(y.size(), coarse.d_y());
  // Coarse node (i, j) coincides with fine node (2i, 2j).
  const int cn = coarse.mesh.node_index(3, 7), fn = fine.mesh.node_index(6, 14);
  const auto obs = coarse.observed_dofs();
  for (std::size_t k = 0; k < obs.size(); ++k) {
    if (obs[k] == coarse.free_dof(cn, 1)) EXPECT_DOUBLE_EQ(y(k), uf(2 * fn + 1));
  }
}

TEST(Scenario, SyntheticNoiseLevel) {
  const FemProblem fine = square_problem(8), coarse = square_problem(4);
  const Eigen::VectorXd lf = Eigen::VectorXd::Constant(64, std::log(1e4));
  const Observation clean = generate_synthetic(fine, lf, coarse,
                                               std::numeric_limits<double>::infinity(), 1);
  EXPECT_FALSE(clean.true_noise_precision.has_value());
  const Observation noisy = generate_synthetic(fine, lf, coarse, 100.0, 1);
  ASSERT_TRUE(noisy.true_noise_precision.has_value());
  const double rms = std::sqrt(clean.values.squaredNorm() / clean.values.size());
  EXPECT_NEAR(*noisy.true_noise_precision, 1.0 / std::pow(rms / 100.0, 2), 1e-9 / std::pow(rms / 100.0, 2));
  const Observation again = generate_synthetic(fine, lf, coarse, 100.0, 1);
  EXPECT_EQ(again.values, noisy.values);
}

}  // namespace
}  // namespace vbmix::fem
