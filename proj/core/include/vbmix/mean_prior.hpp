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

#ifndef VBMIX_MEAN_PRIOR_HPP_
#define VBMIX_MEAN_PRIOR_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <utility>

namespace vbmix {

/// Hierarchical prior on a component mean: Gaussian jump penalties on
/// neighbouring differences L mu with Gamma(a_phi, b_phi) hyperpriors on each
/// jump precision, plus an optional isotropic precision kappa.
struct MeanPrior {
  Eigen::SparseMatrix<double> L;  // d_L x d_psi, rows e_k - e_l
  double a_phi = 0.0;
  double b_phi = 0.0;
  double b_floor = 1e-12;
  double kappa = 0.0;
  int d_psi = 0;

  int jump_count() const { return static_cast<int>(L.rows()); }

  /// Posterior Gamma parameters of each jump precision given mu.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> hyperprior_update(
      const Eigen::VectorXd& mu) const;

  /// <phi_m> = a / max(b, b_floor)
  Eigen::VectorXd phi_mean(const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b) const;

  /// L^T diag(phi) L + kappa I
  Eigen::SparseMatrix<double> precision(const Eigen::VectorXd& phi) const;

  /// -1/2 mu^T P mu and its gradient for fixed phi.
  std::pair<double, Eigen::VectorXd> log_prior_grad(
      const Eigen::VectorXd& mu, const Eigen::VectorXd& phi) const;
};

/// Jump prior over horizontal and vertical neighbours of an nx x ny
/// element grid (element index j * nx + i).
MeanPrior make_grid_jump_prior(int nx, int ny, double a_phi = 0.0,
                               double b_phi = 0.0);

/// Isotropic zero-mean Gaussian prior with precision kappa.
MeanPrior make_isotropic_prior(int d_psi, double kappa);

}  // namespace vbmix

#endif  // VBMIX_MEAN_PRIOR_HPP_
