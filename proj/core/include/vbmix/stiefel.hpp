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

#ifndef VBMIX_STIEFEL_HPP_
#define VBMIX_STIEFEL_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>

namespace vbmix {

struct StiefelValue {
  double value = 0.0;
  Eigen::MatrixXd grad;  // Euclidean gradient, same shape as W
};

/// F_W = -tau/2 (W^T G^T G W) : Lambda^-1 and its Euclidean gradient
/// -tau G^T G W Lambda^-1.
StiefelValue stiefel_objective_grad(const Eigen::MatrixXd& W,
                                    const Eigen::MatrixXd& gram,  // G^T G
                                    const Eigen::VectorXd& lambda_inv,
                                    double tau_mean);

struct CayleyOptions {
  int max_iters = 30;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 40;
  double grad_tol = 1e-8;  // projected gradient relative to gradient
};

struct CayleyResult {
  Eigen::MatrixXd W;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

using StiefelObjective = std::function<StiefelValue(const Eigen::MatrixXd&)>;

/// Maximizes the objective over orthonormal W with the Cayley curvilinear
/// search of Wen and Yin, using the rank-2p form of the Cayley transform.
/// Accepted steps satisfy an Armijo condition, so the value never decreases.
CayleyResult cayley_retract_search(const Eigen::MatrixXd& W,
                                   const StiefelObjective& objective,
                                   const CayleyOptions& opts = {});

/// Point on the Cayley curve Y(t) for the gradient of the function being
/// minimized; exposed for testing the retraction.
Eigen::MatrixXd cayley_curve(const Eigen::MatrixXd& W,
                             const Eigen::MatrixXd& descent_grad, double t);

/// Orthonormal d_psi x d_theta matrix from the QR factorization of a seeded
/// Gaussian matrix.
Eigen::MatrixXd init_orthonormal(int d_psi, int d_theta, std::uint64_t seed);

/// Unit vector orthogonal to the columns of W, drawn from rng.
Eigen::VectorXd orthogonal_column(const Eigen::MatrixXd& W, std::mt19937_64& rng);

/// Re-orthonormalizes W in place when its Gram matrix drifts above tol.
void enforce_orthonormal(Eigen::MatrixXd& W, double tol = 1e-13);

}  // namespace vbmix

#endif  // VBMIX_STIEFEL_HPP_
