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

#ifndef VBMIX_MU_STEP_HPP_
#define VBMIX_MU_STEP_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

#include "vbmix/component.hpp"
#include "vbmix/forward_model.hpp"
#include "vbmix/mean_prior.hpp"

namespace vbmix {

struct GaussNewtonStep {
  Eigen::VectorXd delta;
  double relative_residual = 0.0;
  bool ridge_used = false;
};

/// Solves (tau G^T G + P) delta = tau G^T (y_hat - y) - P mu.
GaussNewtonStep gauss_newton_mu_step(const Eigen::VectorXd& mu,
                                     const Eigen::MatrixXd& G,
                                     const Eigen::VectorXd& y_at_mu,
                                     const Eigen::VectorXd& y_hat,
                                     double tau_mean,
                                     const Eigen::SparseMatrix<double>& prior_precision);

struct MuStepOptions {
  int max_steps = 50;
  double rel_tol = 1e-5;
  int max_halvings = 10;
  double step_tol = 1e-10;
};

struct MuStepResult {
  int accepted_steps = 0;
  long forward_calls = 0;
  bool ridge_used = false;
  double objective = 0.0;
  std::vector<double> objective_trace;  // F_mu after each accepted step
};

/// Objective -tau/2 ||y_hat - y(mu)||^2 + log p(mu | phi).
double mu_objective(double residual_sq, double tau_mean, double log_prior);

/// Alternates the jump-hyperparameter update with line-searched Gauss-Newton
/// steps until the relative objective change drops below rel_tol. Refreshes
/// the component's forward-model cache. Only component c is modified.
MuStepResult optimize_mu(MixtureComponent& c, const ForwardModel& model,
                         const Eigen::VectorXd& y_hat, double tau_mean,
                         const MeanPrior& prior,
                         const MuStepOptions& opts = {});

}  // namespace vbmix

#endif  // VBMIX_MU_STEP_HPP_
