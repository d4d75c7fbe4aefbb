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

#ifndef VBMIX_COMPONENT_HPP_
#define VBMIX_COMPONENT_HPP_

#include <Eigen/Dense>

#include <limits>
#include <vector>

#include "vbmix/forward_model.hpp"

namespace vbmix {

/// Gamma(a, b) posterior on the noise precision with prior Gamma(a0, b0).
struct NoisePosterior {
  double a0 = 0.0;
  double b0 = 0.0;
  double a = 0.0;
  double b = 0.0;

  double mean() const { return a / b; }
  /// <log tau> = digamma(a) - log(b)
  double log_mean() const;
};

/// One Gaussian mode: Psi = mu + W Theta + eta with Theta ~ N(0, Lambda^-1)
/// and eta ~ N(0, lambda_eta^-1 I). Without the residual term (one-dimensional
/// problems) eta is absent and W must be square.
struct MixtureComponent {
  int id = -1;
  Eigen::VectorXd mu;
  Eigen::MatrixXd W;
  Eigen::VectorXd lambda;
  Eigen::VectorXd lambda0;
  double lambda_eta = 1.0;
  double lambda0_eta = 1.0;
  bool residual_enabled = true;

  // Forward-model cache at mu.
  bool cache_valid = false;
  Eigen::VectorXd y;
  Eigen::MatrixXd G;
  double residual_sq = 0.0;  // ||y_hat - y(mu)||^2
  Eigen::MatrixXd gram;      // G^T G
  double trace_gtg = 0.0;    // ||G||_F^2

  double log_weight = 0.0;
  double weight = 1.0;

  // Jump-prior Gamma parameters, one entry per incidence row.
  Eigen::VectorXd phi_a;
  Eigen::VectorXd phi_b;

  double tau_at_mu_opt = std::numeric_limits<double>::quiet_NaN();
  long forward_calls = 0;
  int mu_iterations = 0;

  int d_psi() const { return static_cast<int>(mu.size()); }
  int d_theta() const { return static_cast<int>(W.cols()); }

  void set_evaluation(const Evaluation& ev, const Eigen::VectorXd& y_hat);
  void invalidate_cache() { cache_valid = false; }

  /// diag(W^T G^T G W)
  Eigen::VectorXd projected_curvature() const;
  /// Variance of each Psi coordinate, diag(D).
  Eigen::VectorXd marginal_variance() const;
  /// Dense covariance D; only for small d_psi.
  Eigen::MatrixXd dense_covariance() const;

  /// Throws std::logic_error when an invariant is violated.
  void check_invariants(double ortho_tol = 1e-8) const;
};

}  // namespace vbmix

#endif  // VBMIX_COMPONENT_HPP_
