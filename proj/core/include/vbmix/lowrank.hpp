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

#ifndef VBMIX_LOWRANK_HPP_
#define VBMIX_LOWRANK_HPP_

#include <Eigen/Dense>

#include "vbmix/component.hpp"

namespace vbmix {

/// D = W Lambda^-1 W^T + lambda_eta^-1 I with orthonormal W, handled through
/// the identities
///   D^-1  = lambda_eta I - lambda_eta^2 W (Lambda + lambda_eta I)^-1 W^T
///   |D|   = |Lambda + lambda_eta I| |Lambda^-1| lambda_eta^-d_psi.
/// Without the residual term W must be square and D^-1 = W Lambda W^T.
class LowRankCovariance {
 public:
  LowRankCovariance(Eigen::MatrixXd W, Eigen::VectorXd lambda,
                    double lambda_eta, bool residual_enabled = true);
  explicit LowRankCovariance(const MixtureComponent& c);

  int dim() const { return static_cast<int>(w_.rows()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const;
  double log_det() const;
  double trace() const;
  /// tr(this^-1 other)
  double trace_inverse_times(const LowRankCovariance& other) const;
  Eigen::MatrixXd dense() const;

 private:
  Eigen::MatrixXd w_;
  Eigen::VectorXd lambda_;
  double lambda_eta_;
  bool residual_;
};

/// KL(N(mu_a, D_a) || N(mu_b, D_b)) / d_psi.
double component_distance(const MixtureComponent& a, const MixtureComponent& b);

}  // namespace vbmix

#endif  // VBMIX_LOWRANK_HPP_
