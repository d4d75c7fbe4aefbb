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

#ifndef VBMIX_TOY_CUBIC_HPP_
#define VBMIX_TOY_CUBIC_HPP_

#include <vector>

#include "vbmix/forward_model.hpp"

namespace vbmix {

/// y(psi) = psi^3 + psi^2 - psi
double toy_evaluate(double psi);
double toy_gradient(double psi);

/// One-dimensional cubic forward model (d_psi = d_y = 1).
class ToyModel final : public ForwardModel {
 public:
  int d_psi() const override { return 1; }
  int d_y() const override { return 1; }

 protected:
  Evaluation do_evaluate_with_jacobian(
      const Eigen::VectorXd& psi) const override;
  Eigen::VectorXd do_evaluate(const Eigen::VectorXd& psi) const override;
};

struct GridDensity {
  std::vector<double> x;
  std::vector<double> density;

  /// Trapezoid integral of the density over [a, b] restricted to grid nodes.
  double mass(double a, double b) const;
  /// Interior grid points where the density has a strict local maximum.
  std::vector<double> local_maxima() const;
};

/// Unnormalized log posterior of the toy problem with tau integrated out
/// under a Gamma(a0, b0) prior and a zero-mean Gaussian prior of the given
/// precision on psi.
double toy_log_posterior_unnormalized(double psi, double y_hat,
                                      double prior_precision, double a0,
                                      double b0);

/// Trapezoid-normalized exact posterior on [lo, hi] with n points.
/// Throws std::invalid_argument when the grid truncates visible mass or when
/// the tau prior makes the density non-integrable (b0 <= 0).
GridDensity toy_posterior_grid(double y_hat, double prior_precision, double a0,
                               double b0, double lo, double hi, int n);

}  // namespace vbmix

#endif  // VBMIX_TOY_CUBIC_HPP_
