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

#ifndef VBMIX_POSTERIOR_HPP_
#define VBMIX_POSTERIOR_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "vbmix/component.hpp"

namespace vbmix {

/// q(Psi) = sum_s q(s) N(mu_s, D_s), D_s = W_s Lambda_s^-1 W_s^T + lambda_eta^-1 I.
struct MixturePosterior {
  std::vector<MixtureComponent> components;

  int d_psi() const;
  /// Throws std::logic_error unless the weights sum to one and every
  /// component satisfies its invariants.
  void validate() const;
};

struct MixtureMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // diagonal of the mixture covariance
};

MixtureMoments mixture_moments(const MixturePosterior& post);

/// Dense mixture covariance; refused above 512 dimensions.
Eigen::MatrixXd mixture_covariance_dense(const MixturePosterior& post);

/// Covariance-vector product without forming the matrix.
Eigen::VectorXd mixture_covariance_apply(const MixturePosterior& post,
                                         const Eigen::VectorXd& v);

double marginal_density(const MixturePosterior& post, int index, double value);
double marginal_cdf(const MixturePosterior& post, int index, double value);

/// Exact marginal quantile by bisection on the mixture CDF.
double marginal_quantile(const MixturePosterior& post, int index, double q,
                         double tol = 1e-10);

/// Rows: elements in `indices`; columns: the requested quantiles.
Eigen::MatrixXd credible_cut(const MixturePosterior& post,
                             const std::vector<int>& indices,
                             const std::vector<double>& quantiles);

/// log q(Psi) of the full mixture.
double log_density(const MixturePosterior& post, const Eigen::VectorXd& psi);

struct PosteriorSamples {
  Eigen::MatrixXd psi;            // n x d_psi
  std::vector<int> component;     // index of the drawing component
};

PosteriorSamples sample_psi(const MixturePosterior& post, int n,
                            std::uint64_t seed);

}  // namespace vbmix

#endif  // VBMIX_POSTERIOR_HPP_
