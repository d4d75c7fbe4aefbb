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

#include "vbmix/component.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace vbmix {

double NoisePosterior::log_mean() const {
  return boost::math::digamma(a) - std::log(b);
}

void MixtureComponent::set_evaluation(const Evaluation& ev,
                                      const Eigen::VectorXd& y_hat) {
  y = ev.prediction;
  G = ev.jacobian;
  residual_sq = (y_hat - y).squaredNorm();
  trace_gtg = G.squaredNorm();
  gram = Eigen::MatrixXd::Zero(G.cols(), G.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(G.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  cache_valid = true;
}

Eigen::VectorXd MixtureComponent::projected_curvature() const {
  if (W.cols() == 0) return Eigen::VectorXd();
  return (W.array() * (gram * W).array()).colwise().sum().transpose();
}

Eigen::VectorXd MixtureComponent::marginal_variance() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d_psi());
  for (int k = 0; k < d_theta(); ++k) {
    v += W.col(k).cwiseAbs2() / lambda(k);
  }
  if (residual_enabled) v.array() += 1.0 / lambda_eta;
  return v;
}

Eigen::MatrixXd MixtureComponent::dense_covariance() const {
  Eigen::MatrixXd d = W * lambda.cwiseInverse().asDiagonal() * W.transpose();
  if (residual_enabled) d.diagonal().array() += 1.0 / lambda_eta;
  return d;
}

void MixtureComponent::check_invariants(double ortho_tol) const {
  auto fail = [this](const std::string& what) {
    throw std::logic_error("component " + std::to_string(id) + ": " + what);
  };
  if (W.rows() != d_psi()) fail("basis has wrong row count");
  if (lambda.size() != d_theta() || lambda0.size() != d_theta()) {
    fail("precision vectors do not match basis width");
  }
  const Eigen::MatrixXd gram =
      W.transpose() * W - Eigen::MatrixXd::Identity(d_theta(), d_theta());
  if (d_theta() > 0 && gram.cwiseAbs().maxCoeff() > ortho_tol) {
    fail("basis is not orthonormal");
  }
  for (int i = 0; i < d_theta(); ++i) {
    if (!(lambda0(i) > 0.0)) fail("non-positive prior precision");
    if (lambda(i) < lambda0(i) * (1.0 - 1e-12)) fail("precision below prior");
  }
  if (residual_enabled) {
    if (!(lambda0_eta > 0.0)) fail("non-positive residual prior precision");
    if (lambda_eta < lambda0_eta * (1.0 - 1e-12)) {
      fail("residual precision below prior");
    }
  } else if (d_theta() != d_psi()) {
    fail("components without residual term need a square basis");
  }
}

}  // namespace vbmix
