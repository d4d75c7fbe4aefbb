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

#include "vbmix/lowrank.hpp"

#include <cmath>
#include <stdexcept>

namespace vbmix {

LowRankCovariance::LowRankCovariance(Eigen::MatrixXd W, Eigen::VectorXd lambda,
                                     double lambda_eta, bool residual_enabled)
    : w_(std::move(W)),
      lambda_(std::move(lambda)),
      lambda_eta_(lambda_eta),
      residual_(residual_enabled) {
  if (lambda_.size() != w_.cols()) {
    throw std::invalid_argument("precision count must match basis width");
  }
  if (!residual_ && w_.cols() != w_.rows()) {
    throw std::invalid_argument("covariance without residual needs a square basis");
  }
}

LowRankCovariance::LowRankCovariance(const MixtureComponent& c)
    : LowRankCovariance(c.W, c.lambda, c.lambda_eta, c.residual_enabled) {}

Eigen::VectorXd LowRankCovariance::apply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out = w_ * (w_.transpose() * v).cwiseQuotient(lambda_);
  if (residual_) out += v / lambda_eta_;
  return out;
}

Eigen::VectorXd LowRankCovariance::apply_inverse(const Eigen::VectorXd& v) const {
  const Eigen::VectorXd p = w_.transpose() * v;
  if (!residual_) return w_ * p.cwiseProduct(lambda_);
  const Eigen::VectorXd m = (lambda_.array() + lambda_eta_).inverse().matrix();
  return lambda_eta_ * v - lambda_eta_ * lambda_eta_ * (w_ * p.cwiseProduct(m));
}

double LowRankCovariance::log_det() const {
  if (!residual_) return -lambda_.array().log().sum();
  return (lambda_.array() + lambda_eta_).log().sum() - lambda_.array().log().sum() -
         dim() * std::log(lambda_eta_);
}

double LowRankCovariance::trace() const {
  double t = lambda_.cwiseInverse().sum();
  if (residual_) t += dim() / lambda_eta_;
  return t;
}

double LowRankCovariance::trace_inverse_times(const LowRankCovariance& other) const {
  // C = W^T W_other; W^T D_other W = C Lambda_other^-1 C^T + lambda_eta_other^-1 I.
  const Eigen::MatrixXd c = w_.transpose() * other.w_;
  Eigen::VectorXd proj = (c.array().square().matrix() * other.lambda_.cwiseInverse());
  if (other.residual_) proj.array() += 1.0 / other.lambda_eta_;
  if (!residual_) return proj.dot(lambda_);
  const Eigen::VectorXd m = (lambda_.array() + lambda_eta_).inverse().matrix();
  return lambda_eta_ * other.trace() - lambda_eta_ * lambda_eta_ * m.dot(proj);
}

Eigen::MatrixXd LowRankCovariance::dense() const {
  Eigen::MatrixXd d = w_ * lambda_.cwiseInverse().asDiagonal() * w_.transpose();
  if (residual_) d.diagonal().array() += 1.0 / lambda_eta_;
  return d;
}

double component_distance(const MixtureComponent& a, const MixtureComponent& b) {
  if (a.d_psi() != b.d_psi()) throw std::invalid_argument("dimension mismatch");
  const LowRankCovariance da(a), db(b);
  const Eigen::VectorXd diff = b.mu - a.mu;
  const double kl = 0.5 * (db.trace_inverse_times(da) +
                           diff.dot(db.apply_inverse(diff)) - a.d_psi() +
                           db.log_det() - da.log_det());
  return std::max(kl, 0.0) / a.d_psi();
}

}  // namespace vbmix
