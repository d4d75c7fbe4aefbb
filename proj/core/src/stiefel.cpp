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

#include "vbmix/stiefel.hpp"

#include <cmath>
#include <stdexcept>

namespace vbmix {

StiefelValue stiefel_objective_grad(const Eigen::MatrixXd& W,
                                    const Eigen::MatrixXd& gram,
                                    const Eigen::VectorXd& lambda_inv,
                                    double tau_mean) {
  const Eigen::MatrixXd hw = gram * W;
  StiefelValue out;
  out.value = -0.5 * tau_mean *
              (W.array() * hw.array()).colwise().sum().matrix().dot(lambda_inv.transpose());
  out.grad = -tau_mean * (hw * lambda_inv.asDiagonal());
  return out;
}

Eigen::MatrixXd cayley_curve(const Eigen::MatrixXd& W,
                             const Eigen::MatrixXd& descent_grad, double t) {
  const Eigen::Index p = W.cols();
  Eigen::MatrixXd u(W.rows(), 2 * p), v(W.rows(), 2 * p);
  u << descent_grad, W;
  v << W, -descent_grad;
  Eigen::MatrixXd m = 0.5 * t * (v.transpose() * u);
  m.diagonal().array() += 1.0;
  const Eigen::MatrixXd vtw = v.transpose() * W;
  return W - t * u * m.partialPivLu().solve(vtw);
}

void enforce_orthonormal(Eigen::MatrixXd& W, double tol) {
  if (W.cols() == 0) return;
  const Eigen::MatrixXd gram =
      W.transpose() * W - Eigen::MatrixXd::Identity(W.cols(), W.cols());
  if (gram.cwiseAbs().maxCoeff() <= tol) return;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(W.rows(), W.cols());
  const Eigen::MatrixXd r = qr.matrixQR().topRows(W.cols());
  for (Eigen::Index k = 0; k < W.cols(); ++k) {
    if (r(k, k) < 0.0) q.col(k) = -q.col(k);
  }
  W = q;
}

CayleyResult cayley_retract_search(const Eigen::MatrixXd& W,
                                   const StiefelObjective& objective,
                                   const CayleyOptions& opts) {
  CayleyResult res;
  res.W = W;
  StiefelValue cur = objective(res.W);
  res.value = cur.value;
  double t = -1.0;
  for (int it = 0; it < opts.max_iters; ++it) {
    const Eigen::MatrixXd gf = -cur.grad;  // gradient of -F
    const double gnorm = gf.norm();
    const Eigen::MatrixXd aw = gf - res.W * (gf.transpose() * res.W);
    const double pnorm = aw.norm();
    if (gnorm == 0.0 || pnorm <= opts.grad_tol * gnorm) {
      res.converged = true;
      break;
    }
    // dY/dt at t = 0 is -A W; slope of F along the curve.
    const double slope = (cur.grad.array() * (-aw).array()).sum();
    if (!(slope > 0.0)) {
      res.converged = true;
      break;
    }
    if (t <= 0.0) t = 1.0 / gnorm;
    bool accepted = false;
    for (int k = 0; k < opts.max_backtracks; ++k, t *= opts.shrink) {
      Eigen::MatrixXd y = cayley_curve(res.W, gf, t);
      enforce_orthonormal(y);
      StiefelValue trial = objective(y);
      if (std::isfinite(trial.value) &&
          trial.value >= cur.value + opts.armijo * t * slope) {
        res.W = std::move(y);
        cur = std::move(trial);
        accepted = true;
        break;
      }
    }
    ++res.iterations;
    if (!accepted) {
      res.converged = true;
      break;
    }
    t *= 2.0;
  }
  res.value = cur.value;
  return res;
}

Eigen::MatrixXd init_orthonormal(int d_psi, int d_theta, std::uint64_t seed) {
  if (d_theta > d_psi || d_theta < 0) {
    throw std::invalid_argument("init_orthonormal needs 0 <= d_theta <= d_psi");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(d_psi, d_theta);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d_psi, d_theta);
  for (int k = 0; k < d_theta; ++k) {
    if (qr.matrixQR()(k, k) < 0.0) q.col(k) = -q.col(k);
  }
  return q;
}

Eigen::VectorXd orthogonal_column(const Eigen::MatrixXd& W,
                                  std::mt19937_64& rng) {
  if (W.cols() >= W.rows()) {
    throw std::invalid_argument("basis already spans the space");
  }
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < 16; ++attempt) {
    Eigen::VectorXd v(W.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    for (int pass = 0; pass < 2; ++pass) v -= W * (W.transpose() * v);
    const double n = v.norm();
    if (n > 1e-8) return v / n;
  }
  throw std::runtime_error("could not draw an orthogonal direction");
}

}  // namespace vbmix
