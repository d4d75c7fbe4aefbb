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

#include "vbmix/mu_step.hpp"

#include <cmath>
#include <stdexcept>

namespace vbmix {

GaussNewtonStep gauss_newton_mu_step(
    const Eigen::VectorXd& mu, const Eigen::MatrixXd& G,
    const Eigen::VectorXd& y_at_mu, const Eigen::VectorXd& y_hat,
    double tau_mean, const Eigen::SparseMatrix<double>& prior_precision) {
  const Eigen::Index n = mu.size();
  Eigen::MatrixXd a(n, n);
  a.setZero();
  a.selfadjointView<Eigen::Lower>().rankUpdate(G.transpose(), tau_mean);
  a.triangularView<Eigen::Upper>() = a.transpose();
  a += Eigen::MatrixXd(prior_precision);
  const Eigen::VectorXd rhs =
      tau_mean * (G.transpose() * (y_hat - y_at_mu)) - prior_precision * mu;

  GaussNewtonStep out;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    double ridge = 1e-8 * a.diagonal().mean();
    if (!(ridge > 0.0)) ridge = 1e-8;
    for (int k = 0; k < 12 && llt.info() != Eigen::Success; ++k, ridge *= 10) {
      Eigen::MatrixXd reg = a;
      reg.diagonal().array() += ridge;
      llt.compute(reg);
    }
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("Gauss-Newton system could not be factorized");
    }
    out.ridge_used = true;
  }
  out.delta = llt.solve(rhs);
  for (int k = 0; k < 2; ++k) out.delta += llt.solve(rhs - a * out.delta);
  const double scale = rhs.norm();
  out.relative_residual =
      scale > 0.0 ? (rhs - a * out.delta).norm() / scale : 0.0;
  return out;
}

double mu_objective(double residual_sq, double tau_mean, double log_prior) {
  return -0.5 * tau_mean * residual_sq + log_prior;
}

MuStepResult optimize_mu(MixtureComponent& c, const ForwardModel& model,
                         const Eigen::VectorXd& y_hat, double tau_mean,
                         const MeanPrior& prior, const MuStepOptions& opts) {
  MuStepResult res;
  if (!c.cache_valid) {
    c.set_evaluation(model.evaluate_with_jacobian(c.mu), y_hat);
    ++res.forward_calls;
  }
  for (int step = 0; step < opts.max_steps; ++step) {
    auto [pa, pb] = prior.hyperprior_update(c.mu);
    c.phi_a = std::move(pa);
    c.phi_b = std::move(pb);
    const Eigen::VectorXd phi = prior.phi_mean(c.phi_a, c.phi_b);
    const Eigen::SparseMatrix<double> p = prior.precision(phi);
    const double f0 =
        mu_objective(c.residual_sq, tau_mean, prior.log_prior_grad(c.mu, phi).first);
    res.objective = f0;

    const GaussNewtonStep gn =
        gauss_newton_mu_step(c.mu, c.G, c.y, y_hat, tau_mean, p);
    res.ridge_used = res.ridge_used || gn.ridge_used;
    if (gn.delta.norm() <= opts.step_tol * (1.0 + c.mu.norm())) break;

    double t = 1.0;
    bool accepted = false;
    double f1 = f0;
    for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
      const Eigen::VectorXd trial = c.mu + t * gn.delta;
      Evaluation ev;
      try {
        ++res.forward_calls;
        ev = model.evaluate_with_jacobian(trial);
      } catch (const SolverFailure&) {
        continue;
      }
      const double rsq = (y_hat - ev.prediction).squaredNorm();
      f1 = mu_objective(rsq, tau_mean, prior.log_prior_grad(trial, phi).first);
      if (std::isfinite(f1) && f1 >= f0) {
        c.mu = trial;
        c.set_evaluation(ev, y_hat);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    ++res.accepted_steps;
    res.objective = f1;
    res.objective_trace.push_back(f1);
    const double rel = std::abs(f1 - f0) / std::max(std::abs(f1), 1.0);
    if (rel < opts.rel_tol) break;
  }
  c.forward_calls += res.forward_calls;
  c.mu_iterations += res.accepted_steps;
  c.tau_at_mu_opt = tau_mean;
  return res;
}

}  // namespace vbmix
