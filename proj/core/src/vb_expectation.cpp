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

#include "vbmix/vb_expectation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vbmix {

void update_theta_precisions(MixtureComponent& c, double tau_mean) {
  if (c.d_theta() == 0) return;
  c.lambda = c.lambda0 + tau_mean * c.projected_curvature();
}

void update_eta_precision(MixtureComponent& c, double tau_mean) {
  if (!c.residual_enabled) return;
  c.lambda_eta = c.lambda0_eta + tau_mean / c.d_psi() * c.trace_gtg;
}

double expected_misfit(const MixtureComponent& c) {
  double m = c.residual_sq;
  if (c.d_theta() > 0) {
    m += (c.projected_curvature().array() / c.lambda.array()).sum();
  }
  if (c.residual_enabled) m += c.trace_gtg / c.lambda_eta;
  return m;
}

NoisePosterior update_tau(const std::vector<MixtureComponent>& components,
                          int d_y, double a0, double b0) {
  NoisePosterior n;
  n.a0 = a0;
  n.b0 = b0;
  n.a = a0 + 0.5 * d_y;
  double sum = 0.0;
  for (const auto& c : components) sum += c.weight * expected_misfit(c);
  n.b = b0 + 0.5 * sum;
  if (!(n.b > 0.0) || !std::isfinite(n.b)) {
    throw DegeneratePrecision("noise rate b is not positive");
  }
  return n;
}

namespace {

double log_det_ratio(const MixtureComponent& c) {
  double v = 0.0;
  for (int i = 0; i < c.d_theta(); ++i) v += std::log(c.lambda0(i) / c.lambda(i));
  v *= 0.5;
  if (c.residual_enabled) {
    v += 0.5 * c.d_psi() * std::log(c.lambda0_eta / c.lambda_eta);
  }
  return v;
}

double kl_diag(double lambda0, double lambda) {
  // KL(N(0, 1/lambda) || N(0, 1/lambda0))
  const double r = lambda0 / lambda;
  return 0.5 * (r - 1.0 - std::log(r));
}

}  // namespace

double component_log_weight(const MixtureComponent& c, double tau_mean) {
  return log_det_ratio(c) - 0.5 * tau_mean * c.residual_sq;
}

void update_component_weights(std::vector<MixtureComponent>& components,
                              double tau_mean) {
  if (components.empty()) return;
  double shift = -std::numeric_limits<double>::infinity();
  for (auto& c : components) {
    c.log_weight = component_log_weight(c, tau_mean);
    shift = std::max(shift, c.log_weight);
  }
  double z = 0.0;
  for (auto& c : components) {
    c.weight = std::exp(c.log_weight - shift);
    z += c.weight;
  }
  for (auto& c : components) c.weight /= z;
}

double bound_contribution(const MixtureComponent& c, double tau_mean) {
  if (!(c.weight > 0.0)) return 0.0;
  return c.weight *
         (component_log_weight(c, tau_mean) - std::log(c.weight));
}

double lower_bound(const std::vector<MixtureComponent>& components,
                   const NoisePosterior& noise,
                   std::span<const double> mu_log_prior_values) {
  const double tau = noise.mean();
  double f = noise.a * std::log(tau);
  for (const auto& c : components) f += bound_contribution(c, tau);
  for (double v : mu_log_prior_values) f += v;
  return f;
}

double elaborated_bound(const std::vector<MixtureComponent>& components,
                        const NoisePosterior& noise, int d_y) {
  const double tau = noise.mean();
  const double log_tau = noise.log_mean();
  double misfit = 0.0;
  double f = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) continue;
    misfit += c.weight * expected_misfit(c);
    double kl = 0.0;
    for (int i = 0; i < c.d_theta(); ++i) kl += kl_diag(c.lambda0(i), c.lambda(i));
    if (c.residual_enabled) kl += c.d_psi() * kl_diag(c.lambda0_eta, c.lambda_eta);
    f -= c.weight * (kl + std::log(c.weight));
  }
  f += 0.5 * d_y * log_tau - 0.5 * tau * misfit;
  // Prior on tau (normalizer omitted) and entropy of q(tau).
  f += (noise.a0 - 1.0) * log_tau - noise.b0 * tau;
  f += noise.a - std::log(noise.b) + std::lgamma(noise.a) +
       (1.0 - noise.a) * (log_tau + std::log(noise.b));
  return f;
}

double ladder_next(double lambda0_first, double lambda_prev,
                   double lambda0_prev) {
  return std::max(lambda0_first, lambda_prev - lambda0_prev);
}

Eigen::VectorXd prior_precision_ladder(double lambda0_first,
                                       const Eigen::VectorXd& lambda) {
  Eigen::VectorXd out(lambda.size() + 1);
  out(0) = lambda0_first;
  for (Eigen::Index i = 1; i <= lambda.size(); ++i) {
    out(i) = ladder_next(lambda0_first, lambda(i - 1), out(i - 1));
  }
  return out;
}

InformationGain information_gain(const Eigen::VectorXd& lambda0,
                                 const Eigen::VectorXd& lambda, int d_theta) {
  if (d_theta < 1 || d_theta > lambda.size() || lambda0.size() != lambda.size()) {
    throw std::invalid_argument("information_gain: bad dimension");
  }
  auto term = [&](int i) {
    const double r = lambda(i) / lambda0(i);
    return -std::log(r) + r - 1.0;
  };
  double total = 0.0;
  for (int i = 0; i < d_theta; ++i) total += term(i);
  const double last = term(d_theta - 1);
  InformationGain g;
  if (!(total > 0.0)) {
    g.no_information = true;
    return g;
  }
  g.gain = last / total;
  return g;
}

}  // namespace vbmix
