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

#ifndef VBMIX_VB_EXPECTATION_HPP_
#define VBMIX_VB_EXPECTATION_HPP_

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <vector>

#include "vbmix/component.hpp"

namespace vbmix {

class DegeneratePrecision : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// lambda_i = lambda0_i + <tau> ||G w_i||^2
void update_theta_precisions(MixtureComponent& c, double tau_mean);

/// lambda_eta = lambda0_eta + (<tau> / d_psi) tr(G^T G)
void update_eta_precision(MixtureComponent& c, double tau_mean);

/// Expected squared misfit of one component under q(Theta, eta | s).
double expected_misfit(const MixtureComponent& c);

/// a = a0 + d_y / 2, b = b0 + 1/2 sum_s q(s) E[misfit_s].
/// Throws DegeneratePrecision when b is not positive.
NoisePosterior update_tau(const std::vector<MixtureComponent>& components,
                          int d_y, double a0, double b0);

/// Log-weight c_s of one component.
double component_log_weight(const MixtureComponent& c, double tau_mean);

/// Sets log_weight and weight (max-shifted softmax) on every component.
void update_component_weights(std::vector<MixtureComponent>& components,
                              double tau_mean);

/// q(s)-weighted summand of the compact bound for one component.
double bound_contribution(const MixtureComponent& c, double tau_mean);

/// Compact bound sum_s q(s)[...] + a log<tau> + sum of the given log-prior
/// values of the component means.
double lower_bound(const std::vector<MixtureComponent>& components,
                   const NoisePosterior& noise,
                   std::span<const double> mu_log_prior_values = {});

/// Bound evaluated term by term from the expectations of every factor
/// (likelihood, Theta, eta, tau and s terms) without assuming optimal q.
/// Differs from lower_bound() by a constant when q is optimal.
double elaborated_bound(const std::vector<MixtureComponent>& components,
                        const NoisePosterior& noise, int d_y);

/// Prior precision for coordinate i given the previous coordinate's
/// posterior and prior precision.
double ladder_next(double lambda0_first, double lambda_prev,
                   double lambda0_prev);

/// Full ladder from posterior precisions of coordinates 1..d-1.
Eigen::VectorXd prior_precision_ladder(double lambda0_first,
                                       const Eigen::VectorXd& lambda);

struct InformationGain {
  double gain = 0.0;
  bool no_information = false;
};

/// Relative KL increment from d-1 to d reduced coordinates.
InformationGain information_gain(const Eigen::VectorXd& lambda0,
                                 const Eigen::VectorXd& lambda, int d_theta);

}  // namespace vbmix

#endif  // VBMIX_VB_EXPECTATION_HPP_
