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

#include "vbmix/toy_cubic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vbmix {

double toy_evaluate(double psi) { return psi * psi * psi + psi * psi - psi; }

double toy_gradient(double psi) { return 3.0 * psi * psi + 2.0 * psi - 1.0; }

Evaluation ToyModel::do_evaluate_with_jacobian(
    const Eigen::VectorXd& psi) const {
  Evaluation out;
  out.prediction = Eigen::VectorXd::Constant(1, toy_evaluate(psi[0]));
  out.jacobian = Eigen::MatrixXd::Constant(1, 1, toy_gradient(psi[0]));
  return out;
}

Eigen::VectorXd ToyModel::do_evaluate(const Eigen::VectorXd& psi) const {
  return Eigen::VectorXd::Constant(1, toy_evaluate(psi[0]));
}

double GridDensity::mass(double a, double b) const {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (x[i] >= a && x[i + 1] <= b) {
      total += 0.5 * (density[i] + density[i + 1]) * (x[i + 1] - x[i]);
    }
  }
  return total;
}

std::vector<double> GridDensity::local_maxima() const {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (density[i] > density[i - 1] && density[i] >= density[i + 1]) {
      out.push_back(x[i]);
    }
  }
  return out;
}

double toy_log_posterior_unnormalized(double psi, double y_hat,
                                      double prior_precision, double a0,
                                      double b0) {
  const double r = y_hat - toy_evaluate(psi);
  return -(a0 + 0.5) * std::log(b0 + 0.5 * r * r) -
         0.5 * prior_precision * psi * psi;
}

GridDensity toy_posterior_grid(double y_hat, double prior_precision, double a0,
                               double b0, double lo, double hi, int n) {
  if (n < 1000) throw std::invalid_argument("grid needs at least 1000 points");
  if (!(hi > lo)) throw std::invalid_argument("grid bounds must satisfy lo < hi");
  if (!(b0 > 0.0) || a0 < 0.0) {
    throw std::invalid_argument(
        "noise prior with b0 <= 0 gives a non-integrable posterior");
  }
  GridDensity g;
  g.x.resize(n);
  g.density.resize(n);
  std::vector<double> logp(n);
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) {
    g.x[i] = lo + h * i;
    logp[i] = toy_log_posterior_unnormalized(g.x[i], y_hat, prior_precision,
                                             a0, b0);
  }
  const double shift = *std::max_element(logp.begin(), logp.end());
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    g.density[i] = std::exp(logp[i] - shift);
    z += (i == 0 || i == n - 1 ? 0.5 : 1.0) * g.density[i];
  }
  z *= h;
  for (double& d : g.density) d /= z;
  // Mass scale at the boundaries: density times the grid width.
  const double edge = std::max(g.density.front(), g.density.back()) * (hi - lo);
  if (edge > 1e-6) {
    throw std::invalid_argument("grid too narrow: posterior mass at endpoints");
  }
  return g;
}

}  // namespace vbmix
