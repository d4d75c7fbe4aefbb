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

#include "vbmix/mean_prior.hpp"

#include <stdexcept>
#include <vector>

namespace vbmix {

std::pair<Eigen::VectorXd, Eigen::VectorXd> MeanPrior::hyperprior_update(
    const Eigen::VectorXd& mu) const {
  const Eigen::VectorXd jumps = L * mu;
  Eigen::VectorXd a = Eigen::VectorXd::Constant(jumps.size(), a_phi + 0.5);
  Eigen::VectorXd b = (b_phi + 0.5 * jumps.array().square()).matrix();
  return {a, b};
}

Eigen::VectorXd MeanPrior::phi_mean(const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& b) const {
  return (a.array() / b.array().max(b_floor)).matrix();
}

Eigen::SparseMatrix<double> MeanPrior::precision(
    const Eigen::VectorXd& phi) const {
  Eigen::SparseMatrix<double> p(d_psi, d_psi);
  if (L.rows() > 0) p = L.transpose() * phi.asDiagonal() * L;
  if (kappa > 0.0) {
    Eigen::SparseMatrix<double> id(d_psi, d_psi);
    id.setIdentity();
    p += kappa * id;
  }
  return p;
}

std::pair<double, Eigen::VectorXd> MeanPrior::log_prior_grad(
    const Eigen::VectorXd& mu, const Eigen::VectorXd& phi) const {
  Eigen::VectorXd grad = -kappa * mu;
  double value = -0.5 * kappa * mu.squaredNorm();
  if (L.rows() > 0) {
    const Eigen::VectorXd jumps = L * mu;
    const Eigen::VectorXd weighted = phi.cwiseProduct(jumps);
    value -= 0.5 * jumps.dot(weighted);
    grad -= L.transpose() * weighted;
  }
  return {value, grad};
}

MeanPrior make_grid_jump_prior(int nx, int ny, double a_phi, double b_phi) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid must be non-empty");
  std::vector<Eigen::Triplet<double>> trip;
  int row = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i, ++row) {
      trip.emplace_back(row, j * nx + i, 1.0);
      trip.emplace_back(row, j * nx + i + 1, -1.0);
    }
  }
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i < nx; ++i, ++row) {
      trip.emplace_back(row, j * nx + i, 1.0);
      trip.emplace_back(row, (j + 1) * nx + i, -1.0);
    }
  }
  MeanPrior p;
  p.d_psi = nx * ny;
  p.L.resize(row, p.d_psi);
  p.L.setFromTriplets(trip.begin(), trip.end());
  p.a_phi = a_phi;
  p.b_phi = b_phi;
  return p;
}

MeanPrior make_isotropic_prior(int d_psi, double kappa) {
  MeanPrior p;
  p.d_psi = d_psi;
  p.L.resize(0, d_psi);
  p.kappa = kappa;
  return p;
}

}  // namespace vbmix
