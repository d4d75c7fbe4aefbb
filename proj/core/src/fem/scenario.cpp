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

#include "vbmix/fem/scenario.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace vbmix::fem {

bool Inclusion::contains(const Eigen::Vector2d& x) const {
  const Eigen::Vector2d d = x - center;
  if (shape == Shape::kCircle) return d.squaredNorm() <= radii(0) * radii(0);
  const double a = d(0) / radii(0), b = d(1) / radii(1);
  return a * a + b * b <= 1.0;
}

Eigen::VectorXd rasterize_log_modulus(const Scenario& sc, const Mesh& mesh) {
  if (!(sc.background > 0.0)) throw std::invalid_argument("background modulus must be positive");
  Eigen::VectorXd out(mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    double value = sc.background;
    const Eigen::Vector2d c = mesh.centroid(e);
    for (const auto& inc : sc.inclusions) {
      if (inc.contains(c)) value = inc.modulus;
    }
    out(e) = std::log(value);
  }
  return out;
}

std::vector<bool> inclusion_mask(const Scenario& sc, const Mesh& mesh) {
  std::vector<bool> mask(mesh.element_count(), false);
  for (int e = 0; e < mesh.element_count(); ++e) {
    for (const auto& inc : sc.inclusions) {
      if (inc.contains(mesh.centroid(e))) mask[e] = true;
    }
  }
  return mask;
}

Eigen::VectorXd transfer_observations(const FemProblem& fine,
                                      const FemState& fine_state,
                                      const FemProblem& coarse) {
  const Mesh& f = fine.mesh;
  const Mesh& c = coarse.mesh;
  if (f.nx % c.nx != 0 || f.ny % c.ny != 0 ||
      std::abs(f.lx - c.lx) > 1e-12 * c.lx || std::abs(f.ly - c.ly) > 1e-12 * c.ly) {
    throw std::invalid_argument("fine mesh must refine the coarse mesh by integer factors");
  }
  const int rx = f.nx / c.nx, ry = f.ny / c.ny;
  std::vector<int> dofs;
  for (int j = 1; j <= c.ny; ++j) {
    for (int i = 0; i <= c.nx; ++i) {
      if (coarse.half_observations && (i + j) % 2 != 0) continue;
      const int node = f.node_index(i * rx, j * ry);
      dofs.push_back(fine.free_dof(node, 0));
      dofs.push_back(fine.free_dof(node, 1));
    }
  }
  Eigen::VectorXd y(dofs.size());
  for (std::size_t k = 0; k < dofs.size(); ++k) y(k) = fine_state.u(dofs[k]);
  return y;
}

Observation generate_synthetic(const FemProblem& fine,
                               const Eigen::VectorXd& log_modulus_fine,
                               const FemProblem& coarse, double snr,
                               std::uint64_t seed) {
  if (!(snr > 0.0)) throw std::invalid_argument("snr must be positive");
  const FemState state =
      solve_forward(fine, log_modulus_fine.array().exp().matrix());
  Observation obs;
  obs.values = transfer_observations(fine, state, coarse);
  if (std::isinf(snr)) return obs;
  const double rms = std::sqrt(obs.values.squaredNorm() / obs.values.size());
  const double sigma = rms / snr;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (Eigen::Index i = 0; i < obs.values.size(); ++i) obs.values(i) += normal(rng);
  obs.true_noise_precision = 1.0 / (sigma * sigma);
  return obs;
}

}  // namespace vbmix::fem
