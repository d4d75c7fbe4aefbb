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

#include "vbmix/fem/material.hpp"

#include <stdexcept>

namespace vbmix::fem {

Lame lame_constants(double young, double nu) {
  if (!(nu > 0.0 && nu < 0.5)) {
    throw std::invalid_argument("Poisson ratio must lie in (0, 0.5)");
  }
  if (!(young > 0.0)) throw std::invalid_argument("modulus must be positive");
  return {nu * young / ((1.0 + nu) * (1.0 - 2.0 * nu)),
          young / (2.0 * (1.0 + nu))};
}

double strain_energy(const Eigen::Matrix2d& green, double young, double nu) {
  const Lame l = lame_constants(young, nu);
  const double tr = green.trace();
  return 0.5 * l.lambda * tr * tr + l.mu * (green.array() * green.array()).sum();
}

Eigen::Matrix2d pk2_stress(const Eigen::Matrix2d& green, double young,
                           double nu) {
  const Lame l = lame_constants(young, nu);
  return l.lambda * green.trace() * Eigen::Matrix2d::Identity() +
         2.0 * l.mu * green;
}

Eigen::Matrix3d material_tangent(double young, double nu) {
  const Lame l = lame_constants(young, nu);
  Eigen::Matrix3d d;
  d << l.lambda + 2.0 * l.mu, l.lambda, 0.0,
       l.lambda, l.lambda + 2.0 * l.mu, 0.0,
       0.0, 0.0, l.mu;
  return d;
}

}  // namespace vbmix::fem
