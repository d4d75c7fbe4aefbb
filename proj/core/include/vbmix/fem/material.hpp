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

#ifndef VBMIX_FEM_MATERIAL_HPP_
#define VBMIX_FEM_MATERIAL_HPP_

#include <Eigen/Dense>

namespace vbmix::fem {

struct Lame {
  double lambda;
  double mu;
};

/// Lame constants from Young's modulus and Poisson ratio.
Lame lame_constants(double young, double nu);

/// St. Venant-Kirchhoff strain energy density for a plane-strain Green strain.
double strain_energy(const Eigen::Matrix2d& green, double young, double nu);

/// Second Piola-Kirchhoff stress S = lambda tr(E) I + 2 mu E.
Eigen::Matrix2d pk2_stress(const Eigen::Matrix2d& green, double young,
                           double nu);

/// Plane-strain material tangent in Voigt order (11, 22, 12) with
/// engineering shear strain.
Eigen::Matrix3d material_tangent(double young, double nu);

}  // namespace vbmix::fem

#endif  // VBMIX_FEM_MATERIAL_HPP_
