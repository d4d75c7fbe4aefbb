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

#ifndef VBMIX_FEM_SCENARIO_HPP_
#define VBMIX_FEM_SCENARIO_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "vbmix/fem/elasticity.hpp"
#include "vbmix/forward_model.hpp"

namespace vbmix::fem {

struct Inclusion {
  enum class Shape { kCircle, kEllipse };
  Shape shape = Shape::kCircle;
  Eigen::Vector2d center{0.0, 0.0};
  Eigen::Vector2d radii{1.0, 1.0};  // circle uses radii(0)
  double modulus = 1.0;

  bool contains(const Eigen::Vector2d& x) const;
};

/// Ground-truth material layout. Later inclusions override earlier ones.
struct Scenario {
  double background = 1e4;
  std::vector<Inclusion> inclusions;
};

/// Log-modulus per element, sampled at element centroids.
Eigen::VectorXd rasterize_log_modulus(const Scenario& sc, const Mesh& mesh);

/// Elements whose centroid lies in any inclusion.
std::vector<bool> inclusion_mask(const Scenario& sc, const Mesh& mesh);

/// Displacements at the coarse problem's observed dofs, read from a fine
/// solution at coincident nodes. Fine element counts must be integer
/// multiples of the coarse ones on the same domain.
Eigen::VectorXd transfer_observations(const FemProblem& fine,
                                      const FemState& fine_state,
                                      const FemProblem& coarse);

/// Noise-free data from the fine model plus i.i.d. Gaussian noise with
/// standard deviation RMS(signal) / snr. snr = +inf adds no noise.
Observation generate_synthetic(const FemProblem& fine,
                               const Eigen::VectorXd& log_modulus_fine,
                               const FemProblem& coarse, double snr,
                               std::uint64_t seed);

}  // namespace vbmix::fem

#endif  // VBMIX_FEM_SCENARIO_HPP_
