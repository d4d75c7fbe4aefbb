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

#ifndef VBMIX_FEM_ELASTOGRAPHY_MODEL_HPP_
#define VBMIX_FEM_ELASTOGRAPHY_MODEL_HPP_

#include "vbmix/fem/elasticity.hpp"
#include "vbmix/forward_model.hpp"

namespace vbmix::fem {

/// Forward model mapping per-element log Young's modulus to observed
/// displacements.
class ElastographyModel final : public ForwardModel {
 public:
  explicit ElastographyModel(FemProblem problem);

  int d_psi() const override { return problem_.mesh.element_count(); }
  int d_y() const override { return d_y_; }
  const FemProblem& problem() const { return problem_; }

 protected:
  Evaluation do_evaluate_with_jacobian(
      const Eigen::VectorXd& psi) const override;
  Eigen::VectorXd do_evaluate(const Eigen::VectorXd& psi) const override;

 private:
  FemProblem problem_;
  int d_y_;
};

}  // namespace vbmix::fem

#endif  // VBMIX_FEM_ELASTOGRAPHY_MODEL_HPP_
