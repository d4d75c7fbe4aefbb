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

#include "vbmix/fem/elastography_model.hpp"

namespace vbmix::fem {

ElastographyModel::ElastographyModel(FemProblem problem)
    : problem_(std::move(problem)), d_y_(problem_.d_y()) {}

Evaluation ElastographyModel::do_evaluate_with_jacobian(
    const Eigen::VectorXd& psi) const {
  const Eigen::VectorXd moduli = psi.array().exp().matrix();
  const FemState state = solve_forward(problem_, moduli, true);
  Evaluation out;
  out.prediction = extract_observations(problem_, state);
  out.jacobian = observation_jacobian(problem_, moduli, state);
  return out;
}

Eigen::VectorXd ElastographyModel::do_evaluate(
    const Eigen::VectorXd& psi) const {
  const FemState state = solve_forward(problem_, psi.array().exp().matrix());
  return extract_observations(problem_, state);
}

}  // namespace vbmix::fem
