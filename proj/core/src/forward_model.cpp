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

#include "vbmix/forward_model.hpp"

namespace vbmix {

void ForwardModel::check_input(const Eigen::VectorXd& psi) const {
  if (psi.size() != d_psi()) {
    throw std::invalid_argument("parameter vector has length " +
                                std::to_string(psi.size()) + ", expected " +
                                std::to_string(d_psi()));
  }
  if (!psi.allFinite()) {
    throw std::invalid_argument("parameter vector has non-finite entries");
  }
}

Evaluation ForwardModel::evaluate_with_jacobian(
    const Eigen::VectorXd& psi) const {
  check_input(psi);
  calls_.fetch_add(1);
  return do_evaluate_with_jacobian(psi);
}

Eigen::VectorXd ForwardModel::evaluate(const Eigen::VectorXd& psi) const {
  check_input(psi);
  calls_.fetch_add(1);
  return do_evaluate(psi);
}

Eigen::VectorXd ForwardModel::do_evaluate(const Eigen::VectorXd& psi) const {
  return do_evaluate_with_jacobian(psi).prediction;
}

}  // namespace vbmix
