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

#ifndef VBMIX_FEM_ELASTICITY_HPP_
#define VBMIX_FEM_ELASTICITY_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <vector>

#include "vbmix/fem/mesh.hpp"

namespace vbmix::fem {

/// Plane-strain St. Venant-Kirchhoff problem: bottom edge clamped, uniform
/// dead-load traction on the top edge, traction-free sides.
struct FemProblem {
  Mesh mesh;
  double nu = 0.3;
  Eigen::Vector2d traction{0.0, -100.0};  // per unit length of the top edge
  bool half_observations = false;         // checkerboard subset of free nodes
  double newton_tol = 1e-10;              // relative to the external load
  int max_newton_iterations = 30;
  int fallback_load_steps = 4;

  /// Degrees of freedom not on the clamped bottom edge, two per node.
  int free_dof_count() const { return 2 * (mesh.node_count() - (mesh.nx + 1)); }
  /// Free-dof index of (node, component), or -1 for clamped nodes.
  int free_dof(int node, int comp) const;
  /// Free-dof indices that are observed, node-major, x then y.
  std::vector<int> observed_dofs() const;
  int d_y() const;
};

using SparseMatrix = Eigen::SparseMatrix<double>;
using TangentFactorization = Eigen::SimplicialLDLT<SparseMatrix>;

struct FemState {
  Eigen::VectorXd u;  // free-dof displacements
  double residual_norm = 0.0;
  int iterations = 0;  // residual evaluations in the final load step
  int load_steps = 1;
  std::vector<double> history;  // residual norms of the final load step
  std::shared_ptr<TangentFactorization> factorization;  // at the solution
};

/// Element internal force (8) and optionally tangent (8x8) for a unit
/// modulus; both scale linearly with the element modulus.
void element_response(const FemProblem& p, int e,
                      const Eigen::Matrix<double, 8, 1>& ue,
                      Eigen::Matrix<double, 8, 1>* force,
                      Eigen::Matrix<double, 8, 8>* tangent);

Eigen::Matrix<double, 8, 1> gather_element(const FemProblem& p, int e,
                                           const Eigen::VectorXd& u);

/// Total strain energy at free-dof displacements u.
double total_strain_energy(const FemProblem& p, const Eigen::VectorXd& moduli,
                           const Eigen::VectorXd& u);
Eigen::VectorXd internal_force(const FemProblem& p,
                               const Eigen::VectorXd& moduli,
                               const Eigen::VectorXd& u);
SparseMatrix tangent_matrix(const FemProblem& p, const Eigen::VectorXd& moduli,
                            const Eigen::VectorXd& u);
Eigen::VectorXd external_force(const FemProblem& p);

/// Newton solve with full tangent. Falls back to incremental loading when
/// the single-step solve fails; throws SolverFailure if that fails too.
FemState solve_forward(const FemProblem& p, const Eigen::VectorXd& moduli,
                       bool keep_factorization = false);

Eigen::VectorXd extract_observations(const FemProblem& p, const FemState& s);

/// d y / d log(modulus) at a converged state, reusing one factorization of
/// the tangent at the solution.
Eigen::MatrixXd observation_jacobian(const FemProblem& p,
                                     const Eigen::VectorXd& moduli,
                                     const FemState& s);

/// Full nodal displacement field (2 per node, clamped nodes zero).
Eigen::VectorXd nodal_displacements(const FemProblem& p, const FemState& s);

}  // namespace vbmix::fem

#endif  // VBMIX_FEM_ELASTICITY_HPP_
