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

#include "vbmix/fem/elasticity.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "vbmix/forward_model.hpp"
#include "vbmix/fem/material.hpp"

namespace vbmix::fem {
namespace {

constexpr double kXi[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};

struct GaussTable {
  // Reference shape-function derivatives at the 2x2 Gauss points.
  Eigen::Matrix<double, 4, 2> dn_dxi[4];
  GaussTable() {
    const double g = 1.0 / std::sqrt(3.0);
    const double pts[4][2] = {{-g, -g}, {g, -g}, {g, g}, {-g, g}};
    for (int q = 0; q < 4; ++q) {
      for (int a = 0; a < 4; ++a) {
        dn_dxi[q](a, 0) = 0.25 * kXi[a][0] * (1.0 + kXi[a][1] * pts[q][1]);
        dn_dxi[q](a, 1) = 0.25 * kXi[a][1] * (1.0 + kXi[a][0] * pts[q][0]);
      }
    }
  }
};

const GaussTable& gauss() {
  static const GaussTable table;
  return table;
}

void assemble(const FemProblem& p, const Eigen::VectorXd& moduli,
              const Eigen::VectorXd& u, Eigen::VectorXd* force,
              SparseMatrix* tangent) {
  const int n = p.free_dof_count();
  if (force) force->setZero(n);
  std::vector<Eigen::Triplet<double>> trip;
  if (tangent) trip.reserve(64 * p.mesh.element_count());
  Eigen::Matrix<double, 8, 1> fe;
  Eigen::Matrix<double, 8, 8> ke;
  for (int e = 0; e < p.mesh.element_count(); ++e) {
    const auto ue = gather_element(p, e, u);
    element_response(p, e, ue, force ? &fe : nullptr, tangent ? &ke : nullptr);
    int dofs[8];
    for (int a = 0; a < 4; ++a) {
      dofs[2 * a] = p.free_dof(p.mesh.elements[e][a], 0);
      dofs[2 * a + 1] = p.free_dof(p.mesh.elements[e][a], 1);
    }
    for (int i = 0; i < 8; ++i) {
      if (dofs[i] < 0) continue;
      if (force) (*force)(dofs[i]) += moduli(e) * fe(i);
      if (tangent) {
        for (int j = 0; j < 8; ++j) {
          if (dofs[j] >= 0) trip.emplace_back(dofs[i], dofs[j], moduli(e) * ke(i, j));
        }
      }
    }
  }
  if (tangent) {
    tangent->resize(n, n);
    tangent->setFromTriplets(trip.begin(), trip.end());
  }
}

void check_moduli(const FemProblem& p, const Eigen::VectorXd& moduli) {
  if (moduli.size() != p.mesh.element_count()) {
    throw std::invalid_argument("modulus field has wrong length");
  }
  if (!moduli.allFinite() || (moduli.array() <= 0.0).any()) {
    throw std::invalid_argument("moduli must be finite and positive");
  }
}

struct StepResult {
  bool converged = false;
  std::vector<double> history;
  std::shared_ptr<TangentFactorization> factorization;
};

StepResult newton(const FemProblem& p, const Eigen::VectorXd& moduli,
                  const Eigen::VectorXd& fext, Eigen::VectorXd& u,
                  bool keep_factorization) {
  StepResult out;
  const double target = p.newton_tol * fext.norm();
  Eigen::VectorXd fint;
  SparseMatrix k;
  for (int it = 0; it < p.max_newton_iterations; ++it) {
    assemble(p, moduli, u, &fint, &k);
    const Eigen::VectorXd r = fint - fext;
    const double norm = r.norm();
    out.history.push_back(norm);
    if (!std::isfinite(norm)) return out;
    const bool done = norm <= target;
    if (done && !keep_factorization) {
      out.converged = true;
      return out;
    }
    auto fact = std::make_shared<TangentFactorization>(k);
    if (fact->info() != Eigen::Success) return out;
    if (done) {
      out.converged = true;
      out.factorization = std::move(fact);
      return out;
    }
    if (out.history.size() > 1 && norm > 1e6 * out.history.front()) return out;
    u -= fact->solve(r);
  }
  return out;
}

}  // namespace

int FemProblem::free_dof(int node, int comp) const {
  const int first = mesh.nx + 1;
  return node < first ? -1 : 2 * (node - first) + comp;
}

std::vector<int> FemProblem::observed_dofs() const {
  std::vector<int> out;
  for (int j = 1; j <= mesh.ny; ++j) {
    for (int i = 0; i <= mesh.nx; ++i) {
      if (half_observations && (i + j) % 2 != 0) continue;
      const int node = mesh.node_index(i, j);
      out.push_back(free_dof(node, 0));
      out.push_back(free_dof(node, 1));
    }
  }
  return out;
}

int FemProblem::d_y() const { return static_cast<int>(observed_dofs().size()); }

Eigen::Matrix<double, 8, 1> gather_element(const FemProblem& p, int e,
                                           const Eigen::VectorXd& u) {
  Eigen::Matrix<double, 8, 1> ue;
  for (int a = 0; a < 4; ++a) {
    for (int c = 0; c < 2; ++c) {
      const int d = p.free_dof(p.mesh.elements[e][a], c);
      ue(2 * a + c) = d < 0 ? 0.0 : u(d);
    }
  }
  return ue;
}

void element_response(const FemProblem& p, int e,
                      const Eigen::Matrix<double, 8, 1>& ue,
                      Eigen::Matrix<double, 8, 1>* force,
                      Eigen::Matrix<double, 8, 8>* tangent) {
  if (force) force->setZero();
  if (tangent) tangent->setZero();
  Eigen::Matrix<double, 4, 2> x;
  for (int a = 0; a < 4; ++a) x.row(a) = p.mesh.nodes.row(p.mesh.elements[e][a]);
  const Eigen::Matrix3d d = material_tangent(1.0, p.nu);
  const auto& gt = gauss();
  for (int q = 0; q < 4; ++q) {
    const Eigen::Matrix2d jac = x.transpose() * gt.dn_dxi[q];
    const double det = jac.determinant();
    if (!(det > 0.0)) throw std::runtime_error("degenerate element");
    const Eigen::Matrix<double, 4, 2> dn = gt.dn_dxi[q] * jac.inverse();
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();  // displacement gradient
    for (int a = 0; a < 4; ++a) {
      h += Eigen::Vector2d(ue(2 * a), ue(2 * a + 1)) * dn.row(a);
    }
    const Eigen::Matrix2d f = Eigen::Matrix2d::Identity() + h;
    const Eigen::Matrix2d green = 0.5 * (h + h.transpose() + h.transpose() * h);
    const Eigen::Matrix2d s = pk2_stress(green, 1.0, p.nu);
    Eigen::Matrix<double, 3, 8> b;
    for (int a = 0; a < 4; ++a) {
      const double n1 = dn(a, 0), n2 = dn(a, 1);
      b.col(2 * a) << f(0, 0) * n1, f(0, 1) * n2, f(0, 0) * n2 + f(0, 1) * n1;
      b.col(2 * a + 1) << f(1, 0) * n1, f(1, 1) * n2, f(1, 0) * n2 + f(1, 1) * n1;
    }
    if (force) *force += det * b.transpose() * Eigen::Vector3d(s(0, 0), s(1, 1), s(0, 1));
    if (tangent) {
      *tangent += det * b.transpose() * d * b;
      const Eigen::Matrix4d geo = dn * s * dn.transpose();
      for (int a = 0; a < 4; ++a) {
        for (int c = 0; c < 4; ++c) {
          (*tangent)(2 * a, 2 * c) += det * geo(a, c);
          (*tangent)(2 * a + 1, 2 * c + 1) += det * geo(a, c);
        }
      }
    }
  }
}

double total_strain_energy(const FemProblem& p, const Eigen::VectorXd& moduli,
                           const Eigen::VectorXd& u) {
  check_moduli(p, moduli);
  const auto& gt = gauss();
  double total = 0.0;
  for (int e = 0; e < p.mesh.element_count(); ++e) {
    const auto ue = gather_element(p, e, u);
    Eigen::Matrix<double, 4, 2> x;
    for (int a = 0; a < 4; ++a) x.row(a) = p.mesh.nodes.row(p.mesh.elements[e][a]);
    for (int q = 0; q < 4; ++q) {
      const Eigen::Matrix2d jac = x.transpose() * gt.dn_dxi[q];
      const Eigen::Matrix<double, 4, 2> dn = gt.dn_dxi[q] * jac.inverse();
      Eigen::Matrix2d h = Eigen::Matrix2d::Zero();  // displacement gradient
      for (int a = 0; a < 4; ++a) {
        h += Eigen::Vector2d(ue(2 * a), ue(2 * a + 1)) * dn.row(a);
      }
      const Eigen::Matrix2d green = 0.5 * (h + h.transpose() + h.transpose() * h);
      total += jac.determinant() * strain_energy(green, moduli(e), p.nu);
    }
  }
  return total;
}

Eigen::VectorXd internal_force(const FemProblem& p,
                               const Eigen::VectorXd& moduli,
                               const Eigen::VectorXd& u) {
  check_moduli(p, moduli);
  Eigen::VectorXd f;
  assemble(p, moduli, u, &f, nullptr);
  return f;
}

SparseMatrix tangent_matrix(const FemProblem& p, const Eigen::VectorXd& moduli,
                            const Eigen::VectorXd& u) {
  check_moduli(p, moduli);
  SparseMatrix k;
  assemble(p, moduli, u, nullptr, &k);
  return k;
}

Eigen::VectorXd external_force(const FemProblem& p) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(p.free_dof_count());
  const int j = p.mesh.ny;
  for (int i = 0; i < p.mesh.nx; ++i) {
    const int a = p.mesh.node_index(i, j), b = p.mesh.node_index(i + 1, j);
    const double len = (p.mesh.nodes.row(b) - p.mesh.nodes.row(a)).norm();
    for (int c = 0; c < 2; ++c) {
      f(p.free_dof(a, c)) += 0.5 * len * p.traction(c);
      f(p.free_dof(b, c)) += 0.5 * len * p.traction(c);
    }
  }
  return f;
}

FemState solve_forward(const FemProblem& p, const Eigen::VectorXd& moduli,
                       bool keep_factorization) {
  check_moduli(p, moduli);
  const Eigen::VectorXd fext = external_force(p);
  FemState state;
  state.u = Eigen::VectorXd::Zero(p.free_dof_count());
  StepResult res = newton(p, moduli, fext, state.u, keep_factorization);
  state.load_steps = 1;
  if (!res.converged) {
    const int steps = std::max(1, p.fallback_load_steps);
    state.u.setZero();
    state.load_steps = steps;
    for (int k = 1; k <= steps; ++k) {
      const bool last = k == steps;
      res = newton(p, moduli, fext * (static_cast<double>(k) / steps), state.u,
                   keep_factorization && last);
      if (!res.converged) {
        const double r = res.history.empty() ? NAN : res.history.back();
        throw SolverFailure("Newton failed at load step " + std::to_string(k) +
                                " of " + std::to_string(steps),
                            static_cast<int>(res.history.size()), r,
                            res.history);
      }
    }
  }
  state.history = res.history;
  state.iterations = static_cast<int>(res.history.size());
  state.residual_norm = res.history.back();
  state.factorization = std::move(res.factorization);
  return state;
}

Eigen::VectorXd extract_observations(const FemProblem& p, const FemState& s) {
  const auto dofs = p.observed_dofs();
  Eigen::VectorXd y(dofs.size());
  for (std::size_t i = 0; i < dofs.size(); ++i) y(i) = s.u(dofs[i]);
  return y;
}

Eigen::MatrixXd observation_jacobian(const FemProblem& p,
                                     const Eigen::VectorXd& moduli,
                                     const FemState& s) {
  check_moduli(p, moduli);
  std::shared_ptr<TangentFactorization> fact = s.factorization;
  if (!fact) {
    fact = std::make_shared<TangentFactorization>(tangent_matrix(p, moduli, s.u));
  }
  if (fact->info() != Eigen::Success) {
    throw SolverFailure("singular tangent at converged state", s.iterations,
                        s.residual_norm);
  }
  const int n = p.free_dof_count();
  const int m = p.mesh.element_count();
  const auto dofs = p.observed_dofs();
  const int ny = static_cast<int>(dofs.size());

  // dr/dPsi_j is the internal force of element j (force is linear in the
  // modulus and Psi_j is its logarithm).
  Eigen::MatrixXd drdpsi = Eigen::MatrixXd::Zero(n, m);
  Eigen::Matrix<double, 8, 1> fe;
  for (int e = 0; e < m; ++e) {
    element_response(p, e, gather_element(p, e, s.u), &fe, nullptr);
    for (int a = 0; a < 4; ++a) {
      for (int c = 0; c < 2; ++c) {
        const int d = p.free_dof(p.mesh.elements[e][a], c);
        if (d >= 0) drdpsi(d, e) += moduli(e) * fe(2 * a + c);
      }
    }
  }

  Eigen::MatrixXd g(ny, m);
  if (m <= ny) {
    const Eigen::MatrixXd du = fact->solve(drdpsi);
    for (int i = 0; i < ny; ++i) g.row(i) = -du.row(dofs[i]);
  } else {
    Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(n, ny);
    for (int i = 0; i < ny; ++i) sel(dofs[i], i) = 1.0;
    const Eigen::MatrixXd z = fact->solve(sel);
    g.noalias() = -z.transpose() * drdpsi;
  }
  return g;
}

Eigen::VectorXd nodal_displacements(const FemProblem& p, const FemState& s) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * p.mesh.node_count());
  for (int node = 0; node < p.mesh.node_count(); ++node) {
    for (int c = 0; c < 2; ++c) {
      const int d = p.free_dof(node, c);
      if (d >= 0) out(2 * node + c) = s.u(d);
    }
  }
  return out;
}

}  // namespace vbmix::fem
