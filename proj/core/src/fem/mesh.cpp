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

#include "vbmix/fem/mesh.hpp"

#include <stdexcept>

namespace vbmix::fem {

Eigen::Vector2d Mesh::centroid(int e) const {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (int a : elements[e]) c += nodes.row(a).transpose();
  return 0.25 * c;
}

double Mesh::element_area(int e) const {
  // Shoelace formula over the four corners.
  const auto& n = elements[e];
  double area = 0.0;
  for (int k = 0; k < 4; ++k) {
    const auto p = nodes.row(n[k]);
    const auto q = nodes.row(n[(k + 1) % 4]);
    area += p(0) * q(1) - q(0) * p(1);
  }
  return 0.5 * area;
}

Mesh make_structured_mesh(int nx, int ny, double lx, double ly) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("mesh needs nx, ny >= 1");
  if (!(lx > 0.0) || !(ly > 0.0)) {
    throw std::invalid_argument("mesh extents must be positive");
  }
  Mesh m;
  m.nx = nx;
  m.ny = ny;
  m.lx = lx;
  m.ly = ly;
  m.nodes.resize(m.node_count(), 2);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      m.nodes(m.node_index(i, j), 0) = lx * i / nx;
      m.nodes(m.node_index(i, j), 1) = ly * j / ny;
    }
  }
  m.elements.reserve(nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      m.elements.push_back({m.node_index(i, j), m.node_index(i + 1, j),
                            m.node_index(i + 1, j + 1),
                            m.node_index(i, j + 1)});
    }
  }
  return m;
}

}  // namespace vbmix::fem
