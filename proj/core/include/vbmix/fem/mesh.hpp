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

#ifndef VBMIX_FEM_MESH_HPP_
#define VBMIX_FEM_MESH_HPP_

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace vbmix::fem {

/// Structured grid of bilinear quadrilaterals on [0, lx] x [0, ly].
/// Node (i, j) has index j * (nx + 1) + i; element (i, j) has index
/// j * nx + i and counter-clockwise nodes starting at the lower left.
struct Mesh {
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;
  Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor> nodes;
  std::vector<std::array<int, 4>> elements;

  int node_count() const { return (nx + 1) * (ny + 1); }
  int element_count() const { return nx * ny; }
  int node_index(int i, int j) const { return j * (nx + 1) + i; }
  Eigen::Vector2d centroid(int e) const;
  double element_area(int e) const;
};

Mesh make_structured_mesh(int nx, int ny, double lx, double ly);

}  // namespace vbmix::fem

#endif  // VBMIX_FEM_MESH_HPP_
