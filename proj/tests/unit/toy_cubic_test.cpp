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

#include <gtest/gtest.h>

#include <cmath>

#include "vbmix/toy_cubic.hpp"

namespace vbmix {
namespace {

// Real roots of psi^3 + psi^2 - psi - 0.45, from an independent polynomial solver.
constexpr double kRoots[3] = {-1.47171744, -0.36530228, 0.83701972};

// Posterior mass of each basin for a0 = 50, b0 = 0.4802, prior precision 1e-10,
// from adaptive quadrature outside this library.
constexpr double kBasinMass[3] = {0.2608879287, 0.4999999926, 0.2391120787};
constexpr double kMean = -0.3666750411;
constexpr double kVariance = 0.6620618240;

TEST(ToyCubic, RootsReproduceObservation) {
  for (double r : kRoots) EXPECT_NEAR(toy_evaluate(r), 0.45, 1e-7);
  EXPECT_NEAR(toy_evaluate(0.8), 0.352, 1e-12);
}

TEST(ToyCubic, GradientMatchesCentralDifference) {
  for (double x : {-2.0, -0.7, 0.0, 0.3, 1.1}) {
    const double h = 1e-6;
    const double fd = (toy_evaluate(x + h) - toy_evaluate(x - h)) / (2 * h);
    EXPECT_NEAR(toy_gradient(x), fd, 1e-8);
  }
}

TEST(ToyCubic, ModelCountsCallsAndRejectsBadInput) {
  ToyModel m;
  m.reset_call_count();
  const auto ev = m.evaluate_with_jacobian(Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_DOUBLE_EQ(ev.prediction(0), toy_evaluate(0.5));
  EXPECT_DOUBLE_EQ(ev.jacobian(0, 0), toy_gradient(0.5));
  m.evaluate(Eigen::VectorXd::Constant(1, 0.1));
  EXPECT_EQ(m.call_count(), 2);
  EXPECT_THROW(m.evaluate(Eigen::VectorXd::Zero(2)), std::invalid_argument);
  EXPECT_THROW(m.evaluate(Eigen::VectorXd::Constant(1, std::nan(""))), std::invalid_argument);
}

TEST(ToyCubic, QuadratureMatchesFrozenOracle) {
  const GridDensity g = toy_posterior_grid(0.45, 1e-10, 50.0, 0.4802, -2.5, 2.0, 20001);
  EXPECT_NEAR(g.mass(-2.5, 2.0), 1.0, 1e-10);
  EXPECT_NEAR(g.mass(-2.5, -1.0), kBasinMass[0], 1e-4);
  EXPECT_NEAR(g.mass(-1.0, 1.0 / 3.0), kBasinMass[1], 1e-4);
  EXPECT_NEAR(g.mass(1.0 / 3.0, 2.0), kBasinMass[2], 1e-4);
  double m = 0.0, m2 = 0.0;
  const double h = g.x[1] - g.x[0];
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    m += h * g.x[i] * g.density[i];
    m2 += h * g.x[i] * g.x[i] * g.density[i];
  }
  EXPECT_NEAR(m, kMean, 1e-4);
  EXPECT_NEAR(m2 - m * m, kVariance, 1e-4);
}

TEST(ToyCubic, DensityPeaksSitAtTheRoots) {
  const GridDensity g = toy_posterior_grid(0.45, 1e-10, 50.0, 0.4802, -2.5, 2.0, 4501);
  const auto peaks = g.local_maxima();
  ASSERT_EQ(peaks.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(peaks[i], kRoots[i], 2e-3);
}

TEST(ToyCubic, GridRefusesTruncatedSupport) {
  EXPECT_THROW(toy_posterior_grid(0.45, 1e-10, 50.0, 0.4802, -1.0, 1.0, 2001),
               std::invalid_argument);
  EXPECT_THROW(toy_posterior_grid(0.45, 1e-10, 50.0, 0.0, -2.5, 2.0, 2001),
               std::invalid_argument);
  EXPECT_THROW(toy_posterior_grid(0.45, 1e-10, 50.0, 0.4802, -2.5, 2.0, 10),
               std::invalid_argument);
}

}  // namespace
}  // namespace vbmix
