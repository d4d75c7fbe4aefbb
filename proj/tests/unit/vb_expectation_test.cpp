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
#include <random>

#include "vbmix/component.hpp"
#include "vbmix/stiefel.hpp"
#include "vbmix/vb_expectation.hpp"

namespace vbmix {
namespace {

MixtureComponent random_component(int d_psi, int d_theta, int d_y, std::uint64_t seed,
                                  const Eigen::VectorXd& y_hat) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  MixtureComponent c;
  c.id = static_cast<int>(seed);
  c.mu = Eigen::VectorXd::NullaryExpr(d_psi, [&] { return normal(rng); });
  c.W = init_orthonormal(d_psi, d_theta, seed + 100);
  c.lambda0 = Eigen::VectorXd::LinSpaced(d_theta, 1.0, 2.0);
  c.lambda = c.lambda0;
  c.lambda0_eta = 2.0;
  c.lambda_eta = 2.0;
  c.residual_enabled = true;
  Evaluation ev;
  ev.prediction = Eigen::VectorXd::NullaryExpr(d_y, [&] { return normal(rng); });
  ev.jacobian = Eigen::MatrixXd::NullaryExpr(d_y, d_psi, [&] { return normal(rng); });
  c.set_evaluation(ev, y_hat);
  return c;
}

// Coordinate ascent on the closed-form factors until q is optimal.
NoisePosterior settle(std::vector<MixtureComponent>& comps, int d_y, double a0, double b0) {
  NoisePosterior n;
  for (auto& c : comps) c.weight = 1.0 / comps.size();
  for (int it = 0; it < 500; ++it) {
    n = update_tau(comps, d_y, a0, b0);
    for (auto& c : comps) {
      update_theta_precisions(c, n.mean());
      update_eta_precision(c, n.mean());
    }
    update_component_weights(comps, n.mean());
  }
  return update_tau(comps, d_y, a0, b0);
}

TEST(Ladder, FloorAndArithmetic) {
  EXPECT_DOUBLE_EQ(ladder_next(1.0, 7.0, 1.0), 6.0);
  EXPECT_DOUBLE_EQ(ladder_next(1.0, 1.0, 1.0), 1.0);
  const Eigen::VectorXd lad = prior_precision_ladder(1.0, Eigen::Vector3d(7.0, 9.0, 4.0));
  ASSERT_EQ(lad.size(), 4);
  EXPECT_DOUBLE_EQ(lad(0), 1.0);
  EXPECT_DOUBLE_EQ(lad(1), 6.0);
  EXPECT_DOUBLE_EQ(lad(2), 3.0);
  EXPECT_DOUBLE_EQ(lad(3), 1.0);
  for (int i = 0; i < lad.size(); ++i) EXPECT_GE(lad(i), 1.0);
}

TEST(InformationGain, ClosedForm) {
  const Eigen::Vector3d l0(1.0, 1.0, 1.0), l(5.0, 3.0, 2.0);
  auto k = [](double r) { return -std::log(r) + r - 1.0; };
  const double total = k(5.0) + k(3.0) + k(2.0);
  EXPECT_NEAR(information_gain(l0, l, 3).gain, k(2.0) / total, 1e-14);
  EXPECT_DOUBLE_EQ(information_gain(l0, l, 1).gain, 1.0);
  const InformationGain none = information_gain(l0, l0, 2);
  EXPECT_TRUE(none.no_information);
  EXPECT_EQ(none.gain, 0.0);
  EXPECT_THROW(information_gain(l0, l, 0), std::invalid_argument);
}

TEST(InformationGain, InUnitInterval) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd l0(6), l(6);
    for (int i = 0; i < 6; ++i) {
      l0(i) = u(rng);
      l(i) = u(rng);
    }
    for (int d = 1; d <= 6; ++d) {
      const double g = information_gain(l0, l, d).gain;
      EXPECT_GE(g, 0.0);
      EXPECT_LE(g, 1.0);
    }
  }
}

TEST(NoiseUpdate, ClosedForm) {
  const Eigen::VectorXd y_hat = Eigen::VectorXd::Constant(5, 0.3);
  auto c = random_component(4, 2, 5, 1, y_hat);
  c.weight = 1.0;
  const NoisePosterior n = update_tau({c}, 5, 2.0, 0.5);
  EXPECT_DOUBLE_EQ(n.a, 4.5);
  EXPECT_NEAR(n.b, 0.5 + 0.5 * expected_misfit(c), 1e-14);
  const Eigen::MatrixXd gw = c.G * c.W;
  const double direct = c.residual_sq + (gw.colwise().squaredNorm().transpose().array() /
                                         c.lambda.array()).sum() +
                        c.G.squaredNorm() / c.lambda_eta;
  EXPECT_NEAR(expected_misfit(c), direct, 1e-12);
  // digamma(4.5) = digamma(1/2) + 2 + 2/3 + 2/5 + 2/7
  const double digamma_4_5 = -0.57721566490153286 - 2.0 * std::log(2.0) + 2.0 + 2.0 / 3.0 +
                             2.0 / 5.0 + 2.0 / 7.0;
  EXPECT_NEAR(n.log_mean(), digamma_4_5 - std::log(n.b), 1e-12);
}

TEST(NoiseUpdate, DegenerateRateThrows) {
  MixtureComponent c;
  c.mu = Eigen::VectorXd::Zero(1);
  c.W = Eigen::MatrixXd::Identity(1, 1);
  c.lambda0 = c.lambda = Eigen::VectorXd::Ones(1);
  c.residual_enabled = false;
  c.set_evaluation({Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1)},
                   Eigen::VectorXd::Zero(1));
  c.weight = 1.0;
  EXPECT_THROW(update_tau({c}, 1, 0.0, 0.0), DegeneratePrecision);
}

TEST(Weights, SoftmaxOfComponentScores) {
  const Eigen::VectorXd y_hat = Eigen::VectorXd::Constant(4, 0.1);
  std::vector<MixtureComponent> comps = {random_component(3, 1, 4, 2, y_hat),
                                         random_component(3, 1, 4, 3, y_hat),
                                         random_component(3, 1, 4, 4, y_hat)};
  update_component_weights(comps, 0.7);
  double sum = 0.0;
  for (const auto& c : comps) sum += c.weight;
  EXPECT_NEAR(sum, 1.0, 1e-15);
  const double r = std::exp(component_log_weight(comps[0], 0.7) -
                            component_log_weight(comps[1], 0.7));
  EXPECT_NEAR(comps[0].weight / comps[1].weight, r, 1e-12 * r);
}

TEST(Bound, SingleComponentHasNoEntropyTerm) {
  const Eigen::VectorXd y_hat = Eigen::VectorXd::Constant(4, 0.1);
  auto c = random_component(3, 1, 4, 5, y_hat);
  c.weight = 1.0;
  EXPECT_DOUBLE_EQ(bound_contribution(c, 2.0), component_log_weight(c, 2.0));
}

TEST(Bound, DuplicateChangesOnlyEntropy) {
  const Eigen::VectorXd y_hat = Eigen::VectorXd::Constant(4, 0.1);
  auto c = random_component(3, 1, 4, 6, y_hat);
  NoisePosterior n;
  n.a = 3.0;
  n.b = 1.5;
  c.weight = 1.0;
  const double single = lower_bound({c}, n);
  auto a = c, b = c;
  a.weight = b.weight = 0.5;
  EXPECT_NEAR(lower_bound({a, b}, n) - single, std::log(2.0), 1e-12);
}

TEST(Bound, CompactAndElaboratedDifferByAConstantAtOptimalQ) {
  const int d_y = 7;
  const double a0 = 1.5, b0 = 0.2;
  const double a = a0 + 0.5 * d_y;
  for (std::uint64_t seed : {11u, 29u}) {
    const Eigen::VectorXd y_hat = Eigen::VectorXd::Constant(d_y, 0.4);
    std::vector<MixtureComponent> comps = {random_component(5, 2, d_y, seed, y_hat),
                                           random_component(5, 2, d_y, seed + 1, y_hat)};
    const NoisePosterior n = settle(comps, d_y, a0, b0);
    // The q(tau) terms collapse to lgamma(a) - a log b; the trace terms cancel
    // against the KL terms up to a - b0 <tau>.
    const double constant = std::lgamma(a) - a * std::log(a) + a - b0 * n.mean();
    const double diff = elaborated_bound(comps, n, d_y) - lower_bound(comps, n);
    EXPECT_NEAR(diff, constant, 1e-8) << "seed " << seed;
  }
}

TEST(Bound, CoordinateUpdatesNeverDecreaseElaboratedBound) {
  const int d_y = 6;
  const Eigen::VectorXd y_hat = Eigen::VectorXd::Constant(d_y, -0.2);
  std::vector<MixtureComponent> comps = {random_component(4, 2, d_y, 40, y_hat),
                                         random_component(4, 2, d_y, 41, y_hat),
                                         random_component(4, 2, d_y, 42, y_hat)};
  for (auto& c : comps) c.weight = 1.0 / 3.0;
  NoisePosterior n = update_tau(comps, d_y, 0.0, 0.0);
  double prev = elaborated_bound(comps, n, d_y);
  for (int it = 0; it < 30; ++it) {
    n = update_tau(comps, d_y, 0.0, 0.0);
    double f = elaborated_bound(comps, n, d_y);
    EXPECT_GE(f, prev - 1e-10 * std::abs(prev));
    prev = f;
    for (auto& c : comps) {
      update_theta_precisions(c, n.mean());
      update_eta_precision(c, n.mean());
    }
    f = elaborated_bound(comps, n, d_y);
    EXPECT_GE(f, prev - 1e-10 * std::abs(prev));
    prev = f;
    update_component_weights(comps, n.mean());
    f = elaborated_bound(comps, n, d_y);
    EXPECT_GE(f, prev - 1e-10 * std::abs(prev));
    prev = f;
  }
}

}  // namespace
}  // namespace vbmix
