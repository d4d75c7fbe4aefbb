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


#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "vbmix/adaptive.hpp"
#include "vbmix/fem/elastography_model.hpp"
#include "vbmix/fem/mesh.hpp"
#include "vbmix/lowrank.hpp"
#include "vbmix/pipeline.hpp"
#include "vbmix/stiefel.hpp"

namespace {

vbmix::fem::FemProblem square(int n) {
  vbmix::fem::FemProblem p;
  p.mesh = vbmix::fem::make_structured_mesh(n, n, 50.0, 50.0);
  return p;
}

Eigen::VectorXd log_moduli(int n) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(std::log(1e4), 0.2);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

void BM_ForwardSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const vbmix::fem::ElastographyModel model(square(n));
  const Eigen::VectorXd psi = log_moduli(n * n);
  for (auto _ : state) benchmark::DoNotOptimize(model.evaluate(psi));
}
BENCHMARK(BM_ForwardSolve)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ForwardWithJacobian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const vbmix::fem::ElastographyModel model(square(n));
  const Eigen::VectorXd psi = log_moduli(n * n);
  for (auto _ : state) benchmark::DoNotOptimize(model.evaluate_with_jacobian(psi));
}
BENCHMARK(BM_ForwardWithJacobian)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_LowRankApplyInverse(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  const Eigen::MatrixXd W = vbmix::init_orthonormal(d, k, 1);
  const Eigen::VectorXd lambda = Eigen::VectorXd::LinSpaced(k, 1.0, 10.0);
  const vbmix::LowRankCovariance cov(W, lambda, 2.0, true);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(d);
  for (auto _ : state) benchmark::DoNotOptimize(cov.apply_inverse(x));
}
BENCHMARK(BM_LowRankApplyInverse)->Args({400, 8})->Args({2500, 8})->Args({2500, 20});

void BM_CayleySearch(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int k = 8;
  const Eigen::MatrixXd G = Eigen::MatrixXd::Random(2 * d, d);
  const Eigen::MatrixXd gram = G.transpose() * G;
  const Eigen::VectorXd lambda_inv = Eigen::VectorXd::LinSpaced(k, 1.0, 0.1);
  const Eigen::MatrixXd W0 = vbmix::init_orthonormal(d, k, 2);
  const vbmix::StiefelObjective f = [&](const Eigen::MatrixXd& W) {
    return vbmix::stiefel_objective_grad(W, gram, lambda_inv, 1.0);
  };
  for (auto _ : state) benchmark::DoNotOptimize(vbmix::cayley_retract_search(W0, f));
}
BENCHMARK(BM_CayleySearch)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_ToyAdaptive(benchmark::State& state) {
  const auto cfg = vbmix::load_config(VBMIX_SOURCE_DIR "/configs/toy.json");
  const auto pb = vbmix::build_problem(cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        vbmix::run_adaptive(*pb.model, pb.y_hat, pb.prior, cfg.vb, cfg.adaptive));
  }
}
BENCHMARK(BM_ToyAdaptive)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
