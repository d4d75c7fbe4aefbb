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

#ifndef VBMIX_ADAPTIVE_HPP_
#define VBMIX_ADAPTIVE_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vbmix/component.hpp"
#include "vbmix/forward_model.hpp"
#include "vbmix/mean_prior.hpp"
#include "vbmix/mu_step.hpp"
#include "vbmix/stiefel.hpp"

namespace vbmix {

struct VbConfig {
  double a0 = 0.0;  // Gamma prior on the noise precision
  double b0 = 0.0;
  double lambda0_first = 1.0;
  bool residual_enabled = true;
  bool adaptive_d_theta = true;  // grow until the information gain is small
  int d_theta_fixed = 1;         // target width when not adaptive
  int d_theta_max = 20;
  double info_gain_max = 0.01;
  int inner_max_sweeps = 100;
  double inner_rel_tol = 1e-6;
  int outer_max = 30;
  double tau_stability = 1e-3;  // skip mu updates below this relative change
  MuStepOptions mu;
  CayleyOptions cayley;
  int workers = 1;
  std::uint64_t seed = 1;
  std::function<void(const std::string&)> progress;  // optional log sink
};

struct AdaptiveConfig {
  int S0 = 4;
  int delta_S = 3;
  double alpha = 10.0;
  double q_min = 1e-3;
  double d_min = 0.01;
  int L_max = 3;
  int max_attempts = 30;
  double init_mean = 0.0;  // initial means: init_mean + init_std * N(0, I)
  double init_std = 1.0;
  // Initial means are first fitted with every jump precision held at
  // warm_start_phi while <tau> follows the residual; 0 disables this.
  double warm_start_phi = 0.0;
  int warm_start_iterations = 6;
};

struct MixtureState {
  std::vector<MixtureComponent> components;
  NoisePosterior noise;
  int d_theta = 0;
  bool tau_initialized = false;
  int next_id = 0;
};

struct TracePoint {
  long forward_calls = 0;
  double bound = 0.0;
  int components = 0;
  int d_theta = 0;
};

inline constexpr int kPrunedKiller = -1;
inline constexpr int kSolverFailureKiller = -2;

struct DeathRecord {
  int component_id = -1;
  int killer_id = kPrunedKiller;  // or kSolverFailureKiller
  double distance = 0.0;  // d(killer, component)
  double weight = 0.0;    // q(s) at removal
};

struct AttemptRecord {
  int attempt = 0;
  int parent_id = -1;
  std::vector<int> proposed;
  std::vector<int> survivors;
  std::vector<DeathRecord> deaths;
  std::vector<std::vector<double>> distances;  // new x (existing + earlier new)
  std::vector<std::pair<int, double>> weights;  // (id, q(s)) after the attempt
  int L_after = 0;
};

struct Diagnostics {
  std::vector<TracePoint> trace;
  std::vector<AttemptRecord> lineage;
  std::vector<std::vector<double>> inner_bounds;  // per inner loop
  double worst_inner_decrease = 0.0;  // largest relative drop observed
  std::vector<std::vector<double>> information_gain;  // per growth check
  long forward_calls = 0;
  std::vector<int> solver_failures;  // ids dropped because the forward solve failed
  int mu_optimizations = 0;
  int mu_skipped = 0;
};

/// New component at mu with a random orthonormal basis of width d_theta and
/// all prior precisions equal to lambda0_first.
MixtureComponent make_component(const Eigen::VectorXd& mu, int d_theta,
                                const VbConfig& cfg, int id);

/// Algorithm for a fixed number of components: outer mean updates, inner
/// W / Lambda / lambda_eta / tau / q(s) sweeps, adaptive basis growth.
void run_fixed_s(MixtureState& state, const ForwardModel& model,
                 const Eigen::VectorXd& y_hat, const MeanPrior& prior,
                 const VbConfig& cfg, Diagnostics& diag);

/// Runs only the inner sweeps at fixed means.
void run_inner(MixtureState& state, int d_y, const VbConfig& cfg,
               Diagnostics& diag);

/// Index of the component with the smallest q(s)-weighted bound summand,
/// ignoring ids in `skip` unless every component is skipped.
int select_parent(const MixtureState& state, const std::vector<int>& skip);

/// Delta_S perturbations mu_parent + W Theta + alpha eta with the parent's
/// basis and precisions. Without a residual term alpha scales Theta.
std::vector<MixtureComponent> propose_birth(const MixtureState& state,
                                            int parent, int count,
                                            double alpha, std::mt19937_64& rng,
                                            int first_id);

struct AdaptiveResult {
  MixtureState state;
  Diagnostics diagnostics;
};

/// Adaptive birth/death algorithm.
AdaptiveResult run_adaptive(const ForwardModel& model,
                            const Eigen::VectorXd& y_hat,
                            const MeanPrior& prior, const VbConfig& cfg,
                            const AdaptiveConfig& acfg);

/// Checks every invariant of a converged state; throws std::logic_error.
void check_state_invariants(const MixtureState& state);

}  // namespace vbmix

#endif  // VBMIX_ADAPTIVE_HPP_
