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

#ifndef VBMIX_IMPORTANCE_HPP_
#define VBMIX_IMPORTANCE_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "vbmix/forward_model.hpp"
#include "vbmix/posterior.hpp"

namespace vbmix {

class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gamma(a0, b0) prior on the noise precision, integrated out of the target.
struct NoisePrior {
  double a0 = 0.0;
  double b0 = 0.0;
};

struct TargetValue {
  double value = 0.0;
  bool guarded = false;  // zero misfit with b0 = 0 was replaced by a sentinel
};

/// log p(Theta, s | y_hat) up to one global constant, from the squared
/// misfit at Psi = mu_s + W_s Theta:
///   lgamma(a0 + d_y/2) - (a0 + d_y/2) log(b0 + misfit/2)
///   + log N(Theta; 0, Lambda0_s^-1) - log S.
TargetValue log_target_from_misfit(double misfit_sq, int d_y,
                                   const Eigen::VectorXd& theta,
                                   const MixtureComponent& c, int n_components,
                                   const NoisePrior& prior);

/// Same, evaluating the forward model once.
TargetValue log_target_marginal_tau(const Eigen::VectorXd& theta, int s,
                                    const MixturePosterior& post,
                                    const ForwardModel& model,
                                    const Eigen::VectorXd& y_hat,
                                    const NoisePrior& prior);

/// log q(Theta, s) = log q(s) + log N(Theta; 0, Lambda_s^-1)
double log_proposal(const Eigen::VectorXd& theta, const MixtureComponent& c);

/// ESS = 1 / (M sum w_hat^2) from unnormalized log weights.
double effective_sample_size(const std::vector<double>& log_weights);

/// Weighted quantile from the empirical CDF.
double weighted_quantile(const std::vector<double>& values,
                         const std::vector<double>& weights, double q);

struct ImportanceResult {
  int M = 0;
  double ess = 0.0;
  double log_evidence = 0.0;  // log mean weight over (Theta, s)
  // Evidence of the parameter-space target against the mixture density. The
  // (Theta, s) estimate misses mass whenever a reference frame sees other
  // modes, so densities over Psi are normalized with this one.
  double log_evidence_psi = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::MatrixXd psi;              // M x d_psi samples
  std::vector<int> component;       // drawing component per sample
  std::vector<double> log_weights;  // unnormalized
  std::vector<double> normalized_weights;
  std::vector<double> component_mass;  // sum of normalized weights per s
  long forward_calls = 0;
  int failed_evaluations = 0;
  int guarded = 0;

  /// Weighted quantile of one coordinate.
  double quantile(int index, double q) const;
};

/// Importance sampling with proposal q(s) N(0, Lambda_s^-1) over (Theta, s).
/// Draws are sequential from `seed`; forward evaluations run on `workers`
/// threads. Throws ValidationFailure when every weight vanishes.
ImportanceResult importance_validate(const MixturePosterior& post,
                                     const ForwardModel& model,
                                     const Eigen::VectorXd& y_hat,
                                     const NoisePrior& prior, int M,
                                     std::uint64_t seed, int workers = 1);

/// IS-corrected density of a one-dimensional posterior: the exact
/// unnormalized target summed over components, divided by the IS evidence.
std::vector<double> corrected_density_1d(const MixturePosterior& post,
                                         const ForwardModel& model,
                                         const Eigen::VectorXd& y_hat,
                                         const NoisePrior& prior,
                                         double log_evidence_psi,
                                         const std::vector<double>& grid);

struct McmcResult {
  Eigen::MatrixXd chain;  // n_steps x d
  double acceptance = 0.0;
  double ess = 0.0;       // normalized, of the first coordinate
  bool degenerate = false;
};

/// Normalized ESS of a scalar chain with the tapered autocorrelation sum
/// truncated by the initial positive sequence rule.
double mcmc_ess(const Eigen::VectorXd& x, bool* degenerate = nullptr);

/// Random-walk Metropolis with isotropic Gaussian proposals.
McmcResult rw_mcmc(const std::function<double(const Eigen::VectorXd&)>& log_target,
                   const Eigen::VectorXd& start, int n_steps,
                   double proposal_std, std::uint64_t seed);

/// Random-walk baseline on the marginalized-noise posterior of Psi with a
/// zero-mean isotropic Gaussian prior of precision kappa.
McmcResult rw_mcmc_baseline(const ForwardModel& model,
                            const Eigen::VectorXd& y_hat,
                            const NoisePrior& prior, double kappa,
                            const Eigen::VectorXd& start, int n_steps,
                            double proposal_std, std::uint64_t seed);

}  // namespace vbmix

#endif  // VBMIX_IMPORTANCE_HPP_
