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

#include "vbmix/importance.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "vbmix/parallel.hpp"

namespace vbmix {
namespace {

double log_normal_diag(const Eigen::VectorXd& x, const Eigen::VectorXd& prec) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    v += 0.5 * std::log(prec(i) / (2.0 * std::numbers::pi)) - 0.5 * prec(i) * x(i) * x(i);
  }
  return v;
}

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

TargetValue log_target_from_misfit(double misfit_sq, int d_y,
                                   const Eigen::VectorXd& theta,
                                   const MixtureComponent& c, int n_components,
                                   const NoisePrior& prior) {
  TargetValue t;
  const double shape = prior.a0 + 0.5 * d_y;
  double rate = prior.b0 + 0.5 * misfit_sq;
  if (!(rate > 0.0)) {
    rate = 1e-300;
    t.guarded = true;
  }
  t.value = std::lgamma(shape) - shape * std::log(rate) +
            log_normal_diag(theta, c.lambda0) - std::log(static_cast<double>(n_components));
  return t;
}

TargetValue log_target_marginal_tau(const Eigen::VectorXd& theta, int s,
                                    const MixturePosterior& post,
                                    const ForwardModel& model,
                                    const Eigen::VectorXd& y_hat,
                                    const NoisePrior& prior) {
  const MixtureComponent& c = post.components.at(s);
  const Eigen::VectorXd y = model.evaluate(c.mu + c.W * theta);
  return log_target_from_misfit((y_hat - y).squaredNorm(), model.d_y(), theta, c,
                                static_cast<int>(post.components.size()), prior);
}

double log_proposal(const Eigen::VectorXd& theta, const MixtureComponent& c) {
  return std::log(c.weight) + log_normal_diag(theta, c.lambda);
}

double effective_sample_size(const std::vector<double>& log_weights) {
  const double lse = log_sum_exp(log_weights);
  if (!std::isfinite(lse)) return 0.0;
  double sq = 0.0;
  for (double lw : log_weights) {
    const double w = std::exp(lw - lse);
    sq += w * w;
  }
  return 1.0 / (static_cast<double>(log_weights.size()) * sq);
}

double weighted_quantile(const std::vector<double>& values,
                         const std::vector<double>& weights, double q) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double acc = 0.0;
  for (std::size_t i : order) {
    acc += weights[i];
    if (acc >= q * total) return values[i];
  }
  return values[order.back()];
}

double ImportanceResult::quantile(int index, double q) const {
  std::vector<double> v(M);
  for (int m = 0; m < M; ++m) v[m] = psi(m, index);
  return weighted_quantile(v, normalized_weights, q);
}

ImportanceResult importance_validate(const MixturePosterior& post,
                                     const ForwardModel& model,
                                     const Eigen::VectorXd& y_hat,
                                     const NoisePrior& prior, int M,
                                     std::uint64_t seed, int workers) {
  if (M < 100) throw std::invalid_argument("importance sampling needs M >= 100");
  post.validate();
  const int d = post.d_psi();
  const int S = static_cast<int>(post.components.size());
  std::mt19937_64 rng(seed);
  std::vector<double> w;
  for (const auto& c : post.components) w.push_back(c.weight);
  std::discrete_distribution<int> pick(w.begin(), w.end());
  std::normal_distribution<double> normal;

  ImportanceResult res;
  res.M = M;
  res.psi.resize(M, d);
  res.component.resize(M);
  std::vector<Eigen::VectorXd> thetas(M);
  for (int m = 0; m < M; ++m) {
    const int s = pick(rng);
    const auto& c = post.components[s];
    Eigen::VectorXd theta(c.d_theta());
    for (int k = 0; k < c.d_theta(); ++k) theta(k) = normal(rng) / std::sqrt(c.lambda(k));
    res.component[m] = s;
    res.psi.row(m) = (c.mu + c.W * theta).transpose();
    thetas[m] = std::move(theta);
  }

  // Parameter-space prior induced by the mixture of reference frames.
  MixturePosterior prior_mix = post;
  for (auto& c : prior_mix.components) {
    c.lambda = c.lambda0;
    c.lambda_eta = c.lambda0_eta;
    c.weight = 1.0 / S;
  }

  res.log_weights.assign(M, -std::numeric_limits<double>::infinity());
  std::vector<double> log_psi_weights(M, -std::numeric_limits<double>::infinity());
  std::vector<char> failed(M, 0), guarded(M, 0);
  const long calls0 = model.call_count();
  parallel_for(M, workers, [&](int m) {
    const auto& c = post.components[res.component[m]];
    try {
      const Eigen::VectorXd y = model.evaluate(res.psi.row(m).transpose());
      const TargetValue t = log_target_from_misfit((y_hat - y).squaredNorm(),
                                                   model.d_y(), thetas[m], c, S, prior);
      guarded[m] = t.guarded;
      res.log_weights[m] = t.value - log_proposal(thetas[m], c);
      const Eigen::VectorXd psi = res.psi.row(m).transpose();
      const double shape = prior.a0 + 0.5 * model.d_y();
      const double rate = std::max(prior.b0 + 0.5 * (y_hat - y).squaredNorm(), 1e-300);
      log_psi_weights[m] = std::lgamma(shape) - shape * std::log(rate) +
                           log_density(prior_mix, psi) - log_density(post, psi);
    } catch (const SolverFailure&) {
      failed[m] = 1;
    }
  });
  res.forward_calls = model.call_count() - calls0;
  for (int m = 0; m < M; ++m) {
    res.failed_evaluations += failed[m];
    res.guarded += guarded[m];
  }

  const double lse = log_sum_exp(res.log_weights);
  if (!std::isfinite(lse)) throw ValidationFailure("all importance weights vanish");
  res.log_evidence = lse - std::log(static_cast<double>(M));
  res.log_evidence_psi = log_sum_exp(log_psi_weights) - std::log(static_cast<double>(M));
  res.normalized_weights.resize(M);
  for (int m = 0; m < M; ++m) res.normalized_weights[m] = std::exp(res.log_weights[m] - lse);
  res.ess = effective_sample_size(res.log_weights);

  res.mean = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd second = Eigen::VectorXd::Zero(d);
  res.component_mass.assign(S, 0.0);
  for (int m = 0; m < M; ++m) {
    const double wm = res.normalized_weights[m];
    res.mean += wm * res.psi.row(m).transpose();
    second += wm * res.psi.row(m).transpose().cwiseAbs2();
    res.component_mass[res.component[m]] += wm;
  }
  res.variance = (second - res.mean.cwiseAbs2()).cwiseMax(0.0);
  return res;
}

std::vector<double> corrected_density_1d(const MixturePosterior& post,
                                         const ForwardModel& model,
                                         const Eigen::VectorXd& y_hat,
                                         const NoisePrior& prior,
                                         double log_evidence_psi,
                                         const std::vector<double>& grid) {
  if (post.d_psi() != 1) throw std::invalid_argument("corrected_density_1d needs d_psi = 1");
  const int S = static_cast<int>(post.components.size());
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) {
    const Eigen::VectorXd psi = Eigen::VectorXd::Constant(1, x);
    const double misfit = (y_hat - model.evaluate(psi)).squaredNorm();
    std::vector<double> terms;
    for (const auto& c : post.components) {
      // Theta = W^T (Psi - mu) for a square orthonormal basis.
      const Eigen::VectorXd theta = c.W.transpose() * (psi - c.mu);
      terms.push_back(log_target_from_misfit(misfit, model.d_y(), theta, c, S, prior).value);
    }
    out.push_back(std::exp(log_sum_exp(terms) - log_evidence_psi));
  }
  return out;
}

double mcmc_ess(const Eigen::VectorXd& x, bool* degenerate) {
  const Eigen::Index n = x.size();
  if (degenerate) *degenerate = false;
  if (n < 2) return 1.0;
  const Eigen::VectorXd c = x.array() - x.mean();
  const double var = c.squaredNorm() / n;
  if (!(var > 0.0)) {
    if (degenerate) *degenerate = true;
    return 1.0 / (2.0 * n - 1.0);
  }
  // Autocovariance by zero-padded FFT.
  Eigen::Index len = 1;
  while (len < 2 * n) len <<= 1;
  std::vector<double> padded(len, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) padded[i] = c(i);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, padded);
  for (auto& z : spec) z = std::norm(z);
  std::vector<double> acov;
  fft.inv(acov, spec);
  auto term = [&](Eigen::Index k) {
    const double rho = acov[k] / acov[0];
    return (1.0 - static_cast<double>(k) / n) * rho;
  };
  double sum = 0.0;
  for (Eigen::Index m = 0; 2 * m + 1 < n; ++m) {
    const double pair = term(2 * m) + term(2 * m + 1);
    if (!(pair > 0.0)) break;
    sum += pair;
  }
  return 1.0 / (2.0 * sum - 1.0);
}

McmcResult rw_mcmc(const std::function<double(const Eigen::VectorXd&)>& log_target,
                   const Eigen::VectorXd& start, int n_steps,
                   double proposal_std, std::uint64_t seed) {
  if (n_steps < 1) throw std::invalid_argument("chain length must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index d = start.size();
  McmcResult res;
  res.chain.resize(n_steps, d);
  Eigen::VectorXd x = start;
  double lp = log_target(x);
  long accepted = 0;
  for (int t = 0; t < n_steps; ++t) {
    Eigen::VectorXd prop = x;
    for (Eigen::Index i = 0; i < d; ++i) prop(i) += proposal_std * normal(rng);
    double lq = -std::numeric_limits<double>::infinity();
    try {
      lq = log_target(prop);
    } catch (const SolverFailure&) {
    }
    if (std::log(unif(rng)) < lq - lp) {
      x = std::move(prop);
      lp = lq;
      ++accepted;
    }
    res.chain.row(t) = x.transpose();
  }
  res.acceptance = static_cast<double>(accepted) / n_steps;
  res.ess = mcmc_ess(res.chain.col(0), &res.degenerate);
  return res;
}

McmcResult rw_mcmc_baseline(const ForwardModel& model,
                            const Eigen::VectorXd& y_hat,
                            const NoisePrior& prior, double kappa,
                            const Eigen::VectorXd& start, int n_steps,
                            double proposal_std, std::uint64_t seed) {
  const double shape = prior.a0 + 0.5 * model.d_y();
  auto target = [&](const Eigen::VectorXd& psi) {
    const double misfit = (y_hat - model.evaluate(psi)).squaredNorm();
    return -shape * std::log(std::max(prior.b0 + 0.5 * misfit, 1e-300)) -
           0.5 * kappa * psi.squaredNorm();
  };
  return rw_mcmc(target, start, n_steps, proposal_std, seed);
}

}  // namespace vbmix
