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

#include "vbmix/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "vbmix/lowrank.hpp"

namespace vbmix {

int MixturePosterior::d_psi() const {
  return components.empty() ? 0 : components.front().d_psi();
}

void MixturePosterior::validate() const {
  if (components.empty()) throw std::logic_error("posterior has no components");
  double sum = 0.0;
  for (const auto& c : components) {
    if (c.d_psi() != d_psi()) throw std::logic_error("component dimension mismatch");
    c.check_invariants();
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-10) throw std::logic_error("weights do not sum to one");
}

MixtureMoments mixture_moments(const MixturePosterior& post) {
  const int d = post.d_psi();
  MixtureMoments m;
  m.mean = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd second = Eigen::VectorXd::Zero(d);
  for (const auto& c : post.components) {
    m.mean += c.weight * c.mu;
    second += c.weight * (c.marginal_variance() + c.mu.cwiseAbs2());
  }
  m.variance = second - m.mean.cwiseAbs2();
  return m;
}

Eigen::MatrixXd mixture_covariance_dense(const MixturePosterior& post) {
  const int d = post.d_psi();
  if (d > 512) throw std::invalid_argument("dense covariance refused above 512 dimensions");
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& c : post.components) {
    cov += c.weight * (c.dense_covariance() + c.mu * c.mu.transpose());
    mean += c.weight * c.mu;
  }
  return cov - mean * mean.transpose();
}

Eigen::VectorXd mixture_covariance_apply(const MixturePosterior& post,
                                         const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(v.size());
  for (const auto& c : post.components) {
    out += c.weight * (LowRankCovariance(c).apply(v) + c.mu * c.mu.dot(v));
    mean += c.weight * c.mu;
  }
  return out - mean * mean.dot(v);
}

namespace {

double component_sd(const MixtureComponent& c, int index) {
  double v = 0.0;
  for (int k = 0; k < c.d_theta(); ++k) v += c.W(index, k) * c.W(index, k) / c.lambda(k);
  if (c.residual_enabled) v += 1.0 / c.lambda_eta;
  return std::sqrt(v);
}

}  // namespace

double marginal_density(const MixturePosterior& post, int index, double value) {
  if (index < 0 || index >= post.d_psi()) throw std::out_of_range("marginal index");
  double p = 0.0;
  for (const auto& c : post.components) {
    const double sd = component_sd(c, index);
    const double z = (value - c.mu(index)) / sd;
    p += c.weight * std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
  }
  return p;
}

double marginal_cdf(const MixturePosterior& post, int index, double value) {
  if (index < 0 || index >= post.d_psi()) throw std::out_of_range("marginal index");
  double p = 0.0;
  for (const auto& c : post.components) {
    const double z = (value - c.mu(index)) / component_sd(c, index);
    p += c.weight * 0.5 * std::erfc(-z / std::numbers::sqrt2);
  }
  return p;
}

double marginal_quantile(const MixturePosterior& post, int index, double q,
                         double tol) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile must lie in (0, 1)");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : post.components) {
    const double sd = component_sd(c, index);
    lo = std::min(lo, c.mu(index) - 40.0 * sd);
    hi = std::max(hi, c.mu(index) + 40.0 * sd);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = marginal_cdf(post, index, mid) - q;
    if (std::abs(f) <= tol) return mid;
    (f < 0.0 ? lo : hi) = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

Eigen::MatrixXd credible_cut(const MixturePosterior& post,
                             const std::vector<int>& indices,
                             const std::vector<double>& quantiles) {
  Eigen::MatrixXd out(indices.size(), quantiles.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    for (std::size_t k = 0; k < quantiles.size(); ++k) {
      out(i, k) = marginal_quantile(post, indices[i], quantiles[k]);
    }
  }
  return out;
}

double log_density(const MixturePosterior& post, const Eigen::VectorXd& psi) {
  const int d = post.d_psi();
  std::vector<double> terms;
  for (const auto& c : post.components) {
    if (!(c.weight > 0.0)) continue;
    const LowRankCovariance cov(c);
    const Eigen::VectorXd r = psi - c.mu;
    terms.push_back(std::log(c.weight) - 0.5 * r.dot(cov.apply_inverse(r)) -
                    0.5 * cov.log_det() - 0.5 * d * std::log(2.0 * std::numbers::pi));
  }
  const double m = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

PosteriorSamples sample_psi(const MixturePosterior& post, int n,
                            std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample count must be positive");
  std::mt19937_64 rng(seed);
  std::vector<double> w;
  for (const auto& c : post.components) w.push_back(c.weight);
  std::discrete_distribution<int> pick(w.begin(), w.end());
  std::normal_distribution<double> normal;
  const int d = post.d_psi();
  PosteriorSamples out;
  out.psi.resize(n, d);
  out.component.resize(n);
  for (int m = 0; m < n; ++m) {
    const int s = pick(rng);
    const auto& c = post.components[s];
    Eigen::VectorXd theta(c.d_theta());
    for (int k = 0; k < c.d_theta(); ++k) theta(k) = normal(rng) / std::sqrt(c.lambda(k));
    Eigen::VectorXd x = c.mu + c.W * theta;
    if (c.residual_enabled) {
      for (int i = 0; i < d; ++i) x(i) += normal(rng) / std::sqrt(c.lambda_eta);
    }
    out.psi.row(m) = x.transpose();
    out.component[m] = s;
  }
  return out;
}

}  // namespace vbmix
