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

#ifndef VBMIX_FORWARD_MODEL_HPP_
#define VBMIX_FORWARD_MODEL_HPP_

#include <Eigen/Dense>

#include <atomic>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbmix {

/// Raised when a forward solver fails to converge.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, int iterations, double residual,
                std::vector<double> history = {})
      : std::runtime_error(what),
        iterations_(iterations),
        residual_(residual),
        history_(std::move(history)) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  int iterations_;
  double residual_;
  std::vector<double> history_;
};

/// Measured data vector, optionally with the noise precision used to make it.
struct Observation {
  Eigen::VectorXd values;
  std::optional<double> true_noise_precision;
};

struct Evaluation {
  Eigen::VectorXd prediction;
  Eigen::MatrixXd jacobian;  // d_y x d_psi
};

/// Contract every inverse problem plugs into. Each call of
/// evaluate_with_jacobian() or evaluate() counts as one forward call.
/// Implementations must be safe to call concurrently at distinct inputs.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;

  virtual int d_psi() const = 0;
  virtual int d_y() const = 0;

  Evaluation evaluate_with_jacobian(const Eigen::VectorXd& psi) const;

  /// Prediction only; used where the Jacobian is not consumed.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& psi) const;

  long call_count() const noexcept { return calls_.load(); }
  void reset_call_count() noexcept { calls_.store(0); }

 protected:
  virtual Evaluation do_evaluate_with_jacobian(
      const Eigen::VectorXd& psi) const = 0;
  virtual Eigen::VectorXd do_evaluate(const Eigen::VectorXd& psi) const;

 private:
  void check_input(const Eigen::VectorXd& psi) const;

  mutable std::atomic<long> calls_{0};
};

}  // namespace vbmix

#endif  // VBMIX_FORWARD_MODEL_HPP_
