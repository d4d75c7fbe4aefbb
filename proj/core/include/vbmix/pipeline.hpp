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

#ifndef VBMIX_PIPELINE_HPP_
#define VBMIX_PIPELINE_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbmix/adaptive.hpp"
#include "vbmix/fem/scenario.hpp"
#include "vbmix/forward_model.hpp"
#include "vbmix/importance.hpp"
#include "vbmix/mean_prior.hpp"
#include "vbmix/posterior.hpp"

namespace vbmix {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FemSetup {
  double lx = 50.0;
  double ly = 50.0;
  int nx = 20;  // inverse mesh
  int ny = 20;
  int data_nx = 40;  // mesh used to synthesize the observations
  int data_ny = 40;
  double nu = 0.3;
  Eigen::Vector2d traction{0.0, -100.0};
  fem::Scenario scenario;
  double snr = 1000.0;
  bool half_observations = false;
};

struct RunConfig {
  std::string model;  // "toy" or "fem"
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  double toy_y_hat = 0.45;
  std::optional<double> toy_psi_true;  // defines the true noise precision
  FemSetup fem;

  NoisePrior noise;
  double a_phi = 0.0;
  double b_phi = 0.0;
  double kappa = 0.0;  // isotropic part of the mean prior

  VbConfig vb;
  AdaptiveConfig adaptive;

  int validation_samples = 0;
  std::optional<std::uint64_t> validation_seed;
  double validation_min_ess = 0.0;
  int mcmc_steps = 0;
  double mcmc_proposal_std = 0.35;

  std::string canonical;  // normalized JSON echo of the accepted config
};

/// Throws ConfigError naming the offending field.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

struct Problem {
  std::unique_ptr<ForwardModel> model;
  MeanPrior prior;
  Eigen::VectorXd y_hat;
  std::optional<double> tau_true;
  Eigen::VectorXd truth;          // reference parameter field, may be empty
  std::vector<bool> inclusion;    // FEM only
};

/// Model and mean prior only; no synthetic data.
Problem build_model(const RunConfig& cfg);
/// Model, prior and observations.
Problem build_problem(const RunConfig& cfg);

struct RunOutcome {
  AdaptiveResult result;
  Problem problem;
  std::optional<ImportanceResult> validation;
  std::optional<McmcResult> mcmc;
  double seconds = 0.0;  // whole pipeline
  double inference_seconds = 0.0;
  double validation_seconds = 0.0;
  double mcmc_seconds = 0.0;
};

/// Generates data, runs the adaptive mixture, optionally validates, and
/// writes every artifact under `out`.
RunOutcome run_pipeline(const RunConfig& cfg, const std::filesystem::path& out);

MixturePosterior load_posterior(const std::filesystem::path& dir);
RunConfig load_artifact_config(const std::filesystem::path& dir);
Eigen::VectorXd load_observations(const std::filesystem::path& dir);

/// IS validation of stored artifacts; writes validation.json.
ImportanceResult validate_artifacts(const std::filesystem::path& dir, int M,
                                    std::optional<std::uint64_t> seed = {});

/// Writes the CSV bundle under dir/report.
void emit_report(const std::filesystem::path& dir);

struct CheckItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckItem> check_artifacts(const std::filesystem::path& dir);

}  // namespace vbmix

#endif  // VBMIX_PIPELINE_HPP_
