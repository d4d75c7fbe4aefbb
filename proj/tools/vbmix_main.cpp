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

// vbmix: run, validate, report and check mixture posteriors.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "vbmix/forward_model.hpp"
#include "vbmix/importance.hpp"
#include "vbmix/io.hpp"
#include "vbmix/pipeline.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;
constexpr int kValidationFailure = 4;

int report_error(const std::string& kind, const std::string& message, int code) {
  nlohmann::json err = {{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive Gaussian-mixture variational inversion"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Generate data, infer the mixture and write artifacts");
  run->add_option("--config", config_path, "JSON configuration")->required();
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out", out_dir, "Artifact directory (default: config output)");
  bool verbose = false;
  run->add_flag("-v,--verbose", verbose, "Log progress to stderr");

  std::string artifacts;
  int samples = 0;
  auto* validate = app.add_subcommand("validate", "Importance-sampling check of stored posterior");
  validate->add_option("--artifacts", artifacts)->required();
  validate->add_option("--samples", samples)->required()->check(CLI::Range(100, 100000000));

  auto* report = app.add_subcommand("report", "Emit the CSV report bundle");
  report->add_option("--artifacts", artifacts)->required();

  auto* check = app.add_subcommand("check", "Run the invariant suite on stored artifacts");
  check->add_option("--artifacts", artifacts)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      vbmix::RunConfig cfg = vbmix::load_config(config_path);
      if (seed) cfg.seed = *seed;
      if (verbose) {
        cfg.vb.progress = [](const std::string& msg) { std::cerr << msg << std::endl; };
      }
      const std::filesystem::path out = out_dir.empty() ? cfg.output_dir : std::filesystem::path(out_dir);
      const auto oc = vbmix::run_pipeline(cfg, out);
      std::cout << "components " << oc.result.state.components.size() << "  d_theta "
                << oc.result.state.d_theta << "  forward calls "
                << oc.result.diagnostics.forward_calls << "  seconds " << oc.seconds << "\n";
      if (oc.validation) std::cout << "ess " << oc.validation->ess << "\n";
      std::cout << "artifacts written to " << out.string() << "\n";
    } else if (*validate) {
      const auto r = vbmix::validate_artifacts(artifacts, samples);
      std::cout << "ess " << r.ess << "  log evidence " << r.log_evidence << "\n";
    } else if (*report) {
      vbmix::emit_report(artifacts);
      std::cout << "report written to " << (std::filesystem::path(artifacts) / "report").string()
                << "\n";
    } else if (*check) {
      bool ok = true;
      for (const auto& item : vbmix::check_artifacts(artifacts)) {
        std::cout << (item.passed ? "PASS " : "FAIL ") << item.name;
        if (!item.detail.empty()) std::cout << "  " << item.detail;
        std::cout << "\n";
        ok = ok && item.passed;
      }
      if (!ok) return kValidationFailure;
    }
  } catch (const vbmix::ConfigError& e) {
    return report_error("config", e.what(), kConfigError);
  } catch (const vbmix::SolverFailure& e) {
    return report_error("solver", e.what(), kSolverFailure);
  } catch (const vbmix::ValidationFailure& e) {
    return report_error("validation", e.what(), kValidationFailure);
  } catch (const vbmix::CorruptArtifacts& e) {
    return report_error("validation", e.what(), kValidationFailure);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 1);
  }
  return kOk;
}
