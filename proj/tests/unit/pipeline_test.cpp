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

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "vbmix/io.hpp"
#include "vbmix/pipeline.hpp"

namespace vbmix {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json toy_json() {
  return json::parse(R"({
    "model": "toy", "seed": 3,
    "toy": {"y_hat": 0.45, "psi_true": 0.8},
    "prior": {"a0": 50.0, "b0": 0.4802, "lambda0": 1e-10, "kappa": 1e-10},
    "adaptive": {"S0": 4, "delta_S": 3, "alpha": 10.0, "init_mean": 0.0, "init_std": 1.0},
    "basis": {"policy": "fixed", "d_fixed": 1, "residual": false},
    "validation": {"samples": 500, "mcmc_steps": 2000, "mcmc_proposal_std": 0.35}
  })");
}

fs::path scratch(const std::string& tag) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path p = fs::temp_directory_path() /
               (std::string("vbmix_") + info->test_suite_name() + "_" + info->name() + "_" + tag);
  fs::remove_all(p);
  return p;
}

std::string missing_field_message(const std::string& pointer) {
  json j = toy_json();
  const json::json_pointer ptr(pointer);
  j[ptr.parent_pointer()].erase(ptr.back());
  try {
    parse_config(j.dump());
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, MissingFieldIsNamed) {
  EXPECT_NE(missing_field_message("/prior/a0").find("prior.a0"), std::string::npos);
  EXPECT_NE(missing_field_message("/seed").find("seed"), std::string::npos);
  EXPECT_NE(missing_field_message("/adaptive/delta_S").find("adaptive.delta_S"),
            std::string::npos);
  EXPECT_NE(missing_field_message("/basis/policy").find("basis.policy"), std::string::npos);
}

TEST(Config, RejectsBadValues) {
  json j = toy_json();
  j["model"] = "beam";
  EXPECT_THROW(parse_config(j.dump()), ConfigError);
  j = toy_json();
  j["validation"]["samples"] = 50;
  EXPECT_THROW(parse_config(j.dump()), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
}

TEST(Config, FemFieldsParse) {
  const RunConfig cfg = load_config(fs::path(VBMIX_SOURCE_DIR) / "configs" / "fem_reduced.json");
  EXPECT_EQ(cfg.model, "fem");
  EXPECT_EQ(cfg.fem.nx, 20);
  EXPECT_EQ(cfg.fem.data_nx, 40);
  EXPECT_DOUBLE_EQ(cfg.fem.snr, 1000.0);
  EXPECT_EQ(cfg.adaptive.S0, 4);
}

TEST(Pipeline, SeedDeterminesEveryArtifact) {
  const RunConfig cfg = parse_config(toy_json().dump());
  const fs::path a = scratch("a");
  const fs::path b = scratch("b");
  const RunOutcome ra = run_pipeline(cfg, a);
  run_pipeline(cfg, b);
  for (const char* f : {"posterior.json", "trace.csv", "diagnostics.json", "validation.json",
                        "data.json"}) {
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
  }
  emit_report(a);
  emit_report(b);
  for (const auto& entry : fs::directory_iterator(a / "report")) {
    const fs::path other = b / "report" / entry.path().filename();
    EXPECT_EQ(read_file(entry.path()), read_file(other)) << entry.path().filename();
  }
  EXPECT_TRUE(fs::exists(a / "report" / "density.csv"));
  for (const CheckItem& item : check_artifacts(a)) {
    EXPECT_TRUE(item.passed) << item.name << ": " << item.detail;
  }
  ASSERT_TRUE(ra.validation.has_value());
  EXPECT_GT(ra.validation->ess, 0.5);

  RunConfig other = cfg;
  other.seed = 4;
  const fs::path c = scratch("c");
  run_pipeline(other, c);
  EXPECT_NE(read_file(a / "data.json").size(), 0u);
  EXPECT_NE(read_file(a / "diagnostics.json"), read_file(c / "diagnostics.json"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST(Pipeline, CorruptPosteriorIsReported) {
  const fs::path dir = scratch("x");
  RunConfig cfg = parse_config(toy_json().dump());
  cfg.validation_samples = 0;
  cfg.mcmc_steps = 0;
  run_pipeline(cfg, dir);
  EXPECT_NO_THROW(load_posterior(dir));
  {
    std::ofstream(dir / "posterior.json") << "{\"d_psi\": 1, \"components\": [";
  }
  EXPECT_THROW(load_posterior(dir), CorruptArtifacts);
  fs::remove(dir / "posterior.json");
  EXPECT_THROW(load_posterior(dir), CorruptArtifacts);
  fs::remove_all(dir);
}

TEST(Pipeline, ValidationBelowThresholdThrows) {
  json j = toy_json();
  j["validation"]["min_ess"] = 1.01;
  const RunConfig cfg = parse_config(j.dump());
  const fs::path dir = scratch("v");
  EXPECT_THROW(run_pipeline(cfg, dir), ValidationFailure);
  EXPECT_TRUE(fs::exists(dir / "validation.json"));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace vbmix
