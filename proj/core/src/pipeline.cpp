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

#include "vbmix/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <cmath>
#include <limits>
#include <sstream>

#include "vbmix/fem/elastography_model.hpp"
#include "vbmix/io.hpp"
#include "vbmix/parallel.hpp"
#include "vbmix/rng.hpp"
#include "vbmix/toy_cubic.hpp"

namespace vbmix {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("field '" + path_ + "' must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) const {
    if (!j_.contains(key)) throw ConfigError("missing required field '" + name(key) + "'");
    return j_.at(key);
  }

  Section section(const std::string& key) const { return Section(at(key), name(key)); }

  template <typename T>
  T get(const std::string& key) const {
    try {
      return at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("field '" + name(key) + "' has the wrong type");
    }
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  std::string name(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
};

Eigen::Vector2d get_pair(const Section& s, const std::string& key) {
  const auto v = s.get<std::vector<double>>(key);
  if (v.size() != 2) throw ConfigError("field '" + s.name(key) + "' must have two entries");
  return {v[0], v[1]};
}

void require_positive(double v, const std::string& name) {
  if (!(v > 0.0)) throw ConfigError("field '" + name + "' must be positive");
}

fem::Inclusion parse_inclusion(const json& j, const std::string& path) {
  Section s(j, path);
  fem::Inclusion inc;
  const auto shape = s.get<std::string>("shape");
  if (shape == "circle") {
    inc.shape = fem::Inclusion::Shape::kCircle;
    const double r = s.get<double>("radius");
    inc.radii = {r, r};
  } else if (shape == "ellipse") {
    inc.shape = fem::Inclusion::Shape::kEllipse;
    inc.radii = get_pair(s, "radii");
  } else {
    throw ConfigError("field '" + s.name("shape") + "' must be circle or ellipse");
  }
  inc.center = get_pair(s, "center");
  inc.modulus = s.get<double>("modulus");
  require_positive(inc.modulus, s.name("modulus"));
  require_positive(inc.radii.minCoeff(), s.name("radius"));
  return inc;
}

RunConfig parse_root(const json& root) {
  Section top(root, "");
  RunConfig cfg;
  cfg.model = top.get<std::string>("model");
  cfg.seed = top.get<std::uint64_t>("seed");
  cfg.output_dir = top.get_or<std::string>("output", "runs/" + cfg.model);
  cfg.vb.seed = cfg.seed;

  if (cfg.model == "toy") {
    Section toy = top.section("toy");
    cfg.toy_y_hat = toy.get<double>("y_hat");
    if (toy.has("psi_true")) cfg.toy_psi_true = toy.get<double>("psi_true");
  } else if (cfg.model == "fem") {
    Section f = top.section("fem");
    const Eigen::Vector2d dom = get_pair(f, "domain");
    cfg.fem.lx = dom(0);
    cfg.fem.ly = dom(1);
    const Eigen::Vector2d mesh = get_pair(f, "mesh");
    const Eigen::Vector2d data = get_pair(f, "data_mesh");
    cfg.fem.nx = static_cast<int>(mesh(0));
    cfg.fem.ny = static_cast<int>(mesh(1));
    cfg.fem.data_nx = static_cast<int>(data(0));
    cfg.fem.data_ny = static_cast<int>(data(1));
    if (cfg.fem.nx < 1 || cfg.fem.ny < 1 || cfg.fem.data_nx % cfg.fem.nx != 0 ||
        cfg.fem.data_ny % cfg.fem.ny != 0) {
      throw ConfigError("field 'fem.data_mesh' must be a positive integer refinement of 'fem.mesh'");
    }
    cfg.fem.nu = f.get_or("nu", 0.3);
    if (f.has("traction")) cfg.fem.traction = get_pair(f, "traction");
    cfg.fem.scenario.background = f.get<double>("background");
    require_positive(cfg.fem.scenario.background, "fem.background");
    const json& incs = f.at("inclusions");
    if (!incs.is_array()) throw ConfigError("field 'fem.inclusions' must be an array");
    for (std::size_t i = 0; i < incs.size(); ++i) {
      cfg.fem.scenario.inclusions.push_back(
          parse_inclusion(incs[i], "fem.inclusions[" + std::to_string(i) + "]"));
    }
    cfg.fem.snr = f.get<double>("snr");
    require_positive(cfg.fem.snr, "fem.snr");
    cfg.fem.half_observations = f.get_or("half_observations", false);
  } else {
    throw ConfigError("field 'model' must be toy or fem");
  }

  Section pr = top.section("prior");
  cfg.noise.a0 = pr.get<double>("a0");
  cfg.noise.b0 = pr.get<double>("b0");
  if (cfg.noise.a0 < 0.0 || cfg.noise.b0 < 0.0) {
    throw ConfigError("fields 'prior.a0' and 'prior.b0' must be non-negative");
  }
  cfg.vb.a0 = cfg.noise.a0;
  cfg.vb.b0 = cfg.noise.b0;
  cfg.vb.lambda0_first = pr.get<double>("lambda0");
  require_positive(cfg.vb.lambda0_first, "prior.lambda0");
  cfg.a_phi = pr.get_or("a_phi", 0.0);
  cfg.b_phi = pr.get_or("b_phi", 0.0);
  cfg.kappa = pr.get_or("kappa", 0.0);

  Section ad = top.section("adaptive");
  cfg.adaptive.S0 = ad.get<int>("S0");
  cfg.adaptive.delta_S = ad.get<int>("delta_S");
  cfg.adaptive.alpha = ad.get<double>("alpha");
  cfg.adaptive.q_min = ad.get_or("q_min", cfg.adaptive.q_min);
  cfg.adaptive.d_min = ad.get_or("d_min", cfg.adaptive.d_min);
  cfg.adaptive.L_max = ad.get_or("L_max", cfg.adaptive.L_max);
  cfg.adaptive.max_attempts = ad.get_or("max_attempts", cfg.adaptive.max_attempts);
  cfg.adaptive.init_mean = ad.get_or("init_mean", cfg.adaptive.init_mean);
  cfg.adaptive.init_std = ad.get_or("init_std", cfg.adaptive.init_std);
  cfg.adaptive.warm_start_phi = ad.get_or("warm_start_phi", cfg.adaptive.warm_start_phi);
  cfg.adaptive.warm_start_iterations =
      ad.get_or("warm_start_iterations", cfg.adaptive.warm_start_iterations);
  if (cfg.adaptive.S0 < 1 || cfg.adaptive.delta_S < 1) {
    throw ConfigError("fields 'adaptive.S0' and 'adaptive.delta_S' must be at least 1");
  }

  Section ba = top.section("basis");
  const auto policy = ba.get<std::string>("policy");
  if (policy == "adaptive") {
    cfg.vb.adaptive_d_theta = true;
  } else if (policy == "fixed") {
    cfg.vb.adaptive_d_theta = false;
  } else {
    throw ConfigError("field 'basis.policy' must be adaptive or fixed");
  }
  cfg.vb.d_theta_fixed = ba.get_or("d_fixed", 1);
  cfg.vb.d_theta_max = ba.get_or("d_max", cfg.vb.d_theta_max);
  cfg.vb.info_gain_max = ba.get_or("info_gain_max", cfg.vb.info_gain_max);
  cfg.vb.residual_enabled = ba.get_or("residual", true);

  if (top.has("solver")) {
    Section so = top.section("solver");
    cfg.vb.inner_max_sweeps = so.get_or("inner_max_sweeps", cfg.vb.inner_max_sweeps);
    cfg.vb.inner_rel_tol = so.get_or("inner_rel_tol", cfg.vb.inner_rel_tol);
    cfg.vb.outer_max = so.get_or("outer_max", cfg.vb.outer_max);
    cfg.vb.tau_stability = so.get_or("tau_stability", cfg.vb.tau_stability);
    cfg.vb.mu.max_steps = so.get_or("mu_max_steps", cfg.vb.mu.max_steps);
    cfg.vb.mu.rel_tol = so.get_or("mu_rel_tol", cfg.vb.mu.rel_tol);
    cfg.vb.cayley.max_iters = so.get_or("cayley_max_iters", cfg.vb.cayley.max_iters);
  }

  if (top.has("validation")) {
    Section va = top.section("validation");
    cfg.validation_samples = va.get_or("samples", 0);
    if (va.has("seed")) cfg.validation_seed = va.get<std::uint64_t>("seed");
    cfg.validation_min_ess = va.get_or("min_ess", 0.0);
    cfg.mcmc_steps = va.get_or("mcmc_steps", 0);
    cfg.mcmc_proposal_std = va.get_or("mcmc_proposal_std", cfg.mcmc_proposal_std);
    if (cfg.validation_samples != 0 && cfg.validation_samples < 100) {
      throw ConfigError("field 'validation.samples' must be 0 or at least 100");
    }
  }

  cfg.vb.workers = top.get_or("workers", 1);
  if (const char* env = std::getenv("VBMIX_WORKERS")) {
    (void)env;
    cfg.vb.workers = default_worker_count();
  }
  cfg.canonical = root.dump(2);
  return cfg;
}

json vec_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json read_json(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw CorruptArtifacts("malformed " + p.filename().string() + ": " + e.what());
  }
}

fem::FemProblem make_fem_problem(const FemSetup& s, int nx, int ny, bool half) {
  fem::FemProblem p;
  p.mesh = fem::make_structured_mesh(nx, ny, s.lx, s.ly);
  p.nu = s.nu;
  p.traction = s.traction;
  p.half_observations = half;
  return p;
}

std::uint64_t derived_seed(std::uint64_t master, const char* name) {
  auto rng = make_stream(master, name);
  return rng();
}

json lineage_json(const std::vector<AttemptRecord>& lineage) {
  json out = json::array();
  for (const auto& a : lineage) {
    json deaths = json::array();
    for (const auto& d : a.deaths) {
      deaths.push_back({{"component", d.component_id},
                        {"killer", d.killer_id},
                        {"distance", d.distance},
                        {"weight", d.weight}});
    }
    json weights = json::array();
    for (const auto& [id, q] : a.weights) weights.push_back({{"component", id}, {"weight", q}});
    out.push_back({{"attempt", a.attempt},
                   {"parent", a.parent_id},
                   {"proposed", a.proposed},
                   {"survivors", a.survivors},
                   {"deaths", deaths},
                   {"distances", a.distances},
                   {"weights", weights},
                   {"failures_after", a.L_after}});
  }
  return out;
}

json validation_json(const ImportanceResult& r, double min_ess,
                     const std::optional<McmcResult>& mcmc) {
  json j = {{"samples", r.M},
            {"ess", r.ess},
            {"min_ess", min_ess},
            {"passed", r.ess >= min_ess},
            {"log_evidence", r.log_evidence},
            {"log_evidence_psi", r.log_evidence_psi},
            {"forward_calls", r.forward_calls},
            {"failed_evaluations", r.failed_evaluations},
            {"guarded", r.guarded},
            {"component_mass", r.component_mass},
            {"mean", vec_json(r.mean)},
            {"variance", vec_json(r.variance)}};
  if (mcmc) {
    j["mcmc"] = {{"steps", mcmc->chain.rows()},
                 {"acceptance", mcmc->acceptance},
                 {"ess", mcmc->ess},
                 {"degenerate", mcmc->degenerate}};
  }
  return j;
}

std::string trace_csv(const std::vector<TracePoint>& trace) {
  CsvWriter csv({"forward_calls", "bound", "components", "d_theta"});
  for (const auto& t : trace) {
    csv.row({static_cast<double>(t.forward_calls), t.bound,
             static_cast<double>(t.components), static_cast<double>(t.d_theta)});
  }
  return csv.str();
}

std::optional<McmcResult> maybe_mcmc(const RunConfig& cfg, const Problem& pb,
                                     const MixturePosterior& post) {
  if (cfg.mcmc_steps <= 0) return std::nullopt;
  // Start from the heaviest component's mean.
  std::size_t best = 0;
  for (std::size_t s = 1; s < post.components.size(); ++s) {
    if (post.components[s].weight > post.components[best].weight) best = s;
  }
  return rw_mcmc_baseline(*pb.model, pb.y_hat, cfg.noise, cfg.kappa,
                          post.components[best].mu, cfg.mcmc_steps,
                          cfg.mcmc_proposal_std, derived_seed(cfg.seed, "mcmc"));
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_root(root);
}

RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  std::string text;
  try {
    text = read_file(path);
  } catch (const CorruptArtifacts& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

Problem build_model(const RunConfig& cfg) {
  Problem pb;
  if (cfg.model == "toy") {
    pb.model = std::make_unique<ToyModel>();
    pb.prior = make_isotropic_prior(1, cfg.kappa);
    if (cfg.toy_psi_true) pb.truth = Eigen::VectorXd::Constant(1, *cfg.toy_psi_true);
  } else {
    auto coarse = make_fem_problem(cfg.fem, cfg.fem.nx, cfg.fem.ny, cfg.fem.half_observations);
    pb.truth = fem::rasterize_log_modulus(cfg.fem.scenario, coarse.mesh);
    pb.inclusion = fem::inclusion_mask(cfg.fem.scenario, coarse.mesh);
    pb.prior = make_grid_jump_prior(cfg.fem.nx, cfg.fem.ny, cfg.a_phi, cfg.b_phi);
    pb.prior.kappa = cfg.kappa;
    pb.model = std::make_unique<fem::ElastographyModel>(std::move(coarse));
  }
  return pb;
}

Problem build_problem(const RunConfig& cfg) {
  Problem pb = build_model(cfg);
  if (cfg.model == "toy") {
    pb.y_hat = Eigen::VectorXd::Constant(1, cfg.toy_y_hat);
    if (cfg.toy_psi_true) {
      const double r = cfg.toy_y_hat - toy_evaluate(*cfg.toy_psi_true);
      if (r != 0.0) pb.tau_true = 1.0 / (r * r);
    }
  } else {
    const auto& model = static_cast<const fem::ElastographyModel&>(*pb.model);
    const auto fine = make_fem_problem(cfg.fem, cfg.fem.data_nx, cfg.fem.data_ny, false);
    const Eigen::VectorXd fine_log = fem::rasterize_log_modulus(cfg.fem.scenario, fine.mesh);
    Observation obs = fem::generate_synthetic(fine, fine_log, model.problem(), cfg.fem.snr,
                                              derived_seed(cfg.seed, "noise"));
    pb.y_hat = obs.values;
    pb.tau_true = obs.true_noise_precision;
  }
  return pb;
}

RunOutcome run_pipeline(const RunConfig& cfg_in, const fs::path& out) {
  RunConfig cfg = cfg_in;
  cfg.vb.seed = cfg.seed;
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome oc;
  oc.problem = build_problem(cfg);
  const Problem& pb = oc.problem;
  const long calls_before = pb.model->call_count();
  oc.result = run_adaptive(*pb.model, pb.y_hat, pb.prior, cfg.vb, cfg.adaptive);
  const long vb_calls = pb.model->call_count() - calls_before;
  auto since = [](std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
  };
  oc.inference_seconds = since(t0);

  MixturePosterior post{oc.result.state.components};
  if (cfg.validation_samples > 0) {
    const std::uint64_t is_seed = cfg.validation_seed.value_or(derived_seed(cfg.seed, "is"));
    const auto t1 = std::chrono::steady_clock::now();
    oc.validation = importance_validate(post, *pb.model, pb.y_hat, cfg.noise,
                                        cfg.validation_samples, is_seed, cfg.vb.workers);
    oc.validation_seconds = since(t1);
    const auto t2 = std::chrono::steady_clock::now();
    oc.mcmc = maybe_mcmc(cfg, pb, post);
    oc.mcmc_seconds = since(t2);
  }
  oc.seconds = since(t0);

  json config = json::parse(cfg.canonical);
  config["seed"] = cfg.seed;
  config["output"] = out.string();
  write_file_atomic(out / "config.json", config.dump(2) + "\n");

  json data = {{"y_hat", vec_json(pb.y_hat)}, {"truth", vec_json(pb.truth)}};
  data["tau_true"] = pb.tau_true ? json(*pb.tau_true) : json(nullptr);
  if (!pb.inclusion.empty()) data["inclusion"] = pb.inclusion;
  write_file_atomic(out / "data.json", data.dump(1) + "\n");

  write_file_atomic(out / "posterior.json", posterior_to_json(post));
  write_file_atomic(out / "trace.csv", trace_csv(oc.result.diagnostics.trace));

  const auto& st = oc.result.state;
  const auto& dg = oc.result.diagnostics;
  json run = {{"model", cfg.model},
              {"seed", cfg.seed},
              {"d_psi", pb.model->d_psi()},
              {"d_y", pb.model->d_y()},
              {"components", st.components.size()},
              {"d_theta", st.d_theta},
              {"noise", {{"a0", st.noise.a0}, {"b0", st.noise.b0}, {"a", st.noise.a},
                         {"b", st.noise.b}, {"mean", st.noise.mean()}}},
              {"forward_calls", vb_calls},
              {"mu_optimizations", dg.mu_optimizations},
              {"mu_skipped", dg.mu_skipped},
              {"worst_inner_decrease", dg.worst_inner_decrease},
              {"attempts", dg.lineage.size()},
              {"solver_failures", dg.solver_failures}};
  run["tau_true"] = pb.tau_true ? json(*pb.tau_true) : json(nullptr);
  run["information_gain"] = dg.information_gain.empty() ? json::array()
                                                         : json(dg.information_gain.back());
  write_file_atomic(out / "run.json", run.dump(2) + "\n");

  json diag = {{"lineage", lineage_json(dg.lineage)},
               {"information_gain", dg.information_gain},
               {"inner_bounds", dg.inner_bounds}};
  write_file_atomic(out / "diagnostics.json", diag.dump(1) + "\n");
  write_file_atomic(out / "timing.json",
                    json({{"seconds", oc.seconds},
                          {"inference_seconds", oc.inference_seconds},
                          {"validation_seconds", oc.validation_seconds},
                          {"mcmc_seconds", oc.mcmc_seconds}})
                            .dump(2) +
                        "\n");

  if (oc.validation) {
    write_file_atomic(out / "validation.json",
                      validation_json(*oc.validation, cfg.validation_min_ess, oc.mcmc).dump(2) +
                          "\n");
    if (oc.validation->ess < cfg.validation_min_ess) {
      throw ValidationFailure("effective sample size " + format_double(oc.validation->ess) +
                              " below " + format_double(cfg.validation_min_ess));
    }
  }
  return oc;
}

MixturePosterior load_posterior(const fs::path& dir) {
  MixturePosterior post = posterior_from_json(read_file(dir / "posterior.json"));
  try {
    post.validate();
  } catch (const std::logic_error& e) {
    throw CorruptArtifacts(std::string("stored posterior is invalid: ") + e.what());
  }
  return post;
}

RunConfig load_artifact_config(const fs::path& dir) {
  try {
    return parse_config(read_file(dir / "config.json"));
  } catch (const ConfigError& e) {
    throw CorruptArtifacts(std::string("stored config: ") + e.what());
  }
}

Eigen::VectorXd load_observations(const fs::path& dir) {
  const json data = read_json(dir / "data.json");
  try {
    return vec_from(data.at("y_hat"));
  } catch (const json::exception& e) {
    throw CorruptArtifacts(std::string("data.json: ") + e.what());
  }
}

ImportanceResult validate_artifacts(const fs::path& dir, int M,
                                    std::optional<std::uint64_t> seed) {
  const RunConfig cfg = load_artifact_config(dir);
  const MixturePosterior post = load_posterior(dir);
  Problem pb = build_model(cfg);
  pb.y_hat = load_observations(dir);
  if (pb.y_hat.size() != pb.model->d_y() || post.d_psi() != pb.model->d_psi()) {
    throw CorruptArtifacts("artifact dimensions do not match the configured model");
  }
  const std::uint64_t s =
      seed.value_or(cfg.validation_seed.value_or(derived_seed(cfg.seed, "is")));
  ImportanceResult r =
      importance_validate(post, *pb.model, pb.y_hat, cfg.noise, M, s, cfg.vb.workers);
  const auto mcmc = maybe_mcmc(cfg, pb, post);
  write_file_atomic(dir / "validation.json",
                    validation_json(r, cfg.validation_min_ess, mcmc).dump(2) + "\n");
  if (r.ess < cfg.validation_min_ess) {
    throw ValidationFailure("effective sample size " + format_double(r.ess) + " below " +
                            format_double(cfg.validation_min_ess));
  }
  return r;
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = lo + (hi - lo) * i / (n - 1);
  return x;
}

void write_cut(const fs::path& path, const MixturePosterior& post,
               const std::vector<int>& elems, const Eigen::VectorXd& mean,
               const Eigen::VectorXd& truth) {
  const Eigen::MatrixXd q = credible_cut(post, elems, {0.01, 0.5, 0.99});
  CsvWriter csv({"position", "element", "q01", "q50", "q99", "mean", "truth"});
  for (std::size_t k = 0; k < elems.size(); ++k) {
    const int e = elems[k];
    const double t = truth.size() ? truth(e) : std::numeric_limits<double>::quiet_NaN();
    csv.row({static_cast<double>(k), static_cast<double>(e), q(k, 0), q(k, 1), q(k, 2),
             mean(e), t});
  }
  write_file_atomic(path, csv.str());
}

}  // namespace

void emit_report(const fs::path& dir) {
  const RunConfig cfg = load_artifact_config(dir);
  const MixturePosterior post = load_posterior(dir);
  const json run = read_json(dir / "run.json");
  const json data = read_json(dir / "data.json");
  const fs::path rep = dir / "report";
  Eigen::VectorXd truth;
  double a = 0.0, b = 0.0;
  try {
    truth = vec_from(data.at("truth"));
    a = run.at("noise").at("a").get<double>();
    b = run.at("noise").at("b").get<double>();
  } catch (const json::exception& e) {
    throw CorruptArtifacts(std::string("run metadata: ") + e.what());
  }
  if (truth.size() != 0 && truth.size() != post.d_psi()) {
    throw CorruptArtifacts("truth field has the wrong length");
  }
  if (!(a > 0.0) || !(b > 0.0)) throw CorruptArtifacts("noise posterior is not proper");

  write_file_atomic(rep / "f_trace.csv", read_file(dir / "trace.csv"));

  const MixtureMoments mom = mixture_moments(post);
  const int d = post.d_psi();
  std::vector<Eigen::Vector2d> centers(d, Eigen::Vector2d::Zero());
  std::vector<int> diagonal, boundary;
  if (cfg.model == "fem") {
    const auto mesh = fem::make_structured_mesh(cfg.fem.nx, cfg.fem.ny, cfg.fem.lx, cfg.fem.ly);
    if (mesh.element_count() != d) throw CorruptArtifacts("mesh does not match posterior");
    for (int e = 0; e < d; ++e) centers[e] = mesh.centroid(e);
    const int nx = cfg.fem.nx, ny = cfg.fem.ny;
    for (int j = 0; j < ny; ++j) {
      const int i = std::min(nx - 1, static_cast<int>((j + 0.5) * nx / ny));
      diagonal.push_back(j * nx + i);
    }
    // Counter-clockwise around the domain edge, starting bottom-left.
    for (int i = 0; i < nx; ++i) boundary.push_back(i);
    for (int j = 1; j < ny; ++j) boundary.push_back(j * nx + nx - 1);
    for (int i = nx - 2; i >= 0 && ny > 1; --i) boundary.push_back((ny - 1) * nx + i);
    for (int j = ny - 2; j >= 1 && nx > 1; --j) boundary.push_back(j * nx);
  } else {
    diagonal = {0};
    boundary = {0};
  }

  CsvWriter ms({"element", "x", "y", "mean", "std", "truth"});
  for (int e = 0; e < d; ++e) {
    ms.row({static_cast<double>(e), centers[e](0), centers[e](1), mom.mean(e),
            std::sqrt(mom.variance(e)),
            truth.size() ? truth(e) : std::numeric_limits<double>::quiet_NaN()});
  }
  write_file_atomic(rep / "mean_std.csv", ms.str());
  write_cut(rep / "diagonal_cut.csv", post, diagonal, mom.mean, truth);
  write_cut(rep / "boundary_path.csv", post, boundary, mom.mean, truth);

  CsvWriter md({"element", "value", "density"});
  for (int e : diagonal) {
    const double sd = std::sqrt(mom.variance(e));
    double lo = mom.mean(e) - 6.0 * sd, hi = mom.mean(e) + 6.0 * sd;
    for (const auto& c : post.components) {
      const double cs = std::sqrt(c.marginal_variance()(e));
      lo = std::min(lo, c.mu(e) - 6.0 * cs);
      hi = std::max(hi, c.mu(e) + 6.0 * cs);
    }
    for (double x : linspace(lo, hi, 201)) {
      md.row({static_cast<double>(e), x, marginal_density(post, e, x)});
    }
  }
  write_file_atomic(rep / "marginal_density.csv", md.str());

  const double tm = a / b, tsd = std::sqrt(a) / b;
  CsvWriter td({"tau", "density"});
  for (double t : linspace(std::max(tm - 6.0 * tsd, tm * 1e-3), tm + 6.0 * tsd, 401)) {
    td.row({t, std::exp(a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(t) - b * t)});
  }
  write_file_atomic(rep / "tau_density.csv", td.str());

  if (cfg.model == "toy") {
    const Eigen::VectorXd y_hat = load_observations(dir);
    const GridDensity exact =
        toy_posterior_grid(y_hat(0), cfg.kappa, cfg.noise.a0, cfg.noise.b0, -2.5, 2.0, 2001);
    std::vector<double> corrected(exact.x.size(), std::numeric_limits<double>::quiet_NaN());
    if (fs::exists(dir / "validation.json")) {
      const json val = read_json(dir / "validation.json");
      const double log_z = val.value("log_evidence_psi", std::numeric_limits<double>::quiet_NaN());
      ToyModel model;
      corrected = corrected_density_1d(post, model, y_hat, cfg.noise, log_z, exact.x);
    }
    CsvWriter dc({"psi", "approx", "exact", "corrected"});
    for (std::size_t i = 0; i < exact.x.size(); ++i) {
      dc.row({exact.x[i], marginal_density(post, 0, exact.x[i]), exact.density[i],
              corrected[i]});
    }
    write_file_atomic(rep / "density.csv", dc.str());
  }
}

std::vector<CheckItem> check_artifacts(const fs::path& dir) {
  std::vector<CheckItem> items;
  auto add = [&](const std::string& name, bool ok, const std::string& detail) {
    items.push_back({name, ok, detail});
  };

  MixturePosterior post;
  try {
    post = posterior_from_json(read_file(dir / "posterior.json"));
    add("posterior_loads", true, std::to_string(post.components.size()) + " components");
  } catch (const std::exception& e) {
    add("posterior_loads", false, e.what());
    return items;
  }

  double wsum = 0.0;
  for (const auto& c : post.components) wsum += c.weight;
  add("weights_sum_to_one", std::abs(wsum - 1.0) <= 1e-12,
      "sum=" + format_double(wsum));

  double ortho = 0.0;
  bool lambda_ok = true;
  for (const auto& c : post.components) {
    const Eigen::MatrixXd g = c.W.transpose() * c.W;
    ortho = std::max(ortho, (g - Eigen::MatrixXd::Identity(g.rows(), g.cols()))
                                .cwiseAbs()
                                .maxCoeff());
    if (c.lambda.size() != c.lambda0.size() || (c.lambda.array() < c.lambda0.array()).any()) {
      lambda_ok = false;
    }
    if (c.residual_enabled && c.lambda_eta < c.lambda0_eta) lambda_ok = false;
  }
  add("basis_orthonormal", ortho <= 1e-10, "max|W^T W - I|=" + format_double(ortho));
  add("precision_above_prior", lambda_ok, "");

  const std::string text = read_file(dir / "posterior.json");
  add("round_trip", posterior_to_json(post) == text, "");

  try {
    const json run = read_json(dir / "run.json");
    const double worst = run.at("worst_inner_decrease").get<double>();
    add("inner_bound_monotone", worst <= 1e-8, "worst relative drop=" + format_double(worst));
  } catch (const std::exception& e) {
    add("inner_bound_monotone", false, e.what());
  }

  if (fs::exists(dir / "validation.json")) {
    try {
      const json val = read_json(dir / "validation.json");
      const double ess = val.at("ess").get<double>();
      const int M = val.at("samples").get<int>();
      add("ess_in_range", ess >= 1.0 / M - 1e-15 && ess <= 1.0 + 1e-12,
          "ess=" + format_double(ess));
    } catch (const std::exception& e) {
      add("ess_in_range", false, e.what());
    }
  }
  return items;
}

}  // namespace vbmix
