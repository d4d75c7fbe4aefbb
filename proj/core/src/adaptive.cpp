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

#include "vbmix/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "vbmix/lowrank.hpp"
#include "vbmix/parallel.hpp"
#include "vbmix/rng.hpp"
#include "vbmix/vb_expectation.hpp"

namespace vbmix {
namespace {

double mean_log_prior(const MixtureComponent& c, const MeanPrior& prior) {
  Eigen::VectorXd phi;
  if (prior.jump_count() > 0) {
    if (c.phi_a.size() == prior.jump_count()) {
      phi = prior.phi_mean(c.phi_a, c.phi_b);
    } else {
      auto [a, b] = prior.hyperprior_update(c.mu);
      phi = prior.phi_mean(a, b);
    }
  }
  return prior.log_prior_grad(c.mu, phi).first;
}

double total_bound(const MixtureState& state, const MeanPrior& prior) {
  std::vector<double> logp;
  logp.reserve(state.components.size());
  for (const auto& c : state.components) logp.push_back(mean_log_prior(c, prior));
  return lower_bound(state.components, state.noise, logp);
}

void normalize_weights(std::vector<MixtureComponent>& comps) {
  double z = 0.0;
  for (const auto& c : comps) z += c.weight;
  if (!(z > 0.0)) {
    for (auto& c : comps) c.weight = 1.0 / comps.size();
    return;
  }
  for (auto& c : comps) c.weight /= z;
}

void grow_basis(MixtureState& state, const VbConfig& cfg) {
  for (auto& c : state.components) {
    auto rng = make_stream(cfg.seed, "coordinate",
                           static_cast<std::uint64_t>(c.id) * 4096 + c.d_theta());
    const Eigen::VectorXd col = orthogonal_column(c.W, rng);
    const int d = c.d_theta();
    const double l0 = d == 0 ? cfg.lambda0_first
                             : ladder_next(cfg.lambda0_first, c.lambda(d - 1),
                                           c.lambda0(d - 1));
    c.W.conservativeResize(Eigen::NoChange, d + 1);
    c.W.col(d) = col;
    c.lambda0.conservativeResize(d + 1);
    c.lambda.conservativeResize(d + 1);
    c.lambda0(d) = l0;
    c.lambda(d) = l0;
    const double data_part = c.lambda_eta - c.lambda0_eta;
    c.lambda0_eta = c.lambda0.maxCoeff();
    c.lambda_eta = c.lambda0_eta + std::max(0.0, data_part);
  }
  ++state.d_theta;
}

bool maybe_grow(MixtureState& state, const VbConfig& cfg, int d_psi,
                Diagnostics& diag) {
  if (!cfg.residual_enabled || state.d_theta >= d_psi) return false;
  if (!cfg.adaptive_d_theta) {
    if (state.d_theta >= cfg.d_theta_fixed) return false;
    grow_basis(state, cfg);
    return true;
  }
  std::vector<double> gains;
  double worst = 0.0;
  for (const auto& c : state.components) {
    const InformationGain g = information_gain(c.lambda0, c.lambda, c.d_theta());
    gains.push_back(g.gain);
    worst = std::max(worst, g.gain);
  }
  diag.information_gain.push_back(gains);
  if (cfg.progress) {
    cfg.progress("d_theta=" + std::to_string(state.d_theta) + " max gain " + std::to_string(worst));
  }
  if (worst <= cfg.info_gain_max || state.d_theta >= cfg.d_theta_max) return false;
  grow_basis(state, cfg);
  return true;
}

}  // namespace

MixtureComponent make_component(const Eigen::VectorXd& mu, int d_theta,
                                const VbConfig& cfg, int id) {
  MixtureComponent c;
  c.id = id;
  c.mu = mu;
  c.residual_enabled = cfg.residual_enabled;
  auto rng = make_stream(cfg.seed, "basis", static_cast<std::uint64_t>(id));
  c.W = init_orthonormal(static_cast<int>(mu.size()), d_theta, rng());
  c.lambda0 = Eigen::VectorXd::Constant(d_theta, cfg.lambda0_first);
  c.lambda = c.lambda0;
  c.lambda0_eta = cfg.lambda0_first;
  c.lambda_eta = c.lambda0_eta;
  return c;
}

void run_inner(MixtureState& state, int d_y, const VbConfig& cfg,
               Diagnostics& diag) {
  auto& comps = state.components;
  std::vector<double> bounds;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int sweep = 0; sweep < cfg.inner_max_sweeps; ++sweep) {
    state.noise = update_tau(comps, d_y, cfg.a0, cfg.b0);
    const double tau = state.noise.mean();
    parallel_for(static_cast<int>(comps.size()), cfg.workers, [&](int j) {
      MixtureComponent& c = comps[j];
      if (c.d_theta() > 0 && c.d_theta() < c.d_psi()) {
        const Eigen::VectorXd linv = c.lambda.cwiseInverse();
        const Eigen::MatrixXd& g = c.gram;
        auto objective = [&](const Eigen::MatrixXd& w) {
          return stiefel_objective_grad(w, g, linv, tau);
        };
        c.W = cayley_retract_search(c.W, objective, cfg.cayley).W;
      }
      update_theta_precisions(c, tau);
      update_eta_precision(c, tau);
    });
    update_component_weights(comps, tau);
    const double f = elaborated_bound(comps, state.noise, d_y);
    bounds.push_back(f);
    if (std::isfinite(prev)) {
      const double drop = (prev - f) / std::max(std::abs(prev), 1.0);
      diag.worst_inner_decrease = std::max(diag.worst_inner_decrease, drop);
      if (std::abs(f - prev) <= cfg.inner_rel_tol * std::max(std::abs(f), 1.0)) break;
    }
    prev = f;
  }
  diag.inner_bounds.push_back(std::move(bounds));
}

void run_fixed_s(MixtureState& state, const ForwardModel& model,
                 const Eigen::VectorXd& y_hat, const MeanPrior& prior,
                 const VbConfig& cfg, Diagnostics& diag) {
  auto& comps = state.components;
  if (comps.empty()) throw std::invalid_argument("run_fixed_s needs components");
  const int d_y = model.d_y();
  if (!state.tau_initialized) {
    MixtureComponent& c0 = comps.front();
    if (!c0.cache_valid) {
      c0.set_evaluation(model.evaluate_with_jacobian(c0.mu), y_hat);
      ++c0.forward_calls;
      ++diag.forward_calls;
    }
    const double tau0 = d_y / std::max(c0.residual_sq, 1e-300);
    state.noise.a0 = cfg.a0;
    state.noise.b0 = cfg.b0;
    state.noise.a = cfg.a0 + 0.5 * d_y;
    state.noise.b = state.noise.a / tau0;
    state.tau_initialized = true;
  }
  for (int outer = 0; outer < cfg.outer_max; ++outer) {
    const double tau = state.noise.mean();
    std::vector<int> todo;
    for (int j = 0; j < static_cast<int>(comps.size()); ++j) {
      const auto& c = comps[j];
      const bool stable = c.cache_valid && std::isfinite(c.tau_at_mu_opt) &&
                          std::abs(tau - c.tau_at_mu_opt) <=
                              cfg.tau_stability * c.tau_at_mu_opt;
      if (!stable) todo.push_back(j);
    }
    diag.mu_skipped += static_cast<int>(comps.size() - todo.size());
    std::vector<long> calls(todo.size(), 0);
    std::vector<char> failed(todo.size(), 0);
    parallel_for(static_cast<int>(todo.size()), cfg.workers, [&](int k) {
      const long before = comps[todo[k]].forward_calls;
      try {
        calls[k] = optimize_mu(comps[todo[k]], model, y_hat, tau, prior, cfg.mu)
                       .forward_calls;
      } catch (const SolverFailure&) {
        failed[k] = 1;
        calls[k] = comps[todo[k]].forward_calls - before + 1;
      }
    });
    for (long n : calls) diag.forward_calls += n;
    diag.mu_optimizations += static_cast<int>(todo.size());
    // Components whose mean cannot be solved for are dropped.
    if (std::find(failed.begin(), failed.end(), 1) != failed.end()) {
      std::vector<MixtureComponent> kept;
      for (int j = 0, k = 0; j < static_cast<int>(comps.size()); ++j) {
        const bool was_todo = k < static_cast<int>(todo.size()) && todo[k] == j;
        if (was_todo && failed[k++]) {
          diag.solver_failures.push_back(comps[j].id);
          continue;
        }
        kept.push_back(std::move(comps[j]));
      }
      if (kept.empty()) throw SolverFailure("forward solve failed for every component", 0, 0.0, {});
      comps = std::move(kept);
      normalize_weights(comps);
      continue;
    }
    if (todo.empty() && outer > 0) break;

    do {
      run_inner(state, d_y, cfg, diag);
    } while (maybe_grow(state, cfg, model.d_psi(), diag));

    TracePoint tp;
    tp.forward_calls = diag.forward_calls;
    tp.bound = total_bound(state, prior);
    tp.components = static_cast<int>(comps.size());
    tp.d_theta = state.d_theta;
    diag.trace.push_back(tp);
    if (cfg.progress) {
      cfg.progress("outer " + std::to_string(outer) + ": S=" + std::to_string(tp.components) +
                   " d_theta=" + std::to_string(tp.d_theta) + " calls=" +
                   std::to_string(tp.forward_calls) + " F=" + std::to_string(tp.bound) +
                   " tau=" + std::to_string(state.noise.mean()));
    }
    if (todo.empty()) break;
  }
}

namespace {

void warm_start(MixtureState& state, const ForwardModel& model,
                const Eigen::VectorXd& y_hat, const MeanPrior& prior,
                const VbConfig& cfg, const AdaptiveConfig& acfg, Diagnostics& diag) {
  MeanPrior fixed = prior;
  fixed.a_phi = 1e6;
  fixed.b_phi = fixed.a_phi / acfg.warm_start_phi;
  auto& comps = state.components;
  const double d_y = model.d_y();
  std::vector<long> calls(comps.size(), 0);
  std::vector<char> failed(comps.size(), 0);
  parallel_for(static_cast<int>(comps.size()), cfg.workers, [&](int j) {
    MixtureComponent& c = comps[j];
    const long before = c.forward_calls;
    try {
      if (!c.cache_valid) {
        c.set_evaluation(model.evaluate_with_jacobian(c.mu), y_hat);
        ++c.forward_calls;
      }
      for (int it = 0; it < acfg.warm_start_iterations; ++it) {
        const double tau = d_y / std::max(c.residual_sq, 1e-300);
        optimize_mu(c, model, y_hat, tau, fixed, cfg.mu);
      }
    } catch (const SolverFailure&) {
      failed[j] = 1;
    }
    calls[j] = c.forward_calls - before;
    c.tau_at_mu_opt = std::numeric_limits<double>::quiet_NaN();
  });
  for (long n : calls) diag.forward_calls += n;
  std::vector<MixtureComponent> kept;
  for (std::size_t j = 0; j < comps.size(); ++j) {
    if (failed[j]) {
      diag.solver_failures.push_back(comps[j].id);
    } else {
      kept.push_back(std::move(comps[j]));
    }
  }
  if (kept.empty()) throw SolverFailure("forward solve failed for every component", 0, 0.0, {});
  comps = std::move(kept);
  normalize_weights(comps);
  if (cfg.progress) {
    cfg.progress("warm start: " + std::to_string(comps.size()) + " components, calls=" +
                 std::to_string(diag.forward_calls));
  }
}

}  // namespace

int select_parent(const MixtureState& state, const std::vector<int>& skip) {
  const double tau = state.noise.mean();
  int best = -1;
  double best_value = std::numeric_limits<double>::infinity();
  bool all_skipped = true;
  for (const auto& c : state.components) {
    if (std::find(skip.begin(), skip.end(), c.id) == skip.end()) all_skipped = false;
  }
  for (int j = 0; j < static_cast<int>(state.components.size()); ++j) {
    const auto& c = state.components[j];
    if (!all_skipped && std::find(skip.begin(), skip.end(), c.id) != skip.end()) continue;
    const double v = bound_contribution(c, tau);
    if (v < best_value) {
      best_value = v;
      best = j;
    }
  }
  return best;
}

std::vector<MixtureComponent> propose_birth(const MixtureState& state,
                                            int parent, int count,
                                            double alpha, std::mt19937_64& rng,
                                            int first_id) {
  const MixtureComponent& p = state.components.at(parent);
  std::normal_distribution<double> normal;
  std::vector<MixtureComponent> out;
  for (int k = 0; k < count; ++k) {
    MixtureComponent c = p;
    c.id = first_id + k;
    Eigen::VectorXd theta(p.d_theta());
    for (int i = 0; i < p.d_theta(); ++i) theta(i) = normal(rng) / std::sqrt(p.lambda(i));
    Eigen::VectorXd step = p.W * theta;
    if (p.residual_enabled) {
      Eigen::VectorXd eta(p.d_psi());
      for (int i = 0; i < p.d_psi(); ++i) eta(i) = normal(rng) / std::sqrt(p.lambda_eta);
      step += alpha * eta;
    } else {
      step *= alpha;
    }
    c.mu = p.mu + step;
    c.invalidate_cache();
    c.tau_at_mu_opt = std::numeric_limits<double>::quiet_NaN();
    c.forward_calls = 0;
    c.mu_iterations = 0;
    c.phi_a.resize(0);
    c.phi_b.resize(0);
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

// Proposed components missing from the state were dropped by a solver failure.
void record_solver_failures(const MixtureState& state, AttemptRecord& rec) {
  for (int id : rec.proposed) {
    const bool present = std::any_of(state.components.begin(), state.components.end(),
                                     [&](const MixtureComponent& c) { return c.id == id; });
    if (!present) {
      rec.deaths.push_back({id, kSolverFailureKiller,
                            std::numeric_limits<double>::quiet_NaN(), 0.0});
    }
  }
}

// Removes candidates that duplicate an earlier component, then components
// with negligible weight. Returns ids of surviving candidates.
std::vector<int> death_and_prune(MixtureState& state,
                                 const std::vector<int>& candidates,
                                 const AdaptiveConfig& acfg,
                                 AttemptRecord& rec) {
  auto& comps = state.components;
  std::vector<bool> dead(comps.size(), false);
  auto is_candidate = [&](int id) {
    return std::find(candidates.begin(), candidates.end(), id) != candidates.end();
  };
  std::vector<int> accepted;
  for (int j = 0; j < static_cast<int>(comps.size()); ++j) {
    if (!is_candidate(comps[j].id)) continue;
    std::vector<double> dists;
    int killer = -1;
    double kill_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < static_cast<int>(comps.size()); ++k) {
      if (k == j || dead[k]) continue;
      const bool earlier_new = is_candidate(comps[k].id) && k < j;
      if (is_candidate(comps[k].id) && !earlier_new) continue;
      const double d = component_distance(comps[k], comps[j]);
      dists.push_back(d);
      if (d < acfg.d_min && d < kill_d) {
        kill_d = d;
        killer = comps[k].id;
      }
    }
    rec.distances.push_back(dists);
    if (killer >= 0) {
      dead[j] = true;
      rec.deaths.push_back({comps[j].id, killer, kill_d, comps[j].weight});
    }
  }
  std::vector<MixtureComponent> kept;
  for (std::size_t j = 0; j < comps.size(); ++j) {
    if (!dead[j]) kept.push_back(std::move(comps[j]));
  }
  comps = std::move(kept);
  update_component_weights(comps, state.noise.mean());
  std::vector<MixtureComponent> heavy;
  for (auto& c : comps) {
    if (c.weight < acfg.q_min && comps.size() > 1) {
      rec.deaths.push_back({c.id, -1, 0.0, c.weight});
    } else {
      heavy.push_back(std::move(c));
    }
  }
  comps = std::move(heavy);
  update_component_weights(comps, state.noise.mean());
  for (const auto& c : comps) {
    if (is_candidate(c.id)) accepted.push_back(c.id);
  }
  return accepted;
}

}  // namespace

AdaptiveResult run_adaptive(const ForwardModel& model,
                            const Eigen::VectorXd& y_hat,
                            const MeanPrior& prior, const VbConfig& cfg,
                            const AdaptiveConfig& acfg) {
  if (acfg.S0 < 1 || acfg.delta_S < 1 || acfg.L_max < 1) {
    throw std::invalid_argument("adaptive configuration needs S0, delta_S, L_max >= 1");
  }
  const long calls_at_start = model.call_count();
  AdaptiveResult res;
  MixtureState& state = res.state;
  Diagnostics& diag = res.diagnostics;
  const int d_psi = model.d_psi();
  state.d_theta = cfg.residual_enabled ? 1 : d_psi;

  auto init_rng = make_stream(cfg.seed, "init");
  std::normal_distribution<double> normal;
  std::vector<int> initial;
  for (int k = 0; k < acfg.S0; ++k) {
    Eigen::VectorXd mu(d_psi);
    for (int i = 0; i < d_psi; ++i) mu(i) = acfg.init_mean + acfg.init_std * normal(init_rng);
    MixtureComponent c = make_component(mu, state.d_theta, cfg, state.next_id++);
    c.weight = 1.0 / acfg.S0;
    initial.push_back(c.id);
    state.components.push_back(std::move(c));
  }
  if (acfg.warm_start_phi > 0.0) warm_start(state, model, y_hat, prior, cfg, acfg, diag);
  run_fixed_s(state, model, y_hat, prior, cfg, diag);

  AttemptRecord init_rec;
  init_rec.attempt = 0;
  init_rec.proposed = initial;
  record_solver_failures(state, init_rec);
  init_rec.survivors = death_and_prune(state, initial, acfg, init_rec);
  run_fixed_s(state, model, y_hat, prior, cfg, diag);
  for (const auto& c : state.components) init_rec.weights.emplace_back(c.id, c.weight);
  diag.lineage.push_back(init_rec);

  int L = 0;
  std::vector<int> failed_parents;
  for (int attempt = 1; L < acfg.L_max && attempt <= acfg.max_attempts; ++attempt) {
    AttemptRecord rec;
    rec.attempt = attempt;
    const int parent = select_parent(state, failed_parents);
    rec.parent_id = state.components[parent].id;
    auto rng = make_stream(cfg.seed, "birth", static_cast<std::uint64_t>(attempt));
    auto born = propose_birth(state, parent, acfg.delta_S, acfg.alpha, rng, state.next_id);
    state.next_id += acfg.delta_S;
    for (auto& c : born) {
      rec.proposed.push_back(c.id);
      state.components.push_back(std::move(c));
    }
    for (auto& c : state.components) c.weight = 1.0;
    normalize_weights(state.components);

    run_fixed_s(state, model, y_hat, prior, cfg, diag);
    record_solver_failures(state, rec);
    rec.survivors = death_and_prune(state, rec.proposed, acfg, rec);
    run_fixed_s(state, model, y_hat, prior, cfg, diag);

    if (rec.survivors.empty()) {
      ++L;
      failed_parents.push_back(rec.parent_id);
    } else {
      L = 0;
      failed_parents.clear();
    }
    rec.L_after = L;
    if (cfg.progress) {
      cfg.progress("attempt " + std::to_string(attempt) + ": parent " +
                   std::to_string(rec.parent_id) + ", " + std::to_string(rec.survivors.size()) +
                   " survivors, S=" + std::to_string(state.components.size()) +
                   ", L=" + std::to_string(L));
    }
    for (const auto& c : state.components) rec.weights.emplace_back(c.id, c.weight);
    diag.lineage.push_back(std::move(rec));
  }
  diag.forward_calls = model.call_count() - calls_at_start;
  return res;
}

void check_state_invariants(const MixtureState& state) {
  double sum = 0.0;
  for (const auto& c : state.components) {
    c.check_invariants(1e-10);
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::logic_error("mixture weights do not sum to one");
  }
  if (!(state.noise.a > 0.0) || !(state.noise.b > 0.0)) {
    throw std::logic_error("invalid noise posterior");
  }
}

}  // namespace vbmix
