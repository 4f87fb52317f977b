// Copyright 2026 The fwlab Authors
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

#include "fwlab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "fwlab/comparison_harness.hpp"
#include "fwlab/filtering_sim.hpp"
#include "fwlab/fit.hpp"
#include "fwlab/fourier_metric.hpp"
#include "fwlab/hamiltonians.hpp"
#include "fwlab/parallel.hpp"
#include "fwlab/prediction_game.hpp"
#include "fwlab/rng.hpp"
#include "fwlab/sobolev.hpp"

namespace fwlab::cli {

using nlohmann::json;

std::string tool_version() {
#ifdef FWLAB_VERSION
  return FWLAB_VERSION;
#else
  return "0.0.0";
#endif
}

const std::vector<std::string>& targets() {
  static const std::vector<std::string> names = {
      "metric",     "sobolev-check", "commutator-check", "dissipation-check", "hamiltonian",
      "filter-sim", "game-sim",      "dp-value",         "comparison-doubling"};
  return names;
}

// ------------------------------------------------------------------ output

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return {buf, res.ptr};
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct TargetOutput {
  CsvTable csv;
  json summary = json::object();
  CheckReport check;
  std::optional<json> dump;
};

std::string num(double x) { return format_double(x); }
std::string num(int x) { return std::to_string(x); }
std::string num(std::size_t x) { return std::to_string(x); }

// --------------------------------------------------------- param helpers

void allow_keys(const json& params, const std::string& target,
                std::initializer_list<const char*> keys) {
  require(params.is_object(), "params of '" + target + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : params.items())
    if (!allowed.count(k)) throw InputError("unknown key '" + k + "' in params of '" + target + "'");
}

template <typename T>
T param(const json& p, const char* key, T fallback) {
  if (!p.contains(key)) return fallback;
  try {
    return p.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("param '") + key + "' has the wrong type");
  }
}

std::uint64_t require_seed(const Scenario& s) {
  require(s.seed.has_value(), "target '" + s.target + "' is stochastic and needs a seed");
  return *s.seed;
}

std::vector<int> int_list(const json& p, const char* key, int fallback) {
  if (!p.contains(key)) return {fallback};
  const json& v = p.at(key);
  if (v.is_number_integer()) return {v.get<int>()};
  require(v.is_array() && !v.empty(), std::string("param '") + key + "' must be an int or list");
  return v.get<std::vector<int>>();
}

Vec vec_from(const json& j) {
  const auto xs = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

Mat mat_from(const json& j) {
  if (j.is_number()) return Mat::Constant(1, 1, j.get<double>());
  const auto rows = j.get<std::vector<std::vector<double>>>();
  require(!rows.empty(), "matrix must have at least one row");
  Mat M(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r].size() == rows.front().size(), "ragged matrix");
    for (std::size_t c = 0; c < rows[r].size(); ++c) M(r, c) = rows[r][c];
  }
  return M;
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Each target's Fourier metric is built once per run.
FourierMetric metric_for(const json& p, int d) {
  const FourierConfig cfg =
      p.contains("fourier") ? fourier_config_from_json(p.at("fourier"), d) : FourierConfig::for_dim(d);
  return FourierMetric(cfg, d);
}

// ------------------------------------------------------------------ metric

TargetOutput run_metric(const Scenario& s) {
  const json& p = s.params;
  allow_keys(p, s.target, {"dim", "fourier", "cases"});
  const int d = param(p, "dim", 1);
  require(d >= 1 && d <= 3, "metric: dim must be 1, 2 or 3");
  require(p.contains("cases") && p.at("cases").is_array(), "metric: 'cases' must be a list");
  const FourierConfig cfg =
      p.contains("fourier") ? fourier_config_from_json(p.at("fourier"), d) : FourierConfig::for_dim(d);
  const FourierMetric metric(cfg, d);
  const std::string config_id = hex64(fnv1a64(to_json(cfg).dump()));

  TargetOutput out;
  out.csv.header = {"case", "inputs_hash", "rho_F", "d_F", "config_id"};
  json results = json::array();
  int k = 0;
  for (const json& c : p.at("cases")) {
    allow_keys(c, "metric case", {"id", "mu", "nu", "t", "s", "m", "n"});
    const std::string id = param(c, "id", std::string("case-") + std::to_string(k));
    const SignedAtomicMeasure mu = measure_from_json(c.at("mu"));
    const SignedAtomicMeasure nu = measure_from_json(c.at("nu"));
    const Vec m = c.contains("m") ? vec_from(c.at("m")) : Vec::Zero(d);
    const Vec n = c.contains("n") ? vec_from(c.at("n")) : Vec::Zero(d);
    const double rho = metric.rho(mu, nu);
    const double dF = metric.d_F(Theta(param(c, "t", 0.0), mu, m), Theta(param(c, "s", 0.0), nu, n));
    const std::string ih = hex64(fnv1a64(c.dump()));
    out.csv.add({id, ih, num(rho), num(dF), config_id});
    results.push_back({{"id", id}, {"rho_F", rho}, {"d_F", dF}});
    ++k;
  }
  out.summary = {{"config_id", config_id}, {"fourier", to_json(cfg)}, {"cases", results}};
  return out;
}

// ----------------------------------------------------------------- sobolev

constexpr double kPi = std::numbers::pi;

TargetOutput run_sobolev_check(const Scenario& s) {
  const json& p = s.params;
  allow_keys(p, s.target, {"dim", "n", "cases", "tol", "identity_tol"});
  const std::uint64_t seed = require_seed(s);
  const int d = param(p, "dim", 1);
  const std::size_t n = param<std::size_t>(p, "n", d == 1 ? 64 : 32);
  const int cases = param(p, "cases", 50);
  const double tol = param(p, "tol", 1e-8), id_tol = param(p, "identity_tol", 1e-9);
  const Box box = Box::cube(d, -kPi, 2.0 * kPi, n);
  const int modes = band_limit(box);

  TargetOutput out;
  out.check.name = "sobolev";
  out.csv.header = {"case", "residual", "bound", "ratio"};
  double worst_ratio = 0.0;
  auto row = [&](const std::string& id, double residual, double bound) {
    out.csv.add({id, num(residual), num(bound), num(residual / bound)});
    worst_ratio = std::max(worst_ratio, residual / bound);
    if (!(residual <= bound)) out.check.fail(id + " residual " + num(residual));
  };
  for (int i = 0; i < cases; ++i) {
    CounterRng rf(seed, {static_cast<std::uint64_t>(i), 0}), rh(seed, {static_cast<std::uint64_t>(i), 1});
    const GridFunction f = random_band_limited(box, rf, modes);
    const GridFunction h = random_band_limited(box, rh, modes);
    const double scale = 1.0 + f.max_abs();
    row("roundtrip-" + std::to_string(i),
        (bessel_potential(bessel_potential(f, 1.5), -1.5) - f).max_abs() / scale, id_tol);
    const double lhs = inner(bessel_potential(f, 1.5), h), rhs = inner(f, bessel_potential(h, 1.5));
    row("adjoint-" + std::to_string(i), std::abs(lhs - rhs) / (1.0 + std::abs(lhs)), id_tol);
    row("leibniz-" + std::to_string(i), leibniz_identity_check(f, h, 1, tol).worst, tol);
  }
  out.summary = {{"cases", cases}, {"worst_ratio", worst_ratio}, {"band_limit", modes}};
  return out;
}

TargetOutput run_commutator_check(const Scenario& s) {
  const json& p = s.params;
  allow_keys(p, s.target, {"n", "cases", "k", "modes", "max_ratio", "refine_tol"});
  const std::uint64_t seed = require_seed(s);
  const std::size_t n = param<std::size_t>(p, "n", 64);
  const int cases = param(p, "cases", 200), k = param(p, "k", 2), modes = param(p, "modes", 10);

  TargetOutput out;
  out.check.name = "commutator";
  out.csv.header = {"case", "residual", "bound", "ratio"};
  double worst[2] = {0.0, 0.0};
  for (int level = 0; level < 2; ++level) {
    const Box box = Box::cube(1, -kPi, 2.0 * kPi, level == 0 ? n : 2 * n);
    for (int i = 0; i < cases; ++i) {
      CounterRng rf(seed, {static_cast<std::uint64_t>(2 * i)});
      CounterRng rg(seed, {static_cast<std::uint64_t>(2 * i + 1)});
      const CommutatorResult c = commutator_residual(random_band_limited(box, rf, modes, 1.0),
                                                     random_band_limited(box, rg, modes, 1.0), k);
      worst[level] = std::max(worst[level], c.ratio());
      if (level == 0) out.csv.add({"commutator-" + std::to_string(i), num(c.residual), num(c.bound), num(c.ratio())});
    }
  }
  const double change = worst[0] > 0.0 ? std::abs(worst[1] - worst[0]) / worst[0] : 0.0;
  if (!std::isfinite(worst[0])) out.check.fail("non-finite ratio");
  if (p.contains("max_ratio") && worst[0] > p.at("max_ratio").get<double>())
    out.check.fail("ratio " + num(worst[0]) + " above max_ratio");
  if (p.contains("refine_tol") && change > p.at("refine_tol").get<double>())
    out.check.fail("refinement change " + num(change) + " above refine_tol");
  out.check.worst = worst[0];
  out.summary = {{"max_ratio", worst[0]}, {"max_ratio_refined", worst[1]}, {"refinement_change", change}};
  return out;
}

TargetOutput run_dissipation_check(const Scenario& s) {
  const json& p = s.params;
  allow_keys(p, s.target, {"n", "lambda", "delta", "fit", "holdout", "constant"});
  const std::uint64_t seed = require_seed(s);
  const std::size_t n = param<std::size_t>(p, "n", 256);
  const int lambda = param(p, "lambda", 4), n_fit = param(p, "fit", 50), n_hold = param(p, "holdout", 50);
  const double delta = param(p, "delta", 1.2);
  const Box box = Box::cube(1, -3.0 * kPi, 6.0 * kPi, n);
  const double eps = 4.0 * box.spacing(0);
  DiffusionField field;
  field.a.push_back(GridFunction::sample(box, [](const Vec& x) { return 1.5 + 0.3 * std::sin(x[0]); }));
  field.b.push_back(GridFunction::sample(box, [](const Vec& x) { return 0.5 * std::cos(x[0]); }));

  auto terms = [&](const Vec& q) {
    const SignedAtomicMeasure eta(1, {q[0], q[1]}, {1.0, -1.0});
    const DissipationResult r = dissipation_check(eta, field, lambda, delta, eps);
    return std::pair{r.lhs + 0.25 * delta * r.norm_1ml_sq, r.norm_ml_sq};
  };
  const Objective ratio = [&](const Vec& q) {
    if (q[0] == q[1]) return -std::numeric_limits<double>::infinity();
    const auto [lhs, rhs] = terms(q);
    return lhs / rhs;
  };
  CounterRng rng(seed, {});
  auto draw = [&](int count) {
    std::vector<Vec> pts;
    for (int i = 0; i < count; ++i) {
      Vec q(2);
      q << -3.0 + 6.0 * rng.uniform(), -3.0 + 6.0 * rng.uniform();
      pts.push_back(q);
    }
    return pts;
  };
  const auto fit_set = draw(n_fit), held = draw(n_hold);
  TargetOutput out;
  out.check.name = "dissipation";
  double c = 0.0;
  json fit_json = nullptr;
  if (p.contains("constant")) {
    c = p.at("constant").get<double>();
  } else {
    const SupremumFit fit = fit_supremum(ratio, fit_set, Vec::Constant(2, -3.0), Vec::Constant(2, 3.0));
    c = fit.constant;
    fit_json = {{"constant", fit.constant}, {"sample_max", fit.sample_max}, {"evaluations", fit.evaluations}};
  }
  out.csv.header = {"case", "residual", "bound", "ratio"};
  int violations = 0;
  for (std::size_t i = 0; i < held.size(); ++i) {
    if (held[i][0] == held[i][1]) continue;
    const auto [lhs, rhs] = terms(held[i]);
    const double bound = c * rhs;
    out.csv.add({"holdout-" + std::to_string(i), num(lhs), num(bound), num(lhs / rhs)});
    if (lhs > bound + 1e-12 * std::max(1.0, std::abs(bound))) ++violations;
  }
  if (violations > 0) out.check.fail(std::to_string(violations) + " held-out violations");
  out.summary = {{"constant", c}, {"fit", fit_json}, {"violations", violations}, {"epsilon", eps}};
  return out;
}

// ------------------------------------------------------------- hamiltonian

JetArgs jet_from(const json& j) {
  allow_keys(j, "jet", {"p", "q", "M"});
  const auto pc = param(j, "p", std::vector<double>{0.0, 0.0, 0.0});
  const auto qc = param(j, "q", std::vector<double>{0.0, 0.0, 0.0});
  require(pc.size() == 3 && qc.size() == 3, "jet: p and q take three coefficients");
  JetArgs jet;
  jet.p = [pc](const Vec& x) { return Vec::Constant(1, pc[0] + pc[1] * x[0] + pc[2] * std::sin(x[0])); };
  jet.q = [qc](const Vec& x) { return Mat::Constant(1, 1, qc[0] + qc[1] * x[0] + qc[2] * std::cos(x[0])); };
  jet.M = Mat::Constant(1, 1, param(j, "M", 0.0));
  return jet;
}

TargetOutput run_hamiltonian(const Scenario& s) {
  const json& p = s.params;
  allow_keys(p, s.target,
             {"coeffs", "check", "samples", "holdout", "sign_samples", "control_points",
              "lipschitz_scale", "tol", "solver", "mu", "m", "jet", "Q", "M"});
  const std::string name = param(p, "coeffs", std::string("lq1d"));
  const std::string check = param(p, "check", std::string("evaluate"));
  const double scale = param(p, "lipschitz_scale", 1.0);
  require(scale > 0.0, "hamiltonian: lipschitz_scale must be > 0");
  TargetOutput out;

  if (name.rfind("regret-K", 0) == 0) {
    const int K = std::stoi(name.substr(8));
    require(K == 2 || K == 3, "hamiltonian: regret registry has K = 2, 3");
    RegretSolverConfig cfg;
    if (p.contains("solver")) {
      allow_keys(p.at("solver"), "solver", {"starts", "iterations"});
      cfg.starts = param(p.at("solver"), "starts", cfg.starts);
      cfg.iterations = param(p.at("solver"), "iterations", cfg.iterations);
    }
    if (s.seed) cfg.seed = *s.seed;
    if (check == "evaluate") {
      const Mat Q = p.contains("Q") ? mat_from(p.at("Q")) : Mat::Zero(K, K);
      const Mat M = p.contains("M") ? mat_from(p.at("M")) : Mat::Zero(K, K);
      require(Q.rows() == K && Q.cols() == K && M.rows() == K && M.cols() == K,
              "hamiltonian: Q and M must be K x K");
      const RegretSup g = G_regret(Q, M, cfg);
      out.csv.header = {"coeffs", "value", "i", "a"};
      std::string a;
      for (std::size_t j = 0; j < g.a.size(); ++j) a += (j ? " " : "") + num(g.a[j]);
      out.csv.add({name, num(g.value), num(g.i), a});
      out.summary = {{"value", g.value}, {"i", g.i}, {"a", g.a}};
      return out;
    }
    require(check == "regret", "hamiltonian: check '" + check + "' does not apply to " + name);
    const std::uint64_t seed = require_seed(s);
    const int n = param(p, "samples", 200), n_sign = param(p, "sign_samples", n);
    const FourierMetric metric = metric_for(p, K);
    out.check = check_assumptions_regret(regret_lipschitz_samples(K, n, seed),
                                         regret_sign_samples(K, n_sign, seed), metric, cfg,
                                         param(p, "tol", 1e-9), scale);
    out.csv.header = {"check", "samples", "worst", "tolerance", "passed"};
    out.csv.add({"regret-assumptions", num(n) + "+" + num(n_sign), num(out.check.worst),
                 num(out.check.tolerance), out.check.passed ? "true" : "false"});
    out.summary = {{"K", K}, {"lipschitz_constant", scale * regret_lipschitz_constant(K)},
                   {"worst", out.check.worst}};
    return out;
  }

  const FilteringCoeffs c = filtering_registry(name);
  const auto grid = c.control_grid(param(p, "control_points", 81));
  if (check == "evaluate") {
    require(p.contains("mu"), "hamiltonian: evaluate needs 'mu'");
    const SignedAtomicMeasure mu = measure_from_json(p.at("mu"));
    const JetArgs jet = jet_from(p.contains("jet") ? p.at("jet") : json::object());
    const GridMin g = p.contains("m") ? Ge_extend(mu, vec_from(p.at("m")), jet, c, grid)
                                      : G_filtering(mu, jet, c, grid);
    out.csv.header = {"coeffs", "value", "argmin"};
    out.csv.add({name, num(g.value), num(g.argmin[0])});
    out.summary = {{"value", g.value}, {"argmin", vec_json(g.argmin)}};
    return out;
  }
  const std::uint64_t seed = require_seed(s);
  const int n_fit = param(p, "samples", 100), n_hold = param(p, "holdout", 100);
  FamilyFit fam;
  if (check == "assumption-i") {
    fam = fit_assumption_i(c, grid, n_fit, n_hold, seed, {}, scale);
  } else if (check == "assumption-ii") {
    fam = fit_assumption_ii(c, metric_for(p, 1), grid, n_fit, n_hold, seed, {}, scale);
  } else {
    throw InputError("hamiltonian: unknown check '" + check + "'");
  }
  out.check = fam.holdout;
  out.csv.header = {"check", "constant", "worst", "passed"};
  out.csv.add({check + "-fit", num(fam.fit.constant), num(fam.fit.sample_max), "true"});
  out.csv.add({check + "-holdout", num(scale * fam.fit.constant), num(fam.holdout.worst),
               fam.holdout.passed ? "true" : "false"});
  out.summary = {{"constant", fam.fit.constant},
                 {"sample_max", fam.fit.sample_max},
                 {"checked_constant", scale * fam.fit.constant},
                 {"holdout_worst", fam.holdout.worst}};
  return out;
}

// -------------------------------------------------------------- filter-sim

TargetOutput run_filter_sim(const Scenario& s) {
  const json& p = s.params;
  allow_keys(p, s.target, {"coeffs", "mu", "policy", "t", "sim"});
  const FilteringCoeffs c = filtering_registry(param(p, "coeffs", std::string("lq1d")));
  require(p.contains("mu"), "filter-sim: needs 'mu'");
  const SignedAtomicMeasure mu = measure_from_json(p.at("mu"));
  SimConfig cfg;
  cfg.seed = require_seed(s);
  if (p.contains("sim")) {
    const json& j = p.at("sim");
    allow_keys(j, "sim", {"dt", "particles", "horizon", "runs", "idio_seed"});
    cfg.dt = param(j, "dt", cfg.dt);
    cfg.particles = param(j, "particles", cfg.particles);
    cfg.horizon = param(j, "horizon", cfg.horizon);
    cfg.runs = param(j, "runs", cfg.runs);
    if (j.contains("idio_seed")) cfg.idio_seed = j.at("idio_seed").get<std::uint64_t>();
  }
  const double t = param(p, "t", 0.0);
  const ControlPolicy policy =
      policy_from_name(param(p, "policy", std::string("zero")), c, cfg.horizon);
  const CostEstimate est = estimate_cost(t, mu, policy, c, cfg);

  TargetOutput out;
  out.csv.header = {"time", "mean", "variance", "cost_to_date"};
  for (const StepSummary& st : est.path)
    out.csv.add({num(st.time), num(st.mean), num(st.variance), num(st.cost_to_date)});
  out.summary = {{"estimate", est.estimate}, {"std_error", est.std_error}, {"runs", cfg.runs},
                 {"particles", cfg.particles}, {"dt", cfg.dt}, {"policy", policy.name}};
  if (c.lq) {
    const double oracle = lqg_value_oracle(t, mu, c, cfg.horizon);
    out.summary["oracle"] = oracle;
    out.summary["z_score"] = est.std_error > 0.0 ? (est.estimate - oracle) / est.std_error : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------- game-sim

SignedAtomicMeasure gaps_measure(const json& p, int K) {
  if (p.contains("m0")) {
    SignedAtomicMeasure m0 = measure_from_json(p.at("m0"));
    require(m0.dim() == K && m0.probability(), "game: m0 must be a probability measure on R^K");
    return m0;
  }
  return SignedAtomicMeasure::dirac(Vec::Zero(K));
}

TargetOutput run_game_sim(const Scenario& s) {
  const json& p = s.params;
  allow_keys(p, s.target, {"K", "T", "forecaster", "adversary", "runs", "m0", "s"});
  const std::uint64_t seed = require_seed(s);
  const int K = param(p, "K", 2), runs = param(p, "runs", 1000);
  require(K >= 1 && K <= 8, "game-sim: K must be in [1, 8]");
  const std::vector<int> Ts = int_list(p, "T", 10);
  const ForecasterStrategy f = forecaster_from_name(param(p, "forecaster", std::string("uniform")));
  const AdversaryStrategy adv = adversary_from_name(param(p, "adversary", std::string("uniform")), K);
  const SignedAtomicMeasure m0 = gaps_measure(p, K);

  TargetOutput out;
  json rows = json::array();
  if (p.contains("s")) {
    const double sv = p.at("s").get<double>();
    out.csv.header = {"T", "s", "estimate", "std_error"};
    for (const RescaledPoint& r : rescaled_regret(sv, m0, Ts, f, adv, runs, seed)) {
      out.csv.add({num(r.T), num(r.s), num(r.value), num(r.std_error)});
      rows.push_back({{"T", r.T}, {"estimate", r.value}, {"std_error", r.std_error}});
    }
  } else {
    out.csv.header = {"T", "estimate", "std_error"};
    for (int T : Ts) {
      const RegretEstimate r = monte_carlo_regret(T, m0, f, adv, runs, seed);
      out.csv.add({num(T), num(r.estimate), num(r.std_error)});
      rows.push_back({{"T", T}, {"estimate", r.estimate}, {"std_error", r.std_error}});
    }
  }
  out.summary = {{"K", K}, {"runs", runs}, {"forecaster", f.name}, {"adversary", adv.name}, {"rows", rows}};
  return out;
}

// ---------------------------------------------------------------- dp-value

TargetOutput run_dp_value(const Scenario& s, bool dump) {
  const json& p = s.params;
  allow_keys(p, s.target, {"K", "T", "gaps0", "grid", "max_nodes"});
  const int K = param(p, "K", 2);
  require(K >= 1 && K <= 3, "dp-value: K must be in [1, 3]");
  const std::vector<int> Ts = int_list(p, "T", 2);
  std::vector<double> gaps0 = param(p, "gaps0", std::vector<double>(K, 0.0));
  require(static_cast<int>(gaps0.size()) == K, "dp-value: gaps0 must have K entries");
  std::vector<SimplexAction> grid;
  std::string grid_desc = "vertex";
  if (p.contains("grid")) {
    const json& g = p.at("grid");
    allow_keys(g, "grid", {"type", "n"});
    grid_desc = param(g, "type", std::string("vertex"));
    if (grid_desc == "simplex") {
      const int n = param(g, "n", 2);
      grid = simplex_grid(K, n);
      grid_desc += ":" + std::to_string(n);
    } else {
      require(grid_desc == "vertex", "dp-value: grid type must be 'vertex' or 'simplex'");
    }
  }
  if (grid.empty()) grid = vertex_grid(K);
  ExactConfig cfg;
  cfg.max_nodes = param<std::size_t>(p, "max_nodes", cfg.max_nodes);
  cfg.record_table = dump;

  TargetOutput out;
  out.csv.header = {"T", "estimate", "std_error", "nodes"};
  json rows = json::array(), tables = json::array();
  for (int T : Ts) {
    const ExactValue v = exact_value_small(T, gaps0, grid, cfg);
    out.csv.add({num(T), num(v.value), "0", num(v.nodes)});
    rows.push_back({{"T", T}, {"value", v.value}, {"nodes", v.nodes}});
    if (dump) {
      json entries = json::array();
      for (const auto& [key, val] : v.table) entries.push_back({{"history", key}, {"value", val}});
      tables.push_back({{"T", T}, {"entries", entries}});
    }
  }
  out.summary = {{"K", K}, {"grid", grid_desc}, {"grid_size", grid.size()}, {"rows", rows}};
  if (dump)
    out.dump = json{{"outcome_code", "(grid_index * K + I) * 2 + in"}, {"tables", tables}};
  return out;
}

// ----------------------------------------------------- comparison-doubling

std::vector<Vec> support_from(const json& j) {
  require(j.is_array() && !j.empty(), "comparison-doubling: 'support' must be a non-empty list");
  std::vector<Vec> out;
  for (const json& x : j) out.push_back(x.is_number() ? Vec::Constant(1, x.get<double>()) : vec_from(x));
  return out;
}

TargetOutput run_comparison_doubling(const Scenario& s) {
  const json& p = s.params;
  allow_keys(p, s.target, {"u", "v", "support", "eps", "delta", "doubling", "abs_tol", "fourier"});
  require(p.contains("u") && p.contains("v") && p.contains("support") && p.contains("eps"),
          "comparison-doubling: needs u, v, support and eps");
  DoublingConfig cfg = p.contains("doubling") ? doubling_config_from_json(p.at("doubling")) : DoublingConfig{};
  cfg.seed = require_seed(s);
  const std::vector<Vec> support = support_from(p.at("support"));
  const int d = static_cast<int>(support.front().size());
  const FourierMetric metric = metric_for(p, d);
  const DiscretizedFunction u = function_from_json(p.at("u"), support, cfg.horizon, cfg.m_radius);
  const DiscretizedFunction v = function_from_json(p.at("v"), support, cfg.horizon, cfg.m_radius);
  const std::vector<double> eps = p.at("eps").is_number() ? std::vector<double>{p.at("eps").get<double>()}
                                                          : p.at("eps").get<std::vector<double>>();
  const double delta = param(p, "delta", 0.1);

  TargetOutput out;
  std::vector<DoublingReport> runs;
  if (eps.size() >= 2) {
    PenaltyDecayReport rep = penalty_decay_check(u, v, metric, delta, eps, cfg, param(p, "abs_tol", 1e-6));
    out.check = rep.check;
    runs = std::move(rep.runs);
  } else {
    require(!eps.empty(), "comparison-doubling: empty eps list");
    runs.push_back(doubling_maximize(u, v, metric, eps.front(), delta, cfg));
  }
  out.csv.header = {"eps", "value", "penalty", "d_F", "converged"};
  json rows = json::array();
  for (const DoublingReport& r : runs) {
    out.csv.add({num(r.epsilon), num(r.value), num(r.penalty), num(r.d_F), r.converged ? "true" : "false"});
    rows.push_back({{"eps", r.epsilon}, {"value", r.value}, {"penalty", r.penalty}, {"d_F", r.d_F},
                    {"converged", r.converged}, {"best_diagonal", r.best_diagonal},
                    {"theta", {{"t", r.theta.t}, {"w", vec_json(r.theta.w)}, {"m", vec_json(r.theta.m)}}},
                    {"iota", {{"t", r.iota.t}, {"w", vec_json(r.iota.w)}, {"m", vec_json(r.iota.m)}}}});
  }
  out.summary = {{"delta", delta}, {"doubling", to_json(cfg)}, {"runs", rows}};
  return out;
}

// ---------------------------------------------------------------- writers

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  os << text;
}

std::string header_block(const Scenario& s, const std::string& hash) {
  std::ostringstream os;
  os << "# tool: fwlab " << tool_version() << '\n'
     << "# config_hash: " << hash << '\n'
     << "# seed: " << (s.seed ? std::to_string(*s.seed) : std::string("none")) << '\n'
     << "# target: " << s.target << '\n';
  return os.str();
}

std::string render_csv(const CsvTable& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

json envelope(const Scenario& s, const std::string& hash) {
  return {{"tool", "fwlab"},
          {"version", tool_version()},
          {"config_hash", hash},
          {"seed", s.seed ? json(*s.seed) : json(nullptr)},
          {"name", s.name},
          {"target", s.target}};
}

TargetOutput dispatch(const Scenario& s, bool dump) {
  if (s.target == "metric") return run_metric(s);
  if (s.target == "sobolev-check") return run_sobolev_check(s);
  if (s.target == "commutator-check") return run_commutator_check(s);
  if (s.target == "dissipation-check") return run_dissipation_check(s);
  if (s.target == "hamiltonian") return run_hamiltonian(s);
  if (s.target == "filter-sim") return run_filter_sim(s);
  if (s.target == "game-sim") return run_game_sim(s);
  if (s.target == "dp-value") return run_dp_value(s, dump);
  if (s.target == "comparison-doubling") return run_comparison_doubling(s);
  throw InputError("unknown target '" + s.target + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

// ---------------------------------------------------------------- scenario

Scenario parse_scenario(const json& j) {
  require(j.is_object(), "scenario must be a JSON object");
  static const std::set<std::string> top = {"schema", "name", "target", "seed", "params", "outputs"};
  for (const auto& [k, v] : j.items())
    if (!top.count(k)) throw InputError("unknown key '" + k + "' in scenario");
  const int schema = param(j, "schema", kSchemaVersion);
  require(schema == kSchemaVersion, "unsupported scenario schema " + std::to_string(schema));
  Scenario s;
  s.target = param(j, "target", std::string());
  require(!s.target.empty(), "scenario has no 'target'");
  if (std::find(targets().begin(), targets().end(), s.target) == targets().end())
    throw InputError("unknown target '" + s.target + "'");
  s.name = param(j, "name", s.target);
  require(!s.name.empty() && s.name.find_first_of("/\\") == std::string::npos,
          "scenario name must be a plain file stem");
  if (j.contains("seed")) {
    const json& seed = j.at("seed");
    require(seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<std::int64_t>() >= 0),
            "seed must be a non-negative integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("params")) s.params = j.at("params");
  require(s.params.is_object(), "'params' must be an object");
  s.csv_path = s.name + ".csv";
  s.json_path = s.name + ".json";
  s.dump_path = s.name + ".dump.json";
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    allow_keys(o, "outputs", {"csv", "json", "dump"});
    s.csv_path = param(o, "csv", s.csv_path);
    s.json_path = param(o, "json", s.json_path);
    s.dump_path = param(o, "dump", s.dump_path);
  }
  return s;
}

void apply_override(json& scenario, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, "override must look like key=value: '" + assignment + "'");
  const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  std::vector<std::string> path = split(key, '.');
  static const std::set<std::string> top = {"schema", "name", "target", "seed", "params", "outputs"};
  if (!top.count(path.front())) path.insert(path.begin(), "params");
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &scenario;
  for (std::size_t i = 0; i < path.size(); ++i) {
    require(!path[i].empty(), "override has an empty key segment: '" + key + "'");
    if (!node->is_object()) *node = json::object();
    if (i + 1 == path.size())
      (*node)[path[i]] = value;
    else
      node = &(*node)[path[i]];
  }
}

std::string config_hash(const Scenario& s) {
  const json canon = {{"name", s.name},
                      {"target", s.target},
                      {"seed", s.seed ? json(*s.seed) : json(nullptr)},
                      {"params", s.params}};
  return hex64(fnv1a64(tool_version() + "\n" + canon.dump()));
}

RunResult run(json scenario, const RunOptions& opts) {
  RunResult res;
  try {
    require(scenario.is_object(), "scenario must be a JSON object");
    if (opts.target) {
      if (scenario.contains("target"))
        require(scenario.at("target") == *opts.target,
                "scenario target '" + scenario.at("target").dump() + "' does not match subcommand '" +
                    *opts.target + "'");
      scenario["target"] = *opts.target;
    }
    for (const std::string& o : opts.overrides) apply_override(scenario, o);
    const Scenario s = parse_scenario(scenario);
    res.config_hash = config_hash(s);
    set_max_threads(opts.threads);
    const TargetOutput out = dispatch(s, opts.dump);

    const std::string head = header_block(s, res.config_hash);
    const auto csv_path = opts.out_dir / s.csv_path;
    write_text(csv_path, head + render_csv(out.csv));
    res.files.push_back(csv_path);

    json summary = envelope(s, res.config_hash);
    summary["status"] = out.check.passed ? "pass" : "failed-check";
    if (!out.check.passed) summary["detail"] = out.check.detail;
    summary["result"] = out.summary;
    const auto json_path = opts.out_dir / s.json_path;
    write_text(json_path, summary.dump(2) + "\n");
    res.files.push_back(json_path);

    if (opts.dump && out.dump) {
      json d = envelope(s, res.config_hash);
      d["table"] = *out.dump;
      const auto dump_path = opts.out_dir / s.dump_path;
      write_text(dump_path, d.dump(2) + "\n");
      res.files.push_back(dump_path);
    }
    if (!out.check.passed) {
      res.status = kExitFailedCheck;
      res.message = "failed check: " + out.check.detail;
    }
  } catch (const InputError& e) {
    res.status = kExitInputError;
    res.message = e.what();
  } catch (const json::exception& e) {
    res.status = kExitInputError;
    res.message = std::string("invalid scenario: ") + e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    res.status = kExitInputError;
    res.message = e.what();
  } catch (const std::exception& e) {
    res.status = kExitInputError;
    res.message = std::string("error: ") + e.what();
  }
  set_max_threads(0);
  return res;
}

RunResult run_file(const std::filesystem::path& scenario_path, const RunOptions& opts) {
  std::ifstream is(scenario_path);
  if (!is) return {kExitInputError, "cannot open scenario " + scenario_path.string(), {}, {}};
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    return {kExitInputError, "malformed JSON in " + scenario_path.string() + ": " + e.what(), {}, {}};
  }
  return run(std::move(j), opts);
}

std::optional<std::string> read_csv_config_hash(const std::filesystem::path& csv) {
  std::ifstream is(csv);
  std::string line;
  const std::string tag = "# config_hash: ";
  while (std::getline(is, line)) {
    if (line.rfind(tag, 0) == 0) return line.substr(tag.size());
    if (line.empty() || line[0] != '#') break;
  }
  return std::nullopt;
}

}  // namespace fwlab::cli
