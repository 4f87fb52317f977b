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

#include "fwlab/hamiltonians.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "fwlab/rng.hpp"

namespace fwlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec scalar_vec(double x) { return Vec::Constant(1, x); }
Mat scalar_mat(double x) { return Mat::Constant(1, 1, x); }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- filtering

std::vector<Vec> FilteringCoeffs::control_grid(int n) const {
  require(n >= 1, "control_grid: need at least one point per axis");
  const int k = control_dim();
  require(k >= 1, "control_grid: empty control set");
  std::size_t total = 1;
  for (int a = 0; a < k; ++a) total *= static_cast<std::size_t>(n);
  std::vector<Vec> grid;
  grid.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Vec a(k);
    std::size_t rem = flat;
    for (int ax = k - 1; ax >= 0; --ax) {
      const std::size_t idx = rem % n;
      rem /= n;
      a[ax] = n == 1 ? 0.5 * (control_lo[ax] + control_hi[ax])
                     : control_lo[ax] + (control_hi[ax] - control_lo[ax]) *
                                            static_cast<double>(idx) / (n - 1);
    }
    grid.push_back(a);
  }
  return grid;
}

Mat FilteringCoeffs::diffusion(const Vec& x, const Vec& a) const {
  const Mat s = sigma(x, a);
  return s * s.transpose();
}

FilteringCoeffs make_lq(const LqParams& p, double control_bound) {
  require(p.control_weight > 0.0, "lq: control weight must be > 0");
  require(p.sigma > 0.0, "lq: sigma must be > 0");
  FilteringCoeffs c;
  c.name = "lq1d";
  c.control_lo = scalar_vec(-control_bound);
  c.control_hi = scalar_vec(control_bound);
  c.b = [](const Vec&, const Vec& a) { return a; };
  c.sigma = [s = p.sigma](const Vec&, const Vec&) { return scalar_mat(s); };
  c.sigma_tilde = [s = p.sigma_tilde](const Vec&) { return scalar_mat(s); };
  c.r = [w = p.control_weight](const Vec&, const Vec& a) { return w * a.squaredNorm(); };
  c.l = [w = p.terminal_weight](const Vec& x) { return w * x.squaredNorm(); };
  c.lip = {0.0, 0.0, 0.0, 0.0, kInf, 0.0};
  c.bound = {control_bound,  p.sigma, std::abs(p.sigma_tilde),
             p.control_weight * control_bound * control_bound, kInf, p.sigma * p.sigma};
  c.delta = p.sigma * p.sigma;
  c.lq = p;
  return c;
}

FilteringCoeffs filtering_registry(const std::string& name) {
  if (name == "lq1d") return make_lq(LqParams{});
  if (name == "lq1d-sat") {
    FilteringCoeffs c = make_lq(LqParams{});
    c.name = name;
    c.l = [](const Vec& x) { return std::min(x.squaredNorm(), 100.0); };
    c.lip.l = 20.0;
    c.bound.l = 100.0;
    c.lq.reset();
    return c;
  }
  if (name == "osc1d") {
    FilteringCoeffs c;
    c.name = name;
    c.control_lo = scalar_vec(-2.0);
    c.control_hi = scalar_vec(2.0);
    c.b = [](const Vec& x, const Vec& a) { return scalar_vec(a[0] + 0.5 * std::sin(x[0])); };
    c.sigma = [](const Vec& x, const Vec&) {
      return scalar_mat(std::sqrt(1.5 + 0.3 * std::sin(x[0])));
    };
    c.sigma_tilde = [](const Vec&) { return scalar_mat(1.0); };
    c.r = [](const Vec& x, const Vec& a) { return a[0] * a[0] + 0.5 * std::cos(x[0]); };
    c.l = [](const Vec& x) { return std::min(x.squaredNorm(), 100.0); };
    c.lip = {0.5, 0.15 / std::sqrt(1.2), 0.0, 0.5, 20.0, 0.3};
    c.bound = {2.5, std::sqrt(1.8), 1.0, 4.5, 100.0, 1.8};
    c.delta = 1.2;
    return c;
  }
  std::ostringstream os;
  os << "unknown filtering coefficients '" << name << "' (known:";
  for (const auto& n : filtering_registry_names()) os << ' ' << n;
  os << ')';
  throw InputError(os.str());
}

std::vector<std::string> filtering_registry_names() { return {"lq1d", "lq1d-sat", "osc1d"}; }

CheckReport validate_coeffs(const FilteringCoeffs& c, const std::vector<Vec>& xs,
                            const std::vector<Vec>& as, int directions) {
  CheckReport rep{"coefficients", true, 0.0, 1e-12, ""};
  CounterRng rng(0x5eed, {});
  auto over = [&](double v, double bound, const char* what) {
    if (std::isfinite(bound) && v > bound * (1 + 1e-12) + 1e-12) {
      rep.worst = std::max(rep.worst, v - bound);
      rep.fail(std::string(what) + " exceeds declared bound");
    }
  };
  for (const Vec& a : as) {
    over(c.sigma_tilde(a).norm(), c.bound.sigma_tilde, "sigma_tilde");
    for (const Vec& x : xs) {
      over(c.b(x, a).norm(), c.bound.b, "b");
      const Mat s = c.sigma(x, a);
      over(s.norm(), c.bound.sigma, "sigma");
      over(std::abs(c.r(x, a)), c.bound.r, "r");
      for (int k = 0; k < directions; ++k) {
        Vec xi(c.d);
        for (int q = 0; q < c.d; ++q) xi[q] = rng.normal();
        const double lhs = (s.transpose() * xi).squaredNorm();
        const double rhs = c.delta * xi.squaredNorm();
        if (lhs < rhs * (1 - 1e-12)) {
          rep.worst = std::max(rep.worst, rhs - lhs);
          rep.fail("ellipticity fails");
        }
      }
    }
  }
  for (const Vec& x : xs) over(std::abs(c.l(x)), c.bound.l, "l");
  return rep;
}

JetArgs JetArgs::shifted(const Vec& m) const {
  JetArgs out;
  out.p = [p = p, m](const Vec& x) { return p(x - m); };
  out.q = [q = q, m](const Vec& x) { return q(x - m); };
  out.M = M;
  return out;
}

std::vector<Vec> growth_probe_set(const SignedAtomicMeasure& mu) {
  std::vector<Vec> xs;
  for (std::size_t i = 0; i < mu.size(); ++i) xs.push_back(mu.atom(i));
  const int d = mu.dim();
  xs.push_back(Vec::Zero(d));
  for (int a = 0; a < d; ++a)
    for (double s : {1.0, -1.0, 5.0, -5.0, 25.0, -25.0}) {
      Vec e = Vec::Zero(d);
      e[a] = s;
      xs.push_back(e);
    }
  return xs;
}

double linear_growth_norm(const std::function<Vec(const Vec&)>& f, const std::vector<Vec>& xs) {
  double m = 0.0;
  for (const Vec& x : xs) m = std::max(m, f(x).norm() / (1.0 + x.norm()));
  return m;
}

double linear_growth_norm(const std::function<Mat(const Vec&)>& f, const std::vector<Vec>& xs) {
  double m = 0.0;
  for (const Vec& x : xs) m = std::max(m, f(x).norm() / (1.0 + x.norm()));
  return m;
}

double K_filtering(const Vec& a, const SignedAtomicMeasure& mu, const JetArgs& jet,
                   const FilteringCoeffs& c) {
  return Ke_filtering(a, mu, Vec::Zero(mu.dim()), jet, c);
}

double Ke_filtering(const Vec& a, const SignedAtomicMeasure& mu, const Vec& m, const JetArgs& jet,
                    const FilteringCoeffs& c) {
  require(mu.dim() == c.d && m.size() == c.d, "K_filtering: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Vec x = mu.atom(i);
    const Vec xm = x + m;
    const double integrand =
        c.r(xm, a) + c.b(xm, a).dot(jet.p(x)) + 0.5 * (jet.q(x) * c.diffusion(xm, a)).trace();
    acc += mu.weight(i) * integrand;
  }
  const Mat st = c.sigma_tilde(a);
  return acc + 0.5 * (st * st.transpose() * jet.M).trace();
}

namespace {

template <class Eval>
GridMin grid_min(const std::vector<Vec>& grid, Eval&& eval) {
  require(!grid.empty(), "control grid is empty");
  GridMin best;
  best.value = kInf;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = eval(grid[k]);
    if (v < best.value) {
      best.value = v;
      best.index = k;
    }
  }
  best.argmin = grid[best.index];
  return best;
}

}  // namespace

GridMin G_filtering(const SignedAtomicMeasure& mu, const JetArgs& jet, const FilteringCoeffs& c,
                    const std::vector<Vec>& grid) {
  return grid_min(grid, [&](const Vec& a) { return K_filtering(a, mu, jet, c); });
}

GridMin Ge_extend(const SignedAtomicMeasure& mu, const Vec& m, const JetArgs& jet,
                  const FilteringCoeffs& c, const std::vector<Vec>& grid) {
  return G_filtering(pushforward_shift(mu, m), jet.shifted(m), c, grid);
}

GridMin Ge_extend_direct(const SignedAtomicMeasure& mu, const Vec& m, const JetArgs& jet,
                         const FilteringCoeffs& c, const std::vector<Vec>& grid) {
  return grid_min(grid, [&](const Vec& a) { return Ke_filtering(a, mu, m, jet, c); });
}

LipschitzTerms filtering_lipschitz_terms(const LipschitzSample& s, const FilteringCoeffs& c,
                                         const std::vector<Vec>& grid) {
  LipschitzTerms t;
  const double g1 = Ge_extend_direct(s.mu, s.m, s.jet1, c, grid).value;
  const double g2 = Ge_extend_direct(s.mu, s.m, s.jet2, c, grid).value;
  t.lhs = std::abs(g1 - g2);
  t.weight = 1.0 + s.m.norm() + s.mu.first_abs_moment();
  const auto probes = growth_probe_set(s.mu);
  const auto& p1 = s.jet1.p;
  const auto& p2 = s.jet2.p;
  const auto& q1 = s.jet1.q;
  const auto& q2 = s.jet2.q;
  t.jet_gap = linear_growth_norm(std::function<Vec(const Vec&)>(
                                     [&](const Vec& x) -> Vec { return p1(x) - p2(x); }),
                                 probes) +
              linear_growth_norm(std::function<Mat(const Vec&)>(
                                     [&](const Vec& x) -> Mat { return q1(x) - q2(x); }),
                                 probes) +
              (s.jet1.M - s.jet2.M).norm();
  return t;
}

CheckReport check_assumption_i_filtering(const FilteringCoeffs& c,
                                         const std::vector<LipschitzSample>& samples,
                                         const std::vector<Vec>& grid,
                                         std::optional<double> constant) {
  CheckReport rep{"assumption-i-filtering", true, 0.0, constant.value_or(0.0), ""};
  double fitted = 0.0;
  int violations = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto t = filtering_lipschitz_terms(samples[k], c, grid);
    if (t.jet_gap == 0.0 && t.lhs > 0.0) {
      rep.fail("jets agree but G^e differs at sample " + std::to_string(k));
      continue;
    }
    fitted = std::max(fitted, t.ratio());
    if (constant && t.ratio() > *constant * (1 + 1e-12)) ++violations;
  }
  rep.worst = fitted;
  rep.detail = "fitted L_G=" + fmt(fitted);
  if (!std::isfinite(fitted)) rep.fail("no finite L_G fits");
  if (violations > 0) rep.fail(std::to_string(violations) + " samples exceed L_G=" + fmt(*constant));
  return rep;
}

PenaltyTerms filtering_penalty_terms(const PenaltySample& s, const FilteringCoeffs& c,
                                     const FourierMetric& metric, const std::vector<Vec>& grid) {
  const KappaKernel kappa(metric, s.mu, s.nu, s.eps);
  JetArgs jx, jy;
  jx.p = jy.p = [&kappa](const Vec& x) { return kappa.gradient(x); };
  jx.q = jy.q = [&kappa](const Vec& x) { return kappa.hessian(x); };
  jx.M = s.X;
  jy.M = s.minus_Y;
  PenaltyTerms t;
  const double g_theta = Ge_extend_direct(s.mu, s.m, jx, c, grid).value;
  const GridMin g_iota = Ge_extend_direct(s.nu, s.n, jy, c, grid);
  t.difference = g_theta - g_iota.value;
  const Vec& a = g_iota.argmin;
  const double k_nu_m = Ke_filtering(a, s.nu, s.m, jx, c);
  t.measure_part = Ke_filtering(a, s.mu, s.m, jx, c) - k_nu_m;
  t.shift_part = k_nu_m - Ke_filtering(a, s.nu, s.n, jx, c);
  const double rho = kappa.rho();
  const double mn = (s.m - s.n).norm();
  t.shift_bound = mn * (c.lip.r + c.lip.b * metric.grad_constant() * rho / s.eps +
                        0.5 * c.lip.diffusion * metric.hess_constant() * rho / s.eps);
  const double dF = std::sqrt(mn * mn + rho * rho);
  t.modulus_arg = dF * dF / s.eps + dF;
  t.weight = 1.0 + s.m.norm() + s.n.norm() + s.mu.first_abs_moment() + s.nu.first_abs_moment();
  return t;
}

CheckReport check_assumption_ii_filtering(const FilteringCoeffs& c,
                                          const std::vector<PenaltySample>& samples,
                                          const FourierMetric& metric,
                                          const std::vector<Vec>& grid,
                                          std::optional<double> constant) {
  CheckReport rep{"assumption-ii-filtering", true, 0.0, constant.value_or(0.0), ""};
  double fitted = -kInf;
  int violations = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto t = filtering_penalty_terms(samples[k], c, metric, grid);
    const double slack = 1e-12 * (1.0 + std::abs(t.measure_part) + std::abs(t.shift_part));
    if (t.shift_part > t.shift_bound + slack)
      rep.fail("shift part exceeds Lipschitz bound at sample " + std::to_string(k));
    if (t.difference > t.measure_part + t.shift_part + slack)
      rep.fail("difference exceeds its decomposition at sample " + std::to_string(k));
    fitted = std::max(fitted, t.ratio());
    if (constant && t.ratio() > *constant * (1 + 1e-12) + 1e-15) ++violations;
  }
  rep.worst = fitted;
  rep.detail = "fitted omega_G slope=" + fmt(fitted);
  if (!std::isfinite(fitted) && !samples.empty()) rep.fail("no finite linear modulus fits");
  if (violations > 0)
    rep.fail(std::to_string(violations) + " samples exceed slope " + fmt(*constant));
  return rep;
}

namespace {

SignedAtomicMeasure cube_measure(const double* u, int n, double lo, double hi) {
  std::vector<double> xs(n), ws(n);
  double tot = 0.0;
  for (int i = 0; i < n; ++i) {
    xs[i] = lo + (hi - lo) * u[i];
    tot += (ws[i] = 0.05 + u[n + i]);
  }
  double partial = 0.0;
  for (int i = 0; i + 1 < n; ++i) partial += (ws[i] /= tot);
  ws[n - 1] = 1.0 - partial;
  return {1, xs, ws, true};
}

JetArgs cube_jet(const double* u) {
  double c[7];
  for (int k = 0; k < 7; ++k) c[k] = -2.0 + 4.0 * u[k];
  JetArgs j;
  j.p = [=](const Vec& x) { return scalar_vec(c[0] + c[1] * x[0] + c[2] * std::sin(x[0])); };
  j.q = [=](const Vec& x) { return scalar_mat(c[3] + c[4] * x[0] + c[5] * std::cos(x[0])); };
  j.M = scalar_mat(c[6]);
  return j;
}

Vec clamp_unit(const Vec& u) { return u.cwiseMax(0.0).cwiseMin(1.0); }

}  // namespace

int lipschitz_family_dim() { return 8 + 1 + 14; }

LipschitzSample lipschitz_family_sample(const Vec& u0) {
  require(u0.size() == lipschitz_family_dim(), "lipschitz family: wrong parameter count");
  const Vec u = clamp_unit(u0);
  return {cube_measure(u.data(), 4, -3.0, 3.0), scalar_vec(-3.0 + 6.0 * u[8]),
          cube_jet(u.data() + 9), cube_jet(u.data() + 16)};
}

int penalty_family_dim() { return 12 + 2 + 2 + 1; }

PenaltySample penalty_family_sample(const Vec& u0) {
  require(u0.size() == penalty_family_dim(), "penalty family: wrong parameter count");
  const Vec u = clamp_unit(u0);
  const double X = -2.0 + 4.0 * u[14];
  const double eps = std::exp(std::log(0.02) + (std::log(0.5) - std::log(0.02)) * u[16]);
  return {cube_measure(u.data(), 3, -2.0, 2.0),
          cube_measure(u.data() + 6, 3, -2.0, 2.0),
          scalar_vec(-1.0 + 2.0 * u[12]),
          scalar_vec(-1.0 + 2.0 * u[13]),
          eps,
          scalar_mat(X),
          scalar_mat(X + u[15])};
}

std::vector<Vec> unit_cube_samples(int dim, int n, std::uint64_t seed, std::uint64_t stream) {
  std::vector<Vec> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    CounterRng rng(seed, {stream, static_cast<std::uint64_t>(k)});
    Vec u(dim);
    for (int a = 0; a < dim; ++a) u[a] = rng.uniform();
    out.push_back(std::move(u));
  }
  return out;
}

FamilyFit fit_assumption_i(const FilteringCoeffs& c, const std::vector<Vec>& grid, int n_fit,
                           int n_hold, std::uint64_t seed, const AscentConfig& cfg,
                           double holdout_scale) {
  require(holdout_scale > 0.0, "fit_assumption_i: holdout_scale must be > 0");
  require(c.d == 1, "fit_assumption_i: the sample family is one-dimensional");
  const int dim = lipschitz_family_dim();
  const Objective ratio = [&](const Vec& u) {
    return filtering_lipschitz_terms(lipschitz_family_sample(u), c, grid).ratio();
  };
  FamilyFit out;
  out.fit = fit_supremum(ratio, unit_cube_samples(dim, n_fit, seed, 1), Vec::Zero(dim),
                         Vec::Ones(dim), cfg);
  std::vector<LipschitzSample> held;
  for (const Vec& u : unit_cube_samples(dim, n_hold, seed, 2))
    held.push_back(lipschitz_family_sample(u));
  out.holdout = check_assumption_i_filtering(c, held, grid, holdout_scale * out.fit.constant);
  return out;
}

FamilyFit fit_assumption_ii(const FilteringCoeffs& c, const FourierMetric& metric,
                            const std::vector<Vec>& grid, int n_fit, int n_hold,
                            std::uint64_t seed, const AscentConfig& cfg, double holdout_scale) {
  require(holdout_scale > 0.0, "fit_assumption_ii: holdout_scale must be > 0");
  require(c.d == 1 && metric.dim() == 1, "fit_assumption_ii: the sample family is one-dimensional");
  const int dim = penalty_family_dim();
  const Objective ratio = [&](const Vec& u) {
    return filtering_penalty_terms(penalty_family_sample(u), c, metric, grid).ratio();
  };
  FamilyFit out;
  out.fit = fit_supremum(ratio, unit_cube_samples(dim, n_fit, seed, 3), Vec::Zero(dim),
                         Vec::Ones(dim), cfg);
  std::vector<PenaltySample> held;
  const double eps[] = {0.5, 0.1, 0.02};
  for (const Vec& u : unit_cube_samples(dim, n_hold, seed, 4)) {
    held.push_back(penalty_family_sample(u));
    held.back().eps = eps[(held.size() - 1) % 3];
  }
  out.holdout =
      check_assumption_ii_filtering(c, held, metric, grid, holdout_scale * out.fit.constant);
  return out;
}

// ------------------------------------------------------------------- regret

SimplexAction::SimplexAction(int K, std::vector<double> weights)
    : K_(K), weights_(std::move(weights)) {
  require(K >= 1 && K <= 16, "SimplexAction: K must be in [1, 16]");
  require(weights_.size() == (std::size_t{1} << K), "SimplexAction: need 2^K weights");
  double s = 0.0;
  for (double w : weights_) {
    require(std::isfinite(w) && w >= 0.0, "SimplexAction: weights must be >= 0");
    s += w;
  }
  require(std::abs(s - 1.0) <= 1e-12, "SimplexAction: weights must sum to 1");
}

SimplexAction SimplexAction::vertex(int K, unsigned subset) {
  std::vector<double> w(std::size_t{1} << K, 0.0);
  require(subset < w.size(), "SimplexAction::vertex: subset out of range");
  w[subset] = 1.0;
  return {K, std::move(w)};
}

SimplexAction SimplexAction::uniform(int K) {
  const std::size_t n = std::size_t{1} << K;
  return {K, std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

Vec subset_indicator(int K, unsigned subset) {
  Vec e(K);
  for (int l = 0; l < K; ++l) e[l] = (subset >> l) & 1u ? 1.0 : 0.0;
  return e;
}

HatWeights hat_weights(const SimplexAction& a, int i) {
  require(i >= 0 && i < a.K(), "hat_weights: action index out of range");
  HatWeights h;
  for (unsigned j = 0; j < a.size(); ++j) ((j >> i) & 1u ? h.in : h.out) += a[j];
  return h;
}

namespace {

unsigned full_mask(int K) { return (1u << K) - 1u; }

// u = sum_{j in i} a_j e_{j^C}, u' = sum_{j not in i} a_j e_j, with masses.
struct Moments {
  Vec u_in, u_out;
  double s_in = 0.0, s_out = 0.0;
};

Moments moments(int K, const std::vector<double>& a, int i) {
  Moments m{Vec::Zero(K), Vec::Zero(K), 0.0, 0.0};
  const unsigned full = full_mask(K);
  for (unsigned j = 0; j < a.size(); ++j) {
    if (a[j] == 0.0) continue;
    if ((j >> i) & 1u) {
      m.u_in += a[j] * subset_indicator(K, full & ~j);
      m.s_in += a[j];
    } else {
      m.u_out += a[j] * subset_indicator(K, j);
      m.s_out += a[j];
    }
  }
  return m;
}

double regret_value(int K, const std::vector<double>& a, int i, const Mat& Q, const Mat& M) {
  const Moments mo = moments(K, a, i);
  const Mat B = M - Q;
  const unsigned full = full_mask(K);
  double lin_in = 0.0, lin_out = 0.0;
  for (unsigned j = 0; j < a.size(); ++j) {
    if (a[j] == 0.0) continue;
    if ((j >> i) & 1u) {
      const Vec e = subset_indicator(K, full & ~j);
      lin_in += a[j] * e.dot(Q * e);
    } else {
      const Vec e = subset_indicator(K, j);
      lin_out += a[j] * e.dot(Q * e);
    }
  }
  double v = 0.0;
  if (mo.s_in > 0.0) v += 0.5 * (mo.u_in.dot(B * mo.u_in) / mo.s_in + lin_in);
  if (mo.s_out > 0.0) v += 0.5 * (mo.u_out.dot(B * mo.u_out) / mo.s_out + lin_out);
  return v;
}

std::vector<double> regret_gradient(int K, const std::vector<double>& a, int i, const Mat& Q,
                                    const Mat& M) {
  const Moments mo = moments(K, a, i);
  const Mat B = M - Q;
  const Mat Bs = 0.5 * (B + B.transpose());
  const unsigned full = full_mask(K);
  std::vector<double> g(a.size());
  const double t_in = mo.s_in > 0.0 ? mo.u_in.dot(B * mo.u_in) / (mo.s_in * mo.s_in) : 0.0;
  const double t_out = mo.s_out > 0.0 ? mo.u_out.dot(B * mo.u_out) / (mo.s_out * mo.s_out) : 0.0;
  for (unsigned j = 0; j < a.size(); ++j) {
    const bool in = (j >> i) & 1u;
    const Vec e = subset_indicator(K, in ? full & ~j : j);
    const double s = in ? mo.s_in : mo.s_out;
    const Vec& u = in ? mo.u_in : mo.u_out;
    // one-sided derivative at s = 0 is e^T B e
    const double dT = s > 0.0 ? 2.0 * e.dot(Bs * u) / s - (in ? t_in : t_out) : e.dot(B * e);
    g[j] = 0.5 * (dT + e.dot(Q * e));
  }
  return g;
}

}  // namespace

VVectors V_vectors(const SimplexAction& a, int i) {
  const HatWeights h = hat_weights(a, i);
  const Moments mo = moments(a.K(), a.weights(), i);
  VVectors v;
  v.in = h.in > 0.0 ? Vec(mo.u_in / h.in) : Vec(Vec::Zero(a.K()));
  v.out = h.out > 0.0 ? Vec(mo.u_out / h.out) : Vec(Vec::Zero(a.K()));
  return v;
}

Mat integrate_field(const SignedAtomicMeasure& mu, const std::function<Mat(const Vec&)>& q) {
  require(mu.size() > 0, "integrate_field: empty measure");
  Mat acc;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Mat v = mu.weight(i) * q(mu.atom(i));
    if (i == 0)
      acc = v;
    else
      acc += v;
  }
  return acc;
}

double K_regret(int i, const SimplexAction& a, const Mat& Q, const Mat& M) {
  require(i >= 0 && i < a.K(), "K_regret: action index out of range");
  require(Q.rows() == a.K() && Q.cols() == a.K() && M.rows() == a.K() && M.cols() == a.K(),
          "K_regret: matrices must be K x K");
  return regret_value(a.K(), a.weights(), i, Q, M);
}

double K_regret(int i, const SimplexAction& a, const SignedAtomicMeasure& mu,
                const std::function<Mat(const Vec&)>& q, const Mat& M) {
  require(mu.dim() == a.K(), "K_regret: measure must live on R^K");
  return K_regret(i, a, integrate_field(mu, q), M);
}

std::vector<double> project_simplex(const std::vector<double>& v) {
  std::vector<double> s(v);
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    cum += s[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (s[k] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  double total = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) total += (out[k] = std::max(0.0, v[k] - theta));
  for (double& x : out) x /= total;
  return out;
}

RegretSup G_regret(const Mat& Q, const Mat& M, const RegretSolverConfig& cfg) {
  const int K = static_cast<int>(Q.rows());
  require(K >= 1 && K <= 8 && Q.cols() == K && M.rows() == K && M.cols() == K,
          "G_regret: matrices must be K x K with 1 <= K <= 8");
  const std::size_t n = std::size_t{1} << K;
  RegretSup best;
  best.value = -kInf;
  auto consider = [&](int i, const std::vector<double>& a) {
    const double v = regret_value(K, a, i, Q, M);
    if (v > best.value) {
      best.value = v;
      best.i = i;
      best.a = a;
    }
  };
  for (int i = 0; i < K; ++i) {
    for (unsigned j = 0; j < n; ++j) {
      std::vector<double> a(n, 0.0);
      a[j] = 1.0;
      consider(i, a);
    }
    std::vector<std::vector<double>> starts;
    starts.emplace_back(n, 1.0 / static_cast<double>(n));
    for (int s = 0; s < cfg.starts; ++s) {
      CounterRng rng(cfg.seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(s)});
      std::vector<double> a(n);
      double tot = 0.0;
      for (double& x : a) tot += (x = -std::log(rng.uniform()));
      for (double& x : a) x /= tot;
      starts.push_back(std::move(a));
    }
    for (auto a : starts) {
      double fa = regret_value(K, a, i, Q, M);
      double step = 1.0;
      for (int it = 0; it < cfg.iterations; ++it) {
        const auto g = regret_gradient(K, a, i, Q, M);
        bool moved = false;
        for (double t = step; t > 1e-14; t *= 0.5) {
          std::vector<double> y(n);
          for (std::size_t k = 0; k < n; ++k) y[k] = a[k] + t * g[k];
          y = project_simplex(y);
          const double fy = regret_value(K, y, i, Q, M);
          if (fy > fa + 1e-15 * std::max(1.0, std::abs(fa))) {
            a = std::move(y);
            fa = fy;
            step = std::min(1.0, 2.0 * t);
            moved = true;
            break;
          }
        }
        if (!moved) break;
      }
      consider(i, a);
    }
  }
  return best;
}

double regret_lipschitz_constant(int K) { return std::ldexp(1.0, 3 * K - 2); }

namespace {

Mat uniform_sym(CounterRng& rng, int K, double scale) {
  Mat A(K, K);
  for (int r = 0; r < K; ++r)
    for (int c = 0; c < K; ++c) A(r, c) = scale * (2.0 * rng.uniform() - 1.0);
  return 0.5 * (A + A.transpose());
}

SignedAtomicMeasure uniform_probability(CounterRng& rng, int d, int n, double spread) {
  std::vector<double> xs(static_cast<std::size_t>(n * d)), ws(n);
  for (double& x : xs) x = spread * (2.0 * rng.uniform() - 1.0);
  double s = 0.0;
  for (double& w : ws) s += (w = 0.05 + 0.95 * rng.uniform());
  double partial = 0.0;
  for (int i = 0; i + 1 < n; ++i) partial += (ws[i] /= s);
  ws[n - 1] = 1.0 - partial;
  return {d, xs, ws, true};
}

SimplexAction sparse_action(CounterRng& rng, int K, double zero_prob) {
  std::vector<double> w(std::size_t{1} << K);
  double s = 0.0;
  for (double& x : w) s += (x = rng.uniform() < zero_prob ? 0.0 : -std::log(rng.uniform()));
  if (s == 0.0) {
    w[0] = s = 1.0;
  }
  double partial = 0.0;
  for (std::size_t j = 0; j + 1 < w.size(); ++j) partial += (w[j] /= s);
  w.back() = std::max(0.0, 1.0 - partial);
  return {K, w};
}

}  // namespace

std::vector<RegretLipschitzSample> regret_lipschitz_samples(int K, int n, std::uint64_t seed) {
  require(K >= 1 && n >= 0, "regret samples: bad sizes");
  std::vector<RegretLipschitzSample> out;
  out.reserve(n);
  for (int t = 0; t < n; ++t) {
    CounterRng rng(seed, {5, static_cast<std::uint64_t>(t)});
    auto field = [&]() {
      const Mat S0 = uniform_sym(rng, K, 1.0), S1 = uniform_sym(rng, K, 0.5),
                S2 = uniform_sym(rng, K, 0.5);
      return std::function<Mat(const Vec&)>(
          [=](const Vec& x) -> Mat { return S0 + x[0] * S1 + std::sin(x[K - 1]) * S2; });
    };
    SignedAtomicMeasure mu = uniform_probability(rng, K, 3, 2.0);
    auto q1 = field();
    auto q2 = field();
    Mat M1 = uniform_sym(rng, K, 1.0);
    Mat M2 = uniform_sym(rng, K, 1.0);
    out.push_back({std::move(mu), std::move(q1), std::move(q2), std::move(M1), std::move(M2)});
  }
  return out;
}

std::vector<RegretSignSample> regret_sign_samples(int K, int n, std::uint64_t seed, int probes) {
  require(K >= 1 && n >= 0 && probes >= 1, "regret samples: bad sizes");
  const double eps[] = {0.5, 0.1, 0.02};
  std::vector<RegretSignSample> out;
  out.reserve(n);
  for (int t = 0; t < n; ++t) {
    CounterRng rng(seed, {6, static_cast<std::uint64_t>(t)});
    SignedAtomicMeasure mu = uniform_probability(rng, K, 3, 1.5);
    SignedAtomicMeasure nu = uniform_probability(rng, K, 3, 1.5);
    RegretSignSample s{std::move(mu), std::move(nu), eps[t % 3], uniform_sym(rng, K, 1.0), {}};
    for (int p = 0; p < probes; ++p) s.probes.emplace_back(p % K, sparse_action(rng, K, 0.3));
    out.push_back(std::move(s));
  }
  return out;
}

CheckReport check_assumptions_regret(const std::vector<RegretLipschitzSample>& lipschitz,
                                     const std::vector<RegretSignSample>& sign,
                                     const FourierMetric& metric, const RegretSolverConfig& cfg,
                                     double tol, double lipschitz_scale) {
  CheckReport rep{"assumptions-regret", true, 0.0, tol, ""};
  int lip_viol = 0, sign_viol = 0;
  double worst_lip = 0.0, worst_sign = -kInf;
  for (std::size_t k = 0; k < lipschitz.size(); ++k) {
    const auto& s = lipschitz[k];
    const int K = s.mu.dim();
    const double g1 = G_regret(integrate_field(s.mu, s.q1), s.M1, cfg).value;
    const double g2 = G_regret(integrate_field(s.mu, s.q2), s.M2, cfg).value;
    const auto probes = growth_probe_set(s.mu);
    const double gap =
        linear_growth_norm(std::function<Mat(const Vec&)>(
                               [&](const Vec& x) -> Mat { return s.q1(x) - s.q2(x); }),
                           probes) +
        (s.M1 - s.M2).norm();
    const double rhs = lipschitz_scale * regret_lipschitz_constant(K) *
                       (1.0 + s.mu.first_abs_moment()) * gap;
    const double lhs = std::abs(g1 - g2);
    if (rhs > 0.0) worst_lip = std::max(worst_lip, lhs / rhs);
    if (lhs > rhs * (1.0 + tol)) ++lip_viol;
  }
  for (std::size_t k = 0; k < sign.size(); ++k) {
    const auto& s = sign[k];
    const KappaKernel kappa(metric, s.mu, s.nu, s.eps);
    const auto hess = [&kappa](const Vec& x) { return kappa.hessian(x); };
    const Mat Qmu = integrate_field(s.mu, hess);
    const Mat Qnu = integrate_field(s.nu, hess);
    for (const auto& [i, a] : s.probes) {
      const double kmu = K_regret(i, a, Qmu, s.M);
      const double knu = K_regret(i, a, Qnu, s.M);
      const double scale = std::max(1.0, std::abs(kmu) + std::abs(knu));
      worst_sign = std::max(worst_sign, (kmu - knu) / scale);
      if (kmu - knu > tol * scale) ++sign_viol;
    }
  }
  rep.worst = std::max(worst_lip - 1.0, worst_sign);
  rep.detail = "max |dG|/bound=" + fmt(worst_lip) + " max sign gap/scale=" + fmt(worst_sign);
  if (lip_viol > 0) rep.fail(std::to_string(lip_viol) + " Lipschitz violations");
  if (sign_viol > 0) rep.fail(std::to_string(sign_viol) + " sign violations");
  return rep;
}

}  // namespace fwlab
