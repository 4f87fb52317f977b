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

#include "fwlab/filtering_sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "fwlab/parallel.hpp"
#include "fwlab/rng.hpp"

namespace fwlab {

namespace {

constexpr double kDivergence = 1e6;

enum StreamKind : std::uint64_t { kInit = 0, kIdio = 1, kCommon = 2 };

const LqParams& require_lq(const FilteringCoeffs& c) {
  if (!c.lq) throw InputError("coefficients '" + c.name + "' are not of LQ type");
  require(c.d == 1, "LQ family is scalar");
  return *c.lq;
}

}  // namespace

void SimConfig::validate(double t) const {
  require(std::isfinite(dt) && dt > 0.0, "sim: dt must be > 0");
  require(particles >= 1, "sim: need at least one particle");
  require(runs >= 1, "sim: need at least one run");
  require(horizon >= t, "sim: horizon before start time");
  require(dt <= horizon - t || horizon == t, "sim: dt exceeds the horizon");
}

int SimConfig::steps(double t) const {
  if (horizon == t) return 0;
  return std::max(1, static_cast<int>(std::ceil((horizon - t) / dt - 1e-9)));
}

ControlPolicy constant_policy(const Vec& a) {
  return {"constant", [a](const LawSummary&) { return a; }};
}

ControlPolicy lq_feedback_policy(const FilteringCoeffs& c, double horizon) {
  const LqParams p = require_lq(c);
  return {"lq-feedback", [p, horizon](const LawSummary& s) {
            const double P = lq_riccati(p, s.time, horizon).P;
            return Vec(-P * s.mean / p.control_weight);
          }};
}

ControlPolicy policy_from_name(const std::string& name, const FilteringCoeffs& c,
                               double horizon) {
  if (name == "zero") {
    ControlPolicy z = constant_policy(Vec::Zero(c.control_dim()));
    z.name = name;
    return z;
  }
  if (name == "lq-feedback") return lq_feedback_policy(c, horizon);
  throw InputError("unknown policy '" + name + "' (known: zero lq-feedback)");
}

namespace {

// Calls obs(k, summary, control, running_cost) before step k and once
// more after the last step with an empty control; returns the run cost.
template <class Observer>
double run_particles(double t, const SignedAtomicMeasure& mu, const ControlPolicy& policy,
                     const FilteringCoeffs& c, const SimConfig& cfg, int run, Observer&& obs) {
  require(mu.probability(), "simulate: initial law must be a probability measure");
  require(mu.dim() == c.d, "simulate: dimension mismatch");
  cfg.validate(t);
  const int d = c.d;
  const std::size_t N = static_cast<std::size_t>(cfg.particles);
  const int n = cfg.steps(t);
  const double h = n > 0 ? (cfg.horizon - t) / n : 0.0;
  const double sqh = std::sqrt(h);
  const auto r64 = static_cast<std::uint64_t>(run);

  std::vector<double> cum(mu.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) cum[i] = (acc += mu.weight(i));
  std::vector<double> x(N * d);
  std::vector<CounterRng> idio;
  idio.reserve(N);
  const std::uint64_t idio_seed = cfg.idio_seed.value_or(cfg.seed);
  for (std::size_t i = 0; i < N; ++i) {
    CounterRng init(cfg.seed, {kInit, r64, i});
    const double u = init.uniform() * acc;
    const std::size_t k = std::min<std::size_t>(
        std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(), mu.size() - 1);
    const auto loc = mu.location(k);
    std::copy(loc.begin(), loc.end(), x.begin() + i * d);
    idio.emplace_back(idio_seed, std::initializer_list<std::uint64_t>{kIdio, r64, i});
  }
  CounterRng common(cfg.seed, {kCommon, r64});

  LawSummary sum;
  sum.states = &x;
  Vec xi(d), dB, dW;
  double running = 0.0;
  const double inv_n = 1.0 / static_cast<double>(N);
  for (int k = 0; k <= n; ++k) {
    sum.time = k == n ? cfg.horizon : t + k * h;
    sum.mean = Vec::Zero(d);
    for (std::size_t i = 0; i < N; ++i)
      sum.mean += Eigen::Map<const Vec>(x.data() + i * d, d);
    sum.mean *= inv_n;
    sum.covariance = Mat::Zero(d, d);
    for (std::size_t i = 0; i < N; ++i) {
      const Vec y = Eigen::Map<const Vec>(x.data() + i * d, d) - sum.mean;
      sum.covariance += y * y.transpose();
    }
    sum.covariance *= inv_n;
    if (k == n) {
      obs(k, sum, Vec(), running);
      break;
    }
    Vec a = policy.rule(sum);
    require(a.size() == c.control_dim(), "policy returned a control of the wrong size");
    a = a.cwiseMax(c.control_lo).cwiseMin(c.control_hi);
    obs(k, sum, a, running);

    double rsum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      xi = Eigen::Map<const Vec>(x.data() + i * d, d);
      rsum += c.r(xi, a);
    }
    running += h * rsum * inv_n;

    const Mat st = c.sigma_tilde(a);
    dW.resize(st.cols());
    for (int q = 0; q < st.cols(); ++q) dW[q] = sqh * common.normal();
    const Vec shift = st * dW;
    for (std::size_t i = 0; i < N; ++i) {
      Eigen::Map<Vec> xs(x.data() + i * d, d);
      xi = xs;
      const Mat s = c.sigma(xi, a);
      dB.resize(s.cols());
      for (int q = 0; q < s.cols(); ++q) dB[q] = sqh * idio[i].normal();
      xs += c.b(xi, a) * h + s * dB + shift;
      for (int q = 0; q < d; ++q)
        if (!(std::abs(xs[q]) <= kDivergence))
          throw NumericalError("simulate: particle diverged beyond 1e6");
    }
  }
  double lsum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    xi = Eigen::Map<const Vec>(x.data() + i * d, d);
    lsum += c.l(xi);
  }
  return running + lsum * inv_n;
}

}  // namespace

LawPath simulate_conditional_law(double t, const SignedAtomicMeasure& mu,
                                 const ControlPolicy& policy, const FilteringCoeffs& c,
                                 const SimConfig& cfg, int run) {
  LawPath path;
  const std::vector<double> w(cfg.particles, 1.0 / cfg.particles);
  run_particles(t, mu, policy, c, cfg, run,
                [&](int, const LawSummary& s, const Vec& a, double) {
                  path.times.push_back(s.time);
                  path.laws.emplace_back(c.d, *s.states, w, false);
                  if (a.size() > 0) path.controls.push_back(a);
                });
  return path;
}

CostEstimate estimate_cost(double t, const SignedAtomicMeasure& mu, const ControlPolicy& policy,
                           const FilteringCoeffs& c, const SimConfig& cfg) {
  cfg.validate(t);
  const int n = cfg.steps(t);
  CostEstimate out;
  out.run_costs.assign(cfg.runs, 0.0);
  std::vector<std::vector<StepSummary>> paths(cfg.runs);
  parallel_for(static_cast<std::size_t>(cfg.runs), [&](std::size_t r) {
    auto& p = paths[r];
    p.reserve(n + 1);
    out.run_costs[r] = run_particles(
        t, mu, policy, c, cfg, static_cast<int>(r),
        [&](int, const LawSummary& s, const Vec&, double running) {
          p.push_back({s.time, s.mean[0], s.covariance(0, 0), running});
        });
  });
  const RunStats st = run_stats(out.run_costs.data(), out.run_costs.size());
  out.estimate = st.mean;
  out.std_error = st.std_error;
  out.path.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    StepSummary& s = out.path[k];
    s.time = paths[0][k].time;
    for (const auto& p : paths) {
      s.mean += p[k].mean;
      s.variance += p[k].variance;
      s.cost_to_date += p[k].cost_to_date;
    }
    s.mean /= cfg.runs;
    s.variance /= cfg.runs;
    s.cost_to_date /= cfg.runs;
  }
  return out;
}

// ---------------------------------------------------------------- LQG oracle

Riccati lq_riccati(const LqParams& p, double s, double horizon) {
  const double tau = horizon - s;
  const double w = p.terminal_weight, rho = p.control_weight;
  const double st2 = p.sigma_tilde * p.sigma_tilde;
  return {w * rho / (rho + w * tau), st2 * rho * std::log1p(w * tau / rho)};
}

Riccati lq_riccati_rk4(const LqParams& p, double s, double horizon, int steps) {
  require(steps >= 1, "riccati: need at least one step");
  const double rho = p.control_weight;
  const double st2 = p.sigma_tilde * p.sigma_tilde;
  // backward time tau = T - s: dP/dtau = -P^2 / rho, dbeta/dtau = sigma~^2 P
  double P = p.terminal_weight, beta = 0.0;
  const double h = (horizon - s) / steps;
  auto fP = [rho](double q) { return -q * q / rho; };
  for (int k = 0; k < steps; ++k) {
    const double k1 = fP(P), b1 = st2 * P;
    const double P2 = P + 0.5 * h * k1;
    const double k2 = fP(P2), b2 = st2 * P2;
    const double P3 = P + 0.5 * h * k2;
    const double k3 = fP(P3), b3 = st2 * P3;
    const double P4 = P + h * k3;
    const double k4 = fP(P4), b4 = st2 * P4;
    P += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    beta += h / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4);
  }
  return {P, beta};
}

namespace {

double lq_variance_part(const LqParams& p, const SignedAtomicMeasure& mu, double t,
                        double horizon) {
  const double m = mu.mean()[0];
  const double var = mu.second_moment() - m * m;
  return p.terminal_weight * (var + p.sigma * p.sigma * (horizon - t));
}

}  // namespace

double lqg_value_oracle(double t, const SignedAtomicMeasure& mu, const FilteringCoeffs& c,
                        double horizon, int steps) {
  const LqParams& p = require_lq(c);
  require(mu.probability() && mu.dim() == 1, "lqg oracle: need a probability measure on R");
  require(horizon >= t, "lqg oracle: horizon before start time");
  const Riccati r = horizon == t ? Riccati{p.terminal_weight, 0.0}
                                 : lq_riccati_rk4(p, t, horizon, steps);
  const double m = mu.mean()[0];
  return r.P * m * m + r.beta + lq_variance_part(p, mu, t, horizon);
}

namespace {

// Probabilists' Gauss-Hermite rule for E f(xi), xi ~ N(0, 1) (Golub-Welsch).
void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  Mat J = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k - 1, k) = J(k, k - 1) = std::sqrt(static_cast<double>(k));
  const Eigen::SelfAdjointEigenSolver<Mat> es(J);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()[i];
    w[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
}

double lq_dp_once(double t, double m0, const FilteringCoeffs& c, double horizon,
                  const DpConfig& cfg, int time_steps) {
  const LqParams& p = *c.lq;
  const int S = cfg.state_points;
  const double R = cfg.state_radius;
  const double hx = 2.0 * R / (S - 1);
  const double h = (horizon - t) / time_steps;
  const auto grid = c.control_grid(cfg.control_points);
  const double st = p.sigma_tilde;
  std::vector<double> gx, gw;
  gauss_hermite(cfg.hermite_nodes, gx, gw);

  std::vector<double> v(S), next(S);
  for (int j = 0; j < S; ++j) {
    const double M = -R + j * hx;
    v[j] = p.terminal_weight * M * M;
  }
  // cubic Lagrange on four nodes, edge stencils extrapolate
  auto interp = [&](const std::vector<double>& f, double M) {
    const double u = (M + R) / hx;
    int i = static_cast<int>(std::floor(u)) - 1;
    i = std::clamp(i, 0, S - 4);
    const double s = u - i;
    const double l0 = -(s - 1) * (s - 2) * (s - 3) / 6.0;
    const double l1 = s * (s - 2) * (s - 3) / 2.0;
    const double l2 = -s * (s - 1) * (s - 3) / 2.0;
    const double l3 = s * (s - 1) * (s - 2) / 6.0;
    return l0 * f[i] + l1 * f[i + 1] + l2 * f[i + 2] + l3 * f[i + 3];
  };
  const double lo = c.control_lo[0], hi = c.control_hi[0];
  for (int k = 0; k < time_steps; ++k) {
    parallel_for(static_cast<std::size_t>(S), [&](std::size_t j) {
      const double M = -R + static_cast<double>(j) * hx;
      auto cost = [&](double a) {
        double e = 0.0;
        for (int q = 0; q < cfg.hermite_nodes; ++q)
          e += gw[q] * interp(v, M + a * h + st * std::sqrt(h) * gx[q]);
        return p.control_weight * a * a * h + e;
      };
      std::size_t best = 0;
      double bv = INFINITY;
      std::vector<double> vals(grid.size());
      for (std::size_t g = 0; g < grid.size(); ++g) {
        vals[g] = cost(grid[g][0]);
        if (vals[g] < bv) {
          bv = vals[g];
          best = g;
        }
      }
      if (best > 0 && best + 1 < grid.size()) {
        const double a0 = grid[best - 1][0], a1 = grid[best][0], a2 = grid[best + 1][0];
        const double f0 = vals[best - 1], f1 = vals[best], f2 = vals[best + 1];
        const double den = (a1 - a0) * (f1 - f2) - (a1 - a2) * (f1 - f0);
        if (den != 0.0) {
          const double num = (a1 - a0) * (a1 - a0) * (f1 - f2) - (a1 - a2) * (a1 - a2) * (f1 - f0);
          const double a = std::clamp(a1 - 0.5 * num / den, lo, hi);
          bv = std::min(bv, cost(a));
        }
      }
      next[j] = bv;
    });
    v.swap(next);
  }
  return interp(v, m0);
}

}  // namespace

double lq_dynamic_program(double t, const SignedAtomicMeasure& mu, const FilteringCoeffs& c,
                          double horizon, const DpConfig& cfg) {
  const LqParams& p = require_lq(c);
  require(mu.probability() && mu.dim() == 1, "lq dp: need a probability measure on R");
  require(horizon > t, "lq dp: need horizon > t");
  require(cfg.time_steps >= 1 && cfg.state_points >= 8 && cfg.control_points >= 3 &&
              cfg.hermite_nodes >= 2,
          "lq dp: grid too small");
  const double m0 = mu.mean()[0];
  require(std::abs(m0) < cfg.state_radius, "lq dp: mean outside the state grid");
  double v = lq_dp_once(t, m0, c, horizon, cfg, cfg.time_steps);
  if (cfg.richardson) v = 2.0 * lq_dp_once(t, m0, c, horizon, cfg, 2 * cfg.time_steps) - v;
  return v + lq_variance_part(p, mu, t, horizon);
}

// ------------------------------------------------------- viscosity residual

namespace {

SignedAtomicMeasure move_atom(const SignedAtomicMeasure& mu, std::size_t i, int a, double h) {
  std::vector<double> locs = mu.locations();
  locs[i * mu.dim() + a] += h;
  return {mu.dim(), std::move(locs), mu.weights(), mu.probability()};
}

Vec axis(int d, int a, double h) {
  Vec e = Vec::Zero(d);
  e[a] = h;
  return e;
}

void compare(double fd, double an, double tol, const std::string& what) {
  if (!(std::abs(fd - an) <= tol * (1.0 + std::abs(an)))) {
    std::ostringstream os;
    os.precision(10);
    os << "candidate derivative inconsistent along " << what << ": analytic " << an
       << ", finite difference " << fd;
    throw InputError(os.str());
  }
}

}  // namespace

void check_candidate(const SmoothCandidate& phi, double t, const SignedAtomicMeasure& mu,
                     double tol) {
  const int d = mu.dim();
  const double h1 = 1e-5, h2 = 1e-4;
  compare((phi.value(t + h1, mu) - phi.value(t - h1, mu)) / (2 * h1), phi.dt(t, mu), tol, "time");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Vec x = mu.atom(i);
    const Vec g = phi.d_mu(t, mu, x);
    const Mat G = phi.d_xmu(t, mu, x);
    for (int a = 0; a < d; ++a) {
      const double fd =
          (phi.value(t, move_atom(mu, i, a, h1)) - phi.value(t, move_atom(mu, i, a, -h1))) /
          (2 * h1);
      compare(fd, mu.weight(i) * g[a], tol, "atom " + std::to_string(i) + " axis " +
                                               std::to_string(a) + " (D_mu)");
      const Vec dg = (phi.d_mu(t, mu, x + axis(d, a, h1)) - phi.d_mu(t, mu, x - axis(d, a, h1))) /
                     (2 * h1);
      for (int b = 0; b < d; ++b)
        compare(dg[b], G(b, a), tol,
                "atom " + std::to_string(i) + " entry " + std::to_string(b) + "," +
                    std::to_string(a) + " (D_xmu)");
    }
  }
  const Mat H = phi.H(t, mu);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const Vec ea = axis(d, a, h2), eb = axis(d, b, h2);
      const double fd = (phi.value(t, mu.shifted(ea + eb)) - phi.value(t, mu.shifted(ea - eb)) -
                         phi.value(t, mu.shifted(eb - ea)) + phi.value(t, mu.shifted(-ea - eb))) /
                        (4 * h2 * h2);
      compare(fd, H(a, b), tol,
              "translation " + std::to_string(a) + "," + std::to_string(b) + " (H)");
    }
}

double viscosity_residual(const SmoothCandidate& phi, double t, const SignedAtomicMeasure& mu,
                          const FilteringCoeffs& c, const std::vector<Vec>& grid, bool check) {
  if (check) check_candidate(phi, t, mu);
  JetArgs jet;
  jet.p = [&](const Vec& x) { return phi.d_mu(t, mu, x); };
  jet.q = [&](const Vec& x) { return phi.d_xmu(t, mu, x); };
  jet.M = phi.H(t, mu);
  return -phi.dt(t, mu) - G_filtering(mu, jet, c, grid).value;
}

SmoothCandidate lq_candidate(const FilteringCoeffs& c, double horizon) {
  const LqParams p = require_lq(c);
  const double w = p.terminal_weight, s2 = p.sigma * p.sigma;
  const double st2 = p.sigma_tilde * p.sigma_tilde;
  auto mean = [](const SignedAtomicMeasure& mu) { return mu.mean()[0]; };
  SmoothCandidate phi;
  phi.value = [=](double t, const SignedAtomicMeasure& mu) {
    const Riccati r = lq_riccati(p, t, horizon);
    const double m = mean(mu);
    return r.P * m * m + r.beta + w * (mu.second_moment() - m * m + s2 * (horizon - t));
  };
  phi.dt = [=](double t, const SignedAtomicMeasure& mu) {
    const double P = lq_riccati(p, t, horizon).P;
    const double m = mean(mu);
    return P * P / p.control_weight * m * m - st2 * P - w * s2;
  };
  phi.d_mu = [=](double t, const SignedAtomicMeasure& mu, const Vec& x) {
    const double P = lq_riccati(p, t, horizon).P;
    const double m = mean(mu);
    return Vec::Constant(1, 2.0 * P * m + 2.0 * w * (x[0] - m));
  };
  phi.d_xmu = [=](double, const SignedAtomicMeasure&, const Vec&) {
    return Mat::Constant(1, 1, 2.0 * w);
  };
  phi.H = [=](double t, const SignedAtomicMeasure&) {
    return Mat::Constant(1, 1, 2.0 * lq_riccati(p, t, horizon).P);
  };
  return phi;
}

}  // namespace fwlab
