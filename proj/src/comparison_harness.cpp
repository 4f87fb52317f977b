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

#include "fwlab/comparison_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fwlab/filtering_sim.hpp"
#include "fwlab/parallel.hpp"
#include "fwlab/rng.hpp"

namespace fwlab {

int DiscretizedFunction::dim() const {
  require(!support.empty(), "discretized function: empty support");
  return static_cast<int>(support.front().size());
}

SignedAtomicMeasure DiscretizedFunction::measure(const Vec& w) const {
  require(static_cast<std::size_t>(w.size()) == support.size(),
          "discretized function: weight vector does not match the support");
  return SignedAtomicMeasure::from_atoms(support, std::vector<double>(w.data(), w.data() + w.size()),
                                         true);
}

SliceGeometry::SliceGeometry(const FourierMetric& metric, const std::vector<Vec>& support) {
  const int n = static_cast<int>(support.size());
  require(n > 0, "slice geometry: empty support");
  std::vector<SignedAtomicMeasure> diracs;
  diracs.reserve(n);
  for (const Vec& x : support) {
    require(x.size() == metric.dim(), "slice geometry: support dimension mismatch");
    diracs.push_back(SignedAtomicMeasure::dirac(x));
  }
  gram_.resize(n, n);
  second_moments_.resize(n);
  for (int i = 0; i < n; ++i) {
    const double nrm = metric.norm(diracs[i]);
    gram_(i, i) = nrm * nrm;
    second_moments_[i] = support[i].squaredNorm();
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      gram_(i, j) = gram_(j, i) =
          0.5 * (gram_(i, i) + gram_(j, j) - metric.rho_sq(diracs[i], diracs[j]));
}

double SliceGeometry::rho_sq(const Vec& w1, const Vec& w2) const {
  const Vec dw = w1 - w2;
  return std::max(0.0, dw.dot(gram_ * dw));
}

double SliceGeometry::d_F_sq(const SlicePoint& a, const SlicePoint& b) const {
  const double dt = a.t - b.t;
  return dt * dt + (a.m - b.m).squaredNorm() + rho_sq(a.w, b.w);
}

double SliceGeometry::vartheta(const SlicePoint& p) const {
  return 1.0 + p.m.squaredNorm() + p.w.dot(second_moments_);
}

void DoublingConfig::validate() const {
  require(horizon > 0.0, "doubling: horizon must be > 0");
  require(m_radius >= 0.0, "doubling: m_radius must be >= 0");
  require(starts >= 1, "doubling: need at least one start");
  require(max_iters >= 1, "doubling: max_iters must be >= 1");
  require(diagonal_probes >= 0, "doubling: diagonal_probes must be >= 0");
  require(fd_step > 0.0, "doubling: fd_step must be > 0");
}

nlohmann::json to_json(const DoublingConfig& cfg) {
  return {{"horizon", cfg.horizon},       {"m_radius", cfg.m_radius},
          {"starts", cfg.starts},         {"max_iters", cfg.max_iters},
          {"diagonal_probes", cfg.diagonal_probes}, {"fd_step", cfg.fd_step},
          {"step_tol", cfg.step_tol},     {"grad_tol", cfg.grad_tol},
          {"seed", cfg.seed}};
}

DoublingConfig doubling_config_from_json(const nlohmann::json& j) {
  DoublingConfig cfg;
  cfg.horizon = j.value("horizon", cfg.horizon);
  cfg.m_radius = j.value("m_radius", cfg.m_radius);
  cfg.starts = j.value("starts", cfg.starts);
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  cfg.diagonal_probes = j.value("diagonal_probes", cfg.diagonal_probes);
  cfg.fd_step = j.value("fd_step", cfg.fd_step);
  cfg.step_tol = j.value("step_tol", cfg.step_tol);
  cfg.grad_tol = j.value("grad_tol", cfg.grad_tol);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

double doubling_objective(const DiscretizedFunction& u, const DiscretizedFunction& v,
                          const SliceGeometry& geom, double eps, double delta,
                          const SlicePoint& theta, const SlicePoint& iota) {
  return u.eval(theta.t, theta.w, theta.m) - v.eval(iota.t, iota.w, iota.m) -
         geom.d_F_sq(theta, iota) / (2.0 * eps) - delta * (geom.vartheta(theta) + geom.vartheta(iota));
}

namespace {

// Packed variables: [t, w (n), m (d)] for theta then iota.
struct Layout {
  int n, d;
  int block() const { return 1 + n + d; }
  int size() const { return 2 * block(); }
};

Vec pack(const Layout& L, const SlicePoint& a, const SlicePoint& b) {
  Vec z(L.size());
  z[0] = a.t;
  z.segment(1, L.n) = a.w;
  z.segment(1 + L.n, L.d) = a.m;
  const int o = L.block();
  z[o] = b.t;
  z.segment(o + 1, L.n) = b.w;
  z.segment(o + 1 + L.n, L.d) = b.m;
  return z;
}

SlicePoint unpack(const Layout& L, const Vec& z, int side) {
  const int o = side * L.block();
  return {z[o], z.segment(o + 1, L.n), z.segment(o + 1 + L.n, L.d)};
}

Vec project_weights(const Vec& w) {
  const std::vector<double> p = project_simplex(std::vector<double>(w.data(), w.data() + w.size()));
  return Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(p.size()));
}

class Ascent {
 public:
  Ascent(const DiscretizedFunction& u, const DiscretizedFunction& v, const SliceGeometry& geom,
         double eps, double delta, const DoublingConfig& cfg)
      : u_(u), v_(v), geom_(geom), eps_(eps), delta_(delta), cfg_(cfg),
        L_{static_cast<int>(u.support.size()), u.dim()} {}

  const Layout& layout() const { return L_; }

  double value(const Vec& z) const {
    return doubling_objective(u_, v_, geom_, eps_, delta_, unpack(L_, z, 0), unpack(L_, z, 1));
  }

  Vec project(Vec z) const {
    for (int side = 0; side < 2; ++side) {
      const int o = side * L_.block();
      z[o] = std::clamp(z[o], 0.0, cfg_.horizon);
      z.segment(o + 1, L_.n) = project_weights(z.segment(o + 1, L_.n));
      for (int k = 0; k < L_.d; ++k)
        z[o + 1 + L_.n + k] = std::clamp(z[o + 1 + L_.n + k], -cfg_.m_radius, cfg_.m_radius);
    }
    return z;
  }

  // Box coordinates: central differences inside, second-order one-sided at
  // the boundary. Weights: one-sided derivatives along e_i - w, which equal
  // the gradient up to a constant shift on the block.
  Vec gradient(const Vec& z, double f0) const {
    const double h = cfg_.fd_step;
    Vec g = Vec::Zero(z.size());
    auto scalar = [&](int idx, double lo, double hi) {
      Vec zp = z;
      if (z[idx] - h >= lo && z[idx] + h <= hi) {
        zp[idx] = z[idx] + h;
        const double fp = value(zp);
        zp[idx] = z[idx] - h;
        return (fp - value(zp)) / (2.0 * h);
      }
      const double s = (z[idx] + 2.0 * h <= hi) ? 1.0 : -1.0;
      zp[idx] = z[idx] + s * h;
      const double f1 = value(zp);
      zp[idx] = z[idx] + 2.0 * s * h;
      const double f2 = value(zp);
      return s * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
    };
    for (int side = 0; side < 2; ++side) {
      const int o = side * L_.block();
      g[o] = scalar(o, 0.0, cfg_.horizon);
      const Vec w = z.segment(o + 1, L_.n);
      for (int i = 0; i < L_.n; ++i) {
        Vec dir = -w;
        dir[i] += 1.0;
        if (dir.squaredNorm() == 0.0) continue;
        Vec zp = z;
        zp.segment(o + 1, L_.n) = w + h * dir;
        const double f1 = value(zp);
        zp.segment(o + 1, L_.n) = w + 2.0 * h * dir;
        const double f2 = value(zp);
        g[o + 1 + i] = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
      }
      for (int k = 0; k < L_.d; ++k)
        g[o + 1 + L_.n + k] = scalar(o + 1 + L_.n + k, -cfg_.m_radius, cfg_.m_radius);
    }
    return g;
  }

  struct Result {
    Vec z;
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
  };

  // Spectral projected gradient: Barzilai-Borwein steps with a nonmonotone
  // backtracking search against the max of the last kMemory values.
  Result run(Vec z) const {
    constexpr int kMemory = 10;
    constexpr double kAlphaMin = 1e-10, kAlphaMax = 1e4;
    z = project(std::move(z));
    double f = value(z);
    Vec g = gradient(z, f);
    std::vector<double> recent{f};
    double alpha = 1.0;
    Result res;
    res.z = z;
    res.value = f;
    for (int it = 0; it < cfg_.max_iters; ++it) {
      res.iterations = it + 1;
      if ((project(z + g) - z).norm() < cfg_.grad_tol) {
        res.converged = true;
        break;
      }
      const Vec d = project(z + alpha * g) - z;
      const double slope = g.dot(d);
      const double ref = *std::max_element(recent.begin(), recent.end());
      double lambda = 1.0, fn = 0.0;
      bool moved = false;
      while (lambda * d.norm() >= cfg_.step_tol) {
        fn = value(z + lambda * d);
        if (fn >= ref + 1e-4 * lambda * slope) {
          moved = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!moved) break;
      const Vec zn = z + lambda * d;
      const Vec gn = gradient(zn, fn);
      const Vec s = zn - z;
      const double sy = -s.dot(gn - g);
      alpha = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, kAlphaMin, kAlphaMax) : kAlphaMax;
      z = zn;
      f = fn;
      g = gn;
      recent.push_back(f);
      if (static_cast<int>(recent.size()) > kMemory) recent.erase(recent.begin());
      if (f > res.value) {
        res.value = f;
        res.z = z;
      }
    }
    if (!res.converged && (project(res.z + gradient(res.z, res.value)) - res.z).norm() < cfg_.grad_tol)
      res.converged = true;
    return res;
  }

 private:
  const DiscretizedFunction& u_;
  const DiscretizedFunction& v_;
  const SliceGeometry& geom_;
  double eps_, delta_;
  const DoublingConfig& cfg_;
  Layout L_;
};

Vec dirichlet_weights(int n, CounterRng& rng) {
  Vec w(n);
  for (int i = 0; i < n; ++i) w[i] = -std::log(rng.uniform());
  return w / w.sum();
}

SlicePoint random_point(int n, int d, double horizon, double m_radius, CounterRng& rng) {
  SlicePoint p;
  p.t = horizon * rng.uniform();
  p.w = dirichlet_weights(n, rng);
  p.m.resize(d);
  for (int k = 0; k < d; ++k) p.m[k] = m_radius * (2.0 * rng.uniform() - 1.0);
  return p;
}

void check_pair(const DiscretizedFunction& u, const DiscretizedFunction& v) {
  require(u.eval && v.eval, "doubling: function without an evaluator");
  require(u.support.size() == v.support.size(), "doubling: u and v need the same support");
  for (std::size_t i = 0; i < u.support.size(); ++i)
    require(u.support[i].size() == v.support[i].size() &&
                (u.support[i] - v.support[i]).norm() == 0.0,
            "doubling: u and v need the same support atoms");
}

}  // namespace

std::vector<SlicePoint> random_slice_points(int n_atoms, int dim, int count, double horizon,
                                            double m_radius, std::uint64_t seed,
                                            std::uint64_t stream) {
  require(n_atoms >= 1 && dim >= 1 && count >= 0, "random_slice_points: bad sizes");
  std::vector<SlicePoint> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    CounterRng rng(seed, {stream, static_cast<std::uint64_t>(k)});
    out.push_back(random_point(n_atoms, dim, horizon, m_radius, rng));
  }
  return out;
}

DoublingReport doubling_maximize(const DiscretizedFunction& u, const DiscretizedFunction& v,
                                 const FourierMetric& metric, double eps, double delta,
                                 const DoublingConfig& cfg) {
  require(eps > 0.0 && delta > 0.0, "doubling: eps and delta must be > 0");
  cfg.validate();
  check_pair(u, v);
  const SliceGeometry geom(metric, u.support);
  const Ascent ascent(u, v, geom, eps, delta, cfg);
  const Layout& L = ascent.layout();

  // Diagonal probes: vertices at m = 0 for three times, then random points.
  std::vector<SlicePoint> diag;
  for (int i = 0; i < L.n; ++i)
    for (double t : {0.0, 0.5 * cfg.horizon, cfg.horizon})
      diag.push_back({t, Vec::Unit(L.n, i), Vec::Zero(L.d)});
  for (SlicePoint& p :
       random_slice_points(L.n, L.d, cfg.diagonal_probes, cfg.horizon, cfg.m_radius, cfg.seed, 1))
    diag.push_back(std::move(p));
  double best_diag = -std::numeric_limits<double>::infinity();
  std::size_t best_diag_idx = 0;
  for (std::size_t k = 0; k < diag.size(); ++k) {
    const double h = doubling_objective(u, v, geom, eps, delta, diag[k], diag[k]);
    if (h > best_diag) {
      best_diag = h;
      best_diag_idx = k;
    }
  }

  std::vector<Ascent::Result> results(cfg.starts);
  parallel_for(static_cast<std::size_t>(cfg.starts), [&](std::size_t s) {
    Vec z0;
    if (s == 0) {
      z0 = pack(L, diag[best_diag_idx], diag[best_diag_idx]);
    } else {
      CounterRng rng(cfg.seed, {2, s});
      const SlicePoint a = random_point(L.n, L.d, cfg.horizon, cfg.m_radius, rng);
      // Even starts begin on the diagonal, odd ones at independent points.
      const SlicePoint b =
          s % 2 == 0 ? a : random_point(L.n, L.d, cfg.horizon, cfg.m_radius, rng);
      z0 = pack(L, a, b);
    }
    results[s] = ascent.run(std::move(z0));
  });

  std::size_t best = 0;
  for (std::size_t s = 1; s < results.size(); ++s)
    if (results[s].value > results[best].value) best = s;

  DoublingReport rep;
  rep.epsilon = eps;
  rep.delta = delta;
  rep.theta = unpack(L, results[best].z, 0);
  rep.iota = unpack(L, results[best].z, 1);
  rep.value = results[best].value;
  const double dsq = geom.d_F_sq(rep.theta, rep.iota);
  rep.penalty = dsq / (2.0 * eps);
  rep.d_F = std::sqrt(dsq);
  rep.best_diagonal = best_diag;
  rep.converged = results[best].converged;
  rep.best_start = static_cast<int>(best);
  rep.iterations = results[best].iterations;
  return rep;
}

PenaltyDecayReport penalty_decay_check(const DiscretizedFunction& u, const DiscretizedFunction& v,
                                       const FourierMetric& metric, double delta,
                                       const std::vector<double>& eps_sequence,
                                       const DoublingConfig& cfg, double abs_tol, double noise) {
  require(eps_sequence.size() >= 2, "penalty decay: need at least two eps values");
  for (std::size_t k = 0; k + 1 < eps_sequence.size(); ++k)
    require(eps_sequence[k + 1] < eps_sequence[k], "penalty decay: eps sequence must decrease");
  PenaltyDecayReport rep;
  rep.check.name = "penalty_decay";
  rep.check.tolerance = abs_tol;
  for (double eps : eps_sequence) rep.runs.push_back(doubling_maximize(u, v, metric, eps, delta, cfg));

  const double first = rep.runs.front().penalty, last = rep.runs.back().penalty;
  rep.check.worst = last - (0.1 * first + abs_tol);
  if (rep.check.worst > 0.0) {
    std::ostringstream os;
    os << "penalty " << last << " at eps " << eps_sequence.back() << " exceeds 0.1 * " << first
       << " + " << abs_tol;
    rep.check.fail(os.str());
  }
  for (std::size_t k = 0; k + 1 < rep.runs.size(); ++k)
    if (rep.runs[k + 1].d_F > rep.runs[k].d_F + noise) {
      std::ostringstream os;
      os << "d_F increased from " << rep.runs[k].d_F << " to " << rep.runs[k + 1].d_F << " at eps "
         << eps_sequence[k + 1];
      rep.check.fail(os.str());
    }
  if (!rep.check.passed)
    for (const DoublingReport& r : rep.runs)
      if (!r.converged) {
        std::ostringstream os;
        os << "optimizer not converged at eps " << r.epsilon;
        rep.check.fail(os.str());
      }
  return rep;
}

OrderingReport ordering_check(const DiscretizedFunction& u_sub,
                              const DiscretizedFunction& v_super,
                              const std::vector<SlicePoint>& probes, double horizon,
                              double tol) {
  check_pair(u_sub, v_super);
  require(!probes.empty(), "ordering: no probes");
  for (const SlicePoint& p : probes) {
    const double gap = u_sub.eval(horizon, p.w, p.m) - v_super.eval(horizon, p.w, p.m);
    if (gap > tol) {
      std::ostringstream os;
      os << "ordering: terminal data not ordered (u - v = " << gap << ")";
      throw InputError(os.str());
    }
  }
  OrderingReport rep;
  rep.check.name = "ordering";
  rep.check.tolerance = tol;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (const SlicePoint& p : probes) {
    const double margin = v_super.eval(p.t, p.w, p.m) - u_sub.eval(p.t, p.w, p.m);
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.witness = p;
    }
  }
  rep.check.worst = -rep.min_margin;
  if (rep.min_margin < -tol) {
    std::ostringstream os;
    os << "u exceeds v by " << -rep.min_margin << " at t = " << rep.witness.t;
    rep.check.fail(os.str());
  }
  return rep;
}

bool ishii_matrix_check(const Mat& X, const Mat& Y, double eps, double alpha) {
  require(eps > 0.0 && alpha > 0.0, "ishii: eps and alpha must be > 0");
  require(X.rows() == X.cols() && Y.rows() == Y.cols() && X.rows() == Y.rows(),
          "ishii: X and Y must be square of equal size");
  const Eigen::Index d = X.rows();
  Mat B = Mat::Zero(2 * d, 2 * d);
  B.topLeftCorner(d, d) = 0.5 * (X + X.transpose());
  B.bottomRightCorner(d, d) = 0.5 * (Y + Y.transpose());
  const Mat I = Mat::Identity(d, d);
  Mat J(2 * d, 2 * d);
  J << I, -I, -I, I;
  const double lower = 1.0 / alpha + 2.0 / eps;
  const double upper = 1.0 / eps + 2.0 * alpha / (eps * eps);
  const Mat lo = B + lower * Mat::Identity(2 * d, 2 * d);
  const Mat hi = upper * J - B;
  const double tol = 1e-12 * std::max({1.0, lower, upper, B.norm()});
  const Eigen::SelfAdjointEigenSolver<Mat> es_lo(lo, Eigen::EigenvaluesOnly);
  const Eigen::SelfAdjointEigenSolver<Mat> es_hi(hi, Eigen::EigenvaluesOnly);
  return es_lo.eigenvalues().minCoeff() >= -tol && es_hi.eigenvalues().minCoeff() >= -tol;
}

namespace {

Mat second_differences(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  const Eigen::Index d = x.size();
  Mat H(d, d);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e[i] = h;
    H(i, i) = (f(x + e) - 2.0 * f0 + f(x - e)) / (h * h);
    for (Eigen::Index j = 0; j < i; ++j) {
      Vec e2 = Vec::Zero(d);
      e2[j] = h;
      H(i, j) = H(j, i) =
          (f(x + e + e2) - f(x + e - e2) - f(x - e + e2) + f(x - e - e2)) / (4.0 * h * h);
    }
  }
  return H;
}

}  // namespace

JetProbe probe_jets(const DiscretizedFunction& u, const DiscretizedFunction& v,
                    const DoublingReport& report, double h) {
  require(h > 0.0, "probe_jets: h must be > 0");
  JetProbe jp;
  jp.X = second_differences(
      [&](const Vec& m) { return u.eval(report.theta.t, report.theta.w, m); }, report.theta.m, h);
  jp.Y = second_differences(
      [&](const Vec& n) { return -v.eval(report.iota.t, report.iota.w, n); }, report.iota.m, h);
  return jp;
}

// ------------------------------------------------------------- function zoo

DiscretizedFunction lq_value_function(const FilteringCoeffs& c, double horizon,
                                      const std::vector<Vec>& support, double m_radius) {
  require(c.lq.has_value(), "lq_value_function: coefficients have no LQ parametrization");
  require(!support.empty(), "lq_value_function: empty support");
  for (const Vec& x : support) require(x.size() == 1, "lq_value_function: support must be in R");
  const LqParams p = *c.lq;
  std::vector<double> xs;
  double R = 0.0;
  for (const Vec& x : support) {
    xs.push_back(x[0]);
    R = std::max(R, std::abs(x[0]));
  }
  R += m_radius;
  DiscretizedFunction f;
  f.name = "lq";
  f.support = support;
  const double w = p.terminal_weight;
  f.bound = w * R * R + lq_riccati(p, 0.0, horizon).beta + w * (R * R + p.sigma * p.sigma * horizon);
  f.eval = [p, xs, horizon](double t, const Vec& wts, const Vec& m) {
    double mean = 0.0, second = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mean += wts[static_cast<Eigen::Index>(i)] * xs[i];
      second += wts[static_cast<Eigen::Index>(i)] * xs[i] * xs[i];
    }
    const double var = std::max(0.0, second - mean * mean);
    mean += m[0];
    const Riccati r = lq_riccati(p, t, horizon);
    return r.P * mean * mean + r.beta +
           p.terminal_weight * (var + p.sigma * p.sigma * (horizon - t));
  };
  return f;
}

DiscretizedFunction plus_constant(DiscretizedFunction u, double c) {
  u.eval = [g = std::move(u.eval), c](double t, const Vec& w, const Vec& m) {
    return g(t, w, m) + c;
  };
  u.bound += std::abs(c);
  u.name += "+const";
  return u;
}

DiscretizedFunction plus_time_drift(DiscretizedFunction u, double c, double horizon) {
  u.eval = [g = std::move(u.eval), c, horizon](double t, const Vec& w, const Vec& m) {
    return g(t, w, m) + c * (horizon - t);
  };
  u.bound += std::abs(c) * horizon;
  u.name += "+drift";
  return u;
}

DiscretizedFunction h_shift(DiscretizedFunction u, double h, double horizon) {
  u.eval = [g = std::move(u.eval), h, horizon](double t, const Vec& w, const Vec& m) {
    return g(t, w, m) - h * (horizon - t + 1.0);
  };
  u.bound += std::abs(h) * (horizon + 1.0);
  u.name += "-hshift";
  return u;
}

DiscretizedFunction plus_time_jump(DiscretizedFunction u, double jump, double t_jump) {
  u.eval = [g = std::move(u.eval), jump, t_jump](double t, const Vec& w, const Vec& m) {
    return g(t, w, m) + (t >= t_jump ? jump : 0.0);
  };
  u.bound += std::abs(jump);
  u.name += "+jump";
  return u;
}

DiscretizedFunction constant_function(const std::vector<Vec>& support, double c) {
  DiscretizedFunction f;
  f.name = "constant";
  f.support = support;
  f.bound = std::abs(c);
  f.eval = [c](double, const Vec&, const Vec&) { return c; };
  return f;
}

DiscretizedFunction function_from_json(const nlohmann::json& j, const std::vector<Vec>& support,
                                       double horizon, double m_radius) {
  require(j.is_object(), "function spec must be a JSON object");
  const std::string name = j.value("name", std::string());
  DiscretizedFunction f;
  if (name == "lq") {
    f = lq_value_function(filtering_registry(j.value("coeffs", std::string("lq1d"))), horizon,
                          support, m_radius);
  } else if (name == "constant") {
    f = constant_function(support, j.value("value", 0.0));
  } else {
    throw InputError("unknown function name: '" + name + "'");
  }
  if (j.contains("slack")) f = plus_constant(std::move(f), j.at("slack").get<double>());
  if (j.contains("drift")) f = plus_time_drift(std::move(f), j.at("drift").get<double>(), horizon);
  if (j.contains("jump"))
    f = plus_time_jump(std::move(f), j.at("jump").get<double>(),
                       j.value("t_jump", 0.5 * horizon));
  if (j.contains("h")) f = h_shift(std::move(f), j.at("h").get<double>(), horizon);
  return f;
}

}  // namespace fwlab
