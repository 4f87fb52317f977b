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

#pragma once

// Doubling of variables on a finite-support slice of P_2(R^d): functions of
// (t, weights, m) over fixed atoms, the penalized maximization
// H(theta, iota) = u(theta) - v(iota) - d_F^2 / (2 eps) - delta (vartheta(theta) + vartheta(iota)),
// penalty decay in eps, ordering of sub/supersolution pairs and the
// coupled matrix inequality for jets.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fwlab/common.hpp"
#include "fwlab/fourier_metric.hpp"
#include "fwlab/hamiltonians.hpp"
#include "fwlab/measures.hpp"

namespace fwlab {

/// A function of (t, w, m) where w is a weight vector on the simplex over
/// `support` and m a shift in R^d. `bound` is the declared sup of |eval|.
struct DiscretizedFunction {
  std::string name;
  std::vector<Vec> support;
  std::function<double(double t, const Vec& w, const Vec& m)> eval;
  double bound = 0.0;

  int dim() const;
  SignedAtomicMeasure measure(const Vec& w) const;
};

/// A point (t, w, m) of the slice.
struct SlicePoint {
  double t = 0.0;
  Vec w;
  Vec m;
};

/// rho_F^2(mu_w, mu_w') = (w - w')^T G (w - w') with G the Gram matrix of the
/// support Diracs, built from the metric by polarization.
class SliceGeometry {
 public:
  SliceGeometry(const FourierMetric& metric, const std::vector<Vec>& support);

  const Mat& gram() const { return gram_; }
  double rho_sq(const Vec& w1, const Vec& w2) const;
  double d_F_sq(const SlicePoint& a, const SlicePoint& b) const;
  /// 1 + |m|^2 + sum_i w_i |x_i|^2
  double vartheta(const SlicePoint& p) const;

 private:
  Mat gram_;
  Vec second_moments_;
};

struct DoublingConfig {
  double horizon = 1.0;
  double m_radius = 1.0;  // box [-r, r]^d for m
  int starts = 32;
  int max_iters = 400;
  int diagonal_probes = 256;
  double fd_step = 1e-5;
  double step_tol = 1e-10;
  double grad_tol = 1e-5;
  std::uint64_t seed = 1;

  void validate() const;
};

nlohmann::json to_json(const DoublingConfig& cfg);
/// Missing keys keep their defaults.
DoublingConfig doubling_config_from_json(const nlohmann::json& j);

struct DoublingReport {
  double epsilon = 0.0;
  double delta = 0.0;
  SlicePoint theta;
  SlicePoint iota;
  double value = 0.0;
  double penalty = 0.0;  // d_F^2(theta, iota) / (2 eps)
  double d_F = 0.0;
  double best_diagonal = 0.0;  // max of H over the diagonal probe set
  bool converged = false;
  int best_start = 0;
  int iterations = 0;
};

/// H(theta, iota) for the given pair.
double doubling_objective(const DiscretizedFunction& u, const DiscretizedFunction& v,
                          const SliceGeometry& geom, double eps, double delta,
                          const SlicePoint& theta, const SlicePoint& iota);

/// Multistart projected gradient ascent of H over ([0,T] x simplex x box)^2.
/// Start 0 is the best diagonal probe; the others are seeded random points.
DoublingReport doubling_maximize(const DiscretizedFunction& u, const DiscretizedFunction& v,
                                 const FourierMetric& metric, double eps, double delta,
                                 const DoublingConfig& cfg = {});

struct PenaltyDecayReport {
  CheckReport check;
  std::vector<DoublingReport> runs;  // one per eps
};

/// penalty(eps_last) <= 0.1 penalty(eps_first) + abs_tol, and d_F at the
/// maximizer non-increasing up to `noise`.
PenaltyDecayReport penalty_decay_check(const DiscretizedFunction& u, const DiscretizedFunction& v,
                                       const FourierMetric& metric, double delta,
                                       const std::vector<double>& eps_sequence,
                                       const DoublingConfig& cfg = {}, double abs_tol = 1e-6,
                                       double noise = 1e-3);

struct OrderingReport {
  CheckReport check;
  double min_margin = 0.0;  // min over probes of v - u
  SlicePoint witness;       // probe attaining min_margin
};

/// u_sub <= v_super + tol on every probe. Throws InputError if the terminal
/// ordering fails on the probes' (T, w, m).
OrderingReport ordering_check(const DiscretizedFunction& u_sub,
                              const DiscretizedFunction& v_super,
                              const std::vector<SlicePoint>& probes, double horizon,
                              double tol = 1e-12);

/// Uniform t, Dirichlet(1) weights, uniform m in the box.
std::vector<SlicePoint> random_slice_points(int n_atoms, int dim, int count, double horizon,
                                            double m_radius, std::uint64_t seed,
                                            std::uint64_t stream = 0);

/// -(1/alpha + 2/eps) I <= blockdiag(X, Y) <= (1/eps + 2 alpha/eps^2) [[I, -I], [-I, I]],
/// by eigenvalues.
bool ishii_matrix_check(const Mat& X, const Mat& Y, double eps, double alpha);

/// Central second differences of m -> u(t, w, m) and n -> -v(s, w', n) at a
/// maximizer: candidate (X, Y) for ishii_matrix_check. Diagnostic only.
struct JetProbe {
  Mat X, Y;
};
JetProbe probe_jets(const DiscretizedFunction& u, const DiscretizedFunction& v,
                    const DoublingReport& report, double h = 1e-3);

// ------------------------------------------------------------- function zoo

/// The LQ value of `c` at (t, (I + m)_# mu_w), closed form.
DiscretizedFunction lq_value_function(const FilteringCoeffs& c, double horizon,
                                      const std::vector<Vec>& support, double m_radius);
/// u + c
DiscretizedFunction plus_constant(DiscretizedFunction u, double c);
/// u + c (T - t)
DiscretizedFunction plus_time_drift(DiscretizedFunction u, double c, double horizon);
/// u - h (T - t + 1)
DiscretizedFunction h_shift(DiscretizedFunction u, double h, double horizon);
/// u + jump 1{t >= t_jump}; upper semicontinuous for jump > 0.
DiscretizedFunction plus_time_jump(DiscretizedFunction u, double jump, double t_jump);
DiscretizedFunction constant_function(const std::vector<Vec>& support, double c);

/// {"name": "lq" | "constant", "coeffs": "lq1d", "value": c, "slack": c,
///  "drift": c, "h": h, "jump": j, "t_jump": t}. Modifiers apply in the
/// order slack, drift, jump, h.
DiscretizedFunction function_from_json(const nlohmann::json& j, const std::vector<Vec>& support,
                                       double horizon, double m_radius);

}  // namespace fwlab
