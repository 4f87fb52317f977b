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

// Common-noise particle simulation of the controlled conditional law, Monte
// Carlo cost estimates, the scalar LQG reference value and the viscosity
// residual of smooth candidates.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fwlab/common.hpp"
#include "fwlab/hamiltonians.hpp"
#include "fwlab/measures.hpp"

namespace fwlab {

struct SimConfig {
  double dt = 0.01;
  int particles = 1000;
  double horizon = 1.0;  // terminal time T
  int runs = 16;
  std::uint64_t seed = 1;
  // Seed for the idiosyncratic B increments; defaults to `seed`.
  std::optional<std::uint64_t> idio_seed;

  void validate(double t) const;
  /// Number of Euler steps on [t, T]; the step is (T - t) / steps.
  int steps(double t) const;
};

/// What a policy may observe: the empirical conditional law, never the noise.
struct LawSummary {
  double time = 0.0;
  Vec mean;
  Mat covariance;
  const std::vector<double>* states = nullptr;  // row-major N x d
};

struct ControlPolicy {
  std::string name;
  std::function<Vec(const LawSummary&)> rule;
};

ControlPolicy constant_policy(const Vec& a);
/// a = -P(s) mean / control_weight for the LQ family (clipped to A by the
/// simulator). Requires coeffs.lq.
ControlPolicy lq_feedback_policy(const FilteringCoeffs& c, double horizon);
/// "zero", "lq-feedback".
ControlPolicy policy_from_name(const std::string& name, const FilteringCoeffs& c, double horizon);

struct LawPath {
  std::vector<double> times;
  std::vector<SignedAtomicMeasure> laws;  // uniform weights 1/N
  std::vector<Vec> controls;              // control applied on [times[k], times[k+1])
};

/// One run of Euler-Maruyama for dX = b dt + sigma dB_i + sigma~ dW with a
/// shared W path. Initial states are i.i.d. draws from mu.
LawPath simulate_conditional_law(double t, const SignedAtomicMeasure& mu,
                                 const ControlPolicy& policy, const FilteringCoeffs& c,
                                 const SimConfig& cfg, int run = 0);

struct StepSummary {
  double time = 0.0;
  double mean = 0.0;      // first coordinate, averaged over runs
  double variance = 0.0;  // within-run variance of the first coordinate, averaged
  double cost_to_date = 0.0;
};

struct CostEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::vector<double> run_costs;
  std::vector<StepSummary> path;
};

/// Left-endpoint running cost plus terminal cost, averaged over particles;
/// mean and standard error over runs.
CostEstimate estimate_cost(double t, const SignedAtomicMeasure& mu, const ControlPolicy& policy,
                           const FilteringCoeffs& c, const SimConfig& cfg);

// ---------------------------------------------------------------- LQG oracle

/// Scalar LQ value P(s) mean^2 + beta(s) + w (Var(mu) + sigma^2 (T - s)) with
/// P' = P^2 / rho, P(T) = w and beta' = -sigma~^2 P, beta(T) = 0.
struct Riccati {
  double P = 0.0;
  double beta = 0.0;
};
/// Closed-form solution at time s.
Riccati lq_riccati(const LqParams& p, double s, double horizon);
/// Backward RK4 on [s, T] with `steps` steps.
Riccati lq_riccati_rk4(const LqParams& p, double s, double horizon, int steps = 2000);

/// Value of the conditional-law control problem from (t, mu) for coeffs with
/// an LQ parametrization (throws otherwise). The control set is ignored.
double lqg_value_oracle(double t, const SignedAtomicMeasure& mu, const FilteringCoeffs& c,
                        double horizon, int steps = 2000);

struct DpConfig {
  int time_steps = 200;
  int state_points = 201;
  double state_radius = 8.0;
  int control_points = 81;
  int hermite_nodes = 5;
  bool richardson = true;  // combine time_steps and 2 * time_steps
};

/// Control-grid dynamic programming on the conditional mean for the LQ
/// family: cubic interpolation in the mean, Gauss-Hermite expectation over
/// the W increment, grid minimization with a parabolic refinement step.
double lq_dynamic_program(double t, const SignedAtomicMeasure& mu, const FilteringCoeffs& c,
                          double horizon, const DpConfig& cfg = {});

// ------------------------------------------------------- viscosity residual

/// A smooth function of (t, mu) with analytic derivatives.
struct SmoothCandidate {
  std::function<double(double, const SignedAtomicMeasure&)> value;
  std::function<double(double, const SignedAtomicMeasure&)> dt;
  std::function<Vec(double, const SignedAtomicMeasure&, const Vec&)> d_mu;
  std::function<Mat(double, const SignedAtomicMeasure&, const Vec&)> d_xmu;
  std::function<Mat(double, const SignedAtomicMeasure&)> H;  // partial Hessian
};

/// Finite-difference spot check of dt, D_mu (atom moves), D_xmu (x-derivative
/// of D_mu) and H (uniform translations). Throws InputError naming the
/// failing direction.
void check_candidate(const SmoothCandidate& phi, double t, const SignedAtomicMeasure& mu,
                     double tol = 1e-5);

/// -dt phi - G_filtering(mu, D_mu phi, D_xmu phi, H phi).
double viscosity_residual(const SmoothCandidate& phi, double t, const SignedAtomicMeasure& mu,
                          const FilteringCoeffs& c, const std::vector<Vec>& grid,
                          bool check = true);

/// The LQ value as a candidate (closed-form Riccati).
SmoothCandidate lq_candidate(const FilteringCoeffs& c, double horizon);

}  // namespace fwlab
