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

// Hamiltonians of the two applications: controlled filtering (K, G, G^e) and
// the partial-monitoring regret game (K(i, a, mu, q, M) and its supremum),
// plus executable checkers for the structural assumptions of the comparison
// principle.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fwlab/common.hpp"
#include "fwlab/fit.hpp"
#include "fwlab/fourier_metric.hpp"
#include "fwlab/measures.hpp"

namespace fwlab {

// ---------------------------------------------------------------- filtering

struct LqParams {
  double control_weight = 1.0;  // r(x, a) = control_weight * a^2
  double sigma = 1.0;
  double sigma_tilde = 1.0;
  double terminal_weight = 1.0;  // l(x) = terminal_weight * x^2
};

struct FilteringCoeffs {
  std::string name;
  int d = 1, d1 = 1, d2 = 1;
  // Control set A is the box [control_lo, control_hi] in R^{control_dim}.
  Vec control_lo, control_hi;

  std::function<Vec(const Vec& x, const Vec& a)> b;
  std::function<Mat(const Vec& x, const Vec& a)> sigma;
  std::function<Mat(const Vec& a)> sigma_tilde;
  std::function<double(const Vec& x, const Vec& a)> r;
  std::function<double(const Vec& x)> l;

  struct Constants {
    double b = 0, sigma = 0, sigma_tilde = 0, r = 0, l = 0;
    double diffusion = 0;  // sigma sigma^T (Frobenius)
  };
  Constants lip;    // Lipschitz constants in x (uniform in a)
  Constants bound;  // sup norms; infinity where unbounded
  double delta = 0.0;  // ellipticity |sigma^T xi|^2 >= delta |xi|^2

  std::optional<LqParams> lq;  // set for the scalar LQ family

  int control_dim() const { return static_cast<int>(control_lo.size()); }
  /// Uniform grid with n points per control axis.
  std::vector<Vec> control_grid(int n) const;
  /// sigma sigma^T(x, a)
  Mat diffusion(const Vec& x, const Vec& a) const;
};

/// Registered coefficient sets: "lq1d", "lq1d-sat", "osc1d".
FilteringCoeffs filtering_registry(const std::string& name);
std::vector<std::string> filtering_registry_names();
/// The scalar LQ family with given parameters (unbounded l).
FilteringCoeffs make_lq(const LqParams& p, double control_bound = 2.0);

/// Boundedness and ellipticity on sampled states/controls/directions.
CheckReport validate_coeffs(const FilteringCoeffs& c, const std::vector<Vec>& xs,
                            const std::vector<Vec>& as, int directions = 16);

struct JetArgs {
  std::function<Vec(const Vec& x)> p;
  std::function<Mat(const Vec& x)> q;
  Mat M;

  /// Jet translated by m: p(. - m), q(. - m).
  JetArgs shifted(const Vec& m) const;
};

/// Sample-point set for linear-growth norms: the given atoms plus
/// {0, +-1, +-5, +-25} along every axis.
std::vector<Vec> growth_probe_set(const SignedAtomicMeasure& mu);
/// sup |f(x)| / (1 + |x|) over the probe set (Euclidean / Frobenius norms).
double linear_growth_norm(const std::function<Vec(const Vec&)>& f, const std::vector<Vec>& xs);
double linear_growth_norm(const std::function<Mat(const Vec&)>& f, const std::vector<Vec>& xs);

/// int [r + b^T p + (1/2) Tr(q sigma sigma^T)] dmu + (1/2) Tr(sigma~ sigma~^T M)
double K_filtering(const Vec& a, const SignedAtomicMeasure& mu, const JetArgs& jet,
                   const FilteringCoeffs& c);

struct GridMin {
  double value = 0.0;
  Vec argmin;
  std::size_t index = 0;
};
/// min over the control grid (lowest index wins ties).
GridMin G_filtering(const SignedAtomicMeasure& mu, const JetArgs& jet, const FilteringCoeffs& c,
                    const std::vector<Vec>& grid);

/// K^e(a, mu, m, p, q, M) evaluated directly on the unshifted atoms:
/// int [r(x+m) + b(x+m)^T p(x) + (1/2) Tr(q(x) sigma sigma^T(x+m))] dmu + ...
double Ke_filtering(const Vec& a, const SignedAtomicMeasure& mu, const Vec& m, const JetArgs& jet,
                    const FilteringCoeffs& c);
/// G(pushforward_shift(mu, m), jet.shifted(m)).
GridMin Ge_extend(const SignedAtomicMeasure& mu, const Vec& m, const JetArgs& jet,
                  const FilteringCoeffs& c, const std::vector<Vec>& grid);
/// min over the grid of Ke_filtering (the dual route of Ge_extend).
GridMin Ge_extend_direct(const SignedAtomicMeasure& mu, const Vec& m, const JetArgs& jet,
                         const FilteringCoeffs& c, const std::vector<Vec>& grid);

struct LipschitzSample {
  SignedAtomicMeasure mu;
  Vec m;
  JetArgs jet1, jet2;
};

struct LipschitzTerms {
  double lhs = 0.0;     // |G^e(jet1) - G^e(jet2)|
  double weight = 0.0;  // 1 + |m| + int |x| dmu
  double jet_gap = 0.0; // |p1-p2|_l + |q1-q2|_l + |M1-M2|
  double ratio() const { return jet_gap > 0.0 ? lhs / (weight * jet_gap) : 0.0; }
};
LipschitzTerms filtering_lipschitz_terms(const LipschitzSample& s, const FilteringCoeffs& c,
                                         const std::vector<Vec>& grid);

/// Fitted L_G is the largest ratio when `constant` is empty; otherwise the
/// samples are checked against the given constant.
CheckReport check_assumption_i_filtering(const FilteringCoeffs& c,
                                         const std::vector<LipschitzSample>& samples,
                                         const std::vector<Vec>& grid,
                                         std::optional<double> constant = std::nullopt);

struct PenaltySample {
  SignedAtomicMeasure mu, nu;
  Vec m, n;
  double eps = 0.1;
  Mat X, minus_Y;  // X <= -Y
};

struct PenaltyTerms {
  double difference = 0.0;   // G^e(theta, Dk, D2k, X) - G^e(iota, Dk, D2k, -Y)
  double measure_part = 0.0; // K^e(a, mu, m) - K^e(a, nu, m) at the iota minimizer
  double shift_part = 0.0;   // K^e(a, nu, m) - K^e(a, nu, n)
  // |m-n| (L_r + L_b C1 rho_F / eps + (1/2) L_{sigma sigma^T} C2 rho_F / eps)
  double shift_bound = 0.0;
  double modulus_arg = 0.0;  // d_F^2 / eps + d_F
  double weight = 0.0;       // 1 + |m| + |n| + int |x| d(mu + nu)
  double ratio() const {
    const double den = modulus_arg * weight;
    return den > 0.0 ? difference / den : (difference > 0.0 ? INFINITY : 0.0);
  }
};
PenaltyTerms filtering_penalty_terms(const PenaltySample& s, const FilteringCoeffs& c,
                                     const FourierMetric& metric, const std::vector<Vec>& grid);

/// Fitted omega_G slope is the largest ratio when `constant` is empty.
/// Always checks shift_part <= shift_bound.
CheckReport check_assumption_ii_filtering(const FilteringCoeffs& c,
                                          const std::vector<PenaltySample>& samples,
                                          const FourierMetric& metric,
                                          const std::vector<Vec>& grid,
                                          std::optional<double> constant = std::nullopt);

// Parametric sample families on the unit cube, for fitting L_G and the
// omega_G slope by ascent-refined suprema.
//
// Lipschitz family: 4 atoms in [-3,3] with weights, m in [-3,3], and two jets
// p = a0 + a1 x + a2 sin x, q = b0 + b1 x + b2 cos x, M, coefficients in [-2,2].
// Penalty family: 3 atoms each for mu and nu in [-2,2], m, n in [-1,1],
// X in [-2,2], -Y - X in [0,1], log eps uniform in [log 0.02, log 0.5].
// Held-out penalty samples cycle eps through 0.5, 0.1, 0.02.
// Both are one-dimensional (d = 1).
int lipschitz_family_dim();
LipschitzSample lipschitz_family_sample(const Vec& u);
int penalty_family_dim();
PenaltySample penalty_family_sample(const Vec& u);
/// Uniform points of [0,1]^dim from CounterRng(seed, {stream, index}).
std::vector<Vec> unit_cube_samples(int dim, int n, std::uint64_t seed, std::uint64_t stream);

struct FamilyFit {
  SupremumFit fit;       // constant fitted on n_fit samples plus ascent
  CheckReport holdout;   // the check function on n_hold fresh samples
};
/// The held-out samples are checked against holdout_scale * fitted constant.
FamilyFit fit_assumption_i(const FilteringCoeffs& c, const std::vector<Vec>& grid, int n_fit,
                           int n_hold, std::uint64_t seed, const AscentConfig& cfg = {},
                           double holdout_scale = 1.0);
FamilyFit fit_assumption_ii(const FilteringCoeffs& c, const FourierMetric& metric,
                            const std::vector<Vec>& grid, int n_fit, int n_hold,
                            std::uint64_t seed, const AscentConfig& cfg = {},
                            double holdout_scale = 1.0);

// ------------------------------------------------------------------- regret

/// Mixed action a in P({0,1}^K). Subsets are bitmasks: bit i set means action
/// i (0-based) is in the subset.
class SimplexAction {
 public:
  SimplexAction(int K, std::vector<double> weights);
  static SimplexAction vertex(int K, unsigned subset);
  static SimplexAction uniform(int K);

  int K() const { return K_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](unsigned subset) const { return weights_[subset]; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  int K_;
  std::vector<double> weights_;
};

/// Indicator vector e_j of subset j in R^K.
Vec subset_indicator(int K, unsigned subset);

struct HatWeights {
  double in = 0.0;   // a^(i)
  double out = 0.0;  // a^(-i)
};
HatWeights hat_weights(const SimplexAction& a, int i);

struct VVectors {
  Vec in;   // V_{a,i}
  Vec out;  // V_{a,-i}
};
/// V_{a,i} := 0 when a^(i) = 0 (and likewise for -i).
VVectors V_vectors(const SimplexAction& a, int i);

/// Q = int q dmu.
Mat integrate_field(const SignedAtomicMeasure& mu, const std::function<Mat(const Vec&)>& q);

/// K(i, a, mu, q, M) with Q = int q dmu given directly.
double K_regret(int i, const SimplexAction& a, const Mat& Q, const Mat& M);
double K_regret(int i, const SimplexAction& a, const SignedAtomicMeasure& mu,
                const std::function<Mat(const Vec&)>& q, const Mat& M);

struct RegretSolverConfig {
  int starts = 16;        // interior starts per action index
  int iterations = 300;   // projected-gradient iterations per start
  std::uint64_t seed = 1;
};

struct RegretSup {
  double value = 0.0;
  int i = 0;
  std::vector<double> a;
};
/// sup over i and a of K_regret: vertex enumeration plus multistart
/// projected-gradient ascent.
RegretSup G_regret(const Mat& Q, const Mat& M, const RegretSolverConfig& cfg = {});

/// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(const std::vector<double>& v);

/// 2^{3K-2}
double regret_lipschitz_constant(int K);

struct RegretLipschitzSample {
  SignedAtomicMeasure mu;
  std::function<Mat(const Vec&)> q1, q2;
  Mat M1, M2;
};

struct RegretSignSample {
  SignedAtomicMeasure mu, nu;
  double eps = 0.1;
  Mat M;
  std::vector<std::pair<int, SimplexAction>> probes;
};

/// Seeded sample families for the regret checks. Lipschitz samples: 3 atoms
/// in [-2,2]^K, fields q(x) = S0 + x_0 S1 + sin(x_{K-1}) S2 with symmetric
/// S uniform in [-1,1] ([-.5,.5] for S1, S2), M in [-1,1]. Sign samples: 3+3
/// atoms in [-1.5,1.5]^K, eps cycling 0.5, 0.1, 0.02, and `probes` random
/// (i, a) pairs with about 30% of the weights of a set to zero.
std::vector<RegretLipschitzSample> regret_lipschitz_samples(int K, int n, std::uint64_t seed);
std::vector<RegretSignSample> regret_sign_samples(int K, int n, std::uint64_t seed,
                                                  int probes = 5);

/// (i) Lipschitz bound with the constant 2^{3K-2} (scaled by lipschitz_scale);
/// (ii) K(i,a,mu,Hess kappa,M) - K(i,a,nu,Hess kappa,M) <= tol at the probes.
CheckReport check_assumptions_regret(const std::vector<RegretLipschitzSample>& lipschitz,
                                     const std::vector<RegretSignSample>& sign,
                                     const FourierMetric& metric,
                                     const RegretSolverConfig& cfg = {}, double tol = 1e-9,
                                     double lipschitz_scale = 1.0);

}  // namespace fwlab
