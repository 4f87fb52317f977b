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

// Fourier-Wasserstein distance between atomic measures, evaluated by tensor
// quadrature of the weighted characteristic-function integral over |k_a| <= R.

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fwlab/common.hpp"
#include "fwlab/measures.hpp"

namespace fwlab {

/// floor(d/2) + 4 for d = 0,1 mod 4; floor(d/2) + 3 for d = 2,3 mod 4.
int lambda_for_dim(int d);

enum class QuadratureRule { kTensorTrapezoid, kTensorGauss };

std::string rule_name(QuadratureRule rule);
QuadratureRule rule_from_name(const std::string& name);

struct FourierConfig {
  int lambda = 4;
  double k_radius = 24.0;
  int k_nodes_per_axis = 512;
  QuadratureRule rule = QuadratureRule::kTensorGauss;
  // Per-axis node map k = R sinh(g u) / sinh(g), u in [-1, 1]. g = 0 means
  // uniform spacing; g < 0 selects asinh(R).
  double grading = -1.0;

  /// Defaults for dimension d: lambda_for_dim(d), R from the tail bound.
  static FourierConfig for_dim(int d);
  void validate(int d) const;
  double effective_grading() const;
};

nlohmann::json to_json(const FourierConfig& cfg);
/// Missing keys fall back to FourierConfig::for_dim(d).
FourierConfig fourier_config_from_json(const nlohmann::json& j, int d);

/// Upper bound on (2 pi)^{-d} 4 int_{|k|>R} (1+|k|^2)^{-lambda} dk, the part of
/// the integral for rho_F^2 of two probability measures dropped by truncation.
double truncation_tail_bound(int d, int lambda, double radius);

/// Tensor-product nodes k_j and weights. `weight[j]` is the plain quadrature
/// weight, `spectral[j]` includes the factor (1+|k_j|^2)^{-lambda}.
class SpectralQuadrature {
 public:
  SpectralQuadrature(int dim, const FourierConfig& cfg);

  int dim() const { return dim_; }
  std::size_t size() const { return spectral_.size(); }
  const FourierConfig& config() const { return cfg_; }
  /// Coordinate a of every node (length size()).
  const std::vector<double>& axis(int a) const { return coords_[a]; }
  const std::vector<double>& weight() const { return weight_; }
  const std::vector<double>& spectral() const { return spectral_; }

  /// Quadrature of int |k|^{2p} (1+|k|^2)^{-lambda} dk over the box.
  double weighted_moment(int p) const;

 private:
  int dim_;
  FourierConfig cfg_;
  std::vector<std::vector<double>> coords_;
  std::vector<double> weight_;
  std::vector<double> spectral_;
};

/// One-dimensional composite Gauss-Legendre (8-point panels) or trapezoid
/// rule on [-1, 1] with n nodes (n a multiple of 8 for Gauss).
void reference_rule(QuadratureRule rule, int n, std::vector<double>& u, std::vector<double>& w);

/// F_k(measure) at every quadrature node.
struct Spectrum {
  std::vector<double> re, im;
};
Spectrum spectrum(const SignedAtomicMeasure& measure, const SpectralQuadrature& quad);
/// F_k(mu) - F_k(nu), transformed separately so that mu == nu gives exact zeros.
Spectrum spectrum_difference(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu,
                             const SpectralQuadrature& quad);

/// Builds and caches a quadrature per dimension for one config.
class FourierMetric {
 public:
  explicit FourierMetric(FourierConfig cfg, int dim);

  const SpectralQuadrature& quadrature() const { return *quad_; }
  int dim() const { return quad_->dim(); }

  double rho_sq(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu) const;
  double rho(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu) const;
  /// rho_F-type norm of a signed measure: rho(eta, 0).
  double norm(const SignedAtomicMeasure& eta) const;
  double d_F_sq(const Theta& theta, const Theta& iota) const;
  double d_F(const Theta& theta, const Theta& iota) const;
  /// 2 int Re(F_k(eta) conj(F_k(mu*) - F_k(nu*))) (1+|k|^2)^{-lambda} dk
  double L(const SignedAtomicMeasure& eta, const SignedAtomicMeasure& mu_star,
           const SignedAtomicMeasure& nu_star) const;

  /// sqrt(int |k|^2 w) and sqrt(int |k|^4 w): constants of the sup bounds on
  /// grad kappa and Hess kappa in units of rho_F / eps.
  double grad_constant() const;
  double hess_constant() const;

 private:
  std::shared_ptr<const SpectralQuadrature> quad_;
};

/// kappa(x) = (1/eps) int Re(F_k(mu - nu) conj(f_k(x))) (1+|k|^2)^{-lambda} dk
class KappaKernel {
 public:
  KappaKernel(const FourierMetric& metric, const SignedAtomicMeasure& mu,
              const SignedAtomicMeasure& nu, double epsilon);

  int dim() const { return dim_; }
  double epsilon() const { return eps_; }
  double rho() const { return rho_; }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;

  /// sum_i eta_i Hess kappa(x_i) for a signed measure eta.
  Mat integrated_hessian(const SignedAtomicMeasure& eta) const;
  /// -(1/eps) int |F_k(mu - nu)|^2 k k^T (1+|k|^2)^{-lambda} dk
  Mat spectral_hessian_identity() const;

 private:
  void rotated(const Vec& x, std::vector<double>& a, std::vector<double>& b) const;

  const SpectralQuadrature* quad_;
  int dim_;
  double eps_;
  double rho_;
  double scale_;  // (2 pi)^{-d/2} / eps
  Spectrum diff_;
};

/// 2 rho^2(mu,mu*) + 2 rho^2(nu,nu*) + L(mu,mu*,nu*) - L(nu,mu*,nu*)
///   >= rho^2(mu,nu) + rho^2(mu*,nu*)
/// `worst` is the largest violation (rhs - lhs); the report also fails when
/// the diagonal case (mu,nu) = (mu*,nu*) is not an equality within tol.
CheckReport parallelogram_check(const FourierMetric& metric, const SignedAtomicMeasure& mu,
                                const SignedAtomicMeasure& nu, const SignedAtomicMeasure& mu_star,
                                const SignedAtomicMeasure& nu_star, double tol = 1e-10);

}  // namespace fwlab
