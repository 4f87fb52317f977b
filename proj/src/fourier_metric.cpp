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

#include "fwlab/fourier_metric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fwlab/kernels.hpp"
#include "fwlab/parallel.hpp"

namespace fwlab {

namespace {

constexpr double kTailTarget = 1e-10;
constexpr std::size_t kParallelChunk = 8192;

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

double unit_sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

}  // namespace

int lambda_for_dim(int d) {
  require(d >= 1, "lambda_for_dim: d must be >= 1");
  return (d % 4 == 0 || d % 4 == 1) ? d / 2 + 4 : d / 2 + 3;
}

std::string rule_name(QuadratureRule rule) {
  return rule == QuadratureRule::kTensorGauss ? "tensor-gauss" : "tensor-trapezoid";
}

QuadratureRule rule_from_name(const std::string& name) {
  if (name == "tensor-gauss") return QuadratureRule::kTensorGauss;
  if (name == "tensor-trapezoid") return QuadratureRule::kTensorTrapezoid;
  throw InputError("unknown quadrature_rule '" + name + "'");
}

double truncation_tail_bound(int d, int lambda, double radius) {
  require(2 * lambda > d, "truncation_tail_bound: needs 2 lambda > d");
  // (1+r^2)^{-lambda} <= r^{-2 lambda}
  const double radial = std::pow(radius, d - 2 * lambda) / (2.0 * lambda - d);
  return 4.0 * std::pow(2.0 * std::numbers::pi, -d) * unit_sphere_area(d) * radial;
}

FourierConfig FourierConfig::for_dim(int d) {
  FourierConfig cfg;
  cfg.lambda = lambda_for_dim(d);
  double r = 1.0;
  while (truncation_tail_bound(d, cfg.lambda, r) >= kTailTarget) r *= 1.05;
  // round up to a multiple of 4 for readable configs
  cfg.k_radius = 4.0 * std::ceil(r / 4.0);
  switch (d) {
    case 1: cfg.k_nodes_per_axis = 512; break;
    case 2: cfg.k_nodes_per_axis = 128; break;
    case 3: cfg.k_nodes_per_axis = 64; break;
    default: cfg.k_nodes_per_axis = 16; break;
  }
  return cfg;
}

void FourierConfig::validate(int d) const {
  require(lambda >= 1, "FourierConfig: lambda must be positive");
  require(2 * lambda > d, "FourierConfig: lambda too small for integrability (2 lambda > d)");
  require(k_radius > 0.0 && std::isfinite(k_radius), "FourierConfig: k_radius must be > 0");
  require(k_nodes_per_axis >= 8, "FourierConfig: k_nodes_per_axis must be >= 8");
  if (rule == QuadratureRule::kTensorGauss)
    require(k_nodes_per_axis % 8 == 0, "FourierConfig: tensor-gauss needs nodes % 8 == 0");
}

double FourierConfig::effective_grading() const {
  return grading < 0.0 ? std::asinh(k_radius) : grading;
}

nlohmann::json to_json(const FourierConfig& cfg) {
  return {{"lambda", cfg.lambda},
          {"k_radius", cfg.k_radius},
          {"k_nodes_per_axis", cfg.k_nodes_per_axis},
          {"quadrature_rule", rule_name(cfg.rule)},
          {"grading", cfg.grading}};
}

FourierConfig fourier_config_from_json(const nlohmann::json& j, int d) {
  FourierConfig cfg = FourierConfig::for_dim(d);
  if (j.is_null()) return cfg;
  require(j.is_object(), "fourier config must be a JSON object");
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.k_radius = j.value("k_radius", cfg.k_radius);
  cfg.k_nodes_per_axis = j.value("k_nodes_per_axis", cfg.k_nodes_per_axis);
  if (j.contains("quadrature_rule"))
    cfg.rule = rule_from_name(j.at("quadrature_rule").get<std::string>());
  cfg.grading = j.value("grading", cfg.grading);
  cfg.validate(d);
  return cfg;
}

void reference_rule(QuadratureRule rule, int n, std::vector<double>& u, std::vector<double>& w) {
  u.assign(n, 0.0);
  w.assign(n, 0.0);
  if (rule == QuadratureRule::kTensorTrapezoid) {
    const double h = 2.0 / (n - 1);
    for (int i = 0; i < n; ++i) {
      u[i] = -1.0 + h * i;
      w[i] = (i == 0 || i == n - 1) ? 0.5 * h : h;
    }
    return;
  }
  std::vector<double> gx, gw;
  gauss_legendre(8, gx, gw);
  const int panels = n / 8;
  const double half = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = -1.0 + (2.0 * p + 1.0) * half;
    for (int i = 0; i < 8; ++i) {
      u[p * 8 + i] = mid + half * gx[i];
      w[p * 8 + i] = half * gw[i];
    }
  }
}

SpectralQuadrature::SpectralQuadrature(int dim, const FourierConfig& cfg)
    : dim_(dim), cfg_(cfg), coords_(dim) {
  cfg.validate(dim);
  const int n = cfg.k_nodes_per_axis;
  std::vector<double> u, wu;
  reference_rule(cfg.rule, n, u, wu);
  const double g = cfg.effective_grading();
  const double r = cfg.k_radius;
  std::vector<double> k1(n), w1(n);
  for (int i = 0; i < n; ++i) {
    if (g == 0.0) {
      k1[i] = r * u[i];
      w1[i] = r * wu[i];
    } else {
      k1[i] = r * std::sinh(g * u[i]) / std::sinh(g);
      w1[i] = r * g * std::cosh(g * u[i]) / std::sinh(g) * wu[i];
    }
  }
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
  require(total <= (std::size_t{1} << 26), "SpectralQuadrature: too many nodes");
  for (auto& c : coords_) c.resize(total);
  weight_.resize(total);
  spectral_.resize(total);
  for (std::size_t j = 0; j < total; ++j) {
    std::size_t rem = j;
    double wt = 1.0, k2 = 0.0;
    for (int a = dim - 1; a >= 0; --a) {
      const std::size_t i = rem % n;
      rem /= n;
      coords_[a][j] = k1[i];
      wt *= w1[i];
      k2 += k1[i] * k1[i];
    }
    weight_[j] = wt;
    spectral_[j] = wt * std::pow(1.0 + k2, -cfg.lambda);
  }
}

double SpectralQuadrature::weighted_moment(int p) const {
  std::vector<double> k2p(size());
  for (std::size_t j = 0; j < size(); ++j) {
    double k2 = 0.0;
    for (int a = 0; a < dim_; ++a) k2 += coords_[a][j] * coords_[a][j];
    k2p[j] = std::pow(k2, p);
  }
  return kernels::dot(spectral_, k2p);
}

Spectrum spectrum(const SignedAtomicMeasure& measure, const SpectralQuadrature& quad) {
  require(measure.dim() == quad.dim(), "spectrum: dimension mismatch");
  const std::size_t n = quad.size();
  Spectrum out;
  out.re.assign(n, 0.0);
  out.im.assign(n, 0.0);
  const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * quad.dim());
  auto fill = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> theta(hi - lo);
    const std::span<double> re(out.re.data() + lo, hi - lo), im(out.im.data() + lo, hi - lo);
    for (std::size_t i = 0; i < measure.size(); ++i) {
      std::fill(theta.begin(), theta.end(), 0.0);
      const auto x = measure.location(i);
      for (int a = 0; a < quad.dim(); ++a)
        kernels::axpy(x[a], std::span<const double>(quad.axis(a).data() + lo, hi - lo), theta);
      kernels::accumulate_phase(theta, norm * measure.weight(i), re, im);
    }
  };
  const std::size_t chunks = (n + kParallelChunk - 1) / kParallelChunk;
  if (chunks <= 1) {
    fill(0, n);
  } else {
    parallel_for(chunks, [&](std::size_t c) {
      fill(c * kParallelChunk, std::min(n, (c + 1) * kParallelChunk));
    });
  }
  return out;
}

Spectrum spectrum_difference(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu,
                             const SpectralQuadrature& quad) {
  Spectrum a = spectrum(mu, quad);
  const Spectrum b = spectrum(nu, quad);
  kernels::axpy(-1.0, b.re, a.re);
  kernels::axpy(-1.0, b.im, a.im);
  return a;
}

FourierMetric::FourierMetric(FourierConfig cfg, int dim)
    : quad_(std::make_shared<const SpectralQuadrature>(dim, cfg)) {}

double FourierMetric::rho_sq(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu) const {
  require(mu.dim() == dim() && nu.dim() == dim(), "rho_F: dimension mismatch");
  const Spectrum s = spectrum_difference(mu, nu, *quad_);
  return kernels::weighted_norm_sq(quad_->spectral(), s.re, s.im);
}

double FourierMetric::rho(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu) const {
  return std::sqrt(rho_sq(mu, nu));
}

double FourierMetric::norm(const SignedAtomicMeasure& eta) const {
  require(eta.dim() == dim(), "rho_F: dimension mismatch");
  const Spectrum s = spectrum(eta, *quad_);
  return std::sqrt(kernels::weighted_norm_sq(quad_->spectral(), s.re, s.im));
}

double FourierMetric::d_F_sq(const Theta& theta, const Theta& iota) const {
  require(theta.m.size() == iota.m.size(), "d_F: dimension mismatch in m");
  const double dt = theta.t - iota.t;
  return dt * dt + (theta.m - iota.m).squaredNorm() + rho_sq(theta.measure, iota.measure);
}

double FourierMetric::d_F(const Theta& theta, const Theta& iota) const {
  return std::sqrt(d_F_sq(theta, iota));
}

double FourierMetric::L(const SignedAtomicMeasure& eta, const SignedAtomicMeasure& mu_star,
                        const SignedAtomicMeasure& nu_star) const {
  require(eta.dim() == dim() && mu_star.dim() == dim() && nu_star.dim() == dim(),
          "L_functional: dimension mismatch");
  const Spectrum fe = spectrum(eta, *quad_);
  const Spectrum fd = spectrum_difference(mu_star, nu_star, *quad_);
  const auto& w = quad_->spectral();
  std::vector<double> wr(w.size()), wi(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    wr[j] = w[j] * fe.re[j];
    wi[j] = w[j] * fe.im[j];
  }
  return 2.0 * (kernels::dot(wr, fd.re) + kernels::dot(wi, fd.im));
}

double FourierMetric::grad_constant() const { return std::sqrt(quad_->weighted_moment(1)); }
double FourierMetric::hess_constant() const { return std::sqrt(quad_->weighted_moment(2)); }

KappaKernel::KappaKernel(const FourierMetric& metric, const SignedAtomicMeasure& mu,
                         const SignedAtomicMeasure& nu, double epsilon)
    : quad_(&metric.quadrature()), dim_(metric.dim()), eps_(epsilon) {
  require(epsilon > 0.0, "KappaKernel: epsilon must be > 0");
  require(mu.dim() == dim_ && nu.dim() == dim_, "KappaKernel: dimension mismatch");
  diff_ = spectrum_difference(mu, nu, *quad_);
  rho_ = std::sqrt(kernels::weighted_norm_sq(quad_->spectral(), diff_.re, diff_.im));
  scale_ = std::pow(2.0 * std::numbers::pi, -0.5 * dim_) / eps_;
}

void KappaKernel::rotated(const Vec& x, std::vector<double>& a, std::vector<double>& b) const {
  require(x.size() == dim_, "kappa_eval: dimension mismatch");
  const std::size_t n = quad_->size();
  std::vector<double> theta(n, 0.0);
  for (int k = 0; k < dim_; ++k) kernels::axpy(x[k], quad_->axis(k), theta);
  a.resize(n);
  b.resize(n);
  kernels::rotate(diff_.re, diff_.im, theta, a, b);
}

double KappaKernel::value(const Vec& x) const {
  std::vector<double> a, b;
  rotated(x, a, b);
  return scale_ * kernels::dot(quad_->spectral(), a);
}

Vec KappaKernel::gradient(const Vec& x) const {
  std::vector<double> a, b;
  rotated(x, a, b);
  const auto& w = quad_->spectral();
  std::vector<double> wb(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) wb[j] = w[j] * b[j];
  Vec g(dim_);
  for (int k = 0; k < dim_; ++k) g[k] = scale_ * kernels::dot(wb, quad_->axis(k));
  return g;
}

Mat KappaKernel::hessian(const Vec& x) const {
  std::vector<double> a, b;
  rotated(x, a, b);
  const auto& w = quad_->spectral();
  std::vector<double> wa(w.size()), tmp(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) wa[j] = w[j] * a[j];
  Mat h(dim_, dim_);
  for (int p = 0; p < dim_; ++p) {
    const auto& kp = quad_->axis(p);
    for (std::size_t j = 0; j < w.size(); ++j) tmp[j] = wa[j] * kp[j];
    for (int q = p; q < dim_; ++q) h(p, q) = h(q, p) = -scale_ * kernels::dot(tmp, quad_->axis(q));
  }
  return h;
}

Mat KappaKernel::integrated_hessian(const SignedAtomicMeasure& eta) const {
  require(eta.dim() == dim_, "integrated_hessian: dimension mismatch");
  Mat acc = Mat::Zero(dim_, dim_);
  for (std::size_t i = 0; i < eta.size(); ++i) acc += eta.weight(i) * hessian(eta.atom(i));
  return acc;
}

Mat KappaKernel::spectral_hessian_identity() const {
  const auto& w = quad_->spectral();
  std::vector<double> wf(w.size()), tmp(w.size());
  for (std::size_t j = 0; j < w.size(); ++j)
    wf[j] = w[j] * (diff_.re[j] * diff_.re[j] + diff_.im[j] * diff_.im[j]);
  Mat h(dim_, dim_);
  for (int p = 0; p < dim_; ++p) {
    const auto& kp = quad_->axis(p);
    for (std::size_t j = 0; j < w.size(); ++j) tmp[j] = wf[j] * kp[j];
    for (int q = p; q < dim_; ++q) h(p, q) = h(q, p) = -kernels::dot(tmp, quad_->axis(q)) / eps_;
  }
  return h;
}

CheckReport parallelogram_check(const FourierMetric& metric, const SignedAtomicMeasure& mu,
                                const SignedAtomicMeasure& nu, const SignedAtomicMeasure& mu_star,
                                const SignedAtomicMeasure& nu_star, double tol) {
  CheckReport rep{"parallelogram", true, 0.0, tol, ""};
  const double lhs = 2.0 * metric.rho_sq(mu, mu_star) + 2.0 * metric.rho_sq(nu, nu_star) +
                     metric.L(mu, mu_star, nu_star) - metric.L(nu, mu_star, nu_star);
  const double rhs = metric.rho_sq(mu, nu) + metric.rho_sq(mu_star, nu_star);
  rep.worst = rhs - lhs;
  std::ostringstream os;
  os.precision(17);
  os << "lhs=" << lhs << " rhs=" << rhs;
  rep.detail = os.str();
  if (rhs - lhs > tol) rep.fail("inequality violated");
  if (equivalent(mu, mu_star) && equivalent(nu, nu_star)) {
    rep.worst = std::abs(lhs - rhs);
    if (std::abs(lhs - rhs) > tol) rep.fail("diagonal case is not an equality");
  }
  return rep;
}

}  // namespace fwlab
