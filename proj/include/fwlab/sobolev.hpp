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

// Periodic-box spectral calculus: Bessel potentials, Sobolev norms, Gaussian
// mollification of atomic measures, and the multiplication / Leibniz /
// commutator / dissipation estimates as executable checks.
//
// Frequencies are xi = 2 pi m / length per axis. bessel_potential(f, s)
// applies the multiplier (1 + |xi|^2)^{s/2}, i.e. J_{-s} f.

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fwlab/common.hpp"
#include "fwlab/measures.hpp"
#include "fwlab/rng.hpp"

namespace fwlab {

struct GridAxis {
  double origin = 0.0;
  double length = 1.0;
  std::size_t n = 64;  // power of two
};

struct Box {
  std::vector<GridAxis> axes;

  static Box cube(int d, double origin, double length, std::size_t n);
  int dim() const { return static_cast<int>(axes.size()); }
  std::size_t size() const;
  double spacing(int a) const { return axes[a].length / static_cast<double>(axes[a].n); }
  double cell_volume() const;
  void validate() const;
  bool operator==(const Box& other) const;
};

/// Real values on the nodes origin + i * spacing of a periodic box, row-major
/// (last axis fastest).
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(Box box);  // zeros
  GridFunction(Box box, std::vector<double> values);

  static GridFunction sample(const Box& box, const std::function<double(const Vec&)>& f);
  static GridFunction constant(const Box& box, double c);

  const Box& box() const { return box_; }
  int dim() const { return box_.dim(); }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  /// Physical coordinates of node `flat`.
  Vec node(std::size_t flat) const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double c);
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double c, GridFunction a) { return a *= c; }
  /// Pointwise product.
  friend GridFunction operator*(const GridFunction& a, const GridFunction& b);

  double max_abs() const;

 private:
  Box box_;
  std::vector<double> values_;
};

struct SobolevNorm {
  double order = 0.0;
  double value = 0.0;
};

/// Forward transform of f, then multiply by m(xi), inverse transform.
/// The result is real-valued for multipliers even in xi.
GridFunction apply_multiplier(const GridFunction& f,
                              const std::function<double(const double* xi)>& m);

GridFunction bessel_potential(const GridFunction& f, double s);
/// Spectral partial derivative d/dx_axis (Nyquist mode dropped).
GridFunction derivative(const GridFunction& f, int axis);
GridFunction laplacian(const GridFunction& f);

/// |f|_s = || J_{-s} f ||_{L^2(box)} by Parseval.
SobolevNorm sobolev_norm(const GridFunction& f, double s);
double sobolev_norm_sq(const GridFunction& f, double s);
/// Grid quadrature of int f g dx.
double inner(const GridFunction& f, const GridFunction& g);

/// sum_i w_i G_eps(x - x_i) with G_eps the centred Gaussian density of
/// standard deviation eps, periodized over nearest images. Atoms closer than
/// 6 eps to the box boundary are rejected.
GridFunction mollify(const SignedAtomicMeasure& eta, double eps, const Box& box);

/// Real trigonometric polynomial with random coefficients on modes |m| <=
/// max_mode per axis, amplitudes decaying like (1+|m|)^{-decay}.
GridFunction random_band_limited(const Box& box, CounterRng& rng, int max_mode,
                                 double decay = 1.0);
/// Largest mode per axis with products still inside the lower two thirds.
int band_limit(const Box& box);

/// |uv|_s / (|u|_{s1} |v|_{s2}). The exponents must satisfy s_i >= s,
/// min(s1, s2) < 0, s1 + s2 - s > d/2, s1 + s2 >= 0 and s < 0.
double multiplication_ratio(const GridFunction& u, const GridFunction& v, double s1, double s2,
                            double s);

/// (I - Delta)(f h) = f (I - Delta) h - 2 grad f . grad h - Delta f h.
/// Only k = 1 is supported. `worst` is the max pointwise residual.
CheckReport leibniz_identity_check(const GridFunction& f, const GridFunction& h, int k,
                                   double tol = 1e-8);

struct CommutatorResult {
  double residual = 0.0;  // |J_{2k}(fg) - f J_{2k} g|^2_{L^2}
  double bound = 0.0;     // |f|^2_{2k+d/2+1} |g|^2_{-2k-1/2}
  double ratio() const { return bound > 0.0 ? residual / bound : 0.0; }
};
CommutatorResult commutator_residual(const GridFunction& f, const GridFunction& g, int k);

/// Matrix field a (row-major d x d components) and vector field b on one box.
struct DiffusionField {
  std::vector<GridFunction> a;
  std::vector<GridFunction> b;

  int dim() const { return static_cast<int>(b.size()); }
  void validate() const;
  /// min over nodes of the smallest eigenvalue of (a + a^T)/2.
  double ellipticity() const;
};

struct DissipationResult {
  double lhs = 0.0;          // int (A + B)(J_{2 lambda} eta_eps) eta_eps dx
  double norm_1ml_sq = 0.0;  // |eta_eps|^2_{1 - lambda}
  double norm_ml_sq = 0.0;   // |eta_eps|^2_{-lambda}
  double mollification_error = 0.0;  // change in |.|^2_{-lambda} when eps halves
};

/// Rejects fields whose ellipticity is below delta.
DissipationResult dissipation_check(const SignedAtomicMeasure& eta, const DiffusionField& field,
                                    int lambda, double delta, double eps_moll);

// Binary layout: u64 d; per axis u64 n, f64 origin, f64 length; then the
// row-major f64 payload. All little-endian.
void write_grid(const GridFunction& f, const std::string& path);
GridFunction read_grid(const std::string& path);
nlohmann::json grid_sidecar(const GridFunction& f, const std::string& payload_name);

}  // namespace fwlab
