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

// Finitely supported signed measures on R^d.

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fwlab/common.hpp"

namespace fwlab {

/// sum_i w_i delta_{x_i}. Probability measures are the nonnegative unit-mass
/// case and carry `probability() == true`. Immutable after construction.
class SignedAtomicMeasure {
 public:
  static constexpr double kMassTolerance = 1e-12;

  /// Atom locations are given row-major: n atoms x dim coordinates.
  SignedAtomicMeasure(int dim, std::vector<double> locations, std::vector<double> weights,
                      bool probability = false);

  static SignedAtomicMeasure dirac(const Vec& x);
  static SignedAtomicMeasure zero(int dim);
  static SignedAtomicMeasure from_atoms(const std::vector<Vec>& xs, const std::vector<double>& ws,
                                        bool probability = false);

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  bool probability() const { return probability_; }

  std::span<const double> location(std::size_t i) const {
    return {locations_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  Vec atom(std::size_t i) const;
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& locations() const { return locations_; }

  double total_mass() const;
  double total_variation() const;
  Vec mean() const;                   // sum w_i x_i (first moment, unnormalized)
  double second_moment() const;       // sum w_i |x_i|^2
  double first_abs_moment() const;    // sum |w_i| |x_i|
  Mat covariance() const;             // about the normalized mean; probability only

  /// (I_d + m)_# of this measure.
  SignedAtomicMeasure shifted(const Vec& m) const;
  /// Apply x -> A x to every atom location (e.g. sqrt(T) I_K rescaling).
  SignedAtomicMeasure mapped(const Mat& a) const;
  SignedAtomicMeasure scaled_weights(double c) const;

  /// alpha * a + beta * b as a signed measure (atoms concatenated).
  static SignedAtomicMeasure combine(double alpha, const SignedAtomicMeasure& a, double beta,
                                     const SignedAtomicMeasure& b);

 private:
  int dim_;
  std::vector<double> locations_;
  std::vector<double> weights_;
  bool probability_;
};

/// mu - nu as a signed measure.
SignedAtomicMeasure difference(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu);

/// (2 pi)^{-d/2} sum_i w_i exp(i k . x_i)
std::complex<double> char_fn(const SignedAtomicMeasure& measure, const Vec& k);

/// Location shift of every atom by m.
SignedAtomicMeasure pushforward_shift(const SignedAtomicMeasure& measure, const Vec& m);

/// Equality up to atom permutation and merging of coincident atoms
/// (per-weight tolerance). Intended for test assertions.
bool equivalent(const SignedAtomicMeasure& a, const SignedAtomicMeasure& b, double tol = 1e-12);

/// Element of [0,T] x P_2(R^d) x R^d.
struct Theta {
  double t = 0.0;
  SignedAtomicMeasure measure;
  Vec m;

  Theta(double t_, SignedAtomicMeasure mu, Vec m_);
  void validate(double horizon) const;
};

/// 1 + |m|^2 + int |x|^2 dmu; time independent.
double vartheta(const Theta& theta);

// JSON: {"dim": d, "atoms": [[x..., w], ...], "probability": bool}
nlohmann::json to_json(const SignedAtomicMeasure& measure);
SignedAtomicMeasure measure_from_json(const nlohmann::json& j);

}  // namespace fwlab
