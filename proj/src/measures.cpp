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

#include "fwlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fwlab {

namespace {

void check_dims(int a, int b, const char* where) {
  if (a != b) {
    std::ostringstream os;
    os << where << ": dimension mismatch (" << a << " vs " << b << ")";
    throw InputError(os.str());
  }
}

}  // namespace

SignedAtomicMeasure::SignedAtomicMeasure(int dim, std::vector<double> locations,
                                         std::vector<double> weights, bool probability)
    : dim_(dim),
      locations_(std::move(locations)),
      weights_(std::move(weights)),
      probability_(probability) {
  require(dim_ >= 1, "measure: dim must be positive");
  require(locations_.size() == weights_.size() * static_cast<std::size_t>(dim_),
          "measure: locations/weights size mismatch");
  for (double x : locations_) require(std::isfinite(x), "measure: non-finite atom location");
  double mass = 0.0;
  for (double w : weights_) {
    require(std::isfinite(w), "measure: non-finite weight");
    mass += w;
  }
  if (probability_) {
    for (double w : weights_) require(w >= 0.0, "probability measure: negative weight");
    if (std::abs(mass - 1.0) > kMassTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "probability measure: total mass " << mass << " != 1";
      throw InputError(os.str());
    }
  }
  require(std::isfinite(second_moment()), "measure: infinite second moment");
}

SignedAtomicMeasure SignedAtomicMeasure::dirac(const Vec& x) {
  return {static_cast<int>(x.size()), std::vector<double>(x.data(), x.data() + x.size()), {1.0},
          true};
}

SignedAtomicMeasure SignedAtomicMeasure::zero(int dim) { return {dim, {}, {}, false}; }

SignedAtomicMeasure SignedAtomicMeasure::from_atoms(const std::vector<Vec>& xs,
                                                    const std::vector<double>& ws,
                                                    bool probability) {
  require(!xs.empty(), "from_atoms: empty atom list (use zero(dim))");
  require(xs.size() == ws.size(), "from_atoms: size mismatch");
  const int d = static_cast<int>(xs.front().size());
  std::vector<double> loc;
  loc.reserve(xs.size() * static_cast<std::size_t>(d));
  for (const Vec& x : xs) {
    check_dims(d, static_cast<int>(x.size()), "from_atoms");
    loc.insert(loc.end(), x.data(), x.data() + d);
  }
  return {d, std::move(loc), ws, probability};
}

Vec SignedAtomicMeasure::atom(std::size_t i) const {
  const auto loc = location(i);
  return Eigen::Map<const Vec>(loc.data(), dim_);
}

double SignedAtomicMeasure::total_mass() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

double SignedAtomicMeasure::total_variation() const {
  double s = 0.0;
  for (double w : weights_) s += std::abs(w);
  return s;
}

Vec SignedAtomicMeasure::mean() const {
  Vec acc = Vec::Zero(dim_);
  for (std::size_t i = 0; i < size(); ++i) acc += weights_[i] * atom(i);
  return acc;
}

double SignedAtomicMeasure::second_moment() const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    double r2 = 0.0;
    for (double x : location(i)) r2 += x * x;
    s += weights_[i] * r2;
  }
  return s;
}

double SignedAtomicMeasure::first_abs_moment() const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += std::abs(weights_[i]) * atom(i).norm();
  return s;
}

Mat SignedAtomicMeasure::covariance() const {
  require(probability_, "covariance: requires a probability measure");
  const Vec mu = mean();
  Mat c = Mat::Zero(dim_, dim_);
  for (std::size_t i = 0; i < size(); ++i) {
    const Vec dx = atom(i) - mu;
    c += weights_[i] * dx * dx.transpose();
  }
  return c;
}

SignedAtomicMeasure SignedAtomicMeasure::shifted(const Vec& m) const {
  check_dims(dim_, static_cast<int>(m.size()), "pushforward_shift");
  std::vector<double> loc = locations_;
  for (std::size_t i = 0; i < size(); ++i)
    for (int a = 0; a < dim_; ++a) loc[i * dim_ + a] += m[a];
  return {dim_, std::move(loc), weights_, probability_};
}

SignedAtomicMeasure SignedAtomicMeasure::mapped(const Mat& a) const {
  require(a.rows() == dim_ && a.cols() == dim_, "mapped: matrix must be dim x dim");
  std::vector<double> loc(locations_.size());
  for (std::size_t i = 0; i < size(); ++i) {
    const Vec y = a * atom(i);
    for (int k = 0; k < dim_; ++k) loc[i * dim_ + k] = y[k];
  }
  return {dim_, std::move(loc), weights_, probability_};
}

SignedAtomicMeasure SignedAtomicMeasure::scaled_weights(double c) const {
  std::vector<double> w = weights_;
  for (double& x : w) x *= c;
  return {dim_, locations_, std::move(w), false};
}

SignedAtomicMeasure SignedAtomicMeasure::combine(double alpha, const SignedAtomicMeasure& a,
                                                 double beta, const SignedAtomicMeasure& b) {
  check_dims(a.dim(), b.dim(), "combine");
  std::vector<double> loc = a.locations_;
  loc.insert(loc.end(), b.locations_.begin(), b.locations_.end());
  std::vector<double> w;
  w.reserve(a.size() + b.size());
  for (double x : a.weights_) w.push_back(alpha * x);
  for (double x : b.weights_) w.push_back(beta * x);
  return {a.dim(), std::move(loc), std::move(w), false};
}

SignedAtomicMeasure difference(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu) {
  return SignedAtomicMeasure::combine(1.0, mu, -1.0, nu);
}

std::complex<double> char_fn(const SignedAtomicMeasure& measure, const Vec& k) {
  check_dims(measure.dim(), static_cast<int>(k.size()), "char_fn");
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    double phase = 0.0;
    const auto x = measure.location(i);
    for (int a = 0; a < measure.dim(); ++a) phase += k[a] * x[a];
    re += measure.weight(i) * std::cos(phase);
    im += measure.weight(i) * std::sin(phase);
  }
  const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * measure.dim());
  return {norm * re, norm * im};
}

SignedAtomicMeasure pushforward_shift(const SignedAtomicMeasure& measure, const Vec& m) {
  return measure.shifted(m);
}

bool equivalent(const SignedAtomicMeasure& a, const SignedAtomicMeasure& b, double tol) {
  if (a.dim() != b.dim()) return false;
  // Merge a - b by exact location and require every merged weight to vanish.
  std::vector<std::pair<std::vector<double>, double>> merged;
  auto add = [&](const SignedAtomicMeasure& m, double sign) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      std::vector<double> x(m.location(i).begin(), m.location(i).end());
      auto it = std::find_if(merged.begin(), merged.end(),
                             [&](const auto& e) { return e.first == x; });
      if (it == merged.end())
        merged.emplace_back(std::move(x), sign * m.weight(i));
      else
        it->second += sign * m.weight(i);
    }
  };
  add(a, 1.0);
  add(b, -1.0);
  return std::all_of(merged.begin(), merged.end(),
                     [&](const auto& e) { return std::abs(e.second) <= tol; });
}

Theta::Theta(double t_, SignedAtomicMeasure mu, Vec m_)
    : t(t_), measure(std::move(mu)), m(std::move(m_)) {
  check_dims(measure.dim(), static_cast<int>(m.size()), "Theta");
}

void Theta::validate(double horizon) const {
  require(t >= 0.0 && t <= horizon, "Theta: time outside [0, T]");
  require(measure.probability(), "Theta: measure must be a probability measure");
}

double vartheta(const Theta& theta) {
  return 1.0 + theta.m.squaredNorm() + theta.measure.second_moment();
}

nlohmann::json to_json(const SignedAtomicMeasure& measure) {
  nlohmann::json atoms = nlohmann::json::array();
  for (std::size_t i = 0; i < measure.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (double x : measure.location(i)) row.push_back(x);
    row.push_back(measure.weight(i));
    atoms.push_back(std::move(row));
  }
  return {{"dim", measure.dim()}, {"atoms", atoms}, {"probability", measure.probability()}};
}

SignedAtomicMeasure measure_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("dim") && j.contains("atoms"),
          "measure JSON: expected {dim, atoms[, probability]}");
  const int d = j.at("dim").get<int>();
  require(d >= 1, "measure JSON: dim must be positive");
  std::vector<double> loc, w;
  for (const auto& row : j.at("atoms")) {
    require(row.is_array() && static_cast<int>(row.size()) == d + 1,
            "measure JSON: each atom must be [x_1..x_d, w]");
    for (int a = 0; a < d; ++a) loc.push_back(row[a].get<double>());
    w.push_back(row[d].get<double>());
  }
  return {d, std::move(loc), std::move(w), j.value("probability", false)};
}

}  // namespace fwlab
