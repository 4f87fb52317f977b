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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fwlab/measures.hpp"

using fwlab::InputError;
using fwlab::SignedAtomicMeasure;
using fwlab::Theta;
using fwlab::Vec;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

SignedAtomicMeasure random_measure(std::mt19937_64& gen, int d, int n, bool prob) {
  std::uniform_real_distribution<double> loc(-3.0, 3.0), wt(0.1, 1.0);
  std::vector<double> xs(static_cast<std::size_t>(n * d)), ws(n);
  for (double& x : xs) x = loc(gen);
  double s = 0.0;
  for (double& w : ws) s += (w = wt(gen));
  for (double& w : ws) w = prob ? w / s : (gen() % 2 ? w : -w);
  if (prob) {
    // absorb rounding into the last weight so the mass test is exact enough
    double t = 0.0;
    for (int i = 0; i + 1 < n; ++i) t += ws[i];
    ws[n - 1] = 1.0 - t;
  }
  return {d, xs, ws, prob};
}

}  // namespace

TEST(Measures, ProbabilityValidation) {
  EXPECT_THROW(SignedAtomicMeasure(1, {0.0, 1.0}, {0.5, 0.6}, true), InputError);
  EXPECT_THROW(SignedAtomicMeasure(1, {0.0, 1.0}, {-0.5, 1.5}, true), InputError);
  EXPECT_THROW(SignedAtomicMeasure(1, {NAN}, {1.0}, true), InputError);
  EXPECT_THROW(SignedAtomicMeasure(2, {0.0}, {1.0}, true), InputError);
  EXPECT_THROW(SignedAtomicMeasure(0, {}, {}, false), InputError);
  EXPECT_NO_THROW(SignedAtomicMeasure(1, {0.0, 1.0}, {-0.5, 1.5}, false));
}

TEST(Measures, CharFnExamples) {
  const double c1 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const auto d0 = SignedAtomicMeasure::dirac(v1(0.0));
  for (double k : {-3.0, 0.0, 0.7, 12.0}) {
    const auto f = fwlab::char_fn(d0, v1(k));
    EXPECT_NEAR(f.real(), c1, 1e-15);
    EXPECT_NEAR(f.imag(), 0.0, 1e-15);
  }
  std::mt19937_64 gen(1);
  const auto mu3 = random_measure(gen, 3, 5, true);
  const auto f0 = fwlab::char_fn(mu3, Vec::Zero(3));
  EXPECT_NEAR(f0.real(), std::pow(2.0 * std::numbers::pi, -1.5), 1e-15);

  const auto half = SignedAtomicMeasure::from_atoms({v1(0.0), v1(std::numbers::pi)}, {0.5, 0.5},
                                                    true);
  EXPECT_NEAR(std::abs(fwlab::char_fn(half, v1(1.0))), 0.0, 1e-16);
  EXPECT_THROW(fwlab::char_fn(half, Vec::Zero(2)), InputError);
}

TEST(Measures, CharFnConjugateSymmetryAndLinearity) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 3;
    const auto mu = random_measure(gen, d, 4, true);
    const auto nu = random_measure(gen, d, 3, false);
    Vec k(d);
    for (int a = 0; a < d; ++a) k[a] = nd(gen);
    const auto fp = fwlab::char_fn(mu, k);
    const auto fm = fwlab::char_fn(mu, -k);
    EXPECT_NEAR(std::abs(fm - std::conj(fp)), 0.0, 1e-15);
    EXPECT_LE(std::abs(fp), std::pow(2.0 * std::numbers::pi, -0.5 * d) + 1e-15);

    const double alpha = 0.3, beta = -1.7;
    const auto comb = SignedAtomicMeasure::combine(alpha, mu, beta, nu);
    const auto lhs = fwlab::char_fn(comb, k);
    const auto rhs = alpha * fp + beta * fwlab::char_fn(nu, k);
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-12);
  }
}

TEST(Measures, ShiftExamplesAndComposition) {
  std::mt19937_64 gen(3);
  const auto mu = random_measure(gen, 2, 6, true);
  Vec zero = Vec::Zero(2), m(2), n(2);
  m << 0.25, -1.5;
  n << -0.75, 2.0;
  EXPECT_TRUE(fwlab::equivalent(fwlab::pushforward_shift(mu, zero), mu, 0.0));

  const auto shifted = fwlab::pushforward_shift(mu, m);
  const double expansion = mu.second_moment() + 2.0 * m.dot(mu.mean()) + m.squaredNorm();
  EXPECT_NEAR(shifted.second_moment(), expansion, 1e-12);

  const auto twice = fwlab::pushforward_shift(shifted, n);
  const auto once = fwlab::pushforward_shift(mu, m + n);
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (int a = 0; a < 2; ++a) EXPECT_DOUBLE_EQ(twice.location(i)[a], once.location(i)[a]);

  Vec x(2);
  x << 1.0, 2.0;
  EXPECT_TRUE(fwlab::equivalent(fwlab::pushforward_shift(SignedAtomicMeasure::dirac(x), m),
                                SignedAtomicMeasure::dirac(x + m), 0.0));
  EXPECT_THROW(fwlab::pushforward_shift(mu, v1(1.0)), InputError);
}

TEST(Measures, Vartheta) {
  const auto d0 = SignedAtomicMeasure::dirac(v1(0.0));
  EXPECT_DOUBLE_EQ(fwlab::vartheta(Theta(0.3, d0, v1(0.0))), 1.0);
  EXPECT_DOUBLE_EQ(fwlab::vartheta(Theta(0.3, d0, v1(-3.0))), 10.0);
  const auto sym = SignedAtomicMeasure::from_atoms({v1(-1.0), v1(1.0)}, {0.5, 0.5}, true);
  EXPECT_DOUBLE_EQ(fwlab::vartheta(Theta(0.0, sym, v1(2.0))), 6.0);

  // permutation invariance
  const auto perm = SignedAtomicMeasure::from_atoms({v1(1.0), v1(-1.0)}, {0.5, 0.5}, true);
  EXPECT_DOUBLE_EQ(fwlab::vartheta(Theta(0.0, perm, v1(2.0))),
                   fwlab::vartheta(Theta(0.0, sym, v1(2.0))));
}

TEST(Measures, ThetaValidation) {
  const auto d0 = SignedAtomicMeasure::dirac(v1(0.0));
  EXPECT_THROW(Theta(0.0, d0, Vec::Zero(2)), InputError);
  EXPECT_THROW(Theta(1.5, d0, v1(0.0)).validate(1.0), InputError);
  EXPECT_NO_THROW(Theta(1.0, d0, v1(0.0)).validate(1.0));
  const auto signed_m = SignedAtomicMeasure::combine(1.0, d0, -1.0, d0);
  EXPECT_THROW(Theta(0.0, signed_m, v1(0.0)).validate(1.0), InputError);
}

TEST(Measures, EquivalenceMergesAtoms) {
  const auto a = SignedAtomicMeasure::from_atoms({v1(0.0), v1(0.0), v1(1.0)}, {0.25, 0.25, 0.5},
                                                 true);
  const auto b = SignedAtomicMeasure::from_atoms({v1(1.0), v1(0.0)}, {0.5, 0.5}, true);
  EXPECT_TRUE(fwlab::equivalent(a, b));
  const auto c = SignedAtomicMeasure::from_atoms({v1(1.0), v1(0.5)}, {0.5, 0.5}, true);
  EXPECT_FALSE(fwlab::equivalent(a, c));
}

TEST(Measures, MomentsAndCovariance) {
  Vec x(2), y(2);
  x << 1.0, 0.0;
  y << -1.0, 2.0;
  const auto mu = SignedAtomicMeasure::from_atoms({x, y}, {0.5, 0.5}, true);
  EXPECT_DOUBLE_EQ(mu.mean()[0], 0.0);
  EXPECT_DOUBLE_EQ(mu.mean()[1], 1.0);
  const auto cov = mu.covariance();
  EXPECT_DOUBLE_EQ(cov(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(cov(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(cov(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(mu.first_abs_moment(), 0.5 + 0.5 * std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(mu.total_variation(), 1.0);
}

TEST(Measures, JsonRoundTrip) {
  std::mt19937_64 gen(4);
  const auto mu = random_measure(gen, 2, 5, true);
  const auto back = fwlab::measure_from_json(fwlab::to_json(mu));
  EXPECT_EQ(back.dim(), 2);
  EXPECT_TRUE(back.probability());
  EXPECT_TRUE(fwlab::equivalent(mu, back, 0.0));
  EXPECT_THROW(fwlab::measure_from_json(nlohmann::json::parse(R"({"dim":2,"atoms":[[1,2]]})")),
               InputError);
  EXPECT_THROW(
      fwlab::measure_from_json(
          nlohmann::json::parse(R"({"dim":1,"atoms":[[0,0.5]],"probability":true})")),
      InputError);
}
