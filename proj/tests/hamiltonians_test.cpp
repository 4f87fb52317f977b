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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fwlab/hamiltonians.hpp"
#include "test_support.hpp"

using namespace fwlab;
using fwlab::testing::random_probability;
using fwlab::testing::random_vec;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }
Mat m1(double x) { return Mat::Constant(1, 1, x); }

JetArgs linear_jet(double p0, double p1, double q0, double M) {
  JetArgs j;
  j.p = [=](const Vec& x) { return v1(p0 + p1 * x[0]); };
  j.q = [=](const Vec&) { return m1(q0); };
  j.M = m1(M);
  return j;
}

// p = a0 + a1 x + a2 sin x, q = b0 + b1 x + b2 cos x
JetArgs random_jet(std::mt19937_64& gen, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  const double a0 = u(gen), a1 = u(gen), a2 = u(gen), b0 = u(gen), b1 = u(gen), b2 = u(gen);
  JetArgs j;
  j.p = [=](const Vec& x) { return v1(a0 + a1 * x[0] + a2 * std::sin(x[0])); };
  j.q = [=](const Vec& x) { return m1(b0 + b1 * x[0] + b2 * std::cos(x[0])); };
  j.M = m1(u(gen));
  return j;
}

const FourierMetric& metric(int d) {
  static const FourierMetric m1(FourierConfig::for_dim(1), 1);
  static const FourierMetric m2(FourierConfig::for_dim(2), 2);
  static const FourierMetric m3(FourierConfig::for_dim(3), 3);
  return d == 1 ? m1 : d == 2 ? m2 : m3;
}

Mat random_sym(std::mt19937_64& gen, int K, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat A(K, K);
  for (int r = 0; r < K; ++r)
    for (int c = 0; c < K; ++c) A(r, c) = u(gen);
  return 0.5 * (A + A.transpose());
}

SimplexAction random_action(std::mt19937_64& gen, int K, double zero_prob = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution drop(zero_prob);
  std::vector<double> w(std::size_t{1} << K);
  for (double& x : w) x = drop(gen) ? 0.0 : e(gen);
  if (std::accumulate(w.begin(), w.end(), 0.0) == 0.0) w[0] = 1.0;
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  double partial = 0.0;
  for (std::size_t j = 0; j + 1 < w.size(); ++j) partial += (w[j] /= s);
  w.back() = std::max(0.0, 1.0 - partial);
  return {K, w};
}

}  // namespace

// ---------------------------------------------------------------- filtering

TEST(Filtering, RegistryAndValidation) {
  for (const auto& name : filtering_registry_names()) {
    const auto c = filtering_registry(name);
    std::vector<Vec> xs, as;
    for (double x = -30; x <= 30; x += 0.37) xs.push_back(v1(x));
    for (double a = -2; a <= 2; a += 0.25) as.push_back(v1(a));
    const auto rep = validate_coeffs(c, xs, as);
    EXPECT_TRUE(rep.passed) << name << ": " << rep.detail;
  }
  EXPECT_THROW(filtering_registry("nope"), InputError);
}

TEST(Filtering, HandEvaluatedExample) {
  const auto c = filtering_registry("lq1d");
  EXPECT_DOUBLE_EQ(K_filtering(v1(0.0), SignedAtomicMeasure::dirac(v1(0.0)),
                               linear_jet(0, 1, 1, 1), c),
                   1.0);
}

TEST(Filtering, ZeroJetIntegratesRunningCost) {
  const auto c = filtering_registry("osc1d");
  std::mt19937_64 gen(3);
  const auto mu = random_probability(gen, 1, 6);
  const Vec a = v1(0.7);
  double expect = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) expect += mu.weight(i) * c.r(mu.atom(i), a);
  EXPECT_NEAR(K_filtering(a, mu, linear_jet(0, 0, 0, 0), c), expect, 1e-15);
}

TEST(Filtering, MonotoneInM) {
  const auto c = filtering_registry("osc1d");
  std::mt19937_64 gen(4);
  for (int t = 0; t < 20; ++t) {
    const auto mu = random_probability(gen, 1, 4);
    JetArgs j = random_jet(gen, 2.0);
    JetArgs k = j;
    k.M = j.M + m1(std::uniform_real_distribution<double>(0, 3)(gen));
    const Vec a = random_vec(gen, 1, -2, 2);
    EXPECT_LE(K_filtering(a, mu, j, c), K_filtering(a, mu, k, c));
  }
}

TEST(Filtering, AffineInJet) {
  const auto c = filtering_registry("osc1d");
  std::mt19937_64 gen(5);
  const auto mu = random_probability(gen, 1, 5);
  const JetArgs j1 = random_jet(gen, 2.0), j2 = random_jet(gen, 2.0);
  const double t = 0.3;
  JetArgs mix;
  mix.p = [&](const Vec& x) -> Vec { return t * j1.p(x) + (1 - t) * j2.p(x); };
  mix.q = [&](const Vec& x) -> Mat { return t * j1.q(x) + (1 - t) * j2.q(x); };
  mix.M = t * j1.M + (1 - t) * j2.M;
  const Vec a = v1(-0.4);
  EXPECT_NEAR(K_filtering(a, mu, mix, c),
              t * K_filtering(a, mu, j1, c) + (1 - t) * K_filtering(a, mu, j2, c), 1e-12);
}

TEST(Filtering, GridMinimum) {
  const auto c = filtering_registry("lq1d");
  const auto mu = SignedAtomicMeasure::dirac(v1(0.0));
  const auto jet = linear_jet(0, 1, 1, 1);
  const auto single = G_filtering(mu, jet, c, {v1(1.5)});
  EXPECT_DOUBLE_EQ(single.value, K_filtering(v1(1.5), mu, jet, c));
  EXPECT_THROW(G_filtering(mu, jet, c, {}), InputError);

  double prev = INFINITY;
  for (int n : {3, 5, 9, 17, 33}) {
    const double g = G_filtering(mu, jet, c, c.control_grid(n)).value;
    EXPECT_LE(g, prev);
    prev = g;
  }
}

TEST(Filtering, LqClosedFormInnerMinimum) {
  // K(a) = a^2 + a int p dmu + 1 for p(x) = x, q = 1, M = 1; the minimum over
  // [-2, 2] is 1 - (int x dmu)^2 / 4 and the 401-point grid is within h^2/4.
  const auto c = filtering_registry("lq1d");
  const auto grid = c.control_grid(401);
  const auto jet = linear_jet(0, 1, 1, 1);
  for (double x1 : {0.0, 1.3, -2.9, 3.7}) {
    const SignedAtomicMeasure mu(1, {0.0, x1}, {0.5, 0.5}, true);
    const double mean = 0.5 * x1;
    const double exact = 1.0 - mean * mean / 4.0;
    const auto g = G_filtering(mu, jet, c, grid);
    EXPECT_GE(g.value, exact - 1e-14);
    EXPECT_LE(g.value - exact, 0.25 * 0.01 * 0.01 + 1e-14) << x1;
    EXPECT_NEAR(g.argmin[0], -mean / 2, 0.005 + 1e-12);
  }
}

TEST(Filtering, ExtensionDualRoute) {
  const auto c = filtering_registry("osc1d");
  const auto grid = c.control_grid(41);
  std::mt19937_64 gen(6);
  for (int t = 0; t < 20; ++t) {
    const auto mu = random_probability(gen, 1, 5);
    const Vec m = random_vec(gen, 1, -3, 3);
    const JetArgs jet = random_jet(gen, 2.0);
    const auto a = Ge_extend(mu, m, jet, c, grid);
    const auto b = Ge_extend_direct(mu, m, jet, c, grid);
    EXPECT_NEAR(a.value, b.value, 1e-12 * (1 + std::abs(a.value)));
  }
  const auto mu = random_probability(gen, 1, 3);
  const JetArgs jet = random_jet(gen, 1.0);
  EXPECT_DOUBLE_EQ(Ge_extend(mu, Vec::Zero(1), jet, c, grid).value,
                   G_filtering(mu, jet, c, grid).value);
  // delta_x shifted by m against delta_{x+m} unshifted, jet translated along
  JetArgs centred = jet.shifted(v1(0.8));
  EXPECT_NEAR(Ge_extend(SignedAtomicMeasure::dirac(v1(0.4)), v1(0.8), jet, c, grid).value,
              G_filtering(SignedAtomicMeasure::dirac(v1(1.2)), centred, c, grid).value, 1e-14);
}

TEST(Filtering, LinearGrowthNorm) {
  const auto mu = SignedAtomicMeasure::dirac(v1(2.0));
  const auto probes = growth_probe_set(mu);
  EXPECT_EQ(probes.size(), 8u);
  const std::function<Vec(const Vec&)> f = [](const Vec& x) { return v1(3.0 * x[0]); };
  EXPECT_NEAR(linear_growth_norm(f, probes), 3.0 * 25.0 / 26.0, 1e-15);
}

TEST(AssumptionI, IdenticalJetsAndMOnly) {
  const auto c = filtering_registry("lq1d");
  const auto grid = c.control_grid(81);
  std::mt19937_64 gen(7);
  std::vector<LipschitzSample> same, m_only;
  for (int t = 0; t < 20; ++t) {
    LipschitzSample s{random_probability(gen, 1, 4), random_vec(gen, 1, -2, 2),
                      random_jet(gen, 2.0), {}};
    s.jet2 = s.jet1;
    same.push_back(s);
    s.jet2.M = s.jet1.M + m1(std::normal_distribution<double>()(gen));
    m_only.push_back(s);
  }
  const auto rep0 = check_assumption_i_filtering(c, same, grid);
  EXPECT_TRUE(rep0.passed);
  EXPECT_EQ(rep0.worst, 0.0);
  // G^e moves by exactly (1/2)|M1 - M2| with sigma~ = 1
  for (const auto& s : m_only) {
    const auto t = filtering_lipschitz_terms(s, c, grid);
    EXPECT_NEAR(t.lhs, 0.5 * (s.jet1.M - s.jet2.M).norm(), 1e-12);
    EXPECT_LE(t.ratio(), 0.5 + 1e-12);
  }
  EXPECT_TRUE(check_assumption_i_filtering(c, m_only, grid, 0.5 + 1e-9).passed);
}

TEST(AssumptionI, FittedConstantStableAndHeldOut) {
  const auto c = filtering_registry("lq1d");
  const auto grid = c.control_grid(81);
  std::mt19937_64 gen(8);
  auto draw = [&](int n) {
    std::vector<LipschitzSample> out;
    for (int t = 0; t < n; ++t)
      out.push_back({random_probability(gen, 1, 4), random_vec(gen, 1, -3, 3),
                     random_jet(gen, 2.0), random_jet(gen, 2.0)});
    return out;
  };
  const auto fit100 = check_assumption_i_filtering(c, draw(100), grid);
  const auto fit200 = check_assumption_i_filtering(c, draw(200), grid);
  ASSERT_TRUE(fit100.passed && fit200.passed);
  EXPECT_GT(fit200.worst, 0.0);
  EXPECT_LT(std::abs(fit100.worst - fit200.worst), 0.25 * fit200.worst);
  // the structural bound |b| + |sigma sigma^T|/2 + |sigma~|^2/2 with |b| <= 2
  EXPECT_LE(fit200.worst, 3.0);
  EXPECT_TRUE(check_assumption_i_filtering(c, draw(200), grid, 3.0).passed);
  EXPECT_FALSE(check_assumption_i_filtering(c, draw(200), grid, 0.1 * fit200.worst).passed);
}

TEST(AssumptionII, DiagonalIsZero) {
  const auto c = filtering_registry("osc1d");
  const auto grid = c.control_grid(41);
  std::mt19937_64 gen(9);
  const auto mu = random_probability(gen, 1, 3);
  PenaltySample s{mu, mu, v1(0.4), v1(0.4), 0.1, m1(0.3), m1(0.3)};
  const auto t = filtering_penalty_terms(s, c, metric(1), grid);
  EXPECT_EQ(t.difference, 0.0);
  EXPECT_EQ(t.measure_part, 0.0);
  EXPECT_EQ(t.shift_part, 0.0);
}

TEST(AssumptionII, OscillatoryFamilyHoldsWithHeldOutSlope) {
  const auto c = filtering_registry("osc1d");
  const auto fam = fit_assumption_ii(c, metric(1), c.control_grid(41), 50, 50, 21);
  EXPECT_TRUE(std::isfinite(fam.fit.constant));
  EXPECT_GE(fam.fit.constant, fam.fit.sample_max);
  EXPECT_TRUE(fam.holdout.passed) << fam.holdout.detail << " c=" << fam.fit.constant;
}

TEST(AssumptionI, AscentFitStableAcrossSampleSizes) {
  const auto c = filtering_registry("lq1d-sat");
  const auto grid = c.control_grid(81);
  const auto a = fit_assumption_i(c, grid, 100, 100, 31);
  const auto b = fit_assumption_i(c, grid, 200, 100, 32);
  EXPECT_TRUE(a.holdout.passed) << a.holdout.detail;
  EXPECT_TRUE(b.holdout.passed) << b.holdout.detail;
  EXPECT_LE(std::abs(a.fit.constant - b.fit.constant), 0.1 * b.fit.constant)
      << a.fit.constant << " vs " << b.fit.constant;
}

TEST(SampleFamilies, ClampedAndValid) {
  const Vec lo = Vec::Constant(penalty_family_dim(), -0.5);
  const auto s = penalty_family_sample(lo);
  EXPECT_NEAR(s.eps, 0.02, 1e-15);
  EXPECT_LE(s.X(0, 0), s.minus_Y(0, 0));
  EXPECT_THROW(lipschitz_family_sample(Vec::Zero(3)), InputError);
  const auto u = unit_cube_samples(5, 3, 9, 1);
  EXPECT_EQ(u, unit_cube_samples(5, 3, 9, 1));
  EXPECT_NE(u[0], unit_cube_samples(5, 3, 9, 2)[0]);
}

// ------------------------------------------------------------------- regret

TEST(Regret, HatWeights) {
  EXPECT_EQ(hat_weights(SimplexAction::vertex(2, 0b01), 0).in, 1.0);
  const auto u = hat_weights(SimplexAction::uniform(2), 0);
  EXPECT_EQ(u.in, 0.5);
  EXPECT_EQ(u.out, 0.5);
  const auto e = hat_weights(SimplexAction::vertex(3, 0), 1);
  EXPECT_EQ(e.in, 0.0);
  EXPECT_EQ(e.out, 1.0);
  EXPECT_THROW(hat_weights(SimplexAction::uniform(2), 2), InputError);
  EXPECT_THROW(SimplexAction(2, {0.5, 0.5, 0.5, -0.5}), InputError);
}

TEST(Regret, VVectors) {
  const Vec e1 = subset_indicator(2, 0b10);
  EXPECT_EQ(V_vectors(SimplexAction::vertex(2, 0b01), 0).in, e1);
  EXPECT_EQ(V_vectors(SimplexAction::uniform(2), 0).in, Vec(0.5 * e1));
  const auto z = V_vectors(SimplexAction::vertex(2, 0b10), 0);
  EXPECT_EQ(z.in, Vec::Zero(2));
  EXPECT_EQ(z.out, e1);
}

TEST(Regret, HatWeightIdentities) {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 200; ++t) {
    const int K = 1 + t % 4;
    const auto a = random_action(gen, K, 0.4);
    for (int i = 0; i < K; ++i) {
      const auto h = hat_weights(a, i);
      EXPECT_NEAR(h.in + h.out, 1.0, 1e-12);
      const auto V = V_vectors(a, i);
      Vec u = Vec::Zero(K);
      for (unsigned j = 0; j < a.size(); ++j)
        if ((j >> i) & 1u) u += a[j] * subset_indicator(K, ((1u << K) - 1) & ~j);
      EXPECT_LE((h.in * V.in - u).norm(), 1e-14);
      EXPECT_LE(V.in.norm(), std::ldexp(1.0, K - 1));
      EXPECT_LE(V.out.norm(), std::ldexp(1.0, K - 1));
    }
  }
}

TEST(Regret, KExamples) {
  const Mat Z = Mat::Zero(2, 2);
  EXPECT_EQ(K_regret(0, SimplexAction::uniform(2), Z, Z), 0.0);
  EXPECT_DOUBLE_EQ(K_regret(0, SimplexAction::vertex(2, 0b01), Z, Mat::Identity(2, 2)), 0.5);
  const auto mu = SignedAtomicMeasure::dirac(Vec::Zero(2));
  const std::function<Mat(const Vec&)> zero = [](const Vec&) { return Mat(Mat::Zero(2, 2)); };
  EXPECT_DOUBLE_EQ(K_regret(0, SimplexAction::vertex(2, 0b01), mu, zero, Mat::Identity(2, 2)),
                   0.5);
}

TEST(Regret, MatchesDefiningSum) {
  std::mt19937_64 gen(12);
  for (int t = 0; t < 100; ++t) {
    const int K = 2 + t % 3;
    const auto a = random_action(gen, K, 0.3);
    const Mat Q = random_sym(gen, K, 2.0), M = random_sym(gen, K, 2.0);
    const unsigned full = (1u << K) - 1;
    for (int i = 0; i < K; ++i) {
      const auto h = hat_weights(a, i);
      const auto V = V_vectors(a, i);
      double expect = 0.0;
      if (h.in > 0) {
        double s = V.in.dot(M * V.in);
        for (unsigned j = 0; j < a.size(); ++j)
          if ((j >> i) & 1u) {
            const Vec e = subset_indicator(K, full & ~j);
            s += a[j] / h.in * e.dot(Q * (e - V.in));
          }
        expect += 0.5 * h.in * s;
      }
      if (h.out > 0) {
        double s = V.out.dot(M * V.out);
        for (unsigned j = 0; j < a.size(); ++j)
          if (!((j >> i) & 1u)) {
            const Vec e = subset_indicator(K, j);
            s += a[j] / h.out * e.dot(Q * (e - V.out));
          }
        expect += 0.5 * h.out * s;
      }
      EXPECT_NEAR(K_regret(i, a, Q, M), expect, 1e-12);
    }
  }
}

TEST(Regret, MonotoneAndHomogeneous) {
  std::mt19937_64 gen(13);
  for (int t = 0; t < 50; ++t) {
    const int K = 2 + t % 2;
    const auto a = random_action(gen, K);
    const Mat Q = random_sym(gen, K, 1.0), M = random_sym(gen, K, 1.0);
    const Mat B = random_sym(gen, K, 1.0);
    const Mat P = B * B.transpose();
    const int i = t % K;
    EXPECT_LE(K_regret(i, a, Q, M), K_regret(i, a, Q, M + P) + 1e-14);
    const double c = 0.1 + 3.0 * (t % 7);
    EXPECT_NEAR(K_regret(i, a, c * Q, c * M), c * K_regret(i, a, Q, M), 1e-12 * (1 + c));
  }
}

TEST(Regret, ProjectSimplex) {
  const auto p = project_simplex({0.2, 3.0, -1.0, 0.9});
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-15);
  EXPECT_NEAR(p[0], 0.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0, 1e-15);
  const auto q = project_simplex({0.1, 0.2, 0.3, 0.4});
  EXPECT_NEAR(q[3], 0.4, 1e-15);
  const auto r = project_simplex({1.0, 1.0});
  EXPECT_NEAR(r[0], 0.5, 1e-15);
}

TEST(Regret, SupremumZeroAndDominatesVertices) {
  const Mat Z = Mat::Zero(3, 3);
  EXPECT_EQ(G_regret(Z, Z).value, 0.0);
  std::mt19937_64 gen(14);
  for (int t = 0; t < 10; ++t) {
    const Mat Q = random_sym(gen, 3, 1.0), M = random_sym(gen, 3, 1.0);
    const auto g = G_regret(Q, M);
    for (int i = 0; i < 3; ++i) {
      for (unsigned j = 0; j < 8; ++j)
        EXPECT_GE(g.value, K_regret(i, SimplexAction::vertex(3, j), Q, M));
      for (int k = 0; k < 20; ++k) EXPECT_GE(g.value, K_regret(i, random_action(gen, 3), Q, M));
    }
    EXPECT_NEAR(g.value, K_regret(g.i, SimplexAction(3, g.a), Q, M), 1e-12);
  }
}

TEST(Regret, SupremumAgainstDenseGrid) {
  // brute force on the 0.02-grid of the 4-point simplex
  auto brute = [](const Mat& Q, const Mat& M) {
    double best = -INFINITY;
    const int n = 50;
    for (int i = 0; i < 2; ++i)
      for (int a = 0; a <= n; ++a)
        for (int b = 0; a + b <= n; ++b)
          for (int c = 0; a + b + c <= n; ++c) {
            const std::vector<double> w = {a / 50.0, b / 50.0, c / 50.0,
                                           (n - a - b - c) / 50.0};
            best = std::max(best, K_regret(i, SimplexAction(2, w), Q, M));
          }
    return best;
  };
  const Mat M = Eigen::Vector2d(1.0, 0.0).asDiagonal();
  const Mat Z = Mat::Zero(2, 2);
  const double g = G_regret(Z, M).value;
  const double b = brute(Z, M);
  EXPECT_GE(g, b - 1e-12);
  EXPECT_LE(g - b, 1e-3);

  std::mt19937_64 gen(15);
  for (int t = 0; t < 5; ++t) {
    const Mat Q = random_sym(gen, 2, 1.0), Mr = random_sym(gen, 2, 1.0);
    const double gr = G_regret(Q, Mr).value, br = brute(Q, Mr);
    EXPECT_GE(gr, br - 1e-12);
    EXPECT_LE(gr - br, 1e-2);
  }
}

TEST(Regret, DeterministicGivenSeed) {
  std::mt19937_64 gen(16);
  const Mat Q = random_sym(gen, 3, 1.0), M = random_sym(gen, 3, 1.0);
  const auto a = G_regret(Q, M, {8, 200, 42});
  const auto b = G_regret(Q, M, {8, 200, 42});
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.a, b.a);
}

TEST(Regret, PermutationInvariance) {
  std::mt19937_64 gen(17);
  const int K = 3;
  const int perm[] = {2, 0, 1};
  Mat P = Mat::Zero(K, K);
  for (int k = 0; k < K; ++k) P(perm[k], k) = 1.0;
  for (int t = 0; t < 5; ++t) {
    const Mat Q = random_sym(gen, K, 1.0), M = random_sym(gen, K, 1.0);
    const Mat Qp = P * Q * P.transpose(), Mp = P * M * P.transpose();
    EXPECT_NEAR(G_regret(Q, M).value, G_regret(Qp, Mp).value, 1e-9);
    // pointwise: relabel the subsets of a as well
    const auto a = random_action(gen, K);
    std::vector<double> w(a.size());
    for (unsigned j = 0; j < a.size(); ++j) {
      unsigned pj = 0;
      for (int k = 0; k < K; ++k)
        if ((j >> k) & 1u) pj |= 1u << perm[k];
      w[pj] = a[j];
    }
    for (int i = 0; i < K; ++i)
      EXPECT_NEAR(K_regret(i, a, Q, M), K_regret(perm[i], SimplexAction(K, w), Qp, Mp), 1e-12);
  }
}

TEST(Regret, LipschitzConstant) {
  EXPECT_EQ(regret_lipschitz_constant(2), 16.0);
  EXPECT_EQ(regret_lipschitz_constant(3), 128.0);
}

class RegretAssumptions : public ::testing::TestWithParam<int> {};

TEST_P(RegretAssumptions, BothChecksPass) {
  const int K = GetParam();
  std::mt19937_64 gen(100 + K);
  auto field = [&]() {
    const Mat S0 = random_sym(gen, K, 1.0), S1 = random_sym(gen, K, 0.5),
              S2 = random_sym(gen, K, 0.5);
    return std::function<Mat(const Vec&)>(
        [=](const Vec& x) -> Mat { return S0 + x[0] * S1 + std::sin(x[K - 1]) * S2; });
  };
  std::vector<RegretLipschitzSample> lip;
  for (int t = 0; t < 200; ++t)
    lip.push_back({random_probability(gen, K, 3), field(), field(), random_sym(gen, K, 1.0),
                   random_sym(gen, K, 1.0)});
  std::vector<RegretSignSample> sign;
  const double eps[] = {0.5, 0.1, 0.02};
  for (int t = 0; t < (K == 2 ? 200 : 40); ++t) {
    RegretSignSample s{random_probability(gen, K, 3, 1.5), random_probability(gen, K, 3, 1.5),
                       eps[t % 3], random_sym(gen, K, 1.0), {}};
    for (int p = 0; p < 5; ++p) s.probes.emplace_back(p % K, random_action(gen, K, 0.3));
    sign.push_back(std::move(s));
  }
  const RegretSolverConfig cfg{4, 100, 7};
  const auto rep = check_assumptions_regret(lip, sign, metric(K), cfg);
  EXPECT_TRUE(rep.passed) << rep.detail;
  EXPECT_FALSE(check_assumptions_regret(lip, {}, metric(K), cfg, 1e-9, 1e-6).passed);
}

INSTANTIATE_TEST_SUITE_P(K, RegretAssumptions, ::testing::Values(2, 3));

TEST(Regret, SignCheckEqualMeasuresExactlyZero) {
  std::mt19937_64 gen(18);
  const auto mu = random_probability(gen, 2, 4);
  const KappaKernel kappa(metric(2), mu, mu, 0.1);
  const auto hess = [&](const Vec& x) { return kappa.hessian(x); };
  const Mat Q = integrate_field(mu, hess);
  EXPECT_EQ(Q.norm(), 0.0);
}

TEST(Regret, SeededSampleFamilies) {
  for (int K : {2, 3}) {
    const auto lip = regret_lipschitz_samples(K, 12, 5);
    const auto sign = regret_sign_samples(K, 12, 5);
    ASSERT_EQ(lip.size(), 12u);
    ASSERT_EQ(sign.size(), 12u);
    const double eps[] = {0.5, 0.1, 0.02};
    for (std::size_t t = 0; t < lip.size(); ++t) {
      EXPECT_TRUE(lip[t].mu.probability());
      EXPECT_NEAR(lip[t].mu.total_mass(), 1.0, 1e-14);
      EXPECT_EQ(lip[t].mu.size(), 3u);
      const Vec x = Vec::Constant(K, 0.3);
      EXPECT_LE((lip[t].q1(x) - lip[t].q1(x).transpose()).norm(), 1e-15);
      EXPECT_LE((lip[t].M1 - lip[t].M1.transpose()).norm(), 1e-15);
      EXPECT_TRUE(sign[t].mu.probability() && sign[t].nu.probability());
      EXPECT_EQ(sign[t].eps, eps[t % 3]);
      ASSERT_EQ(sign[t].probes.size(), 5u);
      for (std::size_t p = 0; p < 5; ++p) {
        EXPECT_EQ(sign[t].probes[p].first, static_cast<int>(p) % K);
        const auto& w = sign[t].probes[p].second.weights();
        ASSERT_EQ(w.size(), std::size_t{1} << K);
        EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
        EXPECT_GE(*std::min_element(w.begin(), w.end()), 0.0);
      }
    }
    const auto again = regret_lipschitz_samples(K, 12, 5);
    EXPECT_EQ(again[7].mu.locations(), lip[7].mu.locations());
    EXPECT_NE(regret_lipschitz_samples(K, 12, 6)[7].mu.locations(), lip[7].mu.locations());
  }
}
