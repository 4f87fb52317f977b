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
#include <random>

#include "fwlab/prediction_game.hpp"
#include "game_oracle.hpp"

using namespace fwlab;
using namespace fwlab::testing;

namespace {

SignedAtomicMeasure point_gaps(std::vector<double> g) {
  const int K = static_cast<int>(g.size());
  return {K, std::move(g), {1.0}, true};
}

}  // namespace

TEST(GameStep, FrozenSets) {
  for (unsigned J : {0u, 3u}) {
    GameState s = GameState::start(2, {1.0, -2.0});
    for (int I = 0; I < 2; ++I) apply_outcome(s, SimplexAction::vertex(2, J), I, J);
    EXPECT_EQ(s.gaps, (std::vector<double>{1.0, -2.0}));
    EXPECT_EQ(s.t, 2);
  }
}

TEST(GameStep, ForcedSetExample) {
  GameState s = GameState::start(2, {0.0, 0.0});
  CounterRng rng(1, {});
  const int y = step(s, {0.0, 1.0}, SimplexAction::vertex(2, 0b01), rng);
  EXPECT_EQ(y, -2);
  EXPECT_EQ(s.gaps, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(s.history.size(), 1u);
  EXPECT_THROW(step(s, {0.5, 0.6}, SimplexAction::uniform(2), rng), InputError);
}

TEST(GameStep, ConservationAndSignal) {
  CounterRng rng(2, {});
  GameState s = GameState::start(3, {0, 0, 0});
  for (int r = 0; r < 500; ++r) {
    const auto before = s.gaps;
    const int y = step(s, {0.2, 0.5, 0.3}, SimplexAction::uniform(3), rng);
    const int I = std::abs(y) - 1;
    ASSERT_TRUE(I >= 0 && I < 3);
    const double dI = s.gaps[I] - before[I];
    EXPECT_EQ(dI, 0.0);  // 1{I in J} - 1{I in J}
    for (int i = 0; i < 3; ++i) {
      const double d = s.gaps[i] - before[i];
      EXPECT_TRUE(d == -1.0 || d == 0.0 || d == 1.0);
      if (y < 0) {
        EXPECT_GE(d, 0.0);
      }
      if (y > 0) {
        EXPECT_LE(d, 0.0);
      }
    }
  }
  EXPECT_EQ(s.t, 500);
}

TEST(Strategies, ValidOutputs) {
  CounterRng rng(3, {});
  for (const char* name : {"uniform", "ftl", "exp3"}) {
    const auto f = forecaster_from_name(name);
    GameState s = GameState::start(3, {0, 0, 0});
    std::vector<double> mem;
    for (int r = 0; r < 50; ++r) {
      const auto b = f.rule(3, s.history, mem);
      double sum = 0.0;
      for (double x : b) {
        EXPECT_GE(x, 0.0);
        sum += x;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12) << name;
      step(s, b, adversary_from_name("alternating", 3).rule(3, s.history), rng);
    }
  }
  EXPECT_THROW(forecaster_from_name("oracle"), InputError);
  EXPECT_THROW(adversary_from_name("vertex:9", 3), InputError);
  EXPECT_THROW(adversary_from_name("vertex:x", 3), InputError);
  EXPECT_EQ(adversary_from_name("vertex:5", 3).rule(3, {})[5], 1.0);
}

TEST(Strategies, FollowTheLeaderPicksLargestExpectedGain) {
  const auto f = forecaster_from_name("ftl");
  History h;
  h.push_back({SimplexAction::vertex(2, 0b10), -1});
  h.push_back({SimplexAction::vertex(2, 0b11), 2});
  std::vector<double> mem;
  EXPECT_EQ(f.rule(2, h, mem), (std::vector<double>{0.0, 1.0}));
}

TEST(MonteCarlo, HorizonZeroIsInitialMax) {
  const SignedAtomicMeasure m0(2, {1, -1, 0, 3}, {0.25, 0.75}, true);
  const auto est = monte_carlo_regret(0, m0, forecaster_from_name("uniform"),
                                      adversary_from_name("uniform", 2), 4000, 5);
  EXPECT_LE(std::abs(est.estimate - (0.25 * 1 + 0.75 * 3)), 3 * est.std_error + 1e-12);
  const auto frozen = monte_carlo_regret(0, point_gaps({2, -1}), forecaster_from_name("exp3"),
                                         adversary_from_name("full", 2), 10, 5);
  EXPECT_EQ(frozen.estimate, 2.0);
  EXPECT_EQ(frozen.std_error, 0.0);
}

TEST(MonteCarlo, FrozenAdversaryKeepsGaps) {
  for (const char* adv : {"full", "empty"})
    for (const char* f : {"uniform", "ftl", "exp3"}) {
      const auto est = monte_carlo_regret(17, point_gaps({0.5, 1.5, -1}), forecaster_from_name(f),
                                          adversary_from_name(adv, 3), 50, 6);
      EXPECT_EQ(est.estimate, 1.5);
      EXPECT_EQ(est.std_error, 0.0);
    }
}

TEST(MonteCarlo, SingletonAdversaryAgainstEnumeration) {
  // J = {0} each round, I uniform: enumerate the 2^3 I-sequences.
  double exact = 0.0;
  for (unsigned path = 0; path < 8; ++path) {
    GameState s = GameState::start(2, {0, 0});
    for (int r = 0; r < 3; ++r)
      apply_outcome(s, SimplexAction::vertex(2, 0b01), (path >> r) & 1u, 0b01);
    exact += s.regret() / 8.0;
  }
  EXPECT_DOUBLE_EQ(exact, 1.5);
  const auto est = monte_carlo_regret(3, point_gaps({0, 0}), forecaster_from_name("uniform"),
                                      adversary_from_name("vertex:1", 2), 20000, 7);
  EXPECT_LE(std::abs(est.estimate - exact), 3 * est.std_error);
}

TEST(MonteCarlo, RelabelingPreservesDistribution) {
  // swap actions 0 and 1: m0 coordinates, the adversary's subsets
  const auto f = forecaster_from_name("exp3");
  const auto a = adversary_from_name("vertex:1", 3);
  const auto b = adversary_from_name("vertex:2", 3);
  const auto x = monte_carlo_regret(8, point_gaps({1, 0, 0}), f, a, 10000, 8);
  const auto y = monte_carlo_regret(8, point_gaps({0, 1, 0}), f, b, 10000, 8);
  // two-sample Kolmogorov-Smirnov at level 0.01
  std::vector<double> u = x.run_values, v = y.run_values;
  std::sort(u.begin(), u.end());
  std::sort(v.begin(), v.end());
  double D = 0.0;
  std::vector<double> pts = u;
  pts.insert(pts.end(), v.begin(), v.end());
  for (double p : pts) {
    const double Fu = (std::upper_bound(u.begin(), u.end(), p) - u.begin()) / double(u.size());
    const double Fv = (std::upper_bound(v.begin(), v.end(), p) - v.begin()) / double(v.size());
    D = std::max(D, std::abs(Fu - Fv));
  }
  EXPECT_LT(D, 1.628 * std::sqrt(2.0 / 10000));
}

TEST(MonteCarlo, Reproducible) {
  const auto f = forecaster_from_name("exp3");
  const auto a = adversary_from_name("uniform", 2);
  EXPECT_EQ(monte_carlo_regret(10, point_gaps({0, 0}), f, a, 200, 9).run_values,
            monte_carlo_regret(10, point_gaps({0, 0}), f, a, 200, 9).run_values);
}

TEST(MatrixGame, KnownValues) {
  Mat pennies(2, 2);
  pennies << 1, 0, 0, 1;
  const auto s = solve_matrix_game(pennies);
  EXPECT_NEAR(s.value, 0.5, 1e-15);
  EXPECT_NEAR(s.b[0], 0.5, 1e-15);
  Mat dominated(2, 3);
  dominated << 1, 2, 3, 4, 5, 6;
  EXPECT_DOUBLE_EQ(solve_matrix_game(dominated).value, 3.0);
}

TEST(MatrixGame, AgainstGridSearch) {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 20; ++t) {
    Mat A(3, 5);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 5; ++c) A(r, c) = u(gen);
    const auto s = solve_matrix_game(A);
    double grid = INFINITY;
    const int n = 300;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) {
        Eigen::Vector3d b(i / double(n), j / double(n), (n - i - j) / double(n));
        grid = std::min(grid, (b.transpose() * A).maxCoeff());
      }
    EXPECT_LE(s.value, grid + 1e-12);
    EXPECT_GE(s.value, grid - 2.0 / n * 2.0);
    Eigen::Vector3d b(s.b[0], s.b[1], s.b[2]);
    EXPECT_NEAR((b.transpose() * A).maxCoeff(), s.value, 1e-12);
  }
}

TEST(SimplexGrid, Counts) {
  EXPECT_EQ(simplex_grid(2, 2).size(), 10u);  // C(5, 3)
  EXPECT_EQ(simplex_grid(2, 50).size(), 23426u);
  EXPECT_EQ(vertex_grid(3).size(), 8u);
}

TEST(ExactValue, TrivialCases) {
  EXPECT_EQ(exact_value_small(0, {1, 4, 2}, vertex_grid(3)).value, 4.0);
  EXPECT_EQ(exact_value_small(5, {1, -3}, {SimplexAction::vertex(2, 3)}).value, 1.0);
  EXPECT_EQ(exact_value_small(4, {0, 2, 1}, {SimplexAction::vertex(3, 0)}).value, 2.0);
  EXPECT_THROW(exact_value_small(7, {0, 0}, vertex_grid(2)), InputError);
  EXPECT_THROW(exact_value_small(2, {0, 0, 0, 0}, vertex_grid(4)), InputError);
  EXPECT_THROW(exact_value_small(6, {0, 0, 0}, simplex_grid(3, 2), {1000}), InputError);
}

TEST(ExactValue, MatchesFullTreeOracleVertices) {
  for (const std::vector<double>& g0 : std::vector<std::vector<double>>{{0, 0}, {1, 0}, {0, 2}}) {
    std::vector<Round> h;
    const double oracle = oracle_value(2, g0, vertex_grid(2), h);
    EXPECT_NEAR(exact_value_small(2, g0, vertex_grid(2)).value, oracle, 1e-14);
  }
}

TEST(ExactValue, MatchesFullTreeOracleMixedGrid) {
  const auto grid = simplex_grid(2, 2);
  for (int T : {1, 2, 3}) {
    std::vector<Round> h;
    const double oracle = oracle_value(T, {0, 0}, grid, h);
    const auto ex = exact_value_small(T, {0, 0}, grid, {2'000'000, true});
    EXPECT_NEAR(ex.value, oracle, 1e-12) << T;
    EXPECT_FALSE(ex.table.empty());
  }
}

TEST(ExactValue, RefinementDeltasAreReported) {
  // grids at n = 1 (vertices) and n = 2 nest; the value cannot decrease
  const double v1 = exact_value_small(3, {0, 0}, simplex_grid(2, 1)).value;
  const double v2 = exact_value_small(3, {0, 0}, simplex_grid(2, 2)).value;
  EXPECT_GE(v2, v1 - 1e-12);
}

TEST(Rescaling, Arithmetic) {
  EXPECT_EQ(rescale(100, 0.5, 0.0).value, 0.0);
  EXPECT_EQ(rescale(1, 1.0, 2.5).value, 2.5);
  EXPECT_NEAR(rescale(400, 0.0, 10.0, 1.0).std_error, 0.05, 1e-15);
}

TEST(Rescaling, ConvergenceStudyRuns) {
  const auto pts = rescaled_regret(0.5, point_gaps({0.0, 0.1}), {25, 100}, forecaster_from_name("uniform"),
                                   adversary_from_name("uniform", 2), 400, 11);
  ASSERT_EQ(pts.size(), 2u);
  for (const auto& p : pts) {
    EXPECT_TRUE(std::isfinite(p.value));
    EXPECT_GT(p.std_error, 0.0);
  }
}
