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
#include <vector>

#include "fwlab/parallel.hpp"
#include "fwlab/rng.hpp"

using fwlab::CounterRng;
using fwlab::Philox4x32;

// Known-answer vectors from the Random123 distribution (philox4x32_10).
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                     {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(CounterRng, StreamsAreReproducibleAndDistinct) {
  CounterRng a(42, {1, 2}), b(42, {1, 2}), c(42, {1, 3}), d(43, {1, 2});
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
  }
}

TEST(CounterRng, UniformMomentsAndRange) {
  CounterRng rng(7, {});
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0 / 12, 2e-3);
}

TEST(CounterRng, NormalMoments) {
  CounterRng rng(8, {5});
  const int n = 200000;
  double s = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 5 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 5 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 5 * std::sqrt(96.0 / n));
}

TEST(Parallel, ResultsIndependentOfWorkerCount) {
  auto draw = [](unsigned threads) {
    fwlab::set_max_threads(threads);
    std::vector<double> out(500);
    fwlab::parallel_for(out.size(), [&](std::size_t i) {
      CounterRng rng(3, {i});
      out[i] = rng.normal();
    });
    return out;
  };
  const auto one = draw(1);
  EXPECT_EQ(one, draw(4));
  EXPECT_EQ(one, draw(0));
  fwlab::set_max_threads(0);
}

TEST(Parallel, ExceptionsPropagate) {
  EXPECT_THROW(fwlab::parallel_for(10,
                                   [](std::size_t i) {
                                     if (i == 7) throw std::runtime_error("boom");
                                   }),
               std::runtime_error);
}

TEST(Parallel, RunStats) {
  const std::vector<double> v = {1, 2, 3, 4};
  const auto st = fwlab::run_stats(v.data(), v.size());
  EXPECT_DOUBLE_EQ(st.mean, 2.5);
  EXPECT_NEAR(st.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  const auto one = fwlab::run_stats(v.data(), 1);
  EXPECT_EQ(one.std_error, 0.0);
}

TEST(Parallel, Fnv1a) {
  EXPECT_EQ(fwlab::fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fwlab::fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}
