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

// The K-action prediction game with partial monitoring: round dynamics,
// baseline strategies, Monte Carlo regret, exact values of small instances by
// backward induction over public histories, and the diffusive rescaling.
//
// Actions are 0-based. The signal of a round is y = +(I + 1) when the chosen
// action I was in the adversary's set J and -(I + 1) otherwise.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fwlab/common.hpp"
#include "fwlab/hamiltonians.hpp"
#include "fwlab/measures.hpp"
#include "fwlab/rng.hpp"

namespace fwlab {

struct HistoryEntry {
  SimplexAction a;
  int y = 0;
};
using History = std::vector<HistoryEntry>;

struct GameState {
  int K = 2;
  std::vector<double> gaps;  // G^i - G
  int t = 0;
  History history;

  static GameState start(int K, std::vector<double> gaps);
  double regret() const;  // max_i gaps_i
};

/// Applies a realized round (I, J): gaps_i += 1{i in J} - 1{I in J}. Returns y.
int apply_outcome(GameState& s, const SimplexAction& a, int I, unsigned J);
/// Samples I ~ b and J ~ a from rng, then applies the outcome.
int step(GameState& s, const std::vector<double>& b, const SimplexAction& a, CounterRng& rng);

/// `memory` is per-run scratch the rule may use to cache quantities derived
/// from the history; it starts empty.
struct ForecasterStrategy {
  std::string name;
  std::function<std::vector<double>(int K, const History& h, std::vector<double>& memory)> rule;
};
struct AdversaryStrategy {
  std::string name;
  std::function<SimplexAction(int K, const History& h)> rule;
};

/// "uniform", "ftl" (leader of cumulative a^(i)), "exp3" (exponential
/// weights on importance-weighted gains 1{y = +(i+1)} / b_i).
ForecasterStrategy forecaster_from_name(const std::string& name);
/// "full", "empty", "uniform", "alternating" (singletons in turn),
/// "vertex:<mask>".
AdversaryStrategy adversary_from_name(const std::string& name, int K);

struct RegretEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::vector<double> run_values;
};

/// Mean over runs of max_i gaps_i after T rounds from a gap vector drawn
/// from m0 (a probability measure on R^K).
RegretEstimate monte_carlo_regret(int T, const SignedAtomicMeasure& m0,
                                  const ForecasterStrategy& forecaster,
                                  const AdversaryStrategy& adversary, int runs,
                                  std::uint64_t seed);

/// min over b in P([K]) of max over columns of b^T A (A is K x n, K <= 3),
/// by enumerating vertices of the epigraph LP.
struct MatrixGameSolution {
  double value = 0.0;
  std::vector<double> b;
};
MatrixGameSolution solve_matrix_game(const Mat& A);

/// Points of the 2^K-simplex whose weights are multiples of 1/n.
std::vector<SimplexAction> simplex_grid(int K, int n);
std::vector<SimplexAction> vertex_grid(int K);

struct ExactConfig {
  std::size_t max_nodes = 2'000'000;
  bool record_table = false;
};

struct ExactValue {
  double value = 0.0;
  std::size_t nodes = 0;
  // Values by public history class: the multiset of round outcomes
  // (grid index, I, I in J) fixes the belief over gaps and hence the value.
  std::map<std::vector<int>, double> table;
};

/// Backward induction over public histories with stage games between b and
/// the adversary grid. K <= 3 and T <= 6.
ExactValue exact_value_small(int T, const std::vector<double>& gaps0,
                             const std::vector<SimplexAction>& grid, const ExactConfig& cfg = {});

/// Encodes a round outcome for ExactValue::table keys.
int outcome_code(int grid_index, int I, bool in, int K);

struct RescaledPoint {
  int T = 0;
  double s = 0.0;
  double value = 0.0;  // u^T(s, mu)
  double std_error = 0.0;
};
/// u^T(s, mu) = v_T(ceil(sT), (sqrt(T) I)_# mu) / sqrt(T) for given v_T.
RescaledPoint rescale(int T, double s, double v, double v_std_error = 0.0);
/// Monte Carlo v_T(ceil(sT), (sqrt(T) I)_# mu) for each T, rescaled.
std::vector<RescaledPoint> rescaled_regret(double s, const SignedAtomicMeasure& mu,
                                           const std::vector<int>& Ts,
                                           const ForecasterStrategy& forecaster,
                                           const AdversaryStrategy& adversary, int runs,
                                           std::uint64_t seed);

}  // namespace fwlab
