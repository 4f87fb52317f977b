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

#include "fwlab/prediction_game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/LU>

#include "fwlab/parallel.hpp"

namespace fwlab {

GameState GameState::start(int K, std::vector<double> gaps) {
  require(K >= 1 && K <= 16, "game: K must be in [1, 16]");
  require(static_cast<int>(gaps.size()) == K, "game: need K initial gaps");
  GameState s;
  s.K = K;
  s.gaps = std::move(gaps);
  return s;
}

double GameState::regret() const { return *std::max_element(gaps.begin(), gaps.end()); }

int apply_outcome(GameState& s, const SimplexAction& a, int I, unsigned J) {
  require(a.K() == s.K, "game: action dimension mismatch");
  require(I >= 0 && I < s.K && J < (1u << s.K), "game: outcome out of range");
  const bool in = (J >> I) & 1u;
  for (int i = 0; i < s.K; ++i)
    s.gaps[i] += static_cast<double>((J >> i) & 1u) - (in ? 1.0 : 0.0);
  const int y = in ? I + 1 : -(I + 1);
  s.history.push_back({a, y});
  ++s.t;
  return y;
}

namespace {

std::size_t sample_index(const std::vector<double>& p, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (u < acc) return k;
  }
  // u falls in the rounding gap above the last partial sum
  for (std::size_t k = p.size(); k-- > 0;)
    if (p[k] > 0.0) return k;
  return p.size() - 1;
}

void check_distribution(const std::vector<double>& b, int K) {
  require(static_cast<int>(b.size()) == K, "forecaster: need K probabilities");
  double s = 0.0;
  for (double x : b) {
    require(std::isfinite(x) && x >= 0.0, "forecaster: probabilities must be >= 0");
    s += x;
  }
  require(std::abs(s - 1.0) <= 1e-12, "forecaster: probabilities must sum to 1");
}

}  // namespace

int step(GameState& s, const std::vector<double>& b, const SimplexAction& a, CounterRng& rng) {
  check_distribution(b, s.K);
  const int I = static_cast<int>(sample_index(b, rng.uniform()));
  const auto J = static_cast<unsigned>(sample_index(a.weights(), rng.uniform()));
  return apply_outcome(s, a, I, J);
}

// ---------------------------------------------------------------- strategies

ForecasterStrategy forecaster_from_name(const std::string& name) {
  if (name == "uniform")
    return {name, [](int K, const History&, std::vector<double>&) {
              return std::vector<double>(K, 1.0 / K);
            }};
  if (name == "ftl")
    // memory: [processed entries, cumulative a^(i) for each i]
    return {name, [](int K, const History& h, std::vector<double>& mem) {
              if (mem.empty()) mem.assign(K + 1, 0.0);
              for (auto k = static_cast<std::size_t>(mem[0]); k < h.size(); ++k)
                for (int i = 0; i < K; ++i) mem[1 + i] += hat_weights(h[k].a, i).in;
              mem[0] = static_cast<double>(h.size());
              const auto lead = std::max_element(mem.begin() + 1, mem.end()) - mem.begin() - 1;
              std::vector<double> b(K, 0.0);
              b[lead] = 1.0;
              return b;
            }};
  if (name == "exp3") {
    constexpr double eta = 0.1, gamma = 0.1;
    // memory: [processed entries, gain estimates (K), last b (K)]
    return {name, [](int K, const History& h, std::vector<double>& mem) {
              if (mem.empty()) {
                mem.assign(1 + 2 * K, 0.0);
                std::fill(mem.begin() + 1 + K, mem.end(), 1.0 / K);
              }
              for (auto k = static_cast<std::size_t>(mem[0]); k < h.size(); ++k)
                if (h[k].y > 0) {
                  const int I = h[k].y - 1;
                  mem[1 + I] += 1.0 / mem[1 + K + I];
                }
              mem[0] = static_cast<double>(h.size());
              const double top = *std::max_element(mem.begin() + 1, mem.begin() + 1 + K);
              std::vector<double> b(K);
              double z = 0.0;
              for (int i = 0; i < K; ++i) z += (b[i] = std::exp(eta * (mem[1 + i] - top)));
              double partial = 0.0;
              for (int i = 0; i < K; ++i) {
                b[i] = (1.0 - gamma) * b[i] / z + gamma / K;
                if (i + 1 < K) partial += b[i];
              }
              b[K - 1] = 1.0 - partial;
              std::copy(b.begin(), b.end(), mem.begin() + 1 + K);
              return b;
            }};
  }
  throw InputError("unknown forecaster '" + name + "' (known: uniform ftl exp3)");
}

AdversaryStrategy adversary_from_name(const std::string& name, int K) {
  require(K >= 1 && K <= 16, "adversary: K must be in [1, 16]");
  const unsigned full = (1u << K) - 1u;
  if (name == "full")
    return {name, [full](int K, const History&) { return SimplexAction::vertex(K, full); }};
  if (name == "empty")
    return {name, [](int K, const History&) { return SimplexAction::vertex(K, 0); }};
  if (name == "uniform")
    return {name, [](int K, const History&) { return SimplexAction::uniform(K); }};
  if (name == "alternating")
    return {name, [](int K, const History& h) {
              return SimplexAction::vertex(K, 1u << (h.size() % K));
            }};
  if (name.rfind("vertex:", 0) == 0) {
    unsigned mask = 0;
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(name.substr(7), &used, 0);
      require(used == name.size() - 7 && v <= full, "");
      mask = static_cast<unsigned>(v);
    } catch (const std::exception&) {
      throw InputError("adversary '" + name + "': mask must be an integer subset of [K]");
    }
    return {name, [mask](int K, const History&) { return SimplexAction::vertex(K, mask); }};
  }
  throw InputError("unknown adversary '" + name +
                   "' (known: full empty uniform alternating vertex:<mask>)");
}

// ---------------------------------------------------------------- Monte Carlo

namespace {

double play(int T, std::vector<double> gaps0, const ForecasterStrategy& f,
            const AdversaryStrategy& adv, CounterRng& rng) {
  const int K = static_cast<int>(gaps0.size());
  GameState s = GameState::start(K, std::move(gaps0));
  std::vector<double> mem;
  for (int r = 0; r < T; ++r) {
    const auto b = f.rule(s.K, s.history, mem);
    const SimplexAction a = adv.rule(s.K, s.history);
    require(a.K() == s.K, "adversary returned an action of the wrong size");
    step(s, b, a, rng);
  }
  return s.regret();
}

std::vector<double> draw_gaps(const SignedAtomicMeasure& m0, double u) {
  const std::size_t k = sample_index(m0.weights(), u);
  const auto loc = m0.location(k);
  return {loc.begin(), loc.end()};
}

}  // namespace

RegretEstimate monte_carlo_regret(int T, const SignedAtomicMeasure& m0,
                                  const ForecasterStrategy& forecaster,
                                  const AdversaryStrategy& adversary, int runs,
                                  std::uint64_t seed) {
  require(T >= 0, "regret: T must be >= 0");
  require(runs >= 1, "regret: need at least one run");
  require(m0.probability(), "regret: m0 must be a probability measure");
  RegretEstimate out;
  out.run_values.assign(runs, 0.0);
  parallel_for(static_cast<std::size_t>(runs), [&](std::size_t r) {
    CounterRng rng(seed, {r});
    out.run_values[r] = play(T, draw_gaps(m0, rng.uniform()), forecaster, adversary, rng);
  });
  const RunStats st = run_stats(out.run_values.data(), out.run_values.size());
  out.estimate = st.mean;
  out.std_error = st.std_error;
  return out;
}

// ---------------------------------------------------------------- matrix game

MatrixGameSolution solve_matrix_game(const Mat& A) {
  const int K = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  require(K >= 1 && K <= 3 && n >= 1, "matrix game: need 1 <= K <= 3 rows and a column");
  MatrixGameSolution best{INFINITY, {}};
  auto consider = [&](const Eigen::VectorXd& b) {
    for (int i = 0; i < K; ++i)
      if (b[i] < -1e-12) return;
    Eigen::VectorXd c = b.cwiseMax(0.0);
    c /= c.sum();
    const double v = (c.transpose() * A).maxCoeff();
    if (v < best.value - 1e-15) best = {v, {c.data(), c.data() + K}};
  };
  if (K == 1) {
    consider(Eigen::VectorXd::Ones(1));
    return best;
  }
  // Unknowns (b_0..b_{K-1}, z). A vertex has K active constraints among
  // z = col_a . b and b_i = 0, together with sum b = 1.
  const int m = n + K;
  std::vector<int> pick(K);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == K) {
      Mat S = Mat::Zero(K + 1, K + 1);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(K + 1);
      for (int r = 0; r < K; ++r) {
        const int c = pick[r];
        if (c < n) {
          S.block(r, 0, 1, K) = A.col(c).transpose();
          S(r, K) = -1.0;
        } else {
          S(r, c - n) = 1.0;
        }
      }
      S.block(K, 0, 1, K).setOnes();
      rhs[K] = 1.0;
      const Eigen::FullPivLU<Mat> lu(S);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd sol = lu.solve(rhs);
      consider(sol.head(K));
      return;
    }
    for (int c = start; c < m; ++c) {
      pick[depth] = c;
      rec(c + 1, depth + 1);
    }
  };
  rec(0, 0);
  require(std::isfinite(best.value), "matrix game: no feasible vertex found");
  return best;
}

std::vector<SimplexAction> simplex_grid(int K, int n) {
  require(K >= 1 && K <= 4 && n >= 1, "simplex_grid: need 1 <= K <= 4 and n >= 1");
  const std::size_t S = std::size_t{1} << K;
  std::vector<SimplexAction> out;
  std::vector<int> c(S, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t j, int left) {
    if (j + 1 == S) {
      c[j] = left;
      std::vector<double> w(S);
      double partial = 0.0;
      for (std::size_t k = 0; k + 1 < S; ++k) partial += (w[k] = static_cast<double>(c[k]) / n);
      w[S - 1] = std::max(0.0, 1.0 - partial);
      out.emplace_back(K, std::move(w));
      return;
    }
    for (int v = 0; v <= left; ++v) {
      c[j] = v;
      rec(j + 1, left - v);
    }
  };
  rec(0, n);
  return out;
}

std::vector<SimplexAction> vertex_grid(int K) {
  std::vector<SimplexAction> out;
  for (unsigned j = 0; j < (1u << K); ++j) out.push_back(SimplexAction::vertex(K, j));
  return out;
}

// ---------------------------------------------------------------- exact value

int outcome_code(int grid_index, int I, bool in, int K) {
  return (grid_index * K + I) * 2 + (in ? 1 : 0);
}

namespace {

class ExactSolver {
 public:
  ExactSolver(int T, const std::vector<double>& g0, const std::vector<SimplexAction>& grid,
              const ExactConfig& cfg)
      : T_(T), K_(static_cast<int>(g0.size())), g0_(g0), grid_(grid), cfg_(cfg),
        side_(2 * T + 1) {
    cells_ = 1;
    for (int i = 0; i < K_; ++i) cells_ *= side_;
    // increment distributions per (grid index, I, in)
    incr_.resize(grid.size() * K_ * 2);
    in_prob_.resize(grid.size() * K_);
    for (std::size_t g = 0; g < grid.size(); ++g)
      for (int I = 0; I < K_; ++I) {
        double pin = 0.0;
        for (unsigned J = 0; J < grid[g].size(); ++J)
          if ((J >> I) & 1u) pin += grid[g][J];
        in_prob_[g * K_ + I] = pin;
        for (int in = 0; in < 2; ++in) {
          const double mass = in ? pin : 1.0 - pin;
          auto& dist = incr_[outcome_code(static_cast<int>(g), I, in, K_)];
          if (mass <= 0.0) continue;
          for (unsigned J = 0; J < grid[g].size(); ++J) {
            if (grid[g][J] == 0.0 || (((J >> I) & 1u) != 0u) != (in != 0)) continue;
            int offset = 0, stride = 1;
            for (int i = 0; i < K_; ++i) {
              offset += (static_cast<int>((J >> i) & 1u) - in) * stride;
              stride *= side_;
            }
            dist.emplace_back(offset, grid[g][J] / mass);
          }
        }
      }
  }

  ExactValue run() {
    std::vector<int> key;
    out_.value = value(key);
    out_.nodes = nodes_;
    if (cfg_.record_table) out_.table = memo_;
    return std::move(out_);
  }

 private:
  double value(std::vector<int>& key) {
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (++nodes_ > cfg_.max_nodes)
      throw InputError("exact value: node budget of " + std::to_string(cfg_.max_nodes) +
                       " exceeded");
    double v;
    if (static_cast<int>(key.size()) == T_) {
      v = terminal(key);
    } else {
      Mat A(K_, grid_.size());
      for (std::size_t g = 0; g < grid_.size(); ++g)
        for (int I = 0; I < K_; ++I) {
          const double pin = in_prob_[g * K_ + I];
          double e = 0.0;
          for (int in = 0; in < 2; ++in) {
            const double p = in ? pin : 1.0 - pin;
            if (p <= 0.0) continue;
            std::vector<int> child = key;
            child.insert(std::upper_bound(child.begin(), child.end(),
                                          outcome_code(static_cast<int>(g), I, in, K_)),
                         outcome_code(static_cast<int>(g), I, in, K_));
            e += p * value(child);
          }
          A(I, g) = e;
        }
      v = solve_matrix_game(A).value;
    }
    memo_.emplace(key, v);
    return v;
  }

  // E max_i (g0 + sum of increments)_i under the product of the per-round
  // conditional increment laws.
  double terminal(const std::vector<int>& key) const {
    int centre = 0, stride = 1;
    for (int i = 0; i < K_; ++i) {
      centre += T_ * stride;
      stride *= side_;
    }
    std::vector<double> p(cells_, 0.0), q(cells_);
    p[centre] = 1.0;
    for (int code : key) {
      std::fill(q.begin(), q.end(), 0.0);
      for (int c = 0; c < cells_; ++c) {
        if (p[c] == 0.0) continue;
        for (const auto& [off, w] : incr_[code]) q[c + off] += p[c] * w;
      }
      p.swap(q);
    }
    double e = 0.0;
    for (int c = 0; c < cells_; ++c) {
      if (p[c] == 0.0) continue;
      int rem = c;
      double best = -INFINITY;
      for (int i = 0; i < K_; ++i) {
        best = std::max(best, g0_[i] + static_cast<double>(rem % side_ - T_));
        rem /= side_;
      }
      e += p[c] * best;
    }
    return e;
  }

  int T_, K_;
  std::vector<double> g0_;
  const std::vector<SimplexAction>& grid_;
  ExactConfig cfg_;
  int side_, cells_ = 1;
  std::vector<std::vector<std::pair<int, double>>> incr_;
  std::vector<double> in_prob_;
  std::map<std::vector<int>, double> memo_;
  std::size_t nodes_ = 0;
  ExactValue out_;
};

}  // namespace

ExactValue exact_value_small(int T, const std::vector<double>& gaps0,
                             const std::vector<SimplexAction>& grid, const ExactConfig& cfg) {
  const int K = static_cast<int>(gaps0.size());
  require(K >= 1 && K <= 3, "exact value: K must be in [1, 3]");
  require(T >= 0 && T <= 6, "exact value: T must be in [0, 6]");
  require(!grid.empty(), "exact value: adversary grid is empty");
  for (const auto& a : grid) require(a.K() == K, "exact value: grid action of the wrong size");
  return ExactSolver(T, gaps0, grid, cfg).run();
}

// ---------------------------------------------------------------- rescaling

RescaledPoint rescale(int T, double s, double v, double v_std_error) {
  require(T >= 1, "rescale: T must be >= 1");
  const double r = std::sqrt(static_cast<double>(T));
  return {T, s, v / r, v_std_error / r};
}

std::vector<RescaledPoint> rescaled_regret(double s, const SignedAtomicMeasure& mu,
                                           const std::vector<int>& Ts,
                                           const ForecasterStrategy& forecaster,
                                           const AdversaryStrategy& adversary, int runs,
                                           std::uint64_t seed) {
  require(s >= 0.0 && s <= 1.0, "rescale: s must be in [0, 1]");
  std::vector<RescaledPoint> out;
  for (int T : Ts) {
    require(T >= 1, "rescale: T must be >= 1");
    const int start = static_cast<int>(std::ceil(s * T - 1e-12));
    const int K = mu.dim();
    const SignedAtomicMeasure scaled =
        mu.mapped(std::sqrt(static_cast<double>(T)) * Mat::Identity(K, K));
    const auto est = monte_carlo_regret(T - start, scaled, forecaster, adversary, runs,
                                        seed + static_cast<std::uint64_t>(T));
    out.push_back(rescale(T, s, est.estimate, est.std_error));
  }
  return out;
}

}  // namespace fwlab
