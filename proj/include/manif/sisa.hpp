#ifndef MANIF_SISA_HPP
#define MANIF_SISA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "manif/errors.hpp"
#include "manif/rng.hpp"

namespace manif {
namespace sisa {

// Sharded training: N points spread evenly over S shards, K unlearning
// requests. Retraining cost is counted in samples processed.
struct ShardingScenario {
  long long N = 0;
  long long S = 0;
  long long K = 0;

  void validate() const {
    if (S < 1 || N < S) throw ConfigError("sharding: need N >= S >= 1");
    if (K < 1 || K > N) throw ConfigError("sharding: need 1 <= K <= N");
  }
};

// Sliced training within one shard: D samples over R slices, e' epochs per
// slice stage, K requests for the batched variant.
struct SlicingScenario {
  double D = 0.0;
  long long R = 0;
  double e_prime = 0.0;
  long long K = 1;

  void validate() const {
    if (R < 1 || static_cast<double>(R) > D)
      throw ConfigError("slicing: need D >= R >= 1");
    if (e_prime <= 0.0) throw ConfigError("slicing: e' must be positive");
    if (K < 1) throw ConfigError("slicing: need K >= 1");
  }
};

// Minimum of n i.i.d. U([a,b]) draws.
struct UniformMinSpec {
  double a = 0.0;
  double b = 1.0;
  long long n = 1;

  void validate() const {
    if (!(a < b)) throw ConfigError("uniform min: need a < b");
    if (n < 1) throw ConfigError("uniform min: need n >= 1");
  }
};

// First and second moments of the minimum of n i.i.d. U([a,b]) draws:
//   E[min]   = (n a + b) / (n + 1)
//   E[min^2] = a^2 + (2 (b - a) / (n + 1)) * ((n + 1) a + b) / (n + 2)
struct UniformMinMoments {
  double mean = 0.0;
  double second_moment = 0.0;
};

inline UniformMinMoments uniform_min_moments(const UniformMinSpec& u) {
  u.validate();
  double n = static_cast<double>(u.n);
  UniformMinMoments m;
  m.mean = (n * u.a + u.b) / (n + 1.0);
  m.second_moment =
      u.a * u.a +
      (2.0 * (u.b - u.a) / (n + 1.0)) * ((n + 1.0) * u.a + u.b) / (n + 2.0);
  return m;
}

// Sequential sharding, requests served one at a time with shard hits
// i.i.d. uniform over the S shards:
//   E[C] = (N/S - 1) K - sum_{i=1..K} (i - 1) / S .
inline double expected_seq_shard_cost(const ShardingScenario& sc) {
  sc.validate();
  double N = static_cast<double>(sc.N), S = static_cast<double>(sc.S),
         K = static_cast<double>(sc.K);
  return (N / S - 1.0) * K - K * (K - 1.0) / (2.0 * S);
}

// Batched sharding, all K requests served at once:
//   E[C] = N (1 - (1 - 1/S)^K) - K .
inline double expected_batch_shard_cost(const ShardingScenario& sc) {
  sc.validate();
  double N = static_cast<double>(sc.N), S = static_cast<double>(sc.S),
         K = static_cast<double>(sc.K);
  return N * (1.0 - std::pow(1.0 - 1.0 / S, K)) - K;
}

// Retraining cost after a request landing in slice r of R (samples times
// epochs): the tail stages r..R rerun, stage j covering j D / R samples
// for 2 e' / (R + 1) epochs, which telescopes to
//   C(r) = (2 e' D / (R (R + 1))) (R (R + 1) / 2 - r (r - 1) / 2) .
// Defined for real r so the batched variant can plug in a continuous
// minimum; C(1) = e' D (full retrain), C(R) = 2 e' D / (R + 1).
inline double slice_cost(const SlicingScenario& sl, double r) {
  double R = static_cast<double>(sl.R);
  return (2.0 * sl.e_prime * sl.D / (R * (R + 1.0))) *
         (R * (R + 1.0) / 2.0 - r * (r - 1.0) / 2.0);
}

// Sequential slicing with the hit slice uniform over {1..R}:
//   E[C] = e' D (2/3 + 1/(3R)) = e' D (2R + 1) / (3R) ,
// computed in the second form so divisible cases come out exact.
inline double expected_seq_slice_cost(const SlicingScenario& sl) {
  sl.validate();
  double R = static_cast<double>(sl.R);
  return sl.e_prime * sl.D * (2.0 * R + 1.0) / (3.0 * R);
}

// Batched slicing: the K requests' lowest hit slice governs the rerun.
// The closed form models that lowest hit as the minimum of K continuous
// U([1, R]) draws (the uniform-minimum moments above), giving
//   E[C] = (2 e' D / (R (R+1))) * ( R (R+1)/2
//          - (1/2) (1 + (2 (R-1)/(K+1)) ((K+1) + R)/(K+2) - (K+R)/(K+1)) ).
// At R = 1 this is e' D for every K.
inline double expected_batch_slice_cost(const SlicingScenario& sl) {
  sl.validate();
  double R = static_cast<double>(sl.R), K = static_cast<double>(sl.K);
  double inner = 1.0 +
                 (2.0 * (R - 1.0) / (K + 1.0)) * ((K + 1.0) + R) / (K + 2.0) -
                 (K + R) / (K + 1.0);
  return (2.0 * sl.e_prime * sl.D / (R * (R + 1.0))) *
         (R * (R + 1.0) / 2.0 - 0.5 * inner);
}

enum class SisaMode { sequential, batched };

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long long trials = 0;
};

inline McEstimate finish_estimate(double sum, double sum_sq, long long trials) {
  McEstimate e;
  e.trials = trials;
  e.mean = sum / trials;
  double var = sum_sq / trials - e.mean * e.mean;
  if (var < 0.0) var = 0.0;  // rounding guard for constant costs
  e.std_error = std::sqrt(var / trials);
  return e;
}

// Monte Carlo of the sharding cost. The sequential mode draws the K shard
// hits i.i.d. uniform over shards (the same independence approximation the
// closed form makes); each hit costs the shard's remaining size minus the
// erased point, i.e. N/S - 1 - (prior hits on that shard). The batched
// mode retrains each affected shard once at cost N/S - (its hits).
// `exact_process`, for the sequential mode only, instead samples requests
// without replacement from the surviving points.
inline McEstimate simulate_shard_costs(const ShardingScenario& sc,
                                       SisaMode mode, long long trials,
                                       Rng& rng, bool exact_process = false) {
  sc.validate();
  if (trials < 1) throw ConfigError("simulate_shard_costs: trials < 1");
  double per_shard = static_cast<double>(sc.N) / sc.S;
  double sum = 0.0, sum_sq = 0.0;
  std::vector<long long> hits(sc.S);
  for (long long t = 0; t < trials; ++t) {
    std::fill(hits.begin(), hits.end(), 0ll);
    double cost = 0.0;
    if (mode == SisaMode::sequential && exact_process) {
      // draw distinct points; a request hits shard j with prob
      // proportional to the shard's surviving size
      long long remaining = sc.N;
      for (long long i = 0; i < sc.K; ++i) {
        long long pick = static_cast<long long>(rng.below(remaining));
        long long j = 0, acc = 0;
        for (; j < sc.S; ++j) {
          long long sz = static_cast<long long>(per_shard) - hits[j];
          if (pick < acc + sz) break;
          acc += sz;
        }
        cost += per_shard - 1.0 - hits[j];
        ++hits[j];
        --remaining;
      }
    } else if (mode == SisaMode::sequential) {
      for (long long i = 0; i < sc.K; ++i) {
        long long j = static_cast<long long>(rng.below(sc.S));
        cost += per_shard - 1.0 - hits[j];
        ++hits[j];
      }
    } else {
      for (long long i = 0; i < sc.K; ++i)
        ++hits[static_cast<long long>(rng.below(sc.S))];
      for (long long j = 0; j < sc.S; ++j)
        if (hits[j] > 0) cost += per_shard - hits[j];
    }
    sum += cost;
    sum_sq += cost * cost;
  }
  return finish_estimate(sum, sum_sq, trials);
}

// Monte Carlo of the slicing cost, simulating exactly the model each
// closed form integrates: the sequential mode draws the hit slice uniform
// over {1..R}; the batched mode draws the lowest hit as the minimum of K
// continuous U([1, R]) draws and evaluates the same polynomial stage cost.
inline McEstimate simulate_slice_costs(const SlicingScenario& sl,
                                       SisaMode mode, long long trials,
                                       Rng& rng) {
  sl.validate();
  if (trials < 1) throw ConfigError("simulate_slice_costs: trials < 1");
  double sum = 0.0, sum_sq = 0.0;
  for (long long t = 0; t < trials; ++t) {
    double r;
    if (mode == SisaMode::sequential) {
      r = 1.0 + static_cast<double>(rng.below(sl.R));
    } else {
      r = static_cast<double>(sl.R);
      for (long long i = 0; i < sl.K; ++i)
        r = std::min(r, rng.uniform(1.0, static_cast<double>(sl.R)));
    }
    double cost = slice_cost(sl, r);
    sum += cost;
    sum_sq += cost * cost;
  }
  return finish_estimate(sum, sum_sq, trials);
}

struct UniformMinMc {
  double mean = 0.0;
  double mean_se = 0.0;
  double second_moment = 0.0;
  double second_moment_se = 0.0;
};

inline UniformMinMc simulate_uniform_min(const UniformMinSpec& u,
                                         long long trials, Rng& rng) {
  u.validate();
  if (trials < 1) throw ConfigError("simulate_uniform_min: trials < 1");
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (long long t = 0; t < trials; ++t) {
    double m = u.b;
    for (long long i = 0; i < u.n; ++i) m = std::min(m, rng.uniform(u.a, u.b));
    double m2 = m * m;
    s1 += m;
    s2 += m2;
    s4 += m2 * m2;
  }
  UniformMinMc r;
  r.mean = s1 / trials;
  r.second_moment = s2 / trials;
  double var1 = s2 / trials - r.mean * r.mean;
  double var2 = s4 / trials - r.second_moment * r.second_moment;
  r.mean_se = std::sqrt(std::max(0.0, var1) / trials);
  r.second_moment_se = std::sqrt(std::max(0.0, var2) / trials);
  return r;
}

}  // namespace sisa
}  // namespace manif

#endif
