#pragma once

// Closed-form and Monte-Carlo models of repeat-until-success (RUS) execution
// time, plus the delay metrics used to compare schedules against runs.

#include <cstdint>
#include <map>

#include "msdpool/types.hpp"

namespace msdpool::analytic {

struct RusParams {
  std::int64_t n = 1;  // number of RUS operations
  double p = 0.0;      // per-attempt failure probability

  void validate() const;
};

enum class RusMode { sequential, parallel };

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Expected attempts for n RUS operations run one after another: n / (1 - p).
double sequential_expected_time(const RusParams& params);

/// Expected rounds for n RUS operations run side by side, where each round
/// retries only the operations that failed. Solves
///   a_n = 1 + sum_{i=0..n} C(n,i) (1-p)^(n-i) p^i a_i,  a_0 = 0
/// by moving the i = n term to the left-hand side. Binomial weights are
/// accumulated in log space, so n in the thousands is fine.
double parallel_expected_time(const RusParams& params);

/// Direct simulation of either execution mode; deterministic in `seed`.
MonteCarloEstimate monte_carlo_rus(const RusParams& params, RusMode mode, std::int64_t trials,
                                   std::uint64_t seed);

struct DelayMetrics {
  double scheduled_cost = 0.0;      // S
  double runtime_delay = 0.0;       // R, mean over trials
  double distillation_cost = 0.0;   // D
  double effective_cost = 0.0;      // E
};

/// R / S.
double relative_runtime_delay(double runtime_delay, double scheduled_cost);

/// Scheduled cost sampled at candidate distillation costs, keyed by candidate.
using ScheduleCostMap = std::map<double, double>;

/// Effective distillation cost E: the largest candidate whose scheduled cost
/// equals schedule_cost(D) + R. If no candidate hits the target exactly, the
/// largest candidate whose cost stays at or below it.
double effective_distillation_cost(const ScheduleCostMap& schedule_cost, double distillation_cost,
                                   double runtime_delay);

/// (E - D) / D.
double relative_distillation_cost_increase(double effective_cost, double distillation_cost);

}  // namespace msdpool::analytic
