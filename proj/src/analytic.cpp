#include "msdpool/analytic.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "msdpool/random.hpp"

namespace msdpool::analytic {

void RusParams::validate() const {
  require(n >= 1, "RUS operation count n must be >= 1");
  require(p >= 0.0 && p < 1.0, "RUS failure probability p must be in [0, 1)");
}

double sequential_expected_time(const RusParams& params) {
  params.validate();
  return static_cast<double>(params.n) / (1.0 - params.p);
}

double parallel_expected_time(const RusParams& params) {
  params.validate();
  const auto n = params.n;
  const double p = params.p;
  if (p == 0.0) return 1.0;

  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  std::vector<double> a(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::int64_t k = 1; k <= n; ++k) {
    // log of C(k, i) (1-p)^(k-i) p^i, advanced one i at a time.
    double log_term = static_cast<double>(k) * log_q;
    double sum = 1.0;
    for (std::int64_t i = 0; i < k; ++i) {
      sum += std::exp(log_term) * a[static_cast<std::size_t>(i)];
      log_term += std::log(static_cast<double>(k - i)) - std::log(static_cast<double>(i + 1)) +
                  log_p - log_q;
    }
    a[static_cast<std::size_t>(k)] = sum / -std::expm1(static_cast<double>(k) * log_p);
  }
  return a[static_cast<std::size_t>(n)];
}

MonteCarloEstimate monte_carlo_rus(const RusParams& params, RusMode mode, std::int64_t trials,
                                   std::uint64_t seed) {
  params.validate();
  require(trials >= 1, "Monte-Carlo trial count must be >= 1");
  Rng rng(seed);
  std::geometric_distribution<std::int64_t> failures_before_success(1.0 - params.p);

  // Welford accumulation keeps the variance stable for 1e6+ trials.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t t = 0; t < trials; ++t) {
    std::int64_t rounds = 0;
    if (params.p == 0.0) {
      rounds = mode == RusMode::sequential ? params.n : 1;
    } else if (mode == RusMode::sequential) {
      for (std::int64_t i = 0; i < params.n; ++i) rounds += failures_before_success(rng) + 1;
    } else {
      std::int64_t remaining = params.n;
      while (remaining > 0) {
        ++rounds;
        remaining = std::binomial_distribution<std::int64_t>(remaining, params.p)(rng);
      }
    }
    const double x = static_cast<double>(rounds);
    const double delta = x - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (x - mean);
  }
  MonteCarloEstimate estimate;
  estimate.mean = mean;
  if (trials > 1) {
    const double variance = m2 / static_cast<double>(trials - 1);
    estimate.standard_error = std::sqrt(variance / static_cast<double>(trials));
  }
  return estimate;
}

double relative_runtime_delay(double runtime_delay, double scheduled_cost) {
  require(scheduled_cost > 0.0, "scheduled cost S must be > 0");
  require(runtime_delay >= 0.0, "run-time delay R must be >= 0");
  return runtime_delay / scheduled_cost;
}

double effective_distillation_cost(const ScheduleCostMap& schedule_cost, double distillation_cost,
                                   double runtime_delay) {
  const auto base = schedule_cost.find(distillation_cost);
  require(base != schedule_cost.end(), "schedule-cost map has no entry for the distillation cost");
  require(runtime_delay >= 0.0, "run-time delay R must be >= 0");
  const double target = base->second + runtime_delay;
  const double tolerance = 1e-9 * std::max(1.0, std::abs(target));

  double exact = std::numeric_limits<double>::quiet_NaN();
  double at_or_below = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [candidate, cost] : schedule_cost) {
    if (std::abs(cost - target) <= tolerance) exact = candidate;
    if (cost <= target + tolerance) at_or_below = candidate;
  }
  if (!std::isnan(exact)) return exact;
  require(!std::isnan(at_or_below), "every candidate's scheduled cost exceeds S + R");
  return at_or_below;
}

double relative_distillation_cost_increase(double effective_cost, double distillation_cost) {
  require(distillation_cost > 0.0, "distillation cost D must be > 0");
  return (effective_cost - distillation_cost) / distillation_cost;
}

}  // namespace msdpool::analytic
