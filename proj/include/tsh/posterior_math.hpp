#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsh/rng.hpp"

namespace tsh {

// Posterior after (alpha-1) successes and (beta-1) failures under a
// Beta(1,1) prior. Parameters are always integers >= 1.
struct BetaParams {
    std::int64_t alpha = 1;
    std::int64_t beta = 1;
};

bool operator==(const BetaParams& a, const BetaParams& b);

// Running value of P(X1 > X2) for two Beta posteriors, maintained by
// one-parameter increments with periodic from-scratch resync.
struct ExceedanceState {
    BetaParams params1;
    BetaParams params2;
    double prob = 0.5;
    int steps_since_sync = 0;
};

// Resync cadence for the incremental exceedance update; bounds the
// accumulated drift over long trajectories.
inline constexpr int kExceedanceResyncInterval = 1024;

enum class ArmOutcome { success, failure };

/// log(n!) with a cached table for small n.
double log_factorial(std::int64_t n);

/// log of the Beta function B(a, b).
double log_beta_fn(double a, double b);

/// C(n,k) p^k (1-p)^(n-k), evaluated in log space; p in {0,1} handled exactly.
double binomial_pmf(std::int64_t n, double p, std::int64_t k);

/// P(Bin(n,p) <= k). k < 0 gives 0, k >= n gives 1. Sums the smaller tail.
double binomial_cdf(std::int64_t n, double p, std::int64_t k);

/// Beta density at x.
double beta_pdf(const BetaParams& params, double x);

/// Beta CDF (regularized incomplete beta via continued fraction).
double beta_cdf(const BetaParams& params, double x);

/// P(X1 > X2) for independent X1 ~ Beta(p1), X2 ~ Beta(p2), via the exact
/// finite sum over the smallest of the four parameters.
double beta_exceedance(const BetaParams& p1, const BetaParams& p2);

/// Fresh state with prob computed from scratch.
ExceedanceState make_exceedance_state(const BetaParams& p1, const BetaParams& p2);

/// O(1) update of P(X1 > X2) as one posterior parameter increments;
/// resyncs from scratch every kExceedanceResyncInterval steps.
ExceedanceState exceedance_increment(const ExceedanceState& state, int which_arm,
                                     ArmOutcome outcome);

/// P(X_i = max over independent Beta draws), i = 0..n-1. n must be >= 2.
std::vector<double> best_arm_probabilities(std::span<const BetaParams> posteriors);

/// One Beta(alpha, beta) draw, deterministic given the stream state.
double beta_sample(const BetaParams& params, RandomStream& rng);

} // namespace tsh
