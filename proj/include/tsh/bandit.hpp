#pragma once

#include <cstdint>
#include <vector>

#include "tsh/posterior_math.hpp"
#include "tsh/rng.hpp"

namespace tsh {

// Bernoulli bandit instance. Arm means in [0,1]; for the two-arm theory
// features arm 0 must be the unique optimal arm.
struct ProblemInstance {
    std::vector<double> means;

    std::size_t num_arms() const { return means.size(); }

    /// mu1 - mu2 (two-arm gap). Requires exactly two arms.
    double gap() const;

    /// (mu1 + mu2) / 2, the concentration midpoint.
    double midpoint() const;

    /// True if arm 0 strictly dominates every other arm.
    bool has_unique_optimal_first_arm() const;
};

/// Validating constructor: every mean must lie in [0,1], at least one arm.
ProblemInstance make_instance(std::vector<double> means);

// Per-arm play and success counts; the induced posterior of arm i is
// Beta(s_i + 1, j_i - s_i + 1).
struct PosteriorState {
    std::vector<std::int64_t> plays;
    std::vector<std::int64_t> successes;

    explicit PosteriorState(std::size_t num_arms)
        : plays(num_arms, 0), successes(num_arms, 0) {}

    std::size_t num_arms() const { return plays.size(); }
    BetaParams posterior(std::size_t arm) const;
    std::int64_t total_plays() const;
};

struct StepRecord {
    std::int64_t t = 0;
    std::int32_t chosen_arm = 0;
    std::int32_t reward = 0;
    double instant_pseudo_regret = 0.0; // mu_1 - mu_chosen
};

/// One Bernoulli(mu_arm) draw.
int pull(const ProblemInstance& instance, std::size_t arm, RandomStream& rng);

/// Counting update: j_arm += 1, s_arm += reward.
PosteriorState update(const PosteriorState& state, std::size_t arm, int reward);

} // namespace tsh
