#pragma once

#include <span>
#include <vector>

#include "tsh/bandit.hpp"

namespace tsh {

enum class SelectionMode {
    exact_probability,      // weights (best-arm probability)^h, normalized
    posterior_draw_baseline // argmax of one posterior draw per arm (classic TS)
};

struct PolicyConfig {
    double h = 1.0;
    SelectionMode mode = SelectionMode::exact_probability;
};

/// Validating constructor; h must be finite and >= 0 (the rule is not
/// defined for negative exponents).
PolicyConfig make_policy(double h, SelectionMode mode = SelectionMode::exact_probability);

/// Normalized p_i^h / sum_j p_j^h, computed in log space. h = 1 returns the
/// input unchanged; h = 0 is uniform over the support {i : p_i > 0}.
std::vector<double> selection_weights(std::span<const double> best_probs, double h);

/// Two-arm specialization 1 / (1 + ((1/p) - 1)^h); p in {0,1} returns p.
double two_arm_selection(double p, double h);

/// Expected suboptimal plays between consecutive optimal plays,
/// ((1/p) - 1)^h; p = 0 yields +infinity, p = 1 yields 0.
double expected_gap_plays(double p, double h);

/// Select an arm from the posterior state under the configured rule.
std::size_t select_arm(const PosteriorState& state, const PolicyConfig& config,
                       RandomStream& rng);

/// Categorical draw from a weight vector summing to ~1.
std::size_t categorical_draw(std::span<const double> weights, RandomStream& rng);

} // namespace tsh
