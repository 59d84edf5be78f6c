#include "tsh/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tsh {

namespace {

// Weights below this are flushed to exact zero so denormal noise never
// reaches the categorical sampler.
constexpr double kWeightFlush = 1e-300;

void check_h(double h) {
    if (!std::isfinite(h) || h < 0.0)
        throw std::domain_error("policy: h must be finite and >= 0");
}

} // namespace

PolicyConfig make_policy(double h, SelectionMode mode) {
    check_h(h);
    return PolicyConfig{h, mode};
}

std::vector<double> selection_weights(std::span<const double> best_probs, double h) {
    check_h(h);
    if (best_probs.empty())
        throw std::domain_error("selection_weights: empty input");
    double sum_in = 0.0;
    for (double p : best_probs) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::domain_error("selection_weights: probability outside [0,1]");
        sum_in += p;
    }
    if (std::fabs(sum_in - 1.0) > 1e-6)
        throw std::domain_error("selection_weights: input does not sum to 1");
    if (!(sum_in > 0.0) ||
        std::none_of(best_probs.begin(), best_probs.end(),
                     [](double p) { return p > 0.0; }))
        throw std::domain_error("selection_weights: all entries zero");

    std::vector<double> weights(best_probs.begin(), best_probs.end());
    if (h == 1.0) return weights; // exact identity, bitwise

    if (h == 0.0) {
        // Uniform over the support; an exactly-zero entry is never forced in.
        std::size_t support = 0;
        for (double p : best_probs)
            if (p > 0.0) ++support;
        for (std::size_t i = 0; i < weights.size(); ++i)
            weights[i] = best_probs[i] > 0.0 ? 1.0 / static_cast<double>(support) : 0.0;
        return weights;
    }

    double max_log = -std::numeric_limits<double>::infinity();
    for (double p : best_probs)
        if (p > 0.0) max_log = std::max(max_log, h * std::log(p));
    double norm = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        weights[i] =
            best_probs[i] > 0.0 ? std::exp(h * std::log(best_probs[i]) - max_log) : 0.0;
        norm += weights[i];
    }
    for (double& w : weights) {
        w /= norm;
        if (w < kWeightFlush) w = 0.0;
    }
    return weights;
}

double two_arm_selection(double p, double h) {
    check_h(h);
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("two_arm_selection: p outside [0,1]");
    if (p == 0.0 || p == 1.0) return p; // limit branches
    const double t = std::exp(h * (std::log1p(-p) - std::log(p)));
    if (std::isinf(t)) return 0.0;
    return 1.0 / (1.0 + t);
}

double expected_gap_plays(double p, double h) {
    check_h(h);
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("expected_gap_plays: p outside [0,1]");
    if (p == 0.0) return std::numeric_limits<double>::infinity();
    if (p == 1.0) return 0.0;
    return std::exp(h * (std::log1p(-p) - std::log(p)));
}

std::size_t categorical_draw(std::span<const double> weights, RandomStream& rng) {
    const double u = rng.next_double();
    double cum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cum += weights[i];
        if (u < cum) return i;
    }
    // Rounding in the cumulative sum: fall back to the last positive weight.
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0.0) return i;
    return weights.size() - 1;
}

std::size_t select_arm(const PosteriorState& state, const PolicyConfig& config,
                       RandomStream& rng) {
    const std::size_t n = state.num_arms();
    if (config.mode == SelectionMode::posterior_draw_baseline) {
        std::size_t best = 0;
        double best_draw = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double draw = beta_sample(state.posterior(i), rng);
            if (draw > best_draw) { // ties keep the lowest index
                best_draw = draw;
                best = i;
            }
        }
        return best;
    }
    std::vector<BetaParams> posteriors(n);
    for (std::size_t i = 0; i < n; ++i) posteriors[i] = state.posterior(i);
    const std::vector<double> probs = best_arm_probabilities(posteriors);
    const std::vector<double> weights = selection_weights(probs, config.h);
    return categorical_draw(weights, rng);
}

} // namespace tsh
