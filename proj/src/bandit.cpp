#include "tsh/bandit.hpp"

#include <numeric>
#include <stdexcept>

namespace tsh {

double ProblemInstance::gap() const {
    if (means.size() != 2)
        throw std::domain_error("gap: defined for two-arm instances only");
    return means[0] - means[1];
}

double ProblemInstance::midpoint() const {
    if (means.size() != 2)
        throw std::domain_error("midpoint: defined for two-arm instances only");
    return 0.5 * (means[0] + means[1]);
}

bool ProblemInstance::has_unique_optimal_first_arm() const {
    for (std::size_t i = 1; i < means.size(); ++i)
        if (!(means[0] > means[i])) return false;
    return true;
}

ProblemInstance make_instance(std::vector<double> means) {
    if (means.empty()) throw std::domain_error("instance needs at least one arm");
    for (double mu : means)
        if (!(mu >= 0.0 && mu <= 1.0))
            throw std::domain_error("arm mean outside [0,1]");
    return ProblemInstance{std::move(means)};
}

BetaParams PosteriorState::posterior(std::size_t arm) const {
    return BetaParams{successes[arm] + 1, plays[arm] - successes[arm] + 1};
}

std::int64_t PosteriorState::total_plays() const {
    return std::accumulate(plays.begin(), plays.end(), std::int64_t{0});
}

int pull(const ProblemInstance& instance, std::size_t arm, RandomStream& rng) {
    if (arm >= instance.num_arms())
        throw std::domain_error("pull: arm index out of range");
    return rng.next_double() < instance.means[arm] ? 1 : 0;
}

PosteriorState update(const PosteriorState& state, std::size_t arm, int reward) {
    PosteriorState next = state;
    ++next.plays[arm];
    if (reward) ++next.successes[arm];
    return next;
}

} // namespace tsh
