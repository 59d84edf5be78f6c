#include "tsh/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace tsh {

namespace {

// Keeps P(X1 > X2) usable by the selection rule; the true value is never
// exactly 0 or 1 for finite posteriors.
double clamp_prob(double p) { return std::clamp(p, 1e-15, 1.0 - 1e-15); }

std::int64_t checked_phase_n(const ExperimentConfig& config) {
    const auto& inst = config.instance;
    if (inst.num_arms() != 2 || !inst.has_unique_optimal_first_arm()) return 0;
    if (config.horizon < 2) return 0;
    return phase_length(static_cast<double>(config.horizon), inst.gap());
}

} // namespace

ExperimentConfig make_experiment(ProblemInstance instance, PolicyConfig policy,
                                 std::int64_t horizon, std::int64_t runs,
                                 std::uint64_t master_seed,
                                 std::vector<std::int64_t> checkpoints) {
    if (horizon < 1) throw std::domain_error("experiment: horizon must be >= 1");
    if (runs < 1) throw std::domain_error("experiment: runs must be >= 1");
    if (checkpoints.empty())
        throw std::domain_error("experiment: checkpoints must not be empty");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 1 || checkpoints[i] > horizon)
            throw std::domain_error("experiment: checkpoint outside [1, horizon]");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
            throw std::domain_error("experiment: checkpoints must be strictly increasing");
    }
    if (checkpoints.back() != horizon)
        throw std::domain_error("experiment: last checkpoint must equal the horizon");
    return ExperimentConfig{std::move(instance), policy, horizon, runs,
                            master_seed, std::move(checkpoints)};
}

std::vector<std::int64_t> geometric_checkpoints(std::int64_t horizon) {
    if (horizon < 1) throw std::domain_error("checkpoints: horizon must be >= 1");
    std::vector<std::int64_t> points;
    for (std::int64_t t = 1; t < horizon; t *= 2) points.push_back(t);
    points.push_back(horizon);
    return points;
}

std::vector<std::int64_t> linear_checkpoints(std::int64_t horizon, std::int64_t k) {
    if (horizon < 1 || k < 1)
        throw std::domain_error("checkpoints: horizon and k must be >= 1");
    std::vector<std::int64_t> points;
    for (std::int64_t i = 1; i <= k; ++i) {
        const std::int64_t t = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::llround(
                   static_cast<double>(i) * static_cast<double>(horizon) /
                   static_cast<double>(k))));
        if (points.empty() || t > points.back()) points.push_back(t);
    }
    if (points.back() != horizon) points.push_back(horizon);
    return points;
}

EpisodeResult run_episode(const ExperimentConfig& config, std::int64_t run_index,
                          bool record_steps) {
    const ProblemInstance& inst = config.instance;
    const std::size_t n = inst.num_arms();
    if (n < 2) throw std::domain_error("run_episode: need at least 2 arms");

    RandomStream policy_rng(config.master_seed,
                            static_cast<std::uint64_t>(run_index),
                            StreamPurpose::policy);
    RandomStream reward_rng(config.master_seed,
                            static_cast<std::uint64_t>(run_index),
                            StreamPurpose::reward);

    PosteriorState post(n);
    const bool two_arm_exact =
        n == 2 && config.policy.mode == SelectionMode::exact_probability;
    ExceedanceState exc;
    if (two_arm_exact)
        exc = make_exceedance_state(BetaParams{1, 1}, BetaParams{1, 1});

    EpisodeResult result;
    result.checkpoint_regret.resize(config.checkpoints.size(), 0.0);
    if (record_steps) result.steps.reserve(static_cast<std::size_t>(config.horizon));

    GapStatistics& gaps = result.gap_stats;
    gaps.phase_n = checked_phase_n(config);

    double cum_regret = 0.0;
    std::int64_t current_gap = 0;
    std::size_t next_checkpoint = 0;

    for (std::int64_t t = 1; t <= config.horizon; ++t) {
        std::size_t arm;
        if (two_arm_exact) {
            const double w1 = two_arm_selection(clamp_prob(exc.prob), config.policy.h);
            arm = policy_rng.next_double() < w1 ? 0 : 1;
        } else {
            arm = select_arm(post, config.policy, policy_rng);
        }
        const int reward = pull(inst, arm, reward_rng);
        ++post.plays[arm];
        post.successes[arm] += reward;
        if (two_arm_exact)
            exc = exceedance_increment(
                exc, static_cast<int>(arm) + 1,
                reward ? ArmOutcome::success : ArmOutcome::failure);

        const double instant = inst.means[0] - inst.means[arm];
        cum_regret += instant;
        if (record_steps)
            result.steps.push_back(StepRecord{t, static_cast<std::int32_t>(arm),
                                              static_cast<std::int32_t>(reward),
                                              instant});

        if (arm == 0) {
            gaps.gaps.push_back(current_gap);
            current_gap = 0;
            ++gaps.arm1_plays;
        } else {
            ++current_gap;
        }
        if (n == 2 && gaps.phase_n > 0 && !gaps.phase_reached &&
            post.plays[1] == gaps.phase_n) {
            gaps.j1_at_phase_end = gaps.arm1_plays;
            gaps.phase_reached = true;
        }

        if (next_checkpoint < config.checkpoints.size() &&
            t == config.checkpoints[next_checkpoint]) {
            result.checkpoint_regret[next_checkpoint] = cum_regret;
            ++next_checkpoint;
        }
    }
    gaps.trailing_gap = current_gap;
    if (!gaps.phase_reached) gaps.j1_at_phase_end = gaps.arm1_plays;
    return result;
}

namespace {

RegretCurve reduce_runs(const ExperimentConfig& config,
                        const std::vector<std::vector<double>>& per_run) {
    RegretCurve curve;
    curve.t = config.checkpoints;
    curve.runs = config.runs;
    const std::size_t k = config.checkpoints.size();
    curve.mean_regret.assign(k, 0.0);
    curve.stderr_regret.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        double sum = 0.0;
        for (std::int64_t r = 0; r < config.runs; ++r) sum += per_run[r][c];
        const double mean = sum / static_cast<double>(config.runs);
        curve.mean_regret[c] = mean;
        if (config.runs > 1) {
            double ss = 0.0;
            for (std::int64_t r = 0; r < config.runs; ++r) {
                const double d = per_run[r][c] - mean;
                ss += d * d;
            }
            curve.stderr_regret[c] =
                std::sqrt(ss / (static_cast<double>(config.runs - 1) *
                                static_cast<double>(config.runs)));
        }
    }
    return curve;
}

} // namespace

int worker_count() {
    int threads = omp_get_max_threads();
    if (const char* env = std::getenv("TSH_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && cap < threads) threads = static_cast<int>(cap);
    }
    return threads;
}

RegretCurve run_experiment(const ExperimentConfig& config) {
    std::vector<std::vector<double>> per_run(
        static_cast<std::size_t>(config.runs));
    const int threads = worker_count();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t r = 0; r < config.runs; ++r)
        per_run[static_cast<std::size_t>(r)] =
            run_episode(config, r, false).checkpoint_regret;
    return reduce_runs(config, per_run);
}

RegretCurve run_experiment_serial(const ExperimentConfig& config) {
    std::vector<std::vector<double>> per_run(
        static_cast<std::size_t>(config.runs));
    for (std::int64_t r = 0; r < config.runs; ++r)
        per_run[static_cast<std::size_t>(r)] =
            run_episode(config, r, false).checkpoint_regret;
    return reduce_runs(config, per_run);
}

namespace {

std::size_t tail_window_start(const RegretCurve& curve, double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
        throw std::domain_error("fit: tail_fraction must lie in (0,1]");
    const std::size_t k = curve.t.size();
    const std::size_t window = static_cast<std::size_t>(
        std::ceil(tail_fraction * static_cast<double>(k)));
    if (window < 4)
        throw std::domain_error("fit: need at least 4 checkpoints in the tail window");
    return k - window;
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::domain_error("fit: degenerate abscissae");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

} // namespace

LineFit fit_log_slope(const RegretCurve& curve, double tail_fraction) {
    const std::size_t start = tail_window_start(curve, tail_fraction);
    std::vector<double> x, y;
    for (std::size_t i = start; i < curve.t.size(); ++i) {
        x.push_back(std::log(static_cast<double>(curve.t[i])));
        y.push_back(curve.mean_regret[i]);
    }
    return least_squares(x, y);
}

double fit_power_exponent(const RegretCurve& curve, double tail_fraction) {
    const std::size_t start = tail_window_start(curve, tail_fraction);
    std::vector<double> x, y;
    for (std::size_t i = start; i < curve.t.size(); ++i) {
        if (!(curve.mean_regret[i] > 0.0))
            throw std::domain_error("fit_power_exponent: nonpositive mean in window");
        x.push_back(std::log(static_cast<double>(curve.t[i])));
        y.push_back(std::log(curve.mean_regret[i]));
    }
    return least_squares(x, y).slope;
}

std::vector<SweepRow> sweep_h(const ExperimentConfig& base,
                              std::span<const double> h_list) {
    if (h_list.empty()) throw std::domain_error("sweep_h: empty grid");
    const bool classifiable = base.instance.num_arms() == 2 &&
                              base.instance.has_unique_optimal_first_arm() &&
                              base.instance.means[0] < 1.0 &&
                              base.instance.means[1] > 0.0;
    std::vector<SweepRow> rows;
    rows.reserve(h_list.size());
    for (const double h : h_list) {
        ExperimentConfig config = base;
        config.policy = make_policy(h, base.policy.mode);
        SweepRow row;
        row.h = h;
        row.curve = run_experiment(config);
        row.log_slope = fit_log_slope(row.curve, 0.5).slope;
        try {
            row.power_exponent = fit_power_exponent(row.curve, 0.5);
        } catch (const std::domain_error&) {
            row.power_exponent = std::nullopt; // zero-regret tails have no fit
        }
        if (classifiable)
            row.predicted_regime =
                classify_regime(base.instance.means[0], base.instance.means[1], h);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace tsh
