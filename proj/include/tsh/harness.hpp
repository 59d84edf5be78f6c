#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tsh/bandit.hpp"
#include "tsh/policy.hpp"
#include "tsh/theory.hpp"

namespace tsh {

// Full, seedable description of a Monte Carlo experiment.
struct ExperimentConfig {
    ProblemInstance instance;
    PolicyConfig policy;
    std::int64_t horizon = 0;
    std::int64_t runs = 1;
    std::uint64_t master_seed = 0;
    std::vector<std::int64_t> checkpoints; // strictly increasing, last == horizon
};

/// Validates horizon/runs/checkpoint invariants.
ExperimentConfig make_experiment(ProblemInstance instance, PolicyConfig policy,
                                 std::int64_t horizon, std::int64_t runs,
                                 std::uint64_t master_seed,
                                 std::vector<std::int64_t> checkpoints);

/// {1, 2, 4, ...} up to the horizon, horizon always included.
std::vector<std::int64_t> geometric_checkpoints(std::int64_t horizon);

/// k evenly spaced checkpoints ending at the horizon.
std::vector<std::int64_t> linear_checkpoints(std::int64_t horizon, std::int64_t k);

// Mean cumulative pseudo-regret with run-level standard errors.
struct RegretCurve {
    std::vector<std::int64_t> t;
    std::vector<double> mean_regret;
    std::vector<double> stderr_regret;
    std::int64_t runs = 0;
};

// Y_j gap bookkeeping for one episode: gaps[j] counts the suboptimal-arm
// plays immediately before the (j+1)-th optimal-arm play.
struct GapStatistics {
    std::vector<std::int64_t> gaps;
    std::int64_t arm1_plays = 0;
    std::int64_t trailing_gap = 0;
    std::int64_t phase_n = 0;          // N for the instance, 0 if undefined
    std::int64_t j1_at_phase_end = 0;  // arm-1 plays when arm 2 reached N
    bool phase_reached = false;
};

struct EpisodeResult {
    std::vector<StepRecord> steps;
    GapStatistics gap_stats;
    std::vector<double> checkpoint_regret;
};

/// Simulate one episode. Deterministic given (master_seed, run_index).
EpisodeResult run_episode(const ExperimentConfig& config, std::int64_t run_index,
                          bool record_steps = true);

/// Aggregate run_episode over all runs, in parallel across runs. The
/// result is a deterministic reduce keyed by run_index, so it is
/// byte-identical to run_experiment_serial.
RegretCurve run_experiment(const ExperimentConfig& config);

/// Plain serial reference loop, kept for testing and benchmarking.
RegretCurve run_experiment_serial(const ExperimentConfig& config);

/// Worker count: min(omp max threads, TSH_THREADS when set).
int worker_count();

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // RMS of fit residuals
};

/// Least-squares fit of mean regret against ln t over the last
/// tail_fraction of checkpoints (at least 4 points).
LineFit fit_log_slope(const RegretCurve& curve, double tail_fraction);

/// Least-squares slope of ln(mean regret) against ln t over the tail
/// window; requires positive means there.
double fit_power_exponent(const RegretCurve& curve, double tail_fraction);

struct SweepRow {
    double h = 1.0;
    RegretCurve curve;
    double log_slope = 0.0;
    std::optional<double> power_exponent; // absent when the fit is undefined
    std::optional<RegimeLabel> predicted_regime;
};

/// One run_experiment per h with independent sub-streams per row.
std::vector<SweepRow> sweep_h(const ExperimentConfig& base,
                              std::span<const double> h_list);

} // namespace tsh
