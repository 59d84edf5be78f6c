// Compares the serial reference experiment loop against the OpenMP
// run-parallel loop on the same config and checks the curves agree
// bit for bit. Also times the incremental exceedance update against
// from-scratch recomputation, the reason the hot path is O(1).
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>

#include "tsh/harness.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

bool identical(const tsh::RegretCurve& a, const tsh::RegretCurve& b) {
    if (a.t != b.t || a.runs != b.runs) return false;
    return std::memcmp(a.mean_regret.data(), b.mean_regret.data(),
                       a.mean_regret.size() * sizeof(double)) == 0 &&
           std::memcmp(a.stderr_regret.data(), b.stderr_regret.data(),
                       a.stderr_regret.size() * sizeof(double)) == 0;
}

} // namespace

int main(int argc, char** argv) {
    std::int64_t horizon = 20000;
    std::int64_t runs = 200;
    if (argc > 1) horizon = std::strtoll(argv[1], nullptr, 10);
    if (argc > 2) runs = std::strtoll(argv[2], nullptr, 10);

    const auto config = tsh::make_experiment(
        tsh::make_instance({0.9, 0.5}), tsh::make_policy(1.0), horizon, runs,
        42, tsh::geometric_checkpoints(horizon));

    std::printf("experiment: mu=(0.9,0.5) h=1 T=%" PRId64 " runs=%" PRId64
                " workers=%d\n",
                horizon, runs, tsh::worker_count());

    auto t0 = std::chrono::steady_clock::now();
    const tsh::RegretCurve serial = tsh::run_experiment_serial(config);
    const double serial_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const tsh::RegretCurve parallel = tsh::run_experiment(config);
    const double parallel_s = seconds_since(t0);

    std::printf("serial:   %8.3f s  (%.0f steps/s)\n", serial_s,
                static_cast<double>(horizon * runs) / serial_s);
    std::printf("parallel: %8.3f s  (%.0f steps/s, speedup %.2fx)\n", parallel_s,
                static_cast<double>(horizon * runs) / parallel_s,
                serial_s / parallel_s);
    std::printf("curves bit-identical: %s\n",
                identical(serial, parallel) ? "yes" : "NO");

    // Incremental update vs from-scratch recomputation at growing counts.
    tsh::RandomStream rng(7, 0, tsh::StreamPurpose::generic);
    tsh::ExceedanceState state =
        tsh::make_exceedance_state(tsh::BetaParams{1, 1}, tsh::BetaParams{1, 1});
    t0 = std::chrono::steady_clock::now();
    for (std::int64_t i = 0; i < horizon; ++i) {
        const int arm = rng.next_double() < 0.5 ? 1 : 2;
        const auto outcome = rng.next_double() < 0.7 ? tsh::ArmOutcome::success
                                                     : tsh::ArmOutcome::failure;
        state = tsh::exceedance_increment(state, arm, outcome);
    }
    const double inc_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    constexpr int kScratchReps = 50;
    double sink = 0.0;
    for (int i = 0; i < kScratchReps; ++i)
        sink += tsh::beta_exceedance(state.params1, state.params2);
    const double scratch_s = seconds_since(t0) / kScratchReps;

    std::printf("exceedance: %.0f incremental updates/s; one from-scratch "
                "recompute at t=%" PRId64 " costs %.1f us (%.2g)\n",
                static_cast<double>(horizon) / inc_s, horizon, scratch_s * 1e6,
                sink);
    return identical(serial, parallel) ? 0 : 1;
}
