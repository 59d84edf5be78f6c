#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tsh/policy.hpp"

using namespace tsh;

TEST_CASE("selection_weights spot values") {
    const std::vector<double> v1{0.3, 0.7};
    const std::vector<double> w1 = selection_weights(v1, 1.0);
    CHECK(w1[0] == 0.3); // bitwise identity at h = 1
    CHECK(w1[1] == 0.7);

    const std::vector<double> w0 = selection_weights(std::vector<double>{0.9, 0.1}, 0.0);
    CHECK(w0[0] == 0.5);
    CHECK(w0[1] == 0.5);

    const std::vector<double> w2 = selection_weights(std::vector<double>{0.8, 0.2}, 2.0);
    CHECK(w2[0] == doctest::Approx(16.0 / 17.0).epsilon(1e-14));
    CHECK(w2[1] == doctest::Approx(1.0 / 17.0).epsilon(1e-14));
}

TEST_CASE("selection_weights edge handling") {
    // zero entries stay zero for h > 0
    const std::vector<double> wz = selection_weights(std::vector<double>{0.0, 1.0}, 2.0);
    CHECK(wz[0] == 0.0);
    CHECK(wz[1] == 1.0);
    // h = 0 is uniform over the support only
    const std::vector<double> w0 =
        selection_weights(std::vector<double>{0.0, 0.6, 0.4}, 0.0);
    CHECK(w0[0] == 0.0);
    CHECK(w0[1] == 0.5);
    CHECK(w0[2] == 0.5);

    CHECK_THROWS_AS(selection_weights(std::vector<double>{0.0, 0.0}, 1.0),
                    std::domain_error);
    CHECK_THROWS_AS(selection_weights(std::vector<double>{0.4, 0.4}, 1.0),
                    std::domain_error); // sum far from 1
    CHECK_THROWS_AS(selection_weights(std::vector<double>{0.5, 0.5}, -1.0),
                    std::domain_error); // h < 0 rejected
    CHECK_THROWS_AS(selection_weights(std::vector<double>{1.2, -0.2}, 1.0),
                    std::domain_error);
}

TEST_CASE("selection_weights sums to one and preserves ranking") {
    RandomStream rng(13, 0, StreamPurpose::generic);
    for (const double h : {0.0, 0.3, 1.0, 2.0, 7.0, 50.0, 200.0}) {
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 2 + static_cast<int>(rng.next_double() * 5);
            std::vector<double> v(n);
            double sum = 0.0;
            for (double& x : v) sum += (x = 0.01 + rng.next_double());
            for (double& x : v) x /= sum;
            const std::vector<double> w = selection_weights(v, h);
            double wsum = 0.0;
            for (double x : w) wsum += x;
            CHECK(std::fabs(wsum - 1.0) <= 1e-12);
            if (h > 0.0) {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        if (v[i] > v[j] + 1e-12) CHECK(w[i] > w[j]);
            }
        }
    }
}

TEST_CASE("large h flushes negligible weights to exact zero") {
    const std::vector<double> w =
        selection_weights(std::vector<double>{0.9, 0.1}, 400.0);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 0.0);
}

TEST_CASE("two_arm_selection agrees with the general rule") {
    CHECK(two_arm_selection(0.5, 0.0) == 0.5);
    CHECK(two_arm_selection(0.5, 3.7) == 0.5);
    CHECK(two_arm_selection(0.8, 2.0) == doctest::Approx(16.0 / 17.0).epsilon(1e-14));
    CHECK(two_arm_selection(0.0, 2.0) == 0.0);
    CHECK(two_arm_selection(1.0, 2.0) == 1.0);
    for (const double p : {0.001, 0.2, 0.37, 0.5, 0.78, 0.999}) {
        CHECK(two_arm_selection(p, 1.0) == doctest::Approx(p).epsilon(1e-12));
        for (const double h : {0.0, 0.25, 1.0, 3.0, 20.0, 80.0}) {
            const std::vector<double> w =
                selection_weights(std::vector<double>{p, 1.0 - p}, h);
            CHECK(std::fabs(two_arm_selection(p, h) - w[0]) <= 1e-12);
            CHECK(std::fabs(two_arm_selection(p, h) +
                            two_arm_selection(1.0 - p, h) - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("two_arm_selection monotonicity") {
    // increasing in p for fixed h > 0
    for (const double h : {0.5, 1.0, 4.0}) {
        double prev = -1.0;
        for (double p = 0.05; p < 1.0; p += 0.05) {
            const double w = two_arm_selection(p, h);
            CHECK(w > prev);
            prev = w;
        }
    }
    // increasing in h for p > 1/2, decreasing for p < 1/2
    double prev_hi = 0.0, prev_lo = 1.0;
    for (const double h : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double hi = two_arm_selection(0.7, h);
        const double lo = two_arm_selection(0.3, h);
        CHECK(hi > prev_hi);
        CHECK(lo < prev_lo);
        prev_hi = hi;
        prev_lo = lo;
    }
}

TEST_CASE("expected_gap_plays closed form") {
    CHECK(expected_gap_plays(0.5, 0.0) == 1.0);
    CHECK(expected_gap_plays(0.5, 9.0) == 1.0);
    CHECK(expected_gap_plays(0.25, 1.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(expected_gap_plays(0.25, 2.0) == doctest::Approx(9.0).epsilon(1e-14));
    CHECK(std::isinf(expected_gap_plays(0.0, 1.0)));
    CHECK(expected_gap_plays(1.0, 1.0) == 0.0);
    for (const double p : {0.1, 0.4, 0.9})
        for (const double h : {0.3, 1.0, 2.5})
            CHECK(expected_gap_plays(p, h) ==
                  doctest::Approx(1.0 / two_arm_selection(p, h) - 1.0)
                      .epsilon(1e-12));
}

TEST_CASE("select_arm is symmetric on a fresh two-arm state") {
    for (const double h : {0.3, 1.0, 4.0}) {
        RandomStream rng(55, 0, StreamPurpose::policy);
        const PosteriorState fresh(2);
        const PolicyConfig config = make_policy(h);
        int first = 0;
        const int trials = 10'000;
        for (int i = 0; i < trials; ++i)
            if (select_arm(fresh, config, rng) == 0) ++first;
        const double freq = static_cast<double>(first) / trials;
        CHECK(std::fabs(freq - 0.5) <= 4.0 * std::sqrt(0.25 / trials));
    }
}

TEST_CASE("exact mode at h=1 matches the draw-argmax baseline in frequency") {
    // Both select arm i with probability P(i posterior-best); check on a
    // fresh state and on an asymmetric one.
    PosteriorState skewed(2);
    skewed.plays = {5, 6};
    skewed.successes = {3, 2};
    for (const PosteriorState& state : {PosteriorState(2), skewed}) {
        RandomStream exact_rng(66, 0, StreamPurpose::policy);
        RandomStream base_rng(67, 0, StreamPurpose::policy);
        const PolicyConfig exact = make_policy(1.0);
        const PolicyConfig baseline =
            make_policy(1.0, SelectionMode::posterior_draw_baseline);
        const int trials = 100'000;
        int exact_first = 0, base_first = 0;
        for (int i = 0; i < trials; ++i) {
            if (select_arm(state, exact, exact_rng) == 0) ++exact_first;
            if (select_arm(state, baseline, base_rng) == 0) ++base_first;
        }
        const double fe = static_cast<double>(exact_first) / trials;
        const double fb = static_cast<double>(base_first) / trials;
        // two independent frequency estimates of the same probability
        const double se = std::sqrt(fe * (1.0 - fe) / trials +
                                    fb * (1.0 - fb) / trials);
        CHECK(std::fabs(fe - fb) <= 4.0 * se);
    }
}

TEST_CASE("select_arm exploits a dominant posterior under large h") {
    PosteriorState state(2);
    state.plays = {10, 10};
    state.successes = {10, 0};
    const PolicyConfig config = make_policy(4.0);
    RandomStream rng(88, 0, StreamPurpose::policy);
    int first = 0;
    const int trials = 10'000;
    for (int i = 0; i < trials; ++i)
        if (select_arm(state, config, rng) == 0) ++first;
    CHECK(static_cast<double>(first) / trials > 0.999);
}

TEST_CASE("baseline mode breaks ties toward the lowest index") {
    // With all arms deterministic Beta(1,1) equal draws cannot happen, so
    // force the tie through a degenerate comparison instead: identical
    // streams give identical draws across arms only if posteriors match
    // and the stream is re-used, which select_arm never does. Verify the
    // documented rule on equal posteriors statistically: each arm should
    // win about half the time, never crashing.
    RandomStream rng(3, 0, StreamPurpose::policy);
    const PosteriorState fresh(2);
    const PolicyConfig config = make_policy(1.0, SelectionMode::posterior_draw_baseline);
    int first = 0;
    for (int i = 0; i < 20'000; ++i)
        if (select_arm(fresh, config, rng) == 0) ++first;
    CHECK(std::fabs(first / 20'000.0 - 0.5) < 0.02);
}

TEST_CASE("make_policy validates h") {
    CHECK_THROWS_AS(make_policy(-0.5), std::domain_error);
    CHECK_THROWS_AS(make_policy(std::nan("")), std::domain_error);
    CHECK(make_policy(0.0).h == 0.0);
}
