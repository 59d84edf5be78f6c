#include "tsh/theory.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "tsh/policy.hpp"
#include "tsh/rng.hpp"

namespace tsh {

namespace {

// Exact inequalities evaluated in floating point get this much slack.
constexpr double kNumericSlack = 1e-12;

void check_two_arm_means(double mu1, double mu2) {
    if (!(mu1 > mu2))
        throw std::domain_error("theory: requires mu1 > mu2");
    if (!(mu1 < 1.0 && mu2 > 0.0))
        throw std::domain_error("theory: requires 1 > mu1 > mu2 > 0");
}

void check_r_domain(double mu1, double y) {
    if (!(mu1 > 0.0 && mu1 < 1.0 && y > 0.0 && y < 1.0))
        throw std::domain_error("theory: means must lie strictly inside (0,1)");
    if (!(mu1 > y)) throw std::domain_error("theory: requires mu1 > y");
}

std::string format_point(const char* fmt, auto... args) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), fmt, args...);
    return std::string(buf);
}

// Lemma 5 threshold log((1-mu1)/mu1) / log((1-y)/y); only meaningful for
// y != 1/2.
double lemma5_ratio(double mu1, double y) {
    return std::log((1.0 - mu1) / mu1) / std::log((1.0 - y) / y);
}

// Lemma 7 closed form [log(1-mu1) + y log(mu1/(1-mu1))] /
// [(1-y) log(1-y) + y log y].
double lemma7_bound(double mu1, double y) {
    const double num = std::log1p(-mu1) + y * std::log(mu1 / (1.0 - mu1));
    const double den = (1.0 - y) * std::log1p(-y) + y * std::log(y);
    return num / den;
}

struct SuiteAccumulator {
    VerificationReport report;
    CheckSink sink;

    void record(VerificationCheck check, double residual) {
        ++report.points_checked;
        report.max_residual = std::max(report.max_residual, residual);
        if (sink) sink(check);
        if (!check.pass) {
            ++report.violations;
            report.failures.push_back(std::move(check));
        }
    }
};

} // namespace

std::string to_string(const RegimeLabel& label) {
    char buf[64];
    switch (label.kind) {
        case RegimeKind::Logarithmic:
            return "Logarithmic";
        case RegimeKind::PolynomialSmallH:
            std::snprintf(buf, sizeof(buf), "PolynomialSmallH(%.6g)", label.exponent);
            return buf;
        case RegimeKind::PolynomialLargeH:
            std::snprintf(buf, sizeof(buf), "PolynomialLargeH(%.6g)", label.exponent);
            return buf;
        case RegimeKind::TrivialBound:
            return "TrivialBound";
    }
    return "Unknown";
}

double kl_bernoulli(double y, double mu) {
    if (!(y >= 0.0 && y <= 1.0))
        throw std::domain_error("kl_bernoulli: y outside [0,1]");
    if (!(mu >= 0.0 && mu <= 1.0))
        throw std::domain_error("kl_bernoulli: mu outside [0,1]");
    if (mu == 0.0) return y == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    if (mu == 1.0) return y == 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
    double kl = 0.0;
    if (y > 0.0) kl += y * std::log(y / mu);
    if (y < 1.0) kl += (1.0 - y) * std::log((1.0 - y) / (1.0 - mu));
    return std::max(0.0, kl);
}

std::int64_t phase_length(double horizon, double delta) {
    if (!(horizon >= 2.0)) throw std::domain_error("phase_length: horizon must be >= 2");
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::domain_error("phase_length: delta must lie in (0,1]");
    return static_cast<std::int64_t>(
        std::ceil(16.0 * std::log(horizon) / (delta * delta)));
}

double quantity_R(double mu1, double y, double h) {
    check_r_domain(mu1, y);
    return std::exp(std::log(mu1) - std::log1p(-mu1) +
                    h * (std::log1p(-y) - std::log(y)));
}

double quantity_S(double mu1, double y, double h) {
    check_r_domain(mu1, y);
    return std::exp(std::log1p(-mu1) - h * std::log1p(-y));
}

double log_quantity_U(double mu1, double y, double h) {
    check_r_domain(mu1, y);
    return y * std::log(mu1) + (1.0 - y) * std::log1p(-mu1) + h * binary_entropy(y);
}

double quantity_U(double mu1, double y, double h) {
    return std::exp(log_quantity_U(mu1, y, h));
}

double binary_entropy(double y) {
    double e = 0.0;
    if (y > 0.0) e -= y * std::log(y);
    if (y < 1.0) e -= (1.0 - y) * std::log1p(-y);
    return e;
}

HRange theorem1_h_range(double mu1, double mu2) {
    check_two_arm_means(mu1, mu2);
    const double y = 0.5 * (mu1 + mu2);
    const double second = lemma7_bound(mu1, y);
    double h_max = second;
    if (y > 0.5) h_max = std::min(lemma5_ratio(mu1, y), second);
    if (!(h_max >= 1.0))
        throw std::logic_error("theorem1_h_range: interval must contain h = 1");
    return HRange{0.5, h_max};
}

double h_max_via_root(double mu1, double mu2) {
    check_two_arm_means(mu1, mu2);
    const double y = 0.5 * (mu1 + mu2);
    // ln U is affine increasing in h and negative at h = 0.
    double lo = 0.0;
    double hi = 1.0;
    while (log_quantity_U(mu1, y, hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw std::logic_error("h_max_via_root: bracket failed");
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (log_quantity_U(mu1, y, mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

RegimeLabel classify_regime(double mu1, double mu2, double h) {
    check_two_arm_means(mu1, mu2);
    if (!(h >= 0.0)) throw std::domain_error("classify_regime: h must be >= 0");
    if (h < 0.5) return RegimeLabel{RegimeKind::PolynomialSmallH, 1.0 - 2.0 * h};
    const HRange range = theorem1_h_range(mu1, mu2);
    if (h <= range.hi) return RegimeLabel{RegimeKind::Logarithmic, 0.0};

    const double y = 0.5 * (mu1 + mu2);
    const double delta = mu1 - mu2;
    const double log_threshold = delta * delta / 16.0; // ln of e^(delta^2/16)
    const double r = quantity_R(mu1, y, h);
    if (r < 1.0) {
        const double log_s = std::log1p(-mu1) - h * std::log1p(-y);
        if (log_s < log_threshold)
            return RegimeLabel{RegimeKind::PolynomialLargeH,
                               16.0 * log_s / (delta * delta)};
        return RegimeLabel{RegimeKind::TrivialBound, 0.0};
    }
    const double log_u = log_quantity_U(mu1, y, h);
    if (log_u <= log_threshold)
        return RegimeLabel{RegimeKind::PolynomialLargeH, 16.0 * log_u / (delta * delta)};
    return RegimeLabel{RegimeKind::TrivialBound, 0.0};
}

ThresholdReport make_threshold_report(double mu1, double mu2, double h,
                                      std::optional<double> horizon) {
    check_two_arm_means(mu1, mu2);
    ThresholdReport report;
    report.mu1 = mu1;
    report.mu2 = mu2;
    report.h = h;
    report.y = 0.5 * (mu1 + mu2);
    report.delta = mu1 - mu2;
    report.kl = kl_bernoulli(report.y, mu1);
    if (horizon) report.phase_n = phase_length(*horizon, report.delta);
    report.r_value = quantity_R(mu1, report.y, h);
    report.s_value = quantity_S(mu1, report.y, h);
    report.u_value = quantity_U(mu1, report.y, h);
    report.h_range = theorem1_h_range(mu1, mu2);
    report.regime = classify_regime(mu1, mu2, h);
    return report;
}

VerificationReport verify_lemma3(std::int64_t max_param, int x_points,
                                 bool parallel, const CheckSink& sink) {
    VerificationReport report;
    report.suite = "lemma3";
    if (max_param < 1 || x_points < 1)
        throw std::domain_error("verify_lemma3: empty grid");
    const bool use_threads = parallel && !sink;

    std::vector<std::vector<VerificationCheck>> fail_slots(max_param);
    std::vector<double> residual_slots(max_param, 0.0);

#pragma omp parallel for schedule(dynamic) if (use_threads)
    for (std::int64_t alpha = 1; alpha <= max_param; ++alpha) {
        for (std::int64_t beta = 1; beta <= max_param; ++beta) {
            for (int ix = 1; ix <= x_points; ++ix) {
                const double x = static_cast<double>(ix) / (x_points + 1);
                const double lhs = beta_cdf(BetaParams{alpha, beta}, x);
                const double rhs = 1.0 - binomial_cdf(alpha + beta - 1, x, alpha - 1);
                const double residual = std::fabs(lhs - rhs);
                residual_slots[alpha - 1] =
                    std::max(residual_slots[alpha - 1], residual);
                const bool pass = residual <= 1e-10;
                if (!pass || sink) {
                    VerificationCheck check{
                        "lemma3",
                        format_point("alpha=%lld,beta=%lld,x=%.12g",
                                     static_cast<long long>(alpha),
                                     static_cast<long long>(beta), x),
                        lhs, rhs, pass};
                    if (sink) sink(check);
                    if (!pass) fail_slots[alpha - 1].push_back(std::move(check));
                }
            }
        }
    }
    report.points_checked = max_param * max_param * x_points;
    for (std::int64_t i = 0; i < max_param; ++i) {
        report.max_residual = std::max(report.max_residual, residual_slots[i]);
        for (auto& check : fail_slots[i]) {
            ++report.violations;
            report.failures.push_back(std::move(check));
        }
    }
    return report;
}

VerificationReport verify_lemma4(std::span<const std::int64_t> n_grid,
                                 std::span<const double> p_grid,
                                 std::span<const double> delta_grid,
                                 bool parallel, const CheckSink& sink) {
    VerificationReport report;
    report.suite = "lemma4";
    if (n_grid.empty() || p_grid.empty() || delta_grid.empty())
        throw std::domain_error("verify_lemma4: empty grid");
    const bool use_threads = parallel && !sink;
    const std::size_t slots = n_grid.size();

    std::vector<std::vector<VerificationCheck>> fail_slots(slots);
    std::vector<double> residual_slots(slots, 0.0);

#pragma omp parallel for schedule(dynamic) if (use_threads)
    for (std::size_t si = 0; si < slots; ++si) {
        const std::int64_t n = n_grid[si];
        for (const double p : p_grid) {
            for (const double delta : delta_grid) {
                // CDF argument floored: the variable is integer-valued.
                const double arg = static_cast<double>(n) * p +
                                   static_cast<double>(n) * delta;
                const std::int64_t k = static_cast<std::int64_t>(std::floor(arg));
                const double lhs = binomial_cdf(n + 1, p, k);
                const double rhs =
                    1.0 - std::exp(4.0 * delta - 2.0 * static_cast<double>(n) *
                                                     delta * delta);
                const bool pass = lhs >= rhs - kNumericSlack;
                const double margin = lhs - rhs;
                residual_slots[si] = std::max(residual_slots[si], -margin);
                if (!pass || sink) {
                    VerificationCheck check{
                        "lemma4",
                        format_point("n=%lld,p=%.12g,delta=%.12g",
                                     static_cast<long long>(n), p, delta),
                        lhs, rhs, pass};
                    if (sink) sink(check);
                    if (!pass) fail_slots[si].push_back(std::move(check));
                }
            }
        }
    }
    report.points_checked = static_cast<std::int64_t>(
        n_grid.size() * p_grid.size() * delta_grid.size());
    for (std::size_t i = 0; i < slots; ++i) {
        report.max_residual = std::max(report.max_residual, residual_slots[i]);
        for (auto& check : fail_slots[i]) {
            ++report.violations;
            report.failures.push_back(std::move(check));
        }
    }
    return report;
}

VerificationReport verify_fact2(std::int64_t n_max, const CheckSink& sink) {
    SuiteAccumulator acc;
    acc.report.suite = "fact2";
    acc.sink = sink;
    if (n_max < 1) throw std::domain_error("verify_fact2: n_max must be >= 1");
    for (std::int64_t n = 1; n <= n_max; ++n) {
        for (int ip = 1; ip <= 99; ++ip) {
            const double p = static_cast<double>(ip) / 100.0;
            const double np = static_cast<double>(n) * p;
            const std::int64_t lo = static_cast<std::int64_t>(std::floor(np));
            const std::int64_t hi = static_cast<std::int64_t>(std::ceil(np));
            double best = -1.0;
            for (const std::int64_t m : {lo, hi}) {
                const double upper = binomial_cdf(n, p, m);      // P(X <= m)
                const double lower = 1.0 - binomial_cdf(n, p, m - 1); // P(X >= m)
                best = std::max(best, std::min(upper, lower));
                if (lo == hi) break;
            }
            const bool pass = best >= 0.5 - kNumericSlack;
            acc.record(
                VerificationCheck{"fact2",
                                  format_point("n=%lld,p=%.12g",
                                               static_cast<long long>(n), p),
                                  best, 0.5, pass},
                std::max(0.0, 0.5 - best));
        }
    }
    return acc.report;
}

VerificationReport verify_lemma567(std::span<const Lemma567Point> grid,
                                   const CheckSink& sink) {
    SuiteAccumulator acc;
    acc.report.suite = "lemma567";
    acc.sink = sink;
    if (grid.empty()) throw std::domain_error("verify_lemma567: empty grid");
    for (const auto& pt : grid) {
        const double mu1 = pt.mu1;
        const double y = pt.y;
        const double h = pt.h;
        if (!(mu1 > y)) throw std::domain_error("verify_lemma567: needs mu1 > y");
        const std::string where =
            format_point("mu1=%.12g,y=%.12g,h=%.12g", mu1, y, h);
        const double r = quantity_R(mu1, y, h);
        const double s = quantity_S(mu1, y, h);
        const double log_u = log_quantity_U(mu1, y, h);
        const double hstar = lemma7_bound(mu1, y);

        if (h > 1.0) {
            // Lemma 5 iff: R < 1 <=> (y > 1/2 and h > lemma5 ratio).
            const bool lhs5 = r < 1.0;
            const bool rhs5 = y > 0.5 && h > lemma5_ratio(mu1, y);
            acc.record(VerificationCheck{"lemma5", where, r, 1.0, lhs5 == rhs5},
                       0.0);
            // Lemma 6: R < 1 implies S > 1.
            if (lhs5)
                acc.record(VerificationCheck{"lemma6", where, s, 1.0,
                                             s > 1.0 - kNumericSlack},
                           std::max(0.0, 1.0 - s));
            // Lemma 7: R < 1 and h <= h* implies U <= 1.
            if (lhs5 && h <= hstar)
                acc.record(VerificationCheck{"lemma7", where, std::exp(log_u), 1.0,
                                             log_u <= kNumericSlack},
                           std::max(0.0, log_u));
        }
        // The U <= 1 <=> h <= h* equivalence behind Lemma 7 is plain
        // algebra and holds for every h; skip only the razor-edge cases.
        if (std::fabs(h - hstar) > 1e-9) {
            const bool lhs7 = log_u <= 0.0;
            const bool rhs7 = h <= hstar;
            acc.record(VerificationCheck{"lemma7-iff", where, log_u, 0.0,
                                         lhs7 == rhs7},
                       0.0);
        }
    }
    return acc.report;
}

VerificationReport verify_chernoff(std::int64_t n_max, const CheckSink& sink) {
    SuiteAccumulator acc;
    acc.report.suite = "chernoff";
    acc.sink = sink;
    if (n_max < 1) throw std::domain_error("verify_chernoff: n_max must be >= 1");
    const double p_grid[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    const double frac_grid[] = {0.02, 0.05, 0.1, 0.2, 0.4};
    for (std::int64_t n = 1; n <= n_max; ++n) {
        for (const double p : p_grid) {
            for (const double frac : frac_grid) {
                const double a = frac * static_cast<double>(n);
                const double bound =
                    std::exp(-2.0 * a * a / static_cast<double>(n));
                const double np = static_cast<double>(n) * p;
                // P(X >= np + a) and P(X <= np - a) with exact CDFs.
                const std::int64_t up =
                    static_cast<std::int64_t>(std::ceil(np + a)) - 1;
                const double upper_tail = 1.0 - binomial_cdf(n, p, up);
                const std::int64_t dn =
                    static_cast<std::int64_t>(std::floor(np - a));
                const double lower_tail = binomial_cdf(n, p, dn);
                const std::string where = format_point(
                    "n=%lld,p=%.12g,a=%.12g", static_cast<long long>(n), p, a);
                acc.record(VerificationCheck{"chernoff-upper", where, upper_tail,
                                             bound,
                                             upper_tail <= bound + kNumericSlack},
                           std::max(0.0, upper_tail - bound));
                acc.record(VerificationCheck{"chernoff-lower", where, lower_tail,
                                             bound,
                                             lower_tail <= bound + kNumericSlack},
                           std::max(0.0, lower_tail - bound));
            }
        }
    }
    return acc.report;
}

VerificationReport verify_exceedance(std::uint64_t seed, const CheckSink& sink) {
    SuiteAccumulator acc;
    acc.report.suite = "exceedance";
    acc.sink = sink;
    RandomStream rng(seed, 0, StreamPurpose::generic);
    const auto random_params = [&](std::int64_t max_param) {
        return BetaParams{
            1 + static_cast<std::int64_t>(rng.next_double() * max_param),
            1 + static_cast<std::int64_t>(rng.next_double() * max_param)};
    };

    // Complement symmetry on a randomized grid.
    for (int i = 0; i < 200; ++i) {
        const BetaParams a = random_params(300);
        const BetaParams b = random_params(300);
        const double fwd = beta_exceedance(a, b);
        const double bwd = beta_exceedance(b, a);
        const double residual = std::fabs(fwd + bwd - 1.0);
        acc.record(VerificationCheck{
                       "exceedance-complement",
                       format_point("a=(%lld,%lld),b=(%lld,%lld)",
                                    static_cast<long long>(a.alpha),
                                    static_cast<long long>(a.beta),
                                    static_cast<long long>(b.alpha),
                                    static_cast<long long>(b.beta)),
                       fwd + bwd, 1.0, residual <= 1e-12},
                   residual);
    }

    // Strict monotonicity, restricted to overlapping posteriors where a
    // one-parameter step is representable in double precision.
    for (int i = 0; i < 200;) {
        const BetaParams a = random_params(300);
        const BetaParams b = random_params(300);
        const double fwd = beta_exceedance(a, b);
        if (fwd < 1e-3 || fwd > 1.0 - 1e-3) continue;
        ++i;
        const double up = beta_exceedance(BetaParams{a.alpha + 1, a.beta}, b);
        const double down = beta_exceedance(BetaParams{a.alpha, a.beta + 1}, b);
        acc.record(VerificationCheck{
                       "exceedance-monotone",
                       format_point("a=(%lld,%lld),b=(%lld,%lld)",
                                    static_cast<long long>(a.alpha),
                                    static_cast<long long>(a.beta),
                                    static_cast<long long>(b.alpha),
                                    static_cast<long long>(b.beta)),
                       up - fwd, fwd - down, up > fwd && down < fwd},
                   0.0);
    }

    // Incremental recurrence vs from-scratch recomputation.
    for (int traj = 0; traj < 20; ++traj) {
        ExceedanceState state =
            make_exceedance_state(BetaParams{1, 1}, BetaParams{1, 1});
        double worst = 0.0;
        for (int step = 0; step < 200; ++step) {
            const int arm = rng.next_double() < 0.5 ? 1 : 2;
            const ArmOutcome outcome = rng.next_double() < 0.5
                                           ? ArmOutcome::success
                                           : ArmOutcome::failure;
            state = exceedance_increment(state, arm, outcome);
            worst = std::max(worst,
                             std::fabs(state.prob - beta_exceedance(state.params1,
                                                                    state.params2)));
        }
        acc.record(VerificationCheck{"exceedance-increment",
                                     format_point("trajectory=%d", traj), worst,
                                     1e-10, worst <= 1e-10},
                   worst);
    }

    // Two-arm consistency with best_arm_probabilities.
    for (int i = 0; i < 50; ++i) {
        const BetaParams a = random_params(200);
        const BetaParams b = random_params(200);
        const std::vector<BetaParams> pair{a, b};
        const std::vector<double> probs = best_arm_probabilities(pair);
        const double direct = beta_exceedance(a, b);
        const double residual = std::max(std::fabs(probs[0] - direct),
                                         std::fabs(probs[0] + probs[1] - 1.0));
        acc.record(VerificationCheck{
                       "exceedance-two-arm",
                       format_point("a=(%lld,%lld),b=(%lld,%lld)",
                                    static_cast<long long>(a.alpha),
                                    static_cast<long long>(a.beta),
                                    static_cast<long long>(b.alpha),
                                    static_cast<long long>(b.beta)),
                       probs[0], direct, residual <= 1e-12},
                   residual);
    }
    return acc.report;
}

std::vector<std::int64_t> default_lemma4_n_grid() {
    std::vector<std::int64_t> grid(500);
    for (std::int64_t i = 0; i < 500; ++i) grid[i] = i + 1;
    return grid;
}

std::vector<double> default_lemma4_p_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(static_cast<double>(i) * 0.05);
    return grid;
}

std::vector<double> default_lemma4_delta_grid() { return default_lemma4_p_grid(); }

std::vector<Lemma567Point> default_lemma567_grid() {
    std::vector<Lemma567Point> grid;
    const double h_values[] = {0.25, 0.5,  0.75, 1.0001, 1.1, 1.25, 1.5,
                               2.0,  2.59, 3.0,  5.0,    8.0, 12.0, 20.0};
    for (double mu1 = 0.15; mu1 < 0.99; mu1 += 0.1) {
        for (double y = 0.05; y < mu1 - 1e-9; y += 0.1) {
            for (const double h : h_values)
                grid.push_back(Lemma567Point{mu1, y, h});
        }
    }
    return grid;
}

} // namespace tsh
