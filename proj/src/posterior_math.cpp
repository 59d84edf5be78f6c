#include "tsh/posterior_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tsh {

namespace {

constexpr std::int64_t kLogFactorialTableSize = 4097;

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error(std::string(what) + " must lie in [0,1]");
}

void check_params(const BetaParams& params) {
    if (params.alpha < 1 || params.beta < 1)
        throw std::domain_error("Beta parameters must be integers >= 1");
}

// Continued fraction for the regularized incomplete beta (modified Lentz).
double incomplete_beta_cf(double x, double a, double b) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double result = d;
    for (int m = 1; m <= 300; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        result *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        result *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return result;
}

double regularized_incomplete_beta(double x, double a, double b) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front =
        std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta_fn(a, b));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * incomplete_beta_cf(x, a, b) / a;
    return 1.0 - front * incomplete_beta_cf(1.0 - x, b, a) / b;
}

// One term of the exact exceedance sum, in log space:
//   B(a+i, b+d) / ((d+i) B(1+i, d) B(a, b))
// where (a,b) are the "other" distribution's parameters and (·,d) the
// summed one's failure count.
double exceedance_term(std::int64_t a, std::int64_t b, std::int64_t d,
                       std::int64_t i) {
    const double log_term =
        log_beta_fn(static_cast<double>(a + i), static_cast<double>(b + d)) -
        std::log(static_cast<double>(d + i)) -
        log_beta_fn(static_cast<double>(1 + i), static_cast<double>(d)) -
        log_beta_fn(static_cast<double>(a), static_cast<double>(b));
    return std::exp(log_term);
}

// P(X_{c,d} > X_{a,b}) as a sum of c nonnegative terms (Kahan-compensated).
double exceedance_sum(std::int64_t a, std::int64_t b, std::int64_t c,
                      std::int64_t d) {
    double sum = 0.0;
    double comp = 0.0;
    for (std::int64_t i = 0; i < c; ++i) {
        const double y = exceedance_term(a, b, d, i) - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return std::min(1.0, std::max(0.0, sum));
}

// Integrand weight of the increment recurrence: the probability mass moved
// by a single parameter step, B(a1+a2, b1+b2) / (x * B(a1,b1) * B(a2,b2)),
// where x is the parameter being incremented (pre-increment value).
double increment_term(const BetaParams& p1, const BetaParams& p2, double x) {
    const double log_term =
        log_beta_fn(static_cast<double>(p1.alpha + p2.alpha),
                    static_cast<double>(p1.beta + p2.beta)) -
        std::log(x) -
        log_beta_fn(static_cast<double>(p1.alpha), static_cast<double>(p1.beta)) -
        log_beta_fn(static_cast<double>(p2.alpha), static_cast<double>(p2.beta));
    return std::exp(log_term);
}

// Adaptive Gauss-Kronrod 7/15 on [lo, hi].
struct GkResult {
    double value;
    double error;
};

GkResult gk15(const std::vector<BetaParams>& posteriors, std::size_t which,
              double lo, double hi) {
    // Kronrod 15 nodes/weights and embedded Gauss 7 weights on [-1, 1].
    static const double nodes[15] = {
        -0.9914553711208126, -0.9491079123427585, -0.8648644233597691,
        -0.7415311855993945, -0.5860872354676911, -0.4058451513773972,
        -0.2077849550078985, 0.0,                 0.2077849550078985,
        0.4058451513773972,  0.5860872354676911,  0.7415311855993945,
        0.8648644233597691,  0.9491079123427585,  0.9914553711208126};
    static const double wk[15] = {
        0.022935322010529, 0.063092092629979, 0.104790010322250,
        0.140653259715525, 0.169004726639267, 0.190350578064785,
        0.204432940075298, 0.209482141084728, 0.204432940075298,
        0.190350578064785, 0.169004726639267, 0.140653259715525,
        0.104790010322250, 0.063092092629979, 0.022935322010529};
    static const double wg[7] = {0.129484966168870, 0.279705391489277,
                                 0.381830050505119, 0.417959183673469,
                                 0.381830050505119, 0.279705391489277,
                                 0.129484966168870};

    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double kronrod = 0.0;
    double gauss = 0.0;
    for (int j = 0; j < 15; ++j) {
        const double x = mid + half * nodes[j];
        double f = beta_pdf(posteriors[which], x);
        if (f != 0.0) {
            for (std::size_t i = 0; i < posteriors.size(); ++i) {
                if (i == which) continue;
                f *= beta_cdf(posteriors[i], x);
                if (f == 0.0) break;
            }
        }
        kronrod += wk[j] * f;
        if (j % 2 == 1) gauss += wg[j / 2] * f;
    }
    kronrod *= half;
    gauss *= half;
    return {kronrod, std::fabs(kronrod - gauss)};
}

double adaptive_best_prob(const std::vector<BetaParams>& posteriors,
                          std::size_t which, double lo, double hi, double tol,
                          int depth) {
    const GkResult r = gk15(posteriors, which, lo, hi);
    if (r.error <= tol || depth >= 48) return r.value;
    const double mid = 0.5 * (lo + hi);
    return adaptive_best_prob(posteriors, which, lo, mid, 0.5 * tol, depth + 1) +
           adaptive_best_prob(posteriors, which, mid, hi, 0.5 * tol, depth + 1);
}

std::vector<double> best_probs_monte_carlo(std::span<const BetaParams> posteriors) {
    constexpr std::int64_t kDraws = 1'000'000;
    // Fixed purpose-tagged stream: the fallback stays deterministic.
    RandomStream rng(0x62657374ULL, 0, StreamPurpose::generic);
    std::vector<std::int64_t> wins(posteriors.size(), 0);
    std::vector<double> draw(posteriors.size());
    for (std::int64_t s = 0; s < kDraws; ++s) {
        std::size_t best = 0;
        for (std::size_t i = 0; i < posteriors.size(); ++i) {
            draw[i] = beta_sample(posteriors[i], rng);
            if (draw[i] > draw[best]) best = i;
        }
        ++wins[best];
    }
    std::vector<double> probs(posteriors.size());
    for (std::size_t i = 0; i < posteriors.size(); ++i)
        probs[i] = static_cast<double>(wins[i]) / static_cast<double>(kDraws);
    return probs;
}

} // namespace

bool operator==(const BetaParams& a, const BetaParams& b) {
    return a.alpha == b.alpha && a.beta == b.beta;
}

double log_factorial(std::int64_t n) {
    if (n < 0) throw std::domain_error("log_factorial: negative argument");
    static const std::vector<double> table = [] {
        std::vector<double> t(kLogFactorialTableSize);
        t[0] = 0.0;
        for (std::int64_t k = 1; k < kLogFactorialTableSize; ++k)
            t[k] = t[k - 1] + std::log(static_cast<double>(k));
        return t;
    }();
    if (n < kLogFactorialTableSize) return table[n];
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_beta_fn(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double binomial_pmf(std::int64_t n, double p, std::int64_t k) {
    if (n < 0 || k < 0) throw std::domain_error("binomial_pmf: negative count");
    if (k > n) throw std::domain_error("binomial_pmf: k > n");
    check_probability(p, "binomial_pmf: p");
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;
    const double log_pmf = log_factorial(n) - log_factorial(k) -
                           log_factorial(n - k) +
                           static_cast<double>(k) * std::log(p) +
                           static_cast<double>(n - k) * std::log1p(-p);
    return std::exp(log_pmf);
}

double binomial_cdf(std::int64_t n, double p, std::int64_t k) {
    if (n < 0) throw std::domain_error("binomial_cdf: negative n");
    check_probability(p, "binomial_cdf: p");
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    if (p == 0.0) return 1.0;
    if (p == 1.0) return 0.0; // k < n here

    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    const double lf_n = log_factorial(n);
    const auto term = [&](std::int64_t i) {
        return std::exp(lf_n - log_factorial(i) - log_factorial(n - i) +
                        static_cast<double>(i) * lp +
                        static_cast<double>(n - i) * lq);
    };

    // Sum whichever tail holds less mass, smallest terms first, and
    // complement if needed. Kahan compensation keeps long sums tight.
    double sum = 0.0;
    double comp = 0.0;
    const auto add = [&](double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    };
    if (static_cast<double>(k) <= static_cast<double>(n) * p) {
        for (std::int64_t i = 0; i <= k; ++i) add(term(i));
        return std::min(1.0, sum);
    }
    for (std::int64_t i = n; i > k; --i) add(term(i));
    return std::max(0.0, 1.0 - sum);
}

double beta_pdf(const BetaParams& params, double x) {
    check_params(params);
    check_probability(x, "beta_pdf: x");
    const double a = static_cast<double>(params.alpha);
    const double b = static_cast<double>(params.beta);
    if (x == 0.0) return params.alpha == 1 ? b : 0.0;
    if (x == 1.0) return params.beta == 1 ? a : 0.0;
    return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
                    log_beta_fn(a, b));
}

double beta_cdf(const BetaParams& params, double x) {
    check_params(params);
    check_probability(x, "beta_cdf: x");
    return regularized_incomplete_beta(x, static_cast<double>(params.alpha),
                                       static_cast<double>(params.beta));
}

double beta_exceedance(const BetaParams& p1, const BetaParams& p2) {
    check_params(p1);
    check_params(p2);
    // Four equivalent routes; take the one with the fewest terms.
    //  alpha1: P(X1 > X2) directly.
    //  beta2:  reflect both (1-X ~ Beta(beta, alpha)), then direct.
    //  alpha2: complement of the direct sum with roles swapped.
    //  beta1:  complement of the reflected sum with roles swapped.
    const std::int64_t n1 = p1.alpha;
    const std::int64_t n2 = p2.beta;
    const std::int64_t n3 = p2.alpha;
    const std::int64_t n4 = p1.beta;
    const std::int64_t m = std::min(std::min(n1, n2), std::min(n3, n4));
    if (m == n1) return exceedance_sum(p2.alpha, p2.beta, p1.alpha, p1.beta);
    if (m == n2) return exceedance_sum(p1.beta, p1.alpha, p2.beta, p2.alpha);
    if (m == n3) return 1.0 - exceedance_sum(p1.alpha, p1.beta, p2.alpha, p2.beta);
    return 1.0 - exceedance_sum(p2.beta, p2.alpha, p1.beta, p1.alpha);
}

ExceedanceState make_exceedance_state(const BetaParams& p1, const BetaParams& p2) {
    ExceedanceState state;
    state.params1 = p1;
    state.params2 = p2;
    state.prob = beta_exceedance(p1, p2);
    state.steps_since_sync = 0;
    return state;
}

ExceedanceState exceedance_increment(const ExceedanceState& state, int which_arm,
                                     ArmOutcome outcome) {
    check_params(state.params1);
    check_params(state.params2);
    if (which_arm != 1 && which_arm != 2)
        throw std::domain_error("exceedance_increment: arm must be 1 or 2");
    if (!(state.prob >= 0.0 && state.prob <= 1.0))
        throw std::logic_error("exceedance_increment: state.prob outside [0,1]");

    ExceedanceState next = state;
    double stepped;    // parameter value being incremented, pre-increment
    double direction;  // +1 if the step raises P(X1 > X2)
    if (which_arm == 1) {
        if (outcome == ArmOutcome::success) {
            stepped = static_cast<double>(state.params1.alpha);
            direction = 1.0;
            ++next.params1.alpha;
        } else {
            stepped = static_cast<double>(state.params1.beta);
            direction = -1.0;
            ++next.params1.beta;
        }
    } else {
        if (outcome == ArmOutcome::success) {
            stepped = static_cast<double>(state.params2.alpha);
            direction = -1.0;
            ++next.params2.alpha;
        } else {
            stepped = static_cast<double>(state.params2.beta);
            direction = 1.0;
            ++next.params2.beta;
        }
    }
    const double term = increment_term(state.params1, state.params2, stepped);
    next.prob = std::min(1.0, std::max(0.0, state.prob + direction * term));
    next.steps_since_sync = state.steps_since_sync + 1;
    if (next.steps_since_sync >= kExceedanceResyncInterval) {
        next.prob = beta_exceedance(next.params1, next.params2);
        next.steps_since_sync = 0;
    }
    return next;
}

std::vector<double> best_arm_probabilities(std::span<const BetaParams> posteriors) {
    if (posteriors.size() < 2)
        throw std::domain_error("best_arm_probabilities: need at least 2 arms");
    for (const auto& params : posteriors) check_params(params);

    if (posteriors.size() == 2)
        return {beta_exceedance(posteriors[0], posteriors[1]),
                beta_exceedance(posteriors[1], posteriors[0])};

    std::int64_t max_param = 0;
    for (const auto& params : posteriors)
        max_param = std::max(max_param, std::max(params.alpha, params.beta));
    if (max_param > 10'000) return best_probs_monte_carlo(posteriors);

    const std::vector<BetaParams> all(posteriors.begin(), posteriors.end());
    std::vector<double> probs(posteriors.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        probs[i] = adaptive_best_prob(all, i, 0.0, 1.0, 1e-10, 0);
    return probs;
}

double beta_sample(const BetaParams& params, RandomStream& rng) {
    check_params(params);
    const double a = static_cast<double>(params.alpha);
    const double b = static_cast<double>(params.beta);
    // Integer-parameter special cases with exact inverse CDFs.
    if (params.alpha == 1 && params.beta == 1) return rng.next_double();
    if (params.beta == 1) return std::pow(rng.next_double(), 1.0 / a);
    if (params.alpha == 1) return 1.0 - std::pow(rng.next_double(), 1.0 / b);
    const double g1 = rng.next_gamma(a);
    const double g2 = rng.next_gamma(b);
    return g1 / (g1 + g2);
}

} // namespace tsh
