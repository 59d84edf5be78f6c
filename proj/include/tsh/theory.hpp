#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsh/bandit.hpp"

namespace tsh {

enum class RegimeKind {
    Logarithmic,      // h inside the logarithmic-regret interval
    PolynomialSmallH, // 0 <= h < 1/2, order T^(1-2h)
    PolynomialLargeH, // h above the interval, order T^(16 ln(S or U)/delta^2)
    TrivialBound      // only the linear bound remains
};

// Exponents are upper-bound orders, not proven tight.
struct RegimeLabel {
    RegimeKind kind = RegimeKind::Logarithmic;
    double exponent = 0.0; // meaningful for the polynomial kinds
};

std::string to_string(const RegimeLabel& label);

// Closed interval of h values with O(log T) expected regret.
struct HRange {
    double lo = 0.5; // always exactly 1/2
    double hi = 1.0;
    bool contains(double h) const { return h >= lo && h <= hi; }
};

// Every analysis quantity for a two-arm (instance, h) pair.
struct ThresholdReport {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double h = 1.0;
    double y = 0.0;
    double delta = 0.0;
    double kl = 0.0; // D(y || mu1)
    std::optional<std::int64_t> phase_n; // N(T), present when a horizon is given
    double r_value = 0.0;
    double s_value = 0.0;
    double u_value = 0.0;
    HRange h_range;
    RegimeLabel regime;
};

/// Bernoulli KL divergence D(y || mu) in nats; infinite divergence is
/// returned as +infinity rather than thrown.
double kl_bernoulli(double y, double mu);

/// N = ceil(16 ln T / delta^2), the proof's phase split.
std::int64_t phase_length(double horizon, double delta);

/// R = mu1 (1-y)^h / (y^h (1-mu1)).
double quantity_R(double mu1, double y, double h);

/// S = (1-mu1) / (1-y)^h.
double quantity_S(double mu1, double y, double h);

/// U = R^y S.
double quantity_U(double mu1, double y, double h);

/// ln U, affine in h with slope equal to the binary entropy of y.
double log_quantity_U(double mu1, double y, double h);

/// Binary entropy H(y) = -y ln y - (1-y) ln(1-y).
double binary_entropy(double y);

/// The closed interval [1/2, h_max] of exponents with O(log T)
/// expected regret. Always contains h = 1.
HRange theorem1_h_range(double mu1, double mu2);

/// h solving U(h) = 1 by bisection on ln U; cross-checks the closed form.
double h_max_via_root(double mu1, double mu2);

/// Regret-regime classification for a two-arm instance at exponent h.
RegimeLabel classify_regime(double mu1, double mu2, double h);

/// Assemble the full report; horizon (if any) supplies N.
ThresholdReport make_threshold_report(double mu1, double mu2, double h,
                                      std::optional<double> horizon = std::nullopt);

// --- numeric verification of the supporting inequalities ---

struct VerificationCheck {
    std::string lemma;
    std::string grid_point;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = true;
};

// Per-point results stream through the sink (when set); the report keeps
// the summary plus every violating point.
using CheckSink = std::function<void(const VerificationCheck&)>;

struct VerificationReport {
    std::string suite;
    std::int64_t points_checked = 0;
    std::int64_t violations = 0;
    double max_residual = 0.0; // suite-specific residual, see each verifier
    std::vector<VerificationCheck> failures;
    bool passed() const { return violations == 0; }
};

struct Lemma567Point {
    double mu1;
    double y;
    double h;
};

/// |F_Beta(a,b)(x) - (1 - F_Bin(a+b-1,x)(a-1))| over all integer
/// parameters in [1, max_param] and x = i/(x_points+1).
VerificationReport verify_lemma3(std::int64_t max_param = 200, int x_points = 99,
                                 bool parallel = true, const CheckSink& sink = {});

/// F_Bin(n+1,p)(floor(np+n*delta)) >= 1 - e^(4 delta)/e^(2 n delta^2) on the grid.
VerificationReport verify_lemma4(std::span<const std::int64_t> n_grid,
                                 std::span<const double> p_grid,
                                 std::span<const double> delta_grid,
                                 bool parallel = true, const CheckSink& sink = {});

/// A binomial median exists in {floor(np), ceil(np)} for all n <= n_max,
/// p on the 0.01 grid.
VerificationReport verify_fact2(std::int64_t n_max = 200, const CheckSink& sink = {});

/// Lemma 5 iff, Lemma 6, Lemma 7 and the U<=1 <-> h<=h* equivalence.
VerificationReport verify_lemma567(std::span<const Lemma567Point> grid,
                                   const CheckSink& sink = {});

/// Chernoff-Hoeffding spot check: exact binomial tails vs e^(-2a^2/n).
VerificationReport verify_chernoff(std::int64_t n_max = 500, const CheckSink& sink = {});

/// Exceedance self-checks: complement symmetry, monotonicity, the O(1)
/// increment against from-scratch recomputation, two-arm consistency.
VerificationReport verify_exceedance(std::uint64_t seed = 20240'101,
                                     const CheckSink& sink = {});

// Default grids matching the acceptance-scale runs.
std::vector<std::int64_t> default_lemma4_n_grid(); // 1..500
std::vector<double> default_lemma4_p_grid();       // 0, 0.05, ..., 1
std::vector<double> default_lemma4_delta_grid();   // 0, 0.05, ..., 1
std::vector<Lemma567Point> default_lemma567_grid();

} // namespace tsh
