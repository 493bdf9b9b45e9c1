#pragma once

#include <cstdint>
#include <optional>

#include "dlp/core.hpp"

namespace dlp {

/// Closed-form moments of the cumulative gain-loss G_k = V(k) - v0 for
/// i.i.d. returns with mean mu and standard deviation sigma.
///
/// All powers are taken by repeated squaring in long double, and the
/// differences x^k - y^k that make up the variance are evaluated through
/// expm1/log1p so that small variances keep their relative precision.

struct CriticalMus {
    double mu_minus{0.0};
    double mu_plus{0.0};
};

struct AnalyticsReport {
    PolicyParams policy;
    ReturnStats stats;
    std::uint64_t k{0};
    double expected_gain{0.0};
    double variance{0.0};
    double std{0.0};
    // Defined only for alpha in (0, 1), w > 0 (and k > 1 for mu_zero).
    std::optional<double> mu_plus;
    std::optional<double> mu_minus;
    std::optional<double> mu_zero;
};

/// E[G_k] = v0 (alpha (1 + w(mu - eps))^k + (1 - alpha)(1 - w(mu + eps))^k - 1).
double expected_gain(const PolicyParams& p, const ReturnStats& stats, std::uint64_t k);

/// Same quantity in extended precision, for finite-difference work.
long double expected_gain_ext(const PolicyParams& p, double mu, std::uint64_t k);

/// var(G_k), scaled by v0^2. Values within 1e-12 of the largest moment term
/// below zero are clamped to 0; anything more negative throws std::logic_error.
double variance_gain(const PolicyParams& p, const ReturnStats& stats, std::uint64_t k);

double std_gain(const PolicyParams& p, const ReturnStats& stats, std::uint64_t k);

/// Conservative thresholds: E[G_k] > 0 for every mu > mu_plus or mu < mu_minus.
/// These are the roots of the asymptotes alpha(1 + w(mu - eps))^k - 1 and
/// (1 - alpha)(1 - w(mu + eps))^k - 1.
/// Throws ValidationError unless alpha in (0, 1), w > 0 and k >= 1.
CriticalMus critical_mus(const PolicyParams& p, std::uint64_t k);

/// The mean return at which E[G_k] is smallest. It solves
/// ((1 + w(mu - eps)) / (1 - w(mu + eps)))^(k-1) = (1 - alpha) / alpha.
/// Throws ValidationError unless alpha in (0, 1), w > 0 and k > 1.
double minimizing_mu(const PolicyParams& p, std::uint64_t k);

/// d^2 E[G_k] / dw^2 evaluated at weight w (p.w is ignored).
double second_derivative_in_w(const PolicyParams& p, const ReturnStats& stats,
                              std::uint64_t k, double w);

/// d^2 E[G_k] / dmu^2 at stats.mu.
double second_derivative_in_mu(const PolicyParams& p, const ReturnStats& stats,
                               std::uint64_t k);

/// Everything above in one record; threshold fields are left empty where
/// they are undefined instead of throwing.
AnalyticsReport analyze(const PolicyParams& p, const ReturnStats& stats, std::uint64_t k);

}  // namespace dlp
