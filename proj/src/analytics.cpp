#include "dlp/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dlp {

namespace {

using real = long double;

real ipow(real base, std::uint64_t k) {
    real result = 1.0L;
    while (k) {
        if (k & 1u) result *= base;
        base *= base;
        k >>= 1u;
    }
    return result;
}

// (base + delta)^k - base^k
real pow_diff(real base, real delta, std::uint64_t k) {
    if (k == 0 || delta == 0.0L) return 0.0L;
    const real shifted = base + delta;
    if (base > 0.0L && shifted > 0.0L) {
        const real kk = static_cast<real>(k);
        return ipow(base, k) * std::expm1(kk * std::log1p(delta / base));
    }
    return ipow(shifted, k) - ipow(base, k);
}

void check_inputs(const PolicyParams& p, double mu) {
    require_valid(p);
    if (!std::isfinite(mu) || mu <= -1.0)
        throw ValidationError("mean return must be finite and > -1");
}

void check_interior(const PolicyParams& p, const char* what) {
    require_valid(p);
    if (!(p.alpha > 0.0 && p.alpha < 1.0))
        throw ValidationError(std::string(what) + ": alpha must lie strictly inside (0, 1)");
    if (!(p.w > 0.0)) throw ValidationError(std::string(what) + ": w must be positive");
}

}  // namespace

long double expected_gain_ext(const PolicyParams& p, double mu, std::uint64_t k) {
    check_inputs(p, mu);
    const real a = p.alpha;
    const real w = p.w;
    const real up = ipow(1.0L + w * (static_cast<real>(mu) - p.eps), k);
    const real down = ipow(1.0L - w * (static_cast<real>(mu) + p.eps), k);
    return static_cast<real>(p.v0) * (a * up + (1.0L - a) * down - 1.0L);
}

double expected_gain(const PolicyParams& p, const ReturnStats& stats, std::uint64_t k) {
    return static_cast<double>(expected_gain_ext(p, stats.mu, k));
}

double variance_gain(const PolicyParams& p, const ReturnStats& stats, std::uint64_t k) {
    check_inputs(p, stats.mu);
    if (!std::isfinite(stats.sigma) || stats.sigma < 0.0)
        throw ValidationError("sigma must be finite and >= 0");

    const real a = p.alpha;
    const real w = p.w;
    const real mu = stats.mu;
    const real lg = 1.0L + w * (mu - p.eps);   // E[1 + w(X - eps)]
    const real sg = 1.0L - w * (mu + p.eps);   // E[1 - w(X + eps)]
    const real s = w * w * static_cast<real>(stats.sigma) * static_cast<real>(stats.sigma);

    // E[R_L^2] - E[R_L]^2, E[R_S^2] - E[R_S]^2 and E[R_L R_S] - E[R_L] E[R_S],
    // where E[R_L R_S] = (1 - 2 w eps - w^2 (mu^2 + sigma^2 - eps^2))^k.
    const real var_long = pow_diff(lg * lg, s, k);
    const real var_short = pow_diff(sg * sg, s, k);
    const real cov = pow_diff(lg * sg, -s, k);

    const real var = a * a * var_long + (1.0L - a) * (1.0L - a) * var_short +
                     2.0L * a * (1.0L - a) * cov;

    const real scale = std::max({std::abs(a * a * ipow(lg * lg + s, k)),
                                 std::abs((1.0L - a) * (1.0L - a) * ipow(sg * sg + s, k)),
                                 std::abs(2.0L * a * (1.0L - a) * ipow(lg * sg - s, k))});
    real clamped = var;
    if (var < 0.0L) {
        if (var < -1e-12L * scale)
            throw std::logic_error("variance_gain: negative variance " +
                                   std::to_string(static_cast<double>(var)));
        clamped = 0.0L;
    }
    const real v0 = p.v0;
    return static_cast<double>(v0 * v0 * clamped);
}

double std_gain(const PolicyParams& p, const ReturnStats& stats, std::uint64_t k) {
    return std::sqrt(variance_gain(p, stats, k));
}

CriticalMus critical_mus(const PolicyParams& p, std::uint64_t k) {
    check_interior(p, "critical_mus");
    if (k < 1) throw ValidationError("critical_mus: k must be >= 1");
    const double kk = static_cast<double>(k);
    // e^{log(1/alpha)/k} - 1, written with expm1 to keep precision for large k.
    const double up = std::expm1(-std::log(p.alpha) / kk);
    const double down = std::expm1(-std::log1p(-p.alpha) / kk);
    return {-down / p.w - p.eps, up / p.w + p.eps};
}

double minimizing_mu(const PolicyParams& p, std::uint64_t k) {
    check_interior(p, "minimizing_mu");
    if (k < 2) throw ValidationError("minimizing_mu: E[G_1] is linear in mu, need k > 1");
    const real ratio = std::pow(static_cast<real>(1.0L - p.alpha) / p.alpha,
                                1.0L / static_cast<real>(k - 1));
    const real w = p.w;
    return static_cast<double>((ratio - 1.0L) * (1.0L - w * p.eps) / (w * (ratio + 1.0L)));
}

double second_derivative_in_w(const PolicyParams& p, const ReturnStats& stats,
                              std::uint64_t k, double w) {
    PolicyParams at = p;
    at.w = w;
    check_inputs(at, stats.mu);
    if (k < 2) return 0.0;
    const real a = p.alpha;
    const real kk = static_cast<real>(k) * static_cast<real>(k - 1);
    const real lc = static_cast<real>(stats.mu) - p.eps;
    const real sc = static_cast<real>(stats.mu) + p.eps;
    const real lterm = a * kk * ipow(1.0L + w * lc, k - 2) * lc * lc;
    const real sterm = (1.0L - a) * kk * ipow(1.0L - w * sc, k - 2) * sc * sc;
    return static_cast<double>(static_cast<real>(p.v0) * (lterm + sterm));
}

double second_derivative_in_mu(const PolicyParams& p, const ReturnStats& stats,
                               std::uint64_t k) {
    check_inputs(p, stats.mu);
    if (k < 2) return 0.0;
    const real a = p.alpha;
    const real w = p.w;
    const real kk = static_cast<real>(k) * static_cast<real>(k - 1) * w * w;
    const real lterm = a * kk * ipow(1.0L + w * (static_cast<real>(stats.mu) - p.eps), k - 2);
    const real sterm =
        (1.0L - a) * kk * ipow(1.0L - w * (static_cast<real>(stats.mu) + p.eps), k - 2);
    return static_cast<double>(static_cast<real>(p.v0) * (lterm + sterm));
}

AnalyticsReport analyze(const PolicyParams& p, const ReturnStats& stats, std::uint64_t k) {
    AnalyticsReport r;
    r.policy = p;
    r.stats = stats;
    r.k = k;
    r.expected_gain = expected_gain(p, stats, k);
    r.variance = variance_gain(p, stats, k);
    r.std = std::sqrt(r.variance);
    if (p.alpha > 0.0 && p.alpha < 1.0 && p.w > 0.0 && k >= 1) {
        const CriticalMus c = critical_mus(p, k);
        r.mu_plus = c.mu_plus;
        r.mu_minus = c.mu_minus;
        if (k > 1) r.mu_zero = minimizing_mu(p, k);
    }
    return r;
}

}  // namespace dlp
