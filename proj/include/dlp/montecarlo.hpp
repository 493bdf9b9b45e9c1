#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dlp/core.hpp"
#include "dlp/dynamics.hpp"
#include "dlp/stochastic.hpp"

namespace dlp {

struct McEstimate {
    double mean{0.0};
    double std{0.0};
    double std_error{0.0};
    std::size_t n_paths{0};
    std::uint64_t k{0};
    // Paths with at least one return outside the configured bounds. The
    // worst-case lower bound is not checked on those paths.
    std::size_t out_of_bounds_paths{0};
};

struct McOptions {
    std::size_t workers{0};  // 0 = hardware concurrency
    double rate{0.0};        // per-period risk-free rate on the long account
};

/// Raised when a simulated path breaks survivability or cash financing.
class InvariantError : public std::runtime_error {
public:
    InvariantError(std::size_t path, InvariantReport report);

    std::size_t path() const { return path_; }
    const InvariantReport& report() const { return report_; }

private:
    std::size_t path_;
    InvariantReport report_;
};

/// Monte-Carlo mean and spread of G_k over n_paths independent paths. Path i
/// draws from stream seed.stream_id + i, and the per-path gains are reduced
/// in path order, so the result is identical for any worker count.
McEstimate estimate(const PolicyParams& p, const ReturnModel& model, std::uint64_t k,
                    std::size_t n_paths, SeedSpec seed, McOptions options = {});

struct ExactMoments {
    double mean{0.0};
    double variance{0.0};
};

inline constexpr std::uint64_t kBruteForceMaxSteps = 20;

/// Exact mean and variance of G_k under a two-point model by enumerating
/// all 2^k return paths. Throws ValidationError for k > 20.
ExactMoments brute_force(const PolicyParams& p, const TwoPointModel& model, std::uint64_t k);

struct SweepConfig {
    std::vector<double> mu_stars;
    std::size_t n_paths{10000};
    std::uint64_t k{252};
    PolicyParams policy{};
    GbmJumpParams jumps{};  // mu_star and sigma_star are overwritten per row
    McOptions options{};
};

struct SweepRow {
    double mu_star{0.0};
    double sigma_star{0.0};
    double analytic_mean{0.0};
    double analytic_std{0.0};
    // Same closed forms fed with mu = mu* dt, sigma = sigma* sqrt(dt).
    double approx_mean{0.0};
    double approx_std{0.0};
    McEstimate mc{};
};

/// lo, lo + step, ..., hi (inclusive), with values snapped to 1e-12.
std::vector<double> make_grid(double lo, double hi, double step);

/// One row per mu* in config order. sigma* = 2 |mu*| Z with one Z ~ U(0, 1)
/// per grid index, drawn from stream 2^63 + index; the row's paths use
/// streams index * 2^32 + path.
std::vector<SweepRow> sweep(const SweepConfig& config, SeedSpec seed);

}  // namespace dlp
