#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "dlp/core.hpp"

namespace dlp {

/// Identifies one random stream: the master seed keys the generator, the
/// stream id (typically a path index) selects an independent counter range.
struct SeedSpec {
    std::uint64_t master_seed{0};
    std::uint64_t stream_id{0};
};

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11, as in
/// Random123). Key = master seed, counter = (block index, stream id).
/// Output depends only on (seed, stream, position), never on scheduling.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(SeedSpec seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()();

    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    double uniform();

    /// Standard normal via inverse CDF of uniform(); one uniform per draw.
    double normal();

    /// Poisson(mean) by sequential inversion of one uniform. mean <= 700.
    std::uint64_t poisson(double mean);

    static std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                                      std::array<std::uint32_t, 2> key);

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_{0};
    std::array<std::uint64_t, 2> buffer_{};
    unsigned available_{0};
};

/// Inverse of the standard normal CDF, accurate to a few ulps on (0, 1).
double inverse_normal_cdf(double p);

/// i.i.d. returns equal to `up` with probability p_up, otherwise `down`.
struct TwoPointModel {
    double up{0.1};
    double down{-0.1};
    double p_up{0.5};

    double mean() const { return p_up * up + (1.0 - p_up) * down; }
    double variance() const { return p_up * (1.0 - p_up) * (up - down) * (up - down); }
    ReturnStats stats() const;
};

ValidationResult validate_model(const TwoPointModel& m);

/// Geometric Brownian motion with multiplicative down-jumps:
/// S(t) = S0 exp((mu* - sigma*^2/2) t + sigma* W(t)) (1 - delta)^N(t).
struct GbmJumpParams {
    double mu_star{0.0};
    double sigma_star{0.0};
    double lambda{0.1};
    double delta{0.05};
    double dt{1.0 / 252.0};
    double s0{1.0};
};

ValidationResult validate_model(const GbmJumpParams& m);

using ReturnModel = std::variant<TwoPointModel, GbmJumpParams>;

std::vector<double> sample_two_point(const TwoPointModel& model, std::size_t n, SeedSpec seed);

/// Exact log-increment scheme; each period consumes one normal then one
/// Poisson draw from the stream, in that order.
std::vector<double> gbm_jump_returns(const GbmJumpParams& params, std::size_t n_periods,
                                     SeedSpec seed);

/// Simulated prices S(0..n) from the same draws as gbm_jump_returns.
std::vector<double> gbm_jump_prices(const GbmJumpParams& params, std::size_t n_periods,
                                    SeedSpec seed);

/// Exact mean and standard deviation of the one-period return
/// X = S(t + dt)/S(t) - 1:
///   E[1 + X]   = exp((mu* - lambda delta) dt)
///   var(X)     = E[1 + X]^2 (exp((sigma*^2 + lambda delta^2) dt) - 1)
ReturnStats gbm_jump_period_stats(const GbmJumpParams& params);

/// Daily-rate approximation mu = mu* dt, sigma = sigma* sqrt(dt).
ReturnStats gbm_jump_period_stats_approx(const GbmJumpParams& params);

ReturnStats period_stats(const ReturnModel& model);

/// Fills `out` with the model's returns drawn from `rng`.
void sample_into(const ReturnModel& model, RandomStream& rng, std::vector<double>& out);

}  // namespace dlp
