#include "dlp/stochastic.hpp"

#include <cmath>
#include <numbers>

namespace dlp {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

}  // namespace

std::array<std::uint32_t, 4> RandomStream::philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                         std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

RandomStream::RandomStream(SeedSpec seed)
    : key_{static_cast<std::uint32_t>(seed.master_seed),
           static_cast<std::uint32_t>(seed.master_seed >> 32)},
      stream_(seed.stream_id) {}

void RandomStream::refill() {
    const std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const auto out = philox4x32_10(ctr, key_);
    buffer_[0] = static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32);
    buffer_[1] = static_cast<std::uint64_t>(out[2]) | (static_cast<std::uint64_t>(out[3]) << 32);
    available_ = 2;
    ++block_;
}

RandomStream::result_type RandomStream::operator()() {
    if (available_ == 0) refill();
    return buffer_[2 - available_--];
}

double RandomStream::uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() { return inverse_normal_cdf(uniform()); }

std::uint64_t RandomStream::poisson(double mean) {
    if (!(mean >= 0.0) || mean > 700.0)
        throw ValidationError("poisson: mean must lie in [0, 700]");
    const double u = uniform();
    if (mean == 0.0) return 0;
    double prob = std::exp(-mean);
    double cdf = prob;
    std::uint64_t k = 0;
    // The tail cut keeps the loop finite when cdf saturates below u by rounding.
    while (u > cdf && k < 100000) {
        ++k;
        prob *= mean / static_cast<double>(k);
        if (prob == 0.0 && static_cast<double>(k) > mean) break;
        cdf += prob;
    }
    return k;
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -HUGE_VAL;
        if (p == 1.0) return HUGE_VAL;
        return std::nan("");
    }
    // Acklam's rational approximation (relative error < 1.2e-9) ...
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00, 2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // ... polished by one Halley step against erfc.
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

ReturnStats TwoPointModel::stats() const { return {mean(), std::sqrt(variance())}; }

ValidationResult validate_model(const TwoPointModel& m) {
    ValidationResult r;
    if (!std::isfinite(m.up) || m.up <= -1.0) r.violations.push_back({"up", "must be > -1"});
    if (!std::isfinite(m.down) || m.down <= -1.0)
        r.violations.push_back({"down", "must be > -1"});
    if (m.down > m.up) r.violations.push_back({"down", "must not exceed up"});
    if (!(m.p_up >= 0.0 && m.p_up <= 1.0))
        r.violations.push_back({"p_up", "must lie in [0, 1]"});
    return r;
}

ValidationResult validate_model(const GbmJumpParams& m) {
    ValidationResult r;
    if (!std::isfinite(m.mu_star)) r.violations.push_back({"mu_star", "must be finite"});
    if (!std::isfinite(m.sigma_star) || m.sigma_star < 0.0)
        r.violations.push_back({"sigma_star", "must be >= 0"});
    if (!std::isfinite(m.lambda) || m.lambda < 0.0)
        r.violations.push_back({"lambda", "must be >= 0"});
    if (!(m.delta > 0.0 && m.delta < 1.0))
        r.violations.push_back({"delta", "must lie in (0, 1)"});
    if (!std::isfinite(m.dt) || m.dt <= 0.0) r.violations.push_back({"dt", "must be > 0"});
    if (!std::isfinite(m.s0) || m.s0 <= 0.0) r.violations.push_back({"s0", "must be > 0"});
    if (r.ok() && m.lambda * m.dt > 700.0)
        r.violations.push_back({"lambda", "lambda * dt must not exceed 700"});
    return r;
}

namespace {

template <typename Model>
void require_model(const Model& m) {
    if (auto r = validate_model(m); !r.ok())
        throw ValidationError("invalid return model: " + r.to_string());
}

void fill_two_point(const TwoPointModel& m, RandomStream& rng, std::vector<double>& out) {
    for (double& x : out) x = rng.uniform() < m.p_up ? m.up : m.down;
}

void fill_gbm(const GbmJumpParams& m, RandomStream& rng, std::vector<double>& out) {
    const double drift = (m.mu_star - 0.5 * m.sigma_star * m.sigma_star) * m.dt;
    const double vol = m.sigma_star * std::sqrt(m.dt);
    const double jump_mean = m.lambda * m.dt;
    const double log_keep = std::log1p(-m.delta);
    for (double& x : out) {
        const double z = rng.normal();
        const auto jumps = rng.poisson(jump_mean);
        x = std::expm1(drift + vol * z + static_cast<double>(jumps) * log_keep);
    }
}

}  // namespace

std::vector<double> sample_two_point(const TwoPointModel& model, std::size_t n, SeedSpec seed) {
    require_model(model);
    RandomStream rng(seed);
    std::vector<double> out(n);
    fill_two_point(model, rng, out);
    return out;
}

std::vector<double> gbm_jump_returns(const GbmJumpParams& params, std::size_t n_periods,
                                     SeedSpec seed) {
    require_model(params);
    RandomStream rng(seed);
    std::vector<double> out(n_periods);
    fill_gbm(params, rng, out);
    return out;
}

std::vector<double> gbm_jump_prices(const GbmJumpParams& params, std::size_t n_periods,
                                    SeedSpec seed) {
    const auto returns = gbm_jump_returns(params, n_periods, seed);
    std::vector<double> prices;
    prices.reserve(n_periods + 1);
    prices.push_back(params.s0);
    for (double x : returns) prices.push_back(prices.back() * (1.0 + x));
    return prices;
}

ReturnStats gbm_jump_period_stats(const GbmJumpParams& params) {
    require_model(params);
    const double log_mean = (params.mu_star - params.lambda * params.delta) * params.dt;
    const double growth = std::exp(log_mean);
    const double rel_var = std::expm1(
        (params.sigma_star * params.sigma_star + params.lambda * params.delta * params.delta) *
        params.dt);
    return {std::expm1(log_mean), growth * std::sqrt(rel_var)};
}

ReturnStats gbm_jump_period_stats_approx(const GbmJumpParams& params) {
    require_model(params);
    return {params.mu_star * params.dt, params.sigma_star * std::sqrt(params.dt)};
}

ReturnStats period_stats(const ReturnModel& model) {
    return std::visit(
        [](const auto& m) -> ReturnStats {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, TwoPointModel>) {
                require_model(m);
                return m.stats();
            } else {
                return gbm_jump_period_stats(m);
            }
        },
        model);
}

void sample_into(const ReturnModel& model, RandomStream& rng, std::vector<double>& out) {
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, TwoPointModel>)
                fill_two_point(m, rng, out);
            else
                fill_gbm(m, rng, out);
        },
        model);
}

}  // namespace dlp
