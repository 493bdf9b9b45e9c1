#include "dlp/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "dlp/analytics.hpp"

namespace dlp {

InvariantError::InvariantError(std::size_t path, InvariantReport report)
    : std::runtime_error("invariant violated on path " + std::to_string(path) + ": " +
                         report.summary()),
      path_(path),
      report_(std::move(report)) {}

namespace {

struct PathFailure {
    std::size_t path;
    InvariantReport report;
};

std::size_t resolve_workers(std::size_t requested, std::size_t n_items) {
    std::size_t w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return std::clamp<std::size_t>(w, 1, std::max<std::size_t>(n_items, 1));
}

// Mean and sample standard deviation, both passes in long double and in index order.
std::pair<double, double> mean_and_std(const std::vector<double>& xs) {
    long double sum = 0.0L;
    long double comp = 0.0L;
    for (double x : xs) {
        const long double y = x - comp;
        const long double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    const long double mean = sum / static_cast<long double>(xs.size());
    if (xs.size() < 2) return {static_cast<double>(mean), 0.0};
    long double ss = 0.0L;
    for (double x : xs) {
        const long double d = x - mean;
        ss += d * d;
    }
    const long double var = ss / static_cast<long double>(xs.size() - 1);
    return {static_cast<double>(mean), static_cast<double>(std::sqrt(var))};
}

}  // namespace

McEstimate estimate(const PolicyParams& p, const ReturnModel& model, std::uint64_t k,
                    std::size_t n_paths, SeedSpec seed, McOptions options) {
    require_valid(p);
    if (n_paths < 1) throw ValidationError("estimate: n_paths must be >= 1");
    period_stats(model);  // validates the model

    std::vector<double> gains(n_paths);
    std::vector<unsigned char> out_of_bounds(n_paths, 0);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex failure_mutex;
    std::optional<PathFailure> failure;

    constexpr std::size_t kChunk = 64;
    auto worker = [&] {
        std::vector<double> returns(k);
        for (;;) {
            const std::size_t begin = next.fetch_add(kChunk);
            if (begin >= n_paths || failed.load(std::memory_order_relaxed)) return;
            const std::size_t end = std::min(n_paths, begin + kChunk);
            for (std::size_t i = begin; i < end; ++i) {
                RandomStream rng({seed.master_seed, seed.stream_id + i});
                sample_into(model, rng, returns);
                const bool inside = std::all_of(returns.begin(), returns.end(), [&](double x) {
                    return x >= p.bounds.x_min && x <= p.bounds.x_max;
                });
                out_of_bounds[i] = inside ? 0 : 1;

                InvariantChecker checker(p, inside);
                AccountState s = initial_state(p);
                bool ok = true;
                for (std::uint64_t j = 0;; ++j) {
                    const Controls u = controls(s, p);
                    ok = checker.observe(s, u) && ok;
                    if (j == k) break;
                    s = step_with_controls(s, returns[j], u, p, options.rate);
                }
                gains[i] = s.total() - p.v0;
                if (!ok) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure || i < failure->path) failure = PathFailure{i, checker.take_report()};
                    failed = true;
                    return;
                }
            }
        }
    };

    const std::size_t n_workers = resolve_workers(options.workers, (n_paths + kChunk - 1) / kChunk);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    }
    if (failure) throw InvariantError(failure->path, std::move(failure->report));

    McEstimate est;
    std::tie(est.mean, est.std) = mean_and_std(gains);
    est.n_paths = n_paths;
    est.k = k;
    est.std_error = est.std / std::sqrt(static_cast<double>(n_paths));
    est.out_of_bounds_paths =
        static_cast<std::size_t>(std::count(out_of_bounds.begin(), out_of_bounds.end(), 1));
    return est;
}

ExactMoments brute_force(const PolicyParams& p, const TwoPointModel& model, std::uint64_t k) {
    require_valid(p);
    if (auto r = validate_model(model); !r.ok())
        throw ValidationError("brute_force: " + r.to_string());
    if (k > kBruteForceMaxSteps)
        throw ValidationError("brute_force: k must not exceed 20 (2^k paths)");

    using real = long double;
    const real w = p.w;
    const real a = p.alpha;
    const real pu = model.p_up;
    const std::uint64_t n = std::uint64_t{1} << k;

    // Enumerate every up/down pattern; bit j of `mask` set means period j went up.
    std::vector<real> gain(n);
    std::vector<real> prob(n);
    for (std::uint64_t mask = 0; mask < n; ++mask) {
        real long_growth = 1.0L;
        real short_growth = 1.0L;
        real pr = 1.0L;
        for (std::uint64_t j = 0; j < k; ++j) {
            const bool up = (mask >> j) & 1u;
            const real x = up ? model.up : model.down;
            long_growth *= 1.0L + w * (x - p.eps);
            short_growth *= 1.0L - w * (x + p.eps);
            pr *= up ? pu : 1.0L - pu;
        }
        gain[mask] = static_cast<real>(p.v0) * (a * long_growth + (1.0L - a) * short_growth - 1.0L);
        prob[mask] = pr;
    }
    real mean = 0.0L;
    for (std::uint64_t i = 0; i < n; ++i) mean += prob[i] * gain[i];
    real var = 0.0L;
    for (std::uint64_t i = 0; i < n; ++i) {
        const real d = gain[i] - mean;
        var += prob[i] * d * d;
    }
    return {static_cast<double>(mean), static_cast<double>(var)};
}

std::vector<double> make_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
        throw ValidationError("grid: need finite lo <= hi and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> grid;
    grid.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double v = lo + static_cast<double>(i) * step;
        grid.push_back(std::round(v * 1e12) / 1e12);
    }
    return grid;
}

std::vector<SweepRow> sweep(const SweepConfig& config, SeedSpec seed) {
    require_valid(config.policy);
    if (config.n_paths < 1) throw ValidationError("sweep: n_paths must be >= 1");
    if (config.n_paths > (std::uint64_t{1} << 32))
        throw ValidationError("sweep: n_paths must be below 2^32");

    std::vector<SweepRow> rows;
    rows.reserve(config.mu_stars.size());
    for (std::size_t g = 0; g < config.mu_stars.size(); ++g) {
        SweepRow row;
        row.mu_star = config.mu_stars[g];
        RandomStream vol_rng({seed.master_seed, (std::uint64_t{1} << 63) | g});
        row.sigma_star = 2.0 * std::abs(row.mu_star) * vol_rng.uniform();

        GbmJumpParams jp = config.jumps;
        jp.mu_star = row.mu_star;
        jp.sigma_star = row.sigma_star;

        const ReturnStats exact = gbm_jump_period_stats(jp);
        row.analytic_mean = expected_gain(config.policy, exact, config.k);
        row.analytic_std = std_gain(config.policy, exact, config.k);
        const ReturnStats approx = gbm_jump_period_stats_approx(jp);
        row.approx_mean = expected_gain(config.policy, approx, config.k);
        row.approx_std = std_gain(config.policy, approx, config.k);

        row.mc = estimate(config.policy, jp, config.k, config.n_paths,
                          {seed.master_seed, static_cast<std::uint64_t>(g) << 32},
                          config.options);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace dlp
