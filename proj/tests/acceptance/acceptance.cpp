// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   acceptance [--prices FILE] [--freeze-goldens] [--only N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "dlp/analytics.hpp"
#include "dlp/backtest.hpp"
#include "dlp/dynamics.hpp"
#include "dlp/montecarlo.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace dlp;
using dlp::testing::random_policy;

namespace {

struct Outcome {
    bool pass{false};
    std::string detail;
};

struct Options {
    std::string prices{DLP_BTC_SNAPSHOT};
    std::string golden_dir{DLP_GOLDEN_DIR};
    bool freeze{false};
    int only{0};
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Relative error with the denominator floored at `floor`, for quantities that can vanish.
double rel(double a, double b, double floor) {
    return std::abs(a - b) / std::max(std::abs(b), floor);
}

TwoPointModel random_model(std::mt19937_64& rng, const PolicyParams& p) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < 0.25) return {p.bounds.x_max, p.bounds.x_min, u(rng)};
    return {p.bounds.x_max * u(rng), p.bounds.x_min * u(rng), u(rng)};
}

Outcome c1_brute_force() {
    std::mt19937_64 rng(20220801);
    double worst_mean = 0.0, worst_var = 0.0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        const PolicyParams p = random_policy(rng);
        const TwoPointModel m = random_model(rng, p);
        const std::uint64_t k = 1 + static_cast<std::uint64_t>(i % 12);
        const auto exact = brute_force(p, m, k);
        const ReturnStats s = m.stats();
        // The floor is far below any gain a trade can produce at these sizes.
        worst_mean = std::max(worst_mean, rel(expected_gain(p, s, k), exact.mean, 1e-12 * p.v0));
        worst_var = std::max(worst_var, rel(variance_gain(p, s, k), exact.variance, 1e-24 * p.v0 * p.v0));
    }
    const bool ok = worst_mean <= 1e-10 && worst_var <= 1e-10;
    return {ok, std::to_string(n) + " instances, max rel err mean " + fmt("%.2e", worst_mean) +
                    ", variance " + fmt("%.2e", worst_var)};
}

Outcome c2_monte_carlo() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int mean_fail = 0, std_fail = 0;
    double worst_z = 0.0, worst_std = 0.0;
    for (int i = 0; i < 20; ++i) {
        const PolicyParams p = random_policy(rng);
        const TwoPointModel m = random_model(rng, p);
        const std::uint64_t k = 10 + 2 * static_cast<std::uint64_t>(i);
        const auto e = estimate(p, m, k, 100000, {1000 + static_cast<std::uint64_t>(i), 0});
        const ReturnStats s = m.stats();
        const double g = expected_gain(p, s, k);
        const double sd = std_gain(p, s, k);
        const double z = e.std_error > 0.0 ? std::abs(e.mean - g) / e.std_error : std::abs(e.mean - g);
        worst_z = std::max(worst_z, z);
        if (z > 4.0) ++mean_fail;
        if (s.sigma > 0.0) {
            const double r = std::abs(e.std - sd) / sd;
            worst_std = std::max(worst_std, r);
            if (r > 0.05) ++std_fail;
        }
    }
    return {mean_fail == 0 && std_fail == 0,
            "20 configs x 1e5 paths, max |z| " + fmt("%.2f", worst_z) + ", max std rel err " +
                fmt("%.2e", worst_std)};
}

Outcome c3_zero_cost_positivity() {
    int checked = 0, bad = 0;
    for (double w : {0.1, max_weight(0.0, 1.0)})
        for (std::uint64_t k : {2u, 10u, 252u}) {
            const PolicyParams p{0.5, w, 0.0, 1.0, {-0.99, 1.0}};
            if (expected_gain(p, {0.0, 0.0}, k) != 0.0) ++bad;
            ++checked;
            for (double mu : {0.001, 0.01, 0.1, 0.5})
                for (double sgn : {-1.0, 1.0}) {
                    ++checked;
                    if (!(expected_gain(p, {sgn * mu, 0.0}, k) > 0.0)) ++bad;
                }
        }
    return {bad == 0, std::to_string(checked) + " grid evaluations, " + std::to_string(bad) + " wrong sign"};
}

Outcome c4_costly_positivity() {
    int checked = 0, bad = 0, minima_bad = 0;
    for (double alpha : {0.25, 0.5, 0.75})
        for (double eps : {0.0001, 0.001})
            for (std::uint64_t k : {10u, 252u})
                for (double w : {0.1, 0.25, 0.5, max_weight(eps, 1.0)}) {
                    const PolicyParams p{alpha, w, eps, 1.0, {-0.99, 1.0}};
                    const auto c = critical_mus(p, k);
                    for (int i = -900; i <= 900; ++i) {
                        const double mu = i * 1e-3;
                        if (mu > c.mu_plus || mu < c.mu_minus) {
                            ++checked;
                            if (!(expected_gain(p, {mu, 0.0}, k) > 0.0)) ++bad;
                        }
                    }
                    if (!(expected_gain(p, {minimizing_mu(p, k), 0.0}, k) < 0.0)) ++minima_bad;
                }
    return {bad == 0 && minima_bad == 0,
            std::to_string(checked) + " grid points beyond mu+/mu-, " + std::to_string(bad) +
                " non-positive; " + std::to_string(minima_bad) + " non-negative minima"};
}

Outcome c5_limit() {
    const PolicyParams p{0.5, 0.5, 0.001, 1.0, {-0.99, 1.0}};
    const auto c = critical_mus(p, 1000000);
    const double dp = std::abs(c.mu_plus - p.eps), dm = std::abs(c.mu_minus + p.eps);
    return {dp <= 1e-5 && dm <= 1e-5,
            "k = 1e6: |mu+ - eps| = " + fmt("%.2e", dp) + ", |mu- + eps| = " + fmt("%.2e", dm)};
}

long double fd2(const std::function<long double(double)>& f, double x, double h) {
    return (f(x + h) - 2.0L * f(x) + f(x - h)) / (static_cast<long double>(h) * h);
}

Outcome c6_convexity() {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> kd(2, 252);
    const double h = 1e-5;
    int non_convex = 0, mismatched = 0, compared = 0;
    double worst = 0.0;
    for (int cfg = 0; cfg < 50; ++cfg) {
        PolicyParams p = random_policy(rng);
        p.alpha = 0.02 + 0.96 * u(rng);
        const std::uint64_t k = kd(rng);
        // Keep the drift where (1 + w(mu - eps))^k stays representable.
        const double mu = (2.0 * u(rng) - 1.0) * std::min(0.1, 2.0 / k);
        const double w_max = max_weight(p.eps, p.bounds.x_max);
        for (int i = 1; i <= 101; ++i) {
            const double w = w_max * i / 102.0;
            PolicyParams q = p;
            const auto in_w = [&](double ww) {
                q.w = ww;
                return expected_gain_ext(q, mu, k);
            };
            const double fw = static_cast<double>(fd2(in_w, w, h));
            const double ew = second_derivative_in_w(p, {mu, 0.0}, k, w);

            PolicyParams r = p;
            r.w = w;
            const auto in_mu = [&](double m) { return expected_gain_ext(r, m, k); };
            const double fm = static_cast<double>(fd2(in_mu, mu, h));
            const double em = second_derivative_in_mu(r, {mu, 0.0}, k);

            if (!(fw > 0.0) || !(fm > 0.0)) ++non_convex;
            for (auto [fd, exact] : {std::pair{fw, ew}, std::pair{fm, em}}) {
                // "Away from zeros": skip curvatures too small for a 1e-5 stencil to resolve.
                if (exact < 1e-6 * p.v0) continue;
                ++compared;
                const double e = std::abs(fd - exact) / exact;
                worst = std::max(worst, e);
                if (e > 1e-4) ++mismatched;
            }
        }
    }
    return {non_convex == 0 && mismatched == 0,
            "50 configs x 101 points: " + std::to_string(non_convex) + " non-convex, " +
                std::to_string(compared) + " derivative comparisons, max rel err " + fmt("%.2e", worst)};
}

Outcome c7_invariants() {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> kd(1, 500);
    std::size_t violations = 0, steps = 0;
    std::string first;
    for (int i = 0; i < 10000; ++i) {
        const PolicyParams p = random_policy(rng);
        const TwoPointModel m = random_model(rng, p);
        const auto xs = sample_two_point(m, kd(rng), {7, static_cast<std::uint64_t>(i)});
        const auto report = check_invariants(run_path(xs, p), p);
        steps += report.steps_checked;
        violations += report.violations.size();
        if (!report.ok() && first.empty()) first = report.summary();
    }
    return {violations == 0, "1e4 trajectories, " + std::to_string(steps) + " steps, " +
                                 std::to_string(violations) + " violations" +
                                 (first.empty() ? "" : " (" + first + ")")};
}

Outcome c8_sls() {
    std::mt19937_64 rng(8);
    int mismatched = 0;
    std::size_t steps = 0;
    for (int i = 0; i < 100; ++i) {
        PolicyParams p = random_policy(rng);
        p.alpha = 0.5;
        p.v0 = 1.0;
        const auto xs = sample_two_point(random_model(rng, p), 500, {8, static_cast<std::uint64_t>(i)});
        const auto a = run_path(xs, p);
        const auto b = run_path_sls(xs, p, p.w * p.v0 / 2.0);
        bool same = a.size() == b.size();
        for (std::size_t k = 0; same && k < a.size(); ++k)
            same = a.states[k].v_long == b.states[k].v_long &&
                   a.states[k].v_short == b.states[k].v_short &&
                   a.controls[k].pi_long == b.controls[k].pi_long &&
                   a.controls[k].pi_short == b.controls[k].pi_short;
        steps += a.size();
        if (!same) ++mismatched;
    }
    return {mismatched == 0, "100 paths, " + std::to_string(steps) + " states compared bitwise, " +
                                 std::to_string(mismatched) + " differ"};
}

Outcome c9_sweep() {
    SweepConfig cfg;
    cfg.mu_stars = {-0.9, -0.5, -0.1, 0.0, 0.1, 0.5, 0.9};
    cfg.n_paths = 2000;
    cfg.k = 252;
    const double eps = 0.0001;
    cfg.policy = {0.5, 1.0 / (1.0 + eps), eps, 1.0, {-0.99, 1.0}};
    cfg.jumps = {0.0, 0.0, 0.1, 0.05, 1.0 / 252.0, 1.0};
    const auto rows = sweep(cfg, {20221015, 0});

    bool ok = true;
    double worst_z = 0.0;
    for (const auto& r : rows) {
        const double z = std::abs(r.mc.mean - r.analytic_mean) / r.mc.std_error;
        worst_z = std::max(worst_z, z);
        if (!(z <= 3.0)) ok = false;
    }
    const double lo = rows.front().mc.mean, mid = rows[3].mc.mean, hi = rows.back().mc.mean;
    ok = ok && lo > 0.0 && hi > 0.0 && mid <= 0.0;
    return {ok, "7 drifts x 2000 paths, max |z| " + fmt("%.2f", worst_z) + "; mean at -0.9 " +
                    fmt("%.4g", lo) + ", at 0 " + fmt("%.4g", mid) + ", at 0.9 " + fmt("%.4g", hi)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::vector<std::string>& args, std::string& err_text) {
    std::vector<const char*> argv{"dlp"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    err_text = err.str();
    return code;
}

Outcome c10_btc(const Options& opt) {
    if (!fs::exists(opt.prices))
        return {false, "price snapshot not found at " + opt.prices +
                           " (no BTC-USD daily file for 2020-01-02..2022-08-01 is bundled)"};
    PriceSeries s;
    try {
        s = load_prices_file(opt.prices);
    } catch (const std::exception& e) {
        return {false, std::string("cannot load snapshot: ") + e.what()};
    }
    const auto summary = summarize(to_returns(s));
    std::string detail = std::to_string(s.size()) + " prices, " + std::to_string(summary.n_returns) +
                         " returns, x_max " + fmt("%.4f", summary.x_max_observed) + ", x_min " +
                         fmt("%.4f", summary.x_min_observed);
    bool ok = summary.n_returns == 952 && std::abs(summary.x_max_observed - 0.1875) <= 0.0005 &&
              std::abs(summary.x_min_observed + 0.3717) <= 0.0005;

    const fs::path scratch = fs::temp_directory_path() / "dlp_acceptance_btc";
    fs::remove_all(scratch);
    int golden_missing = 0, golden_diff = 0, rerun_diff = 0;
    for (const char* eps : {"0.0001", "0.001"}) {
        const std::string tag = std::string("eps_") + eps;
        const fs::path a = scratch / tag / "a", b = scratch / tag / "b";
        for (const auto& dir : {a, b}) {
            std::string err;
            const int code = run_cli({"backtest", "--prices", opt.prices, "--w", "0.25", "--eps", eps,
                                      "--v0", "100000", "--alpha-list", "0,0.25,0.5,0.75,1",
                                      "--out-dir", dir.string(), "--out", (dir / "summary.json").string()},
                                     err);
            if (code != 0) {
                ok = false;
                detail += "; backtest eps=" + std::string(eps) + " exited " + std::to_string(code);
            }
        }
        const fs::path golden = fs::path(opt.golden_dir) / ("btc_" + tag);
        if (opt.freeze) fs::create_directories(golden);
        for (const char* alpha : {"0", "0.25", "0.5", "0.75", "1"}) {
            const std::string name = std::string("trajectory_alpha_") + alpha + ".csv";
            const std::string got = slurp(a / name);
            if (got.empty() || got != slurp(b / name)) ++rerun_diff;
            if (opt.freeze) {
                std::ofstream(golden / name, std::ios::binary) << got;
            } else if (!fs::exists(golden / name)) {
                ++golden_missing;
            } else if (slurp(golden / name) != got) {
                ++golden_diff;
            }
        }
    }
    fs::remove_all(scratch);
    ok = ok && rerun_diff == 0 && golden_missing == 0 && golden_diff == 0;
    detail += "; 10 trajectories, " + std::to_string(rerun_diff) + " differ on rerun, " +
              (opt.freeze ? std::string("goldens written")
                          : std::to_string(golden_diff) + " differ from golden, " +
                                std::to_string(golden_missing) + " golden missing");
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--freeze-goldens")) {
            opt.freeze = true;
        } else if (!std::strcmp(argv[i], "--prices") && i + 1 < argc) {
            opt.prices = argv[++i];
        } else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
            opt.only = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--prices FILE] [--freeze-goldens] [--only N]\n";
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"closed forms match brute-force enumeration", c1_brute_force},
        {"closed forms match Monte Carlo", c2_monte_carlo},
        {"positive expectation without costs at alpha = 1/2", c3_zero_cost_positivity},
        {"positive expectation beyond mu+/mu- with costs", c4_costly_positivity},
        {"critical points approach +/-eps as k grows", c5_limit},
        {"strict convexity in w and mu", c6_convexity},
        {"survivability, lower bound, cash financing", c7_invariants},
        {"SLS equivalence", c8_sls},
        {"GBM-with-jumps sweep at desk scale", c9_sweep},
        {"BTC-USD backtest", [&] { return c10_btc(opt); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (opt.only && opt.only != static_cast<int>(i + 1)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("%s [%zu] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
