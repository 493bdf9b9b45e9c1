#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dlp/analytics.hpp"
#include "dlp/backtest.hpp"
#include "dlp/montecarlo.hpp"
#include "io.hpp"

namespace dlp::cli {

namespace {

using io::json;

struct Common {
    std::string out_path;
    std::string format;
    std::optional<std::uint64_t> seed;
    std::size_t workers{0};
};

struct PolicyFlags {
    double alpha{0.5};
    std::optional<double> w;
    std::string eps{"0"};
    double v0{1.0};
    std::optional<double> x_min;
    std::optional<double> x_max;
};

struct AnalyticsFlags {
    PolicyFlags policy;
    double mu{0.0};
    double sigma{0.0};
    std::uint64_t k{0};
    bool critical{false};
};

struct MonteCarloFlags {
    PolicyFlags policy;
    std::string model{"two-point"};
    double up{0.1};
    double down{-0.1};
    double p_up{0.5};
    double mu_star{0.0};
    double sigma_star{0.0};
    double lambda{0.1};
    double delta{0.05};
    double dt{1.0 / 252.0};
    std::uint64_t k{252};
    std::size_t paths{10000};
    std::string rate{"0"};
};

struct SweepFlags {
    PolicyFlags policy;
    double mu_min{-0.9};
    double mu_max{0.9};
    double mu_step{0.01};
    std::string mu_stars;
    double lambda{0.1};
    double delta{0.05};
    double dt{1.0 / 252.0};
    std::uint64_t k{252};
    std::size_t paths{10000};
};

struct BacktestFlags {
    PolicyFlags policy;
    std::string prices;
    std::string alpha_list;
    std::string out_dir{"."};
    std::string rate{"0"};
};

// Writes to --out when given, otherwise to the caller's stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw DataError("cannot open output file '" + path + "'");
            os_ = &file_;
        }
    }
    std::ostream& operator*() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

void add_common(CLI::App* cmd, Common& c, bool seeded) {
    cmd->add_option("--out", c.out_path, "Output file (default: standard output)");
    if (seeded) {
        cmd->add_option("--seed", c.seed, "Master seed (u64)")->required();
        cmd->add_option("--workers", c.workers, "Worker threads (0 = all cores)");
    }
}

void add_policy(CLI::App* cmd, PolicyFlags& p, bool weight_required) {
    cmd->add_option("--alpha", p.alpha, "Allocation to the long account, in [0, 1]");
    auto* w = cmd->add_option("--w", p.w, "Decision weight, in [0, w_max]");
    if (weight_required) w->required();
    cmd->add_option("--eps", p.eps, "Transaction cost rate, decimal or percent (0.01%)");
    cmd->add_option("--v0", p.v0, "Initial account value");
    cmd->add_option("--x-min", p.x_min, "Lower return bound");
    cmd->add_option("--x-max", p.x_max, "Upper return bound");
}

PolicyParams make_policy(const PolicyFlags& f, double default_x_min, double default_x_max) {
    PolicyParams p;
    p.alpha = f.alpha;
    p.eps = io::parse_rate(f.eps);
    p.w = f.w.value_or(0.0);
    p.v0 = f.v0;
    p.bounds = {f.x_min.value_or(default_x_min), f.x_max.value_or(default_x_max)};
    require_valid(p);
    return p;
}

void check_format(const std::string& format, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (format == a) return;
    throw ValidationError("unsupported --format '" + format + "'");
}

int cmd_analytics(const AnalyticsFlags& f, const Common& c, std::ostream& out) {
    const std::string format = c.format.empty() ? "json" : c.format;
    check_format(format, {"json", "csv"});
    const PolicyParams p = make_policy(f.policy, -0.99, 1.0);
    const ReturnStats stats{f.mu, f.sigma};
    if (auto r = validate_stats(stats); !r.ok()) throw ValidationError(r.to_string());

    const AnalyticsReport report = analyze(p, stats, f.k);
    if (f.critical && !(report.mu_plus && report.mu_zero))
        throw ValidationError("critical points need alpha in (0, 1), w > 0 and k > 1");

    Sink sink(c.out_path, out);
    if (format == "json") {
        *sink << io::to_json(report).dump(2) << '\n';
    } else {
        auto opt = [](const std::optional<double>& v) {
            return v ? io::format_double(*v) : std::string{};
        };
        *sink << "expected_gain,variance,std,mu_plus,mu_minus,mu_zero\n"
              << io::format_double(report.expected_gain) << ','
              << io::format_double(report.variance) << ',' << io::format_double(report.std)
              << ',' << opt(report.mu_plus) << ',' << opt(report.mu_minus) << ','
              << opt(report.mu_zero) << '\n';
    }
    return kExitOk;
}

int cmd_montecarlo(const MonteCarloFlags& f, const Common& c, std::ostream& out) {
    const std::string format = c.format.empty() ? "json" : c.format;
    check_format(format, {"json", "csv"});

    ReturnModel model;
    json model_json;
    double lo = -0.99, hi = 1.0;
    if (f.model == "two-point") {
        model = TwoPointModel{f.up, f.down, f.p_up};
        model_json = {{"type", "two-point"}, {"up", f.up}, {"down", f.down}, {"p_up", f.p_up}};
        if (f.down < 0.0 && f.up > 0.0) lo = f.down, hi = f.up;
    } else if (f.model == "gbm-jump") {
        model = GbmJumpParams{f.mu_star, f.sigma_star, f.lambda, f.delta, f.dt, 1.0};
        model_json = {{"type", "gbm-jump"}, {"mu_star", f.mu_star}, {"sigma_star", f.sigma_star},
                      {"lambda", f.lambda}, {"delta", f.delta}, {"dt", f.dt}};
    } else {
        throw ValidationError("unknown --model '" + f.model + "'");
    }
    const PolicyParams p = make_policy(f.policy, lo, hi);
    const ReturnStats stats = period_stats(model);
    McOptions opts{c.workers, io::parse_rate(f.rate)};
    const McEstimate est = estimate(p, model, f.k, f.paths, {*c.seed, 0}, opts);
    const double a_mean = expected_gain(p, stats, f.k);
    const double a_std = std_gain(p, stats, f.k);

    Sink sink(c.out_path, out);
    if (format == "json") {
        json j = {{"mc", io::to_json(est)},
                  {"analytic", {{"expected_gain", a_mean}, {"std", a_std}}},
                  {"period_stats", io::to_json(stats)},
                  {"policy", io::to_json(p)},
                  {"model", model_json},
                  {"seed", *c.seed}};
        if (opts.rate != 0.0) j["rate"] = opts.rate;
        *sink << j.dump(2) << '\n';
    } else {
        *sink << "mean,std,std_error,n_paths,k,analytic_mean,analytic_std\n"
              << io::format_double(est.mean) << ',' << io::format_double(est.std) << ','
              << io::format_double(est.std_error) << ',' << est.n_paths << ',' << est.k << ','
              << io::format_double(a_mean) << ',' << io::format_double(a_std) << '\n';
    }
    return kExitOk;
}

int cmd_sweep(const SweepFlags& f, const Common& c, std::ostream& out) {
    const std::string format = c.format.empty() ? "csv" : c.format;
    check_format(format, {"json", "csv"});

    SweepConfig cfg;
    PolicyFlags pf = f.policy;
    const double eps = io::parse_rate(pf.eps);
    if (!pf.w) pf.w = 1.0 / (1.0 + eps);
    cfg.policy = make_policy(pf, -0.99, 1.0);
    cfg.mu_stars = f.mu_stars.empty() ? make_grid(f.mu_min, f.mu_max, f.mu_step)
                                      : io::parse_list(f.mu_stars);
    cfg.n_paths = f.paths;
    cfg.k = f.k;
    cfg.jumps = GbmJumpParams{0.0, 0.0, f.lambda, f.delta, f.dt, 1.0};
    cfg.options.workers = c.workers;

    const auto rows = sweep(cfg, {*c.seed, 0});
    Sink sink(c.out_path, out);
    if (format == "csv") {
        io::write_sweep_csv(*sink, rows);
    } else {
        json arr = json::array();
        for (const auto& r : rows) arr.push_back(io::to_json(r));
        *sink << json{{"policy", io::to_json(cfg.policy)},
                      {"k", cfg.k},
                      {"seed", *c.seed},
                      {"rows", arr}}
                     .dump(2)
              << '\n';
    }
    return kExitOk;
}

std::string alpha_tag(double alpha) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", alpha);
    return buf;
}

int cmd_backtest(const BacktestFlags& f, const Common& c, std::ostream& out, std::ostream& err) {
    if (!c.format.empty()) check_format(c.format, {"json"});
    const PriceSeries series = load_prices_file(f.prices);
    const std::vector<double> alphas =
        f.alpha_list.empty() ? std::vector<double>{f.policy.alpha} : io::parse_list(f.alpha_list);

    BacktestConfig base;
    base.w = f.policy.w.value_or(0.0);
    base.eps = io::parse_rate(f.policy.eps);
    base.v0 = f.policy.v0;
    base.rate = io::parse_rate(f.rate);
    base.x_min = f.policy.x_min;
    base.x_max = f.policy.x_max;

    // Validate every alpha before writing anything.
    const ReturnSummary summary = summarize(to_returns(series));
    std::vector<std::string> warnings;
    for (double a : alphas) {
        BacktestConfig cfg = base;
        cfg.alpha = a;
        resolve_policy(cfg, summary, a == alphas.front() ? &warnings : nullptr);
    }

    std::filesystem::create_directories(f.out_dir);
    json runs = json::array();
    bool violated = false;
    for (double a : alphas) {
        BacktestConfig cfg = base;
        cfg.alpha = a;
        const BacktestResult r = run_backtest(series, cfg);
        const auto file = std::filesystem::path(f.out_dir) / ("trajectory_alpha_" + alpha_tag(a) + ".csv");
        std::ofstream os(file, std::ios::binary);
        if (!os) throw DataError("cannot write '" + file.string() + "'");
        io::write_trajectory_csv(os, r.trajectory, series.dates);
        if (!r.invariants.ok()) {
            violated = true;
            err << "alpha " << a << ": " << r.invariants.summary() << '\n';
        }
        runs.push_back({{"alpha", a},
                        {"final_gain_loss", r.trajectory.final_gain()},
                        {"final_value", r.trajectory.final_value()},
                        {"invariant_violations", r.invariants.violations.size()},
                        {"file", file.string()}});
    }
    for (const auto& w : warnings) err << "warning: " << w << '\n';

    Sink sink(c.out_path, out);
    *sink << json{{"prices", f.prices},
                  {"first_date", series.dates.front()},
                  {"last_date", series.dates.back()},
                  {"n_prices", series.size()},
                  {"summary", io::to_json(summary)},
                  {"w", base.w},
                  {"eps", base.eps},
                  {"v0", base.v0},
                  {"warnings", warnings},
                  {"runs", runs}}
                 .dump(2)
          << '\n';
    return violated ? kExitInternal : kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Double linear trading policy: closed forms, Monte Carlo and backtests", "dlp"};
    app.require_subcommand(1);

    Common common;
    AnalyticsFlags af;
    MonteCarloFlags mf;
    SweepFlags sf;
    BacktestFlags bf;

    auto* analytics = app.add_subcommand("analytics", "Closed-form mean/variance and thresholds of G_k");
    add_common(analytics, common, false);
    analytics->add_option("--format", common.format, "json (default) or csv");
    add_policy(analytics, af.policy, true);
    analytics->add_option("--mu", af.mu, "Per-period mean return")->required();
    analytics->add_option("--sigma", af.sigma, "Per-period return std");
    analytics->add_option("--k", af.k, "Number of periods")->required();
    analytics->add_flag("--critical", af.critical, "Fail unless mu_plus/mu_minus/mu_zero are defined");

    auto* mc = app.add_subcommand("montecarlo", "Monte-Carlo estimate of G_k");
    add_common(mc, common, true);
    mc->add_option("--format", common.format, "json (default) or csv");
    add_policy(mc, mf.policy, true);
    mc->add_option("--model", mf.model, "two-point or gbm-jump");
    mc->add_option("--up", mf.up);
    mc->add_option("--down", mf.down);
    mc->add_option("--p-up", mf.p_up);
    mc->add_option("--mu-star", mf.mu_star, "Annualized drift");
    mc->add_option("--sigma-star", mf.sigma_star, "Annualized volatility");
    mc->add_option("--lambda", mf.lambda, "Jump intensity");
    mc->add_option("--delta", mf.delta, "Jump size");
    mc->add_option("--dt", mf.dt, "Period length in years");
    mc->add_option("--k", mf.k, "Number of periods");
    mc->add_option("--paths", mf.paths, "Number of paths");
    mc->add_option("--rate", mf.rate, "Per-period risk-free rate on the long account");

    auto* sw = app.add_subcommand("sweep", "GBM-with-jumps sweep over the annualized drift");
    add_common(sw, common, true);
    sw->add_option("--format", common.format, "csv (default) or json");
    sf.policy.eps = "0.01%";
    add_policy(sw, sf.policy, false);
    sw->add_option("--mu-min", sf.mu_min);
    sw->add_option("--mu-max", sf.mu_max);
    sw->add_option("--mu-step", sf.mu_step);
    sw->add_option("--mu-stars", sf.mu_stars, "Explicit comma-separated drift list");
    sw->add_option("--lambda", sf.lambda);
    sw->add_option("--delta", sf.delta);
    sw->add_option("--dt", sf.dt);
    sw->add_option("--k", sf.k);
    sw->add_option("--paths", sf.paths);

    auto* bt = app.add_subcommand("backtest", "Run the policy over a date,close price file");
    add_common(bt, common, false);
    bt->add_option("--format", common.format, "json (summary)");
    add_policy(bt, bf.policy, true);
    bt->add_option("--prices", bf.prices, "CSV with header date,close")->required();
    bt->add_option("--alpha-list", bf.alpha_list, "Comma-separated allocations");
    bt->add_option("--out-dir", bf.out_dir, "Directory for trajectory CSVs");
    bt->add_option("--rate", bf.rate, "Per-period risk-free rate on the long account");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (analytics->parsed()) return cmd_analytics(af, common, out);
        if (mc->parsed()) return cmd_montecarlo(mf, common, out);
        if (sw->parsed()) return cmd_sweep(sf, common, out);
        if (bt->parsed()) return cmd_backtest(bf, common, out, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace dlp::cli
