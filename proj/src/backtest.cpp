#include "dlp/backtest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace dlp {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

bool parse_int(std::string_view s, int& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

bool valid_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    int y, m, d;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) ||
        !parse_int(s.substr(8, 2), d))
        return false;
    const std::chrono::year_month_day ymd{std::chrono::year{y},
                                          std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    return ymd.ok();
}

}  // namespace

PriceSeries load_prices(std::istream& in) {
    PriceSeries series;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (line_no == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
        view = trim(view);
        if (view.empty()) continue;

        const auto comma = view.find(',');
        if (comma == std::string_view::npos || view.find(',', comma + 1) != std::string_view::npos)
            throw ParseError(line_no, "expected exactly two comma-separated fields");
        const std::string_view date = trim(view.substr(0, comma));
        const std::string_view close = trim(view.substr(comma + 1));

        if (!header_seen) {
            if (date != "date" || close != "close")
                throw ParseError(line_no, "expected header 'date,close'");
            header_seen = true;
            continue;
        }
        if (!valid_iso_date(date))
            throw ParseError(line_no, "invalid ISO-8601 date '" + std::string(date) + "'");
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(close.data(), close.data() + close.size(), value);
        if (ec != std::errc{} || ptr != close.data() + close.size() || !std::isfinite(value))
            throw ParseError(line_no, "invalid price '" + std::string(close) + "'");
        if (value <= 0.0)
            throw ValidationError("line " + std::to_string(line_no) + ": non-positive price " +
                                  std::string(close));
        if (!series.dates.empty() && !(series.dates.back() < date))
            throw ValidationError("line " + std::to_string(line_no) + ": date " +
                                  std::string(date) + " does not follow " + series.dates.back());
        series.dates.emplace_back(date);
        series.closes.push_back(value);
    }
    if (!header_seen) throw ParseError(line_no, "missing header 'date,close'");
    if (series.size() < 2)
        throw ValidationError("price series needs at least two rows, got " +
                              std::to_string(series.size()));
    return series;
}

PriceSeries load_prices_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open price file '" + path + "'");
    return load_prices(in);
}

std::vector<double> to_returns(const PriceSeries& s) {
    if (s.size() < 2) throw ValidationError("to_returns: need at least two prices");
    std::vector<double> out;
    out.reserve(s.size() - 1);
    for (std::size_t k = 0; k + 1 < s.size(); ++k)
        out.push_back((s.closes[k + 1] - s.closes[k]) / s.closes[k]);
    return out;
}

ReturnSummary summarize(const std::vector<double>& returns) {
    if (returns.empty()) throw ValidationError("summarize: empty return series");
    ReturnSummary r;
    r.n_returns = returns.size();
    long double sum = 0.0L;
    r.x_min_observed = returns.front();
    r.x_max_observed = returns.front();
    for (double x : returns) {
        sum += x;
        r.x_min_observed = std::min(r.x_min_observed, x);
        r.x_max_observed = std::max(r.x_max_observed, x);
    }
    const long double mean = sum / static_cast<long double>(returns.size());
    long double ss = 0.0L;
    for (double x : returns) ss += (x - mean) * (x - mean);
    r.sample_mean = static_cast<double>(mean);
    r.sample_std = returns.size() > 1
                       ? static_cast<double>(std::sqrt(ss / static_cast<long double>(returns.size() - 1)))
                       : 0.0;
    return r;
}

PolicyParams resolve_policy(const BacktestConfig& config, const ReturnSummary& summary,
                            std::vector<std::string>* warnings) {
    PolicyParams p;
    p.alpha = config.alpha;
    p.w = config.w;
    p.eps = config.eps;
    p.v0 = config.v0;
    p.bounds.x_min = config.x_min.value_or(summary.x_min_observed);
    p.bounds.x_max = config.x_max.value_or(summary.x_max_observed);

    if (warnings) {
        if (!config.x_min || !config.x_max)
            warnings->push_back("return bounds default to the observed extrema (in-sample)");
        if (summary.x_max_observed > p.bounds.x_max || summary.x_min_observed < p.bounds.x_min)
            warnings->push_back("observed returns leave the configured bounds; the worst-case "
                                "lower bound is not checked");
    }
    require_valid(p);
    return p;
}

BacktestResult run_backtest(const PriceSeries& s, const BacktestConfig& config) {
    const auto returns = to_returns(s);
    BacktestResult result;
    result.summary = summarize(returns);
    result.policy = resolve_policy(config, result.summary, &result.warnings);
    result.trajectory = run_path(returns, result.policy, config.rate);

    const bool inside = result.summary.x_max_observed <= result.policy.bounds.x_max &&
                        result.summary.x_min_observed >= result.policy.bounds.x_min;
    InvariantChecker checker(result.policy, inside);
    const auto& t = result.trajectory;
    for (std::size_t k = 0; k < t.size(); ++k)
        checker.observe(t.states[k], t.controls[k], t.gain_loss[k]);
    result.invariants = checker.take_report();
    return result;
}

}  // namespace dlp
