#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlp/core.hpp"
#include "dlp/dynamics.hpp"

namespace dlp {

/// Daily closes keyed by ISO-8601 date; dates strictly increasing.
struct PriceSeries {
    std::vector<std::string> dates;
    std::vector<double> closes;

    std::size_t size() const { return closes.size(); }
};

struct ReturnSummary {
    double sample_mean{0.0};
    double sample_std{0.0};
    double x_max_observed{0.0};
    double x_min_observed{0.0};
    std::size_t n_returns{0};
};

/// Unreadable or malformed input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Reads `date,close` CSV. Blank lines are skipped, CRLF is accepted.
/// Throws ParseError for malformed rows and ValidationError for
/// non-positive prices, non-increasing dates or fewer than two rows.
PriceSeries load_prices(std::istream& in);
PriceSeries load_prices_file(const std::string& path);

std::vector<double> to_returns(const PriceSeries& s);

/// Sample mean, sample standard deviation (n - 1 denominator) and extrema.
ReturnSummary summarize(const std::vector<double>& returns);

struct BacktestConfig {
    double alpha{0.5};
    double w{0.25};
    double eps{0.0};
    double v0{1.0};
    double rate{0.0};
    // Unset bounds default to the observed extrema of the series.
    std::optional<double> x_min;
    std::optional<double> x_max;
};

struct BacktestResult {
    PolicyParams policy;
    Trajectory trajectory;
    ReturnSummary summary;
    InvariantReport invariants;
    std::vector<std::string> warnings;
};

/// Resolves the return bounds and validates the policy before any simulation;
/// inadmissible weights throw ValidationError.
PolicyParams resolve_policy(const BacktestConfig& config, const ReturnSummary& summary,
                            std::vector<std::string>* warnings = nullptr);

BacktestResult run_backtest(const PriceSeries& s, const BacktestConfig& config);

}  // namespace dlp
