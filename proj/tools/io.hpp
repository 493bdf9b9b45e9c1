#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "dlp/analytics.hpp"
#include "dlp/backtest.hpp"
#include "dlp/montecarlo.hpp"
#include "json.hpp"

namespace dlp::io {

using nlohmann::json;

/// Shortest-safe textual form: 17 significant digits, round-trips exactly.
std::string format_double(double v);

/// Parses a rate given either as a decimal ("0.0001") or a percentage
/// ("0.01%"). Throws ValidationError on malformed input.
double parse_rate(const std::string& text);

/// Parses a comma-separated list of decimals.
std::vector<double> parse_list(const std::string& text);

inline constexpr const char* kTrajectoryHeader =
    "step,date,v_long,v_short,v_total,gain_loss,pi_long,pi_short";
inline constexpr const char* kSweepHeader =
    "mu_star,sigma_star,analytic_mean,analytic_std,mc_mean,mc_std,mc_se,n_paths";

/// One row per state. `dates` may be empty (the column is left blank);
/// otherwise it must have one entry per state.
void write_trajectory_csv(std::ostream& os, const Trajectory& t,
                          const std::vector<std::string>& dates = {});

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

json to_json(const PolicyParams& p);
json to_json(const ReturnStats& s);
json to_json(const AnalyticsReport& r);
json to_json(const McEstimate& e);
json to_json(const SweepRow& r);
json to_json(const ReturnSummary& s);

}  // namespace dlp::io
