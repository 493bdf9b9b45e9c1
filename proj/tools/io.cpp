#include "io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace dlp::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string_view strip(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_decimal(std::string_view s, const std::string& original) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ValidationError("not a number: '" + original + "'");
    return v;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

double parse_rate(const std::string& text) {
    std::string_view s = strip(text);
    if (!s.empty() && s.back() == '%') {
        s.remove_suffix(1);
        return parse_decimal(strip(s), text) / 100.0;
    }
    return parse_decimal(s, text);
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::string_view rest = text;
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(parse_decimal(strip(rest.substr(0, comma)), text));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t,
                          const std::vector<std::string>& dates) {
    os << kTrajectoryHeader << '\n';
    for (std::size_t k = 0; k < t.size(); ++k) {
        const auto& s = t.states[k];
        const auto& u = t.controls[k];
        os << k << ',' << (dates.empty() ? std::string{} : dates.at(k)) << ','
           << format_double(s.v_long) << ',' << format_double(s.v_short) << ','
           << format_double(s.total()) << ',' << format_double(t.gain_loss[k]) << ','
           << format_double(u.pi_long) << ',' << format_double(u.pi_short) << '\n';
    }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << kSweepHeader << '\n';
    for (const auto& r : rows) {
        os << format_double(r.mu_star) << ',' << format_double(r.sigma_star) << ','
           << format_double(r.analytic_mean) << ',' << format_double(r.analytic_std) << ','
           << format_double(r.mc.mean) << ',' << format_double(r.mc.std) << ','
           << format_double(r.mc.std_error) << ',' << r.mc.n_paths << '\n';
    }
}

json to_json(const PolicyParams& p) {
    return {{"alpha", p.alpha}, {"w", p.w},   {"eps", p.eps},
            {"v0", p.v0},       {"x_min", p.bounds.x_min}, {"x_max", p.bounds.x_max}};
}

json to_json(const ReturnStats& s) { return {{"mu", s.mu}, {"sigma", s.sigma}}; }

json to_json(const AnalyticsReport& r) {
    return {{"expected_gain", r.expected_gain},
            {"variance", r.variance},
            {"std", r.std},
            {"mu_plus", optional_json(r.mu_plus)},
            {"mu_minus", optional_json(r.mu_minus)},
            {"mu_zero", optional_json(r.mu_zero)},
            {"k", r.k},
            {"policy", to_json(r.policy)},
            {"stats", to_json(r.stats)}};
}

json to_json(const McEstimate& e) {
    return {{"mean", e.mean},
            {"std", e.std},
            {"std_error", e.std_error},
            {"n_paths", e.n_paths},
            {"k", e.k},
            {"out_of_bounds_paths", e.out_of_bounds_paths}};
}

json to_json(const SweepRow& r) {
    return {{"mu_star", r.mu_star},
            {"sigma_star", r.sigma_star},
            {"analytic_mean", r.analytic_mean},
            {"analytic_std", r.analytic_std},
            {"approx_mean", r.approx_mean},
            {"approx_std", r.approx_std},
            {"mc", to_json(r.mc)}};
}

json to_json(const ReturnSummary& s) {
    return {{"sample_mean", s.sample_mean},
            {"sample_std", s.sample_std},
            {"x_max_observed", s.x_max_observed},
            {"x_min_observed", s.x_min_observed},
            {"n_returns", s.n_returns}};
}

}  // namespace dlp::io
