#include "dlp/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

namespace dlp {

namespace {

// Error-free transformations: a + b == s + e and a * b == p + e exactly.
std::pair<double, double> two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double e = (a - (s - bb)) + (b - bb);
    return {s, e};
}

std::pair<double, double> two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

// Exact sums held as nonoverlapping expansions, smallest component first.
using Expansion = std::vector<double>;

void grow(Expansion& e, double b) {
    Expansion out;
    out.reserve(e.size() + 1);
    double q = b;
    for (double c : e) {
        const auto [s, err] = two_sum(q, c);
        if (err != 0.0) out.push_back(err);
        q = s;
    }
    if (q != 0.0) out.push_back(q);
    e = std::move(out);
}

int sign(const Expansion& e) { return e.empty() ? 0 : (e.back() > 0.0 ? 1 : -1); }

// Sum of the terms rounded to nearest, ties to even.
double round_exact(const Expansion& terms) {
    Expansion sum;
    for (double t : terms) grow(sum, t);
    double c = 0.0;
    for (double t : sum) c += t;
    for (;;) {
        Expansion r = sum;
        grow(r, -c);
        const int s = sign(r);
        if (s == 0) return c;
        const double n = std::nextafter(c, s > 0 ? HUGE_VAL : -HUGE_VAL);
        grow(r, -(n - c) / 2.0);
        const int past_half = sign(r) * s;
        if (past_half < 0) return c;
        if (past_half == 0) {
            int exp = 0;
            const double m = std::ldexp(std::frexp(c, &exp), 53);
            return std::fmod(m, 2.0) == 0.0 ? c : n;
        }
        c = n;
    }
}

// pi0 + w (v - v_ref), evaluated exactly and rounded once.
double affine_control(double pi0, double w, double v, double v_ref) {
    const auto [d, d_err] = two_sum(v, -v_ref);
    const auto [prod, prod_err] = two_prod(w, d);
    const auto [tail, tail_err] = two_prod(w, d_err);
    return round_exact({pi0, prod, prod_err, tail, tail_err});
}

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

AccountState initial_state(const PolicyParams& p) {
    return {p.alpha * p.v0, (1.0 - p.alpha) * p.v0, 0};
}

Controls controls(const AccountState& s, const PolicyParams& p) {
    return {p.w * s.v_long, -p.w * s.v_short};
}

Controls sls_controls(const AccountState& s, const PolicyParams& p, double pi0) {
    const AccountState s0 = initial_state(p);
    return {affine_control(pi0, p.w, s.v_long, s0.v_long),
            -affine_control(pi0, p.w, s.v_short, s0.v_short)};
}

AccountState step_with_controls(const AccountState& s, double x, const Controls& u,
                                const PolicyParams& p, double rate) {
    AccountState next;
    next.v_long = (1.0 + rate) * s.v_long + (x - p.eps - rate) * u.pi_long;
    next.v_short = s.v_short + x * u.pi_short - p.eps * std::abs(u.pi_short);
    next.step = s.step + 1;
    return next;
}

AccountState step(const AccountState& s, double x, const PolicyParams& p, double rate) {
    return step_with_controls(s, x, controls(s, p), p, rate);
}

namespace {

template <typename ControlLaw>
Trajectory run_with(std::span<const double> returns, const PolicyParams& p, double rate,
                    ControlLaw&& law) {
    Trajectory t;
    t.v0 = p.v0;
    t.states.reserve(returns.size() + 1);
    t.controls.reserve(returns.size() + 1);
    t.gain_loss.reserve(returns.size() + 1);

    AccountState s = initial_state(p);
    for (std::size_t k = 0;; ++k) {
        const Controls u = law(s);
        t.states.push_back(s);
        t.controls.push_back(u);
        t.gain_loss.push_back(s.total() - p.v0);
        if (k == returns.size()) break;
        s = step_with_controls(s, returns[k], u, p, rate);
    }
    return t;
}

}  // namespace

Trajectory run_path(std::span<const double> returns, const PolicyParams& p, double rate) {
    return run_with(returns, p, rate, [&](const AccountState& s) { return controls(s, p); });
}

Trajectory run_path_sls(std::span<const double> returns, const PolicyParams& p, double pi0) {
    return run_with(returns, p, 0.0,
                    [&](const AccountState& s) { return sls_controls(s, p, pi0); });
}

double product_form_value(std::span<const double> returns, const PolicyParams& p) {
    long double long_growth = 1.0L;
    long double short_growth = 1.0L;
    for (double x : returns) {
        long_growth *= 1.0L + static_cast<long double>(p.w) * (static_cast<long double>(x) - p.eps);
        short_growth *= 1.0L - static_cast<long double>(p.w) * (static_cast<long double>(x) + p.eps);
    }
    return static_cast<double>(p.v0 * (p.alpha * long_growth + (1.0L - p.alpha) * short_growth));
}

double account_lower_bound(std::size_t k, const PolicyParams& p) {
    const double kk = static_cast<double>(k);
    const double lo = std::pow(1.0 + p.w * (p.bounds.x_min - p.eps), kk);
    const double hi = std::pow(1.0 - p.w * (p.bounds.x_max + p.eps), kk);
    return p.v0 * (p.alpha * lo + (1.0 - p.alpha) * hi);
}

std::string to_string(InvariantKind kind) {
    switch (kind) {
        case InvariantKind::Survivability: return "survivability";
        case InvariantKind::NonNegativity: return "non-negativity";
        case InvariantKind::LowerBound: return "lower-bound";
        case InvariantKind::CashFinancing: return "cash-financing";
        case InvariantKind::GainLossMismatch: return "gain-loss";
    }
    return "unknown";
}

std::string InvariantReport::summary() const {
    std::ostringstream os;
    os << steps_checked << " steps checked, " << violations.size() << " violation(s)";
    for (std::size_t i = 0; i < violations.size() && i < 5; ++i) {
        const auto& v = violations[i];
        os << "\n  k=" << v.step << " " << to_string(v.kind) << ": " << v.message;
    }
    if (violations.size() > 5) os << "\n  ...";
    return os.str();
}

InvariantChecker::InvariantChecker(const PolicyParams& p, bool check_lower_bound)
    : p_(p),
      strict_positive_(p.alpha > 0.0),
      check_lower_bound_(check_lower_bound),
      long_factor_(1.0 + p.w * (p.bounds.x_min - p.eps)),
      short_factor_(1.0 - p.w * (p.bounds.x_max + p.eps)) {
    if (!strict_positive_)
        report_.notes.push_back(
            "alpha = 0: survivability is not guaranteed, checking non-negativity only");
}

void InvariantChecker::add(std::size_t k, InvariantKind kind, std::string msg) {
    report_.violations.push_back({k, kind, std::move(msg)});
}

bool InvariantChecker::observe(const AccountState& s, const Controls& u) {
    return observe(s, u, s.total() - p_.v0);
}

bool InvariantChecker::observe(const AccountState& s, const Controls& u, double gain_loss) {
    const std::size_t k = expected_step_++;
    const std::size_t before = report_.violations.size();
    const double v = s.total();

    if (s.v_long < 0.0 || s.v_short < 0.0 || v < 0.0)
        add(k, InvariantKind::NonNegativity,
            "V_L = " + fmt_num(s.v_long) + ", V_S = " + fmt_num(s.v_short));
    if (strict_positive_ && !(v > 0.0))
        add(k, InvariantKind::Survivability, "V = " + fmt_num(v));

    const double bound = p_.v0 * (p_.alpha * long_pow_ + (1.0 - p_.alpha) * short_pow_);
    if (check_lower_bound_ && v < bound - kInvariantRelTol * std::abs(bound))
        add(k, InvariantKind::LowerBound, "V = " + fmt_num(v) + " < V*_min = " + fmt_num(bound));

    const double exposure = std::abs(u.net());
    if (exposure > v + kInvariantRelTol * std::abs(v))
        add(k, InvariantKind::CashFinancing,
            "|pi| = " + fmt_num(exposure) + " > V = " + fmt_num(v));

    if (gain_loss != v - p_.v0)
        add(k, InvariantKind::GainLossMismatch,
            "G = " + fmt_num(gain_loss) + ", V - v0 = " + fmt_num(v - p_.v0));

    long_pow_ *= long_factor_;
    short_pow_ *= short_factor_;
    ++report_.steps_checked;
    return report_.violations.size() == before;
}

InvariantReport check_invariants(const Trajectory& t, const PolicyParams& p) {
    InvariantChecker checker(p);
    for (std::size_t k = 0; k < t.states.size(); ++k) {
        const Controls u = k < t.controls.size() ? t.controls[k] : Controls{};
        const double g = k < t.gain_loss.size() ? t.gain_loss[k] : t.states[k].total() - p.v0;
        checker.observe(t.states[k], u, g);
    }
    return checker.take_report();
}

}  // namespace dlp
