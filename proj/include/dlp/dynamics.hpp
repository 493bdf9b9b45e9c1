#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dlp/core.hpp"

namespace dlp {

/// Long and short account values after `step` periods.
struct AccountState {
    double v_long{0.0};
    double v_short{0.0};
    std::size_t step{0};

    double total() const { return v_long + v_short; }
};

/// Amounts invested in the period: pi_long >= 0 on the long account,
/// pi_short <= 0 on the short account.
struct Controls {
    double pi_long{0.0};
    double pi_short{0.0};

    double net() const { return pi_long + pi_short; }
};

/// Per-step record of one path. All three sequences have the same length;
/// controls[k] is the investment decided from states[k].
struct Trajectory {
    double v0{1.0};
    std::vector<AccountState> states;
    std::vector<Controls> controls;
    std::vector<double> gain_loss;

    std::size_t size() const { return states.size(); }
    double final_value() const { return states.back().total(); }
    double final_gain() const { return gain_loss.back(); }
};

AccountState initial_state(const PolicyParams& p);

Controls controls(const AccountState& s, const PolicyParams& p);

/// Classical simultaneous long-short law
///   pi_L = pi0 + w (V_L - V_L(0)),  pi_S = -pi0 - w (V_S - V_S(0))
/// with V_L(0) = alpha v0 and V_S(0) = (1 - alpha) v0. Each control is
/// evaluated exactly and rounded once, so when pi0 == w v0 / 2 holds exactly
/// and alpha = 1/2 the result matches controls() bit for bit.
Controls sls_controls(const AccountState& s, const PolicyParams& p, double pi0);

/// Advances both accounts by one period with return x under the given
/// investments. `rate` is the per-period risk-free rate earned by the long
/// account's idle cash; the short account is unaffected by it.
AccountState step_with_controls(const AccountState& s, double x, const Controls& u,
                                const PolicyParams& p, double rate = 0.0);

AccountState step(const AccountState& s, double x, const PolicyParams& p, double rate = 0.0);

Trajectory run_path(std::span<const double> returns, const PolicyParams& p, double rate = 0.0);

/// Same dynamics driven by sls_controls; used to check the equivalence of the
/// two control laws.
Trajectory run_path_sls(std::span<const double> returns, const PolicyParams& p, double pi0);

/// Closed product form of the final account value
/// v0 (alpha prod(1 + w(x_j - eps)) + (1 - alpha) prod(1 - w(x_j + eps))).
double product_form_value(std::span<const double> returns, const PolicyParams& p);

/// Worst-case account value after k periods over all paths inside the
/// configured return bounds.
double account_lower_bound(std::size_t k, const PolicyParams& p);

enum class InvariantKind {
    Survivability,     // V(k) > 0
    NonNegativity,     // V_L(k), V_S(k), V(k) >= 0
    LowerBound,        // V(k) >= V*_min(k)
    CashFinancing,     // |pi(k)| <= V(k)
    GainLossMismatch,  // G_k != V(k) - v0
};

std::string to_string(InvariantKind kind);

struct InvariantViolation {
    std::size_t step{0};
    InvariantKind kind{InvariantKind::Survivability};
    std::string message;
};

struct InvariantReport {
    std::vector<InvariantViolation> violations;
    std::vector<std::string> notes;
    std::size_t steps_checked{0};

    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

/// Relative slack applied to the inequality checks to absorb rounding in the
/// recursion. Exact-arithmetic violations are many orders larger.
inline constexpr double kInvariantRelTol = 1e-10;

/// Streaming form of check_invariants: feed states in order, starting at k = 0.
/// Keeps only the running lower-bound factors, so Monte-Carlo loops can check
/// every path without materializing trajectories.
class InvariantChecker {
public:
    /// Set check_lower_bound to false for paths whose returns leave the
    /// configured bounds; the worst-case bound does not apply to them.
    explicit InvariantChecker(const PolicyParams& p, bool check_lower_bound = true);

    /// Returns false if this step added a violation.
    bool observe(const AccountState& s, const Controls& u);
    bool observe(const AccountState& s, const Controls& u, double gain_loss);

    const InvariantReport& report() const { return report_; }
    InvariantReport take_report() { return std::move(report_); }

private:
    void add(std::size_t k, InvariantKind kind, std::string msg);

    PolicyParams p_;
    bool strict_positive_;
    bool check_lower_bound_;
    double long_factor_;
    double short_factor_;
    double long_pow_{1.0};
    double short_pow_{1.0};
    std::size_t expected_step_{0};
    InvariantReport report_;
};

InvariantReport check_invariants(const Trajectory& t, const PolicyParams& p);

}  // namespace dlp
