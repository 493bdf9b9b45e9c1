#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dlp {

/// Almost-sure bounds on the per-period return, -1 < x_min < 0 < x_max.
struct ReturnBounds {
    double x_min{-0.5};
    double x_max{0.5};
};

/// One configuration of the double linear policy: allocation alpha to the
/// long account, decision weight w, proportional cost rate eps and the
/// initial account value v0.
struct PolicyParams {
    double alpha{0.5};
    double w{0.0};
    double eps{0.0};
    double v0{1.0};
    ReturnBounds bounds{};
};

/// Per-period mean and standard deviation of the return.
struct ReturnStats {
    double mu{0.0};
    double sigma{0.0};
};

struct Violation {
    std::string field;
    std::string message;
};

struct ValidationResult {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    explicit operator bool() const { return ok(); }
    std::string to_string() const;
};

/// Raised when a caller supplies parameters outside an operation's domain.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Upper end of the admissible weight set W = [0, w_max]:
/// min{1/(1+eps), 1/(x_max+eps)}.
double max_weight(double eps, double x_max);

ValidationResult validate_bounds(const ReturnBounds& b);
ValidationResult validate_policy(const PolicyParams& p);
ValidationResult validate_stats(const ReturnStats& s);

/// Throws ValidationError carrying every violation if the policy is inadmissible.
void require_valid(const PolicyParams& p);

}  // namespace dlp
