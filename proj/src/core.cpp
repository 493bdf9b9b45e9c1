#include "dlp/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dlp {

std::string ValidationResult::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) os << "; ";
        os << violations[i].field << ": " << violations[i].message;
    }
    return os.str();
}

double max_weight(double eps, double x_max) {
    if (!std::isfinite(eps) || eps < 0.0 || eps > 1.0)
        throw ValidationError("max_weight: eps must lie in [0, 1]");
    if (!std::isfinite(x_max) || x_max <= 0.0)
        throw ValidationError("max_weight: x_max must be finite and positive");
    return std::min(1.0 / (1.0 + eps), 1.0 / (x_max + eps));
}

ValidationResult validate_bounds(const ReturnBounds& b) {
    ValidationResult r;
    if (!std::isfinite(b.x_min) || !(b.x_min > -1.0 && b.x_min < 0.0))
        r.violations.push_back({"x_min", "must satisfy -1 < x_min < 0"});
    if (!std::isfinite(b.x_max) || !(b.x_max > 0.0))
        r.violations.push_back({"x_max", "must satisfy 0 < x_max < inf"});
    return r;
}

ValidationResult validate_policy(const PolicyParams& p) {
    ValidationResult r = validate_bounds(p.bounds);
    if (!std::isfinite(p.alpha) || p.alpha < 0.0 || p.alpha > 1.0)
        r.violations.push_back({"alpha", "must lie in [0, 1]"});
    const bool eps_ok = std::isfinite(p.eps) && p.eps >= 0.0 && p.eps <= 1.0;
    if (!eps_ok)
        r.violations.push_back({"eps", "must lie in [0, 1]"});
    if (!std::isfinite(p.v0) || p.v0 <= 0.0)
        r.violations.push_back({"v0", "must be positive"});
    if (!std::isfinite(p.w) || p.w < 0.0) {
        r.violations.push_back({"w", "must be non-negative"});
    } else if (eps_ok && std::isfinite(p.bounds.x_max) && p.bounds.x_max > 0.0) {
        const double w_max = max_weight(p.eps, p.bounds.x_max);
        if (p.w > w_max) {
            std::ostringstream os;
            os.precision(17);
            os << "w = " << p.w << " exceeds w_max = " << w_max;
            r.violations.push_back({"w", os.str()});
        }
    }
    return r;
}

ValidationResult validate_stats(const ReturnStats& s) {
    ValidationResult r;
    if (!std::isfinite(s.mu) || s.mu <= -1.0)
        r.violations.push_back({"mu", "must be finite and > -1"});
    if (!std::isfinite(s.sigma) || s.sigma < 0.0)
        r.violations.push_back({"sigma", "must be finite and >= 0"});
    return r;
}

void require_valid(const PolicyParams& p) {
    if (auto r = validate_policy(p); !r.ok())
        throw ValidationError("inadmissible policy: " + r.to_string());
}

}  // namespace dlp
