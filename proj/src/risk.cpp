#include "airgam/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "airgam/probability.hpp"

namespace airgam {

double relative_risk(double beta, double delta_x) {
    if (!std::isfinite(beta) || !std::isfinite(delta_x)) {
        throw std::invalid_argument("relative_risk: inputs must be finite");
    }
    return std::exp(beta * delta_x);
}

double percent_variation(double beta, double delta_x) {
    if (!std::isfinite(beta) || !std::isfinite(delta_x)) {
        throw std::invalid_argument("percent_variation: inputs must be finite");
    }
    return std::expm1(beta * delta_x) * 100.0;
}

RiskInterval rr_interval(double beta, double se, double delta_x, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("rr_interval: level must be in (0, 1)");
    }
    if (se < 0.0) throw std::invalid_argument("rr_interval: se must be >= 0");
    const double z = normal_quantile(0.5 + level / 2.0);
    const double a = std::exp((beta - z * se) * delta_x);
    const double b = std::exp((beta + z * se) * delta_x);
    // A negative increment flips the endpoints; keep low <= high.
    return RiskInterval{std::min(a, b), std::max(a, b)};
}

RiskEstimate make_risk_estimate(double beta, double se, double delta_x, double level,
                                const std::string& source) {
    RiskEstimate est;
    est.delta_x = delta_x;
    est.rr = relative_risk(beta, delta_x);
    est.percent = percent_variation(beta, delta_x);
    const RiskInterval ci = rr_interval(beta, se, delta_x, level);
    est.ci_low = ci.low;
    est.ci_high = ci.high;
    est.level = level;
    est.source = source;
    return est;
}

double percent_se_delta_method(double beta, double se, double delta_x) {
    return 100.0 * std::fabs(delta_x) * se * std::exp(beta * delta_x);
}

}  // namespace airgam
