#pragma once

#include <string>

namespace airgam {

/// Relative risk for an exposure increment, with confidence interval.
struct RiskEstimate {
    double delta_x = 10.0;  // ug/m3
    double rr = 1.0;
    double percent = 0.0;  // (rr - 1) * 100
    double ci_low = 1.0;
    double ci_high = 1.0;
    double level = 0.95;
    std::string source;  // "single-lag" or "cumulative"
};

/// exp(beta * delta_x).
double relative_risk(double beta, double delta_x);

/// (exp(beta * delta_x) - 1) * 100.
double percent_variation(double beta, double delta_x);

/// Normal-theory interval exp((beta +- z * se) * delta_x), level in (0, 1).
struct RiskInterval {
    double low;
    double high;
};

RiskInterval rr_interval(double beta, double se, double delta_x, double level = 0.95);

RiskEstimate make_risk_estimate(double beta, double se, double delta_x, double level,
                                const std::string& source);

/// Standard error of the percent variation via the delta method:
/// 100 * delta_x * se * exp(beta * delta_x).
double percent_se_delta_method(double beta, double se, double delta_x);

}  // namespace airgam
