#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "airgam/probability.hpp"
#include "airgam/risk.hpp"
#include "airgam/rng.hpp"

using namespace airgam;

TEST_SUITE("risk") {

TEST_CASE("relative risk of a null effect is one") {
    CHECK(relative_risk(0.0, 10.0) == 1.0);
    CHECK(relative_risk(0.123, 0.0) == 1.0);
}

TEST_CASE("published cumulative coefficients reproduce the reported risks") {
    // SO2, summed lag coefficients 0.00738 per unit, 10 ug/m3 increment.
    CHECK(relative_risk(0.00738, 10.0) == doctest::Approx(1.0766).epsilon(5e-5));
    // NO2 hospitalization-smoothing model, 0.00132 per unit.
    CHECK(relative_risk(0.00132, 10.0) == doctest::Approx(1.0133).epsilon(5e-5));
}

TEST_CASE("percent variation matches the reported estimates within rounding") {
    CHECK(percent_variation(0.00109, 10.0) == doctest::Approx(1.096).epsilon(1e-3));
    CHECK(std::fabs(percent_variation(0.00109, 10.0) - 1.08) < 0.05);
    CHECK(percent_variation(0.01338, 10.0) == doctest::Approx(14.3163).epsilon(1e-4));
    CHECK(std::fabs(percent_variation(0.01338, 10.0) - 14.31) < 0.05);
    CHECK(percent_variation(0.0, 123.0) == 0.0);
}

TEST_CASE("percent variation is exactly (rr - 1) * 100") {
    for (double beta : {-0.02, 0.0, 0.0007, 0.013}) {
        for (double dx : {1.0, 10.0, 25.0}) {
            CHECK(percent_variation(beta, dx) ==
                  doctest::Approx((relative_risk(beta, dx) - 1.0) * 100.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("relative risk is multiplicative in the increment") {
    const double beta = 0.0042;
    CHECK(relative_risk(beta, 7.0 + 5.0) ==
          doctest::Approx(relative_risk(beta, 7.0) * relative_risk(beta, 5.0)).epsilon(1e-12));
}

TEST_CASE("confidence interval arithmetic") {
    // exp((beta +- z se) dx) with beta = 0.00738, se = 0.0073, dx = 10.
    const RiskInterval ci = rr_interval(0.00738, 0.0073, 10.0, 0.95);
    CHECK(ci.low == doctest::Approx(0.93307).epsilon(1e-4));
    CHECK(ci.high == doctest::Approx(1.24220).epsilon(1e-4));

    const RiskInterval degenerate = rr_interval(0.01, 0.0, 10.0);
    CHECK(degenerate.low == degenerate.high);
    CHECK(degenerate.low == doctest::Approx(std::exp(0.1)));

    // beta = 0: interval symmetric about 1 on the log scale.
    const RiskInterval sym = rr_interval(0.0, 0.002, 10.0, 0.95);
    CHECK(std::log(sym.low) == doctest::Approx(-std::log(sym.high)).epsilon(1e-12));

    // A decrement keeps the interval ordered around its RR.
    const RiskInterval dec = rr_interval(0.01, 0.002, -10.0, 0.95);
    CHECK(dec.low <= relative_risk(0.01, -10.0));
    CHECK(relative_risk(0.01, -10.0) <= dec.high);

    CHECK_THROWS_AS(rr_interval(0.01, 0.001, 10.0, 1.2), std::invalid_argument);
    CHECK_THROWS_AS(rr_interval(0.01, 0.001, 10.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rr_interval(0.01, -0.1, 10.0), std::invalid_argument);
}

TEST_CASE("risk estimate bundles the pieces consistently") {
    const RiskEstimate est = make_risk_estimate(0.0012, 0.0004, 10.0, 0.95, "cumulative");
    CHECK(est.rr == doctest::Approx(std::exp(0.012)));
    CHECK(est.percent == doctest::Approx((est.rr - 1.0) * 100.0));
    CHECK(est.ci_low <= est.rr);
    CHECK(est.rr <= est.ci_high);
    CHECK(est.source == "cumulative");
}

TEST_CASE("interval coverage sits near the nominal level") {
    // beta_hat ~ N(beta, se^2): the 95% interval should cover the true RR in
    // 93-97% of 1000 replicates.
    Rng rng(606);
    const double beta = 0.0012, se = 0.0004, dx = 10.0;
    const double truth = relative_risk(beta, dx);
    int covered = 0;
    const int reps = 1000;
    for (int i = 0; i < reps; ++i) {
        const double beta_hat = beta + se * rng.normal();
        const RiskInterval ci = rr_interval(beta_hat, se, dx, 0.95);
        if (ci.low <= truth && truth <= ci.high) ++covered;
    }
    CHECK(covered >= 930);
    CHECK(covered <= 970);
}

TEST_CASE("delta-method percent SE") {
    const double se_pct = percent_se_delta_method(0.0, 0.001, 10.0);
    CHECK(se_pct == doctest::Approx(1.0));  // 100 * 10 * 0.001 * exp(0)
    CHECK(percent_se_delta_method(0.01, 0.001, 10.0) ==
          doctest::Approx(std::exp(0.1)).epsilon(1e-12));
}

}  // TEST_SUITE
