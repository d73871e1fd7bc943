#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "airgam/dlm.hpp"
#include "airgam/rng.hpp"
#include "airgam/simulate.hpp"
#include "airgam/spline.hpp"

using namespace airgam;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SimulationConfig coverage_config() {
    SimulationConfig config;
    config.n_days = 3650;
    config.beta_true = {0.004, -0.001, 0.0, 0.0, 0.0};
    config.trend_shape = TrendShape::smooth_spline;
    config.trend_df_per_year = 4.0;
    config.trend_amplitude = 0.08;
    config.seasonal_amplitude = 0.08;
    config.confounding_strength = 0.0;
    config.dispersion_phi = 5.0;
    return config;
}

}  // namespace

TEST_SUITE("dlm") {

TEST_CASE("lag matrix is the series shifted per column") {
    Series s = {1, 2, 3, 4, 5};
    for (int i = 6; i <= 40; ++i) s.push_back(static_cast<double>(i));
    const LagDesign design = build_lag_matrix(s, 2);
    REQUIRE(design.matrix.cols() == 3);
    REQUIRE(design.aligned_rows.front() == 2);
    // Rows for t = 3, 4, 5 (1-based): [3,2,1], [4,3,2], [5,4,3].
    CHECK(design.matrix(0, 0) == 3.0);
    CHECK(design.matrix(0, 1) == 2.0);
    CHECK(design.matrix(0, 2) == 1.0);
    CHECK(design.matrix(1, 0) == 4.0);
    CHECK(design.matrix(1, 1) == 3.0);
    CHECK(design.matrix(1, 2) == 2.0);
    CHECK(design.matrix(2, 0) == 5.0);
    CHECK(design.matrix(2, 1) == 4.0);
    CHECK(design.matrix(2, 2) == 3.0);
}

TEST_CASE("lag zero is the series itself") {
    Series s;
    for (int i = 0; i < 40; ++i) s.push_back(static_cast<double>(i * i % 7));
    const LagDesign design = build_lag_matrix(s, 0);
    REQUIRE(design.matrix.cols() == 1);
    REQUIRE(design.aligned_rows.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(design.matrix(static_cast<Eigen::Index>(i), 0) == s[i]);
    }
}

TEST_CASE("a missing day knocks out the whole lag window") {
    Series s;
    for (int i = 0; i < 60; ++i) s.push_back(static_cast<double>(i));
    s[7] = kNaN;
    const LagDesign design = build_lag_matrix(s, 4);
    // Rows t = 7..11 (0-based) depend on day 7 and are dropped.
    const std::vector<std::size_t> expected_dropped = {7, 8, 9, 10, 11};
    CHECK(design.dropped_rows == expected_dropped);
    for (std::size_t t : design.aligned_rows) {
        CHECK((t < 7 || t > 11));
    }
}

TEST_CASE("lag matrix rejects bad arguments") {
    Series s(50, 1.0);
    CHECK_THROWS_AS(build_lag_matrix(s, -1), std::invalid_argument);
    CHECK_THROWS_AS(build_lag_matrix(Series(20, 1.0), 4), std::invalid_argument);
}

TEST_CASE("cumulative effect sums the published SO2 lag estimates exactly") {
    Eigen::VectorXd betas(5);
    betas << 0.02269, -0.00604, -0.00819, 0.00136, -0.00244;
    const CumulativeEffect cum =
        cumulative_effect(betas, Eigen::MatrixXd::Zero(5, 5));
    CHECK(cum.beta_sum == doctest::Approx(0.00738).epsilon(1e-10));
}

TEST_CASE("cumulative effect of zero betas keeps the covariance term") {
    Eigen::VectorXd betas = Eigen::VectorXd::Zero(3);
    Eigen::MatrixXd cov(3, 3);
    cov << 1, 0.5, 0.1, 0.5, 2, 0.2, 0.1, 0.2, 3;
    const CumulativeEffect cum = cumulative_effect(betas, cov);
    CHECK(cum.beta_sum == 0.0);
    CHECK(cum.se_sum == doctest::Approx(std::sqrt(cov.sum())));
}

TEST_CASE("diagonal covariance gives se = sigma * sqrt(K+1)") {
    const double sigma = 0.37;
    Eigen::VectorXd betas = Eigen::VectorXd::Ones(4);
    const Eigen::MatrixXd cov = sigma * sigma * Eigen::MatrixXd::Identity(4, 4);
    const CumulativeEffect cum = cumulative_effect(betas, cov);
    CHECK(cum.se_sum == doctest::Approx(sigma * 2.0).epsilon(1e-12));
}

TEST_CASE("cumulative effect is linear under scaling") {
    Eigen::VectorXd betas(3);
    betas << 0.01, -0.004, 0.002;
    Eigen::MatrixXd cov(3, 3);
    cov << 2, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0;
    const double c = -2.5;
    const CumulativeEffect base = cumulative_effect(betas, cov);
    const CumulativeEffect scaled =
        cumulative_effect((c * betas).eval(), (c * c * cov).eval());
    CHECK(scaled.beta_sum == doctest::Approx(c * base.beta_sum).epsilon(1e-12));
    CHECK(scaled.se_sum == doctest::Approx(std::fabs(c) * base.se_sum).epsilon(1e-12));
}

TEST_CASE("per-lag estimates cover the truth in a Monte-Carlo study") {
    // True pattern (0.004, -0.001, 0, 0, 0), phi = 5, n = 3650: every lag
    // estimate should sit within 3 SE of its truth in >= 95% of replicates.
    const SimulationConfig config = coverage_config();
    const int reps = 200;
    const int time_df = df_per_year_to_total(config.trend_df_per_year, config.n_days);
    int all_within = 0;
    int converged = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const GeneratedPanel gen = generate_panel(config, substream_seed(777, rep));
        const DlmFit fit = fit_dlm(gen.panel, "PM10", 4, time_df, 6);
        if (!fit.base.converged) continue;
        ++converged;
        bool ok = true;
        for (int l = 0; l <= 4; ++l) {
            const double se = std::sqrt(fit.lag_cov(l, l));
            ok &= std::fabs(fit.lag_betas(l) - config.beta_true[static_cast<std::size_t>(l)]) <=
                  3.0 * se;
        }
        if (ok) ++all_within;
    }
    REQUIRE(converged >= 195);
    CHECK(all_within >= static_cast<int>(0.95 * converged));
}

TEST_CASE("permuted exposure behaves like a null: about 5% of lag p-values below 0.05") {
    SimulationConfig config = coverage_config();
    config.n_days = 1460;
    const int reps = 100;
    const int time_df = df_per_year_to_total(4.0, config.n_days);
    int small_p = 0, total_p = 0;
    for (int rep = 0; rep < reps; ++rep) {
        GeneratedPanel gen = generate_panel(config, substream_seed(888, rep));
        // Destroy the exposure-outcome link, keep the marginal distribution.
        Rng rng(substream_seed(999, rep));
        Series& x = gen.panel.pollutants.at("PM10");
        for (std::size_t i = x.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
            std::swap(x[i - 1], x[j]);
        }
        const DlmFit fit = fit_dlm(gen.panel, "PM10", 4, time_df, 6);
        if (!fit.base.converged) continue;
        for (int l = 0; l <= 4; ++l) {
            ++total_p;
            if (fit.per_lag_p(l) < 0.05) ++small_p;
        }
    }
    REQUIRE(total_p >= 480);
    const double fraction = static_cast<double>(small_p) / total_p;
    CHECK(fraction > 0.015);
    CHECK(fraction < 0.09);
}

TEST_CASE("extending the lag window leaves earlier lags near the truth") {
    SimulationConfig config = coverage_config();
    config.n_days = 1460;
    config.beta_true = {0.004, -0.001, 0.0};  // nothing beyond lag 2
    const int time_df = df_per_year_to_total(4.0, config.n_days);
    const int reps = 50;
    int ok_reps = 0, used = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const GeneratedPanel gen = generate_panel(config, substream_seed(555, rep));
        const DlmFit narrow = fit_dlm(gen.panel, "PM10", 2, time_df, 6);
        const DlmFit wide = fit_dlm(gen.panel, "PM10", 6, time_df, 6);
        if (!narrow.base.converged || !wide.base.converged) continue;
        ++used;
        bool ok = true;
        for (int l = 0; l <= 2; ++l) {
            const double se = std::sqrt(wide.lag_cov(l, l));
            ok &= std::fabs(wide.lag_betas(l) - config.beta_true[static_cast<std::size_t>(l)]) <=
                  3.0 * se;
        }
        if (ok) ++ok_reps;
    }
    REQUIRE(used >= 45);
    CHECK(ok_reps >= static_cast<int>(0.9 * used));
}

TEST_CASE("K = 0 reproduces the single-exposure model") {
    SimulationConfig config = coverage_config();
    config.n_days = 1095;
    config.beta_true = {0.004};
    const GeneratedPanel gen = generate_panel(config, 4242);
    const int time_df = df_per_year_to_total(4.0, config.n_days);

    const DlmFit via_dlm = fit_dlm(gen.panel, "PM10", 0, time_df, 6);

    ModelSpec spec;
    spec.response = "total";
    NamedColumn col;
    col.name = "lag0";
    const Series& x = gen.panel.pollutants.at("PM10");
    col.values = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    spec.parametric.push_back(col);
    spec.smooths.push_back({"time_index", time_df});
    spec.smooths.push_back({"temp_mean", 6});
    const GamFit direct = fit(spec, gen.panel);

    CHECK(via_dlm.base.coefficients.size() == direct.coefficients.size());
    CHECK((via_dlm.base.coefficients - direct.coefficients).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("harvesting-shaped truth is recovered in sign") {
    // Positive same-day effect followed by negative short-lag coefficients,
    // the shape reported for the real data.
    SimulationConfig config = coverage_config();
    config.n_days = 3650;
    config.beta_true = {0.00429, -0.00155, -0.00111, 0.0, 0.0};
    const GeneratedPanel gen = generate_panel(config, 31415);
    const int time_df = df_per_year_to_total(4.0, config.n_days);
    const DlmFit fit = fit_dlm(gen.panel, "PM10", 4, time_df, 6);
    REQUIRE(fit.base.converged);
    CHECK(fit.lag_betas(0) > 0.0);
    CHECK(fit.per_lag_p(0) < 0.05);
    CHECK(fit.lag_betas(1) < 0.0);
}

TEST_CASE("significance stars follow the published convention") {
    CHECK(significance_stars(0.0001) == "***");
    CHECK(significance_stars(0.005) == "**");
    CHECK(significance_stars(0.03) == "*");
    CHECK(significance_stars(0.07) == ".");
    CHECK(significance_stars(0.5) == "");
}

}  // TEST_SUITE
