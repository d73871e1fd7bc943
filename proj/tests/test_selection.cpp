#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "airgam/panel.hpp"
#include "airgam/probability.hpp"
#include "airgam/rng.hpp"
#include "airgam/selection.hpp"
#include "airgam/simulate.hpp"

using namespace airgam;

namespace {

DailyPanel pollutant_panel(const Series& x) {
    DailyPanel panel;
    for (std::size_t i = 0; i < x.size(); ++i) panel.dates.push_back(14610 + i);
    panel.pollutants["PM10"] = x;
    return panel;
}

std::vector<double> grid(std::initializer_list<double> values) { return values; }

}  // namespace

TEST_SUITE("selection") {

TEST_CASE("exposure strategy tracks a two-cycle-per-year sinusoid") {
    Rng rng(100);
    const std::size_t n = 1461;
    Series x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = 25.0 + 8.0 * std::sin(2.0 * M_PI * 2.0 * static_cast<double>(i) / 365.25) +
               rng.normal();
    }
    const SelectionResult result =
        select_df_exposure(pollutant_panel(x), "PM10", grid({1, 2, 4, 6, 8, 12}));
    CHECK(result.chosen_df_per_year >= 4.0);
}

TEST_CASE("exposure strategy picks the smallest df on white noise") {
    const std::vector<double> candidates = grid({1, 4, 8, 12, 16});
    int smallest = 0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(3000 + rep);
        Series x(1461);
        for (auto& v : x) v = 25.0 + 5.0 * rng.normal();
        const SelectionResult result =
            select_df_exposure(pollutant_panel(x), "PM10", candidates);
        if (result.chosen_df_per_year == 1.0) ++smallest;
    }
    CHECK(smallest >= 180);  // >= 90% of 200
}

TEST_CASE("exposure selection needs two years and a non-empty grid") {
    Series x(400, 10.0);
    CHECK_THROWS_AS(select_df_exposure(pollutant_panel(x), "PM10", grid({1, 2})),
                    std::invalid_argument);
    Series y(800, 10.0);
    CHECK_THROWS_AS(select_df_exposure(pollutant_panel(y), "PM10", {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(select_df_exposure(pollutant_panel(y), "NO2", grid({1, 2})),
                    std::invalid_argument);
}

TEST_CASE("exposure selection never looks at the outcome") {
    SimulationConfig config;
    config.n_days = 1095;
    config.seed = 7;
    GeneratedPanel gen = generate_panel(config, 7);
    const std::vector<double> candidates = grid({1, 2, 4, 8});
    const SelectionResult before =
        select_df_exposure(gen.panel, "PM10", candidates);
    // Scramble the outcome completely.
    for (auto& [key, series] : gen.panel.outcomes) {
        for (auto& v : series) v = 1.0;
    }
    const SelectionResult after = select_df_exposure(gen.panel, "PM10", candidates);
    CHECK(before.chosen_df_per_year == after.chosen_df_per_year);
    CHECK(before.scores == after.scores);
}

TEST_CASE("selection is deterministic given data and grid") {
    SimulationConfig config;
    config.n_days = 1095;
    const GeneratedPanel gen = generate_panel(config, 99);
    const std::vector<double> candidates = grid({1, 2, 4});
    const SelectionResult a = select_df_exposure(gen.panel, "PM10", candidates);
    const SelectionResult b = select_df_exposure(gen.panel, "PM10", candidates);
    CHECK(a.scores == b.scores);
    CHECK(a.chosen_total_df == b.chosen_total_df);

    OutcomeSelectionOptions opts;
    const SelectionResult c = select_df_outcome(gen.panel, "total", "PM10", candidates, opts);
    const SelectionResult d = select_df_outcome(gen.panel, "total", "PM10", candidates, opts);
    CHECK(c.scores == d.scores);
    CHECK(c.chosen_total_df == d.chosen_total_df);
}

TEST_CASE("outcome strategy recovers a 6 df/year smooth within two df/year") {
    SimulationConfig config;
    config.n_days = 1095;
    config.beta_true = {0.0};
    config.trend_shape = TrendShape::smooth_spline;
    config.trend_df_per_year = 6.0;
    config.trend_amplitude = 0.18;
    config.seasonal_amplitude = 0.0;
    config.dispersion_phi = 5.0;
    config.confounding_strength = 0.0;

    std::vector<double> candidates;
    for (int k = 1; k <= 10; ++k) candidates.push_back(static_cast<double>(k));
    OutcomeSelectionOptions opts;
    opts.model = OutcomeSelectionModel::trend_only;

    const int reps = 200;
    int within = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const GeneratedPanel gen = generate_panel(config, substream_seed(1234, rep));
        const SelectionResult result =
            select_df_outcome(gen.panel, "total", "PM10", candidates, opts);
        if (std::fabs(result.chosen_df_per_year - 6.0) <= 2.0) ++within;
    }
    CHECK(within >= 140);  // >= 70% of 200
}

TEST_CASE("outcome strategy prefers the smallest df on a flat mean") {
    SimulationConfig config;
    config.n_days = 1095;
    config.beta_true = {0.0};
    config.trend_shape = TrendShape::none;
    config.trend_amplitude = 0.0;
    config.seasonal_amplitude = 0.0;
    config.dispersion_phi = 5.0;

    const std::vector<double> candidates = grid({1, 4, 8, 12});
    OutcomeSelectionOptions opts;
    const int reps = 100;
    int smallest = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const GeneratedPanel gen = generate_panel(config, substream_seed(4321, rep));
        const SelectionResult result =
            select_df_outcome(gen.panel, "total", "PM10", candidates, opts);
        if (result.chosen_df_per_year == 1.0) ++smallest;
    }
    CHECK(smallest >= 70);
}

TEST_CASE("strong confounding: outcome strategy smooths less than exposure strategy") {
    SimulationConfig config = scenario_config('C');
    config.n_days = 2192;
    std::vector<double> candidates;
    for (int k = 1; k <= 12; ++k) candidates.push_back(static_cast<double>(k));

    const int reps = 20;
    double sum_exposure = 0.0, sum_outcome = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        const GeneratedPanel gen = generate_panel(config, substream_seed(2718, rep));
        const SelectionResult exp_sel = select_df_exposure(gen.panel, "PM10", candidates);
        OutcomeSelectionOptions opts;
        const SelectionResult out_sel =
            select_df_outcome(gen.panel, "total", "PM10", candidates, opts);
        sum_exposure += exp_sel.chosen_df_per_year;
        sum_outcome += out_sel.chosen_df_per_year;
    }
    CHECK(sum_outcome / reps < sum_exposure / reps);
}

TEST_CASE("outcome selection reports whiteness diagnostics at the chosen df") {
    SimulationConfig config;
    config.n_days = 1095;
    const GeneratedPanel gen = generate_panel(config, 5150);
    OutcomeSelectionOptions opts;
    const SelectionResult result =
        select_df_outcome(gen.panel, "total", "PM10", grid({1, 2, 4}), opts);
    CHECK(result.pacf_values.size() == 25);
    CHECK(result.white_noise_p_value >= 0.0);
    CHECK(result.white_noise_p_value <= 1.0);
    CHECK(result.ljung_box_statistic >= 0.0);
    for (double v : result.pacf_values) {
        CHECK(std::isfinite(v));
        CHECK(std::fabs(v) <= 1.0);
    }
}

TEST_CASE("pacf of an AR(1) process shows the single spike") {
    Rng rng(777);
    const int n = 5000;
    std::vector<double> x(n);
    double z = rng.normal();
    for (int t = 0; t < n; ++t) {
        if (t > 0) z = 0.6 * z + std::sqrt(1.0 - 0.36) * rng.normal();
        x[static_cast<std::size_t>(t)] = z;
    }
    const int max_lag = 25;
    const std::vector<double> p = pacf(x, max_lag);
    CHECK(p[0] > 0.55);
    CHECK(p[0] < 0.65);
    const double band = 2.0 / std::sqrt(static_cast<double>(n));
    int inside = 0;
    for (int k = 2; k <= max_lag; ++k) {
        if (std::fabs(p[static_cast<std::size_t>(k - 1)]) < band) ++inside;
    }
    CHECK(inside >= 22);  // >= 90% of lags 2..25
}

TEST_CASE("pacf of white noise stays inside three-sigma bands") {
    Rng rng(778);
    std::vector<double> x(5000);
    for (auto& v : x) v = rng.normal();
    const std::vector<double> p = pacf(x, 30);
    const double band = 3.0 / std::sqrt(5000.0);
    int inside = 0;
    for (double v : p) {
        if (std::fabs(v) < band) ++inside;
    }
    CHECK(inside >= 29);  // >= 95% of 30 lags
}

TEST_CASE("alternating series drives pacf to the boundary without NaN") {
    std::vector<double> x(200);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i % 2 == 0) ? 1.0 : -1.0;
    const std::vector<double> p = pacf(x, 6);
    CHECK(p[0] < -0.95);
    CHECK(p[0] >= -1.0);
    for (double v : p) {
        CHECK(std::isfinite(v));
        CHECK(std::fabs(v) <= 1.0);
    }
}

TEST_CASE("pacf input validation") {
    std::vector<double> constant(100, 3.0);
    CHECK_THROWS_AS(pacf(constant, 5), std::invalid_argument);
    std::vector<double> tiny(12, 1.0);
    CHECK_THROWS_AS(pacf(tiny, 5), std::invalid_argument);
}

TEST_CASE("Ljung-Box type-I error is calibrated near 5%") {
    const int reps = 1000, n = 2000, lags = 25;
    int rejections = 0;
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(9100 + rep);
        std::vector<double> x(n);
        for (auto& v : x) v = rng.normal();
        const LjungBoxResult lb = ljung_box(x, lags);
        if (lb.p_value < 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / reps;
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.07);
}

TEST_CASE("Ljung-Box has power against AR(1) correlation") {
    int strong = 0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(9500 + rep);
        std::vector<double> x(2000);
        double z = rng.normal();
        for (std::size_t t = 0; t < x.size(); ++t) {
            if (t > 0) z = 0.5 * z + std::sqrt(0.75) * rng.normal();
            x[t] = z;
        }
        if (ljung_box(x, 25).p_value < 0.001) ++strong;
    }
    CHECK(strong >= 198);  // >= 99% of replicates
}

TEST_CASE("Ljung-Box is exactly zero when the first autocorrelation vanishes") {
    // Period-4 pattern 1, 0, -1, 0: lag-1 products cancel exactly.
    std::vector<double> x(40);
    const double pattern[4] = {1.0, 0.0, -1.0, 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = pattern[i % 4];
    const LjungBoxResult lb = ljung_box(x, 1);
    CHECK(lb.statistic == 0.0);
    CHECK(lb.p_value == 1.0);
}

TEST_CASE("ties in the score break toward the smaller df") {
    // Force a tie by scoring a grid with a repeated candidate value.
    SimulationConfig config;
    config.n_days = 1095;
    const GeneratedPanel gen = generate_panel(config, 12);
    const SelectionResult result =
        select_df_exposure(gen.panel, "PM10", grid({2, 2, 2}));
    CHECK(result.chosen_df_per_year == 2.0);
    CHECK(result.scores[0] == result.scores[1]);
}

TEST_CASE("unsorted grids are scored in ascending df order") {
    SimulationConfig config;
    config.n_days = 1095;
    const GeneratedPanel gen = generate_panel(config, 13);
    const SelectionResult result =
        select_df_exposure(gen.panel, "PM10", grid({8, 1, 4}));
    const std::vector<double> expected = {1.0, 4.0, 8.0};
    CHECK(result.candidate_dfs_per_year == expected);
}

}  // TEST_SUITE
