#pragma once

#include <string>
#include <vector>

#include "airgam/panel.hpp"

namespace airgam {

enum class SelectionStrategy { exposure, outcome };
enum class OutcomeCriterion { qaic, bic };
enum class OutcomeSelectionModel { trend_only, with_pollutant };

/// Result of a time-smooth df search over a candidate grid. The chosen df
/// attains the minimum score; ties break toward the smaller df.
struct SelectionResult {
    SelectionStrategy strategy;
    std::vector<double> candidate_dfs_per_year;
    std::vector<double> scores;            // per candidate, grid order
    std::vector<int> candidate_total_dfs;  // per candidate
    double chosen_df_per_year = 0.0;
    int chosen_total_df = 0;
    // Outcome strategy only: residual whiteness at the chosen df.
    std::vector<double> pacf_values;
    double ljung_box_statistic = 0.0;
    double white_noise_p_value = 1.0;
};

struct ExposureSelectionOptions {
    bool include_temperature_smooth = false;
    int temperature_df = 6;
};

/// Scores Gaussian models pollutant ~ s(time, df) by GCV; depends only on
/// the pollutant (and meteorology if requested), never on the outcome.
SelectionResult select_df_exposure(const DailyPanel& panel, const std::string& pollutant,
                                   const std::vector<double>& candidate_dfs_per_year,
                                   const ExposureSelectionOptions& options = {},
                                   int n_threads = 1);

struct OutcomeSelectionOptions {
    OutcomeCriterion criterion = OutcomeCriterion::qaic;
    OutcomeSelectionModel model = OutcomeSelectionModel::trend_only;
    int max_lag = 4;
    int temperature_df = 6;  // 0 omits the temperature smooth
    int diagnostic_lags = 25;
    const std::vector<bool>* exclude = nullptr;
};

/// Scores quasi-Poisson outcome models by QAIC (or BIC), with the dispersion
/// held fixed at the richest candidate's estimate; reports residual PACF and
/// Ljung-Box diagnostics at the chosen df.
SelectionResult select_df_outcome(const DailyPanel& panel, const std::string& stratum,
                                  const std::string& pollutant,
                                  const std::vector<double>& candidate_dfs_per_year,
                                  const OutcomeSelectionOptions& options = {},
                                  int n_threads = 1);

/// Sample autocorrelations at lags 0..max_lag.
std::vector<double> sample_acf(const std::vector<double>& series, int max_lag);

/// Partial autocorrelations at lags 1..max_lag via the Durbin-Levinson
/// recursion. Values are clamped to [-1, 1]; boundary cases never produce
/// NaN.
std::vector<double> pacf(const std::vector<double>& residuals, int max_lag);

struct LjungBoxResult {
    double statistic;
    double p_value;
};

/// Portmanteau white-noise test: Q = n(n+2) sum rho_l^2/(n-l), p from
/// chi-squared(n_lags).
LjungBoxResult ljung_box(const std::vector<double>& residuals, int n_lags);

}  // namespace airgam
