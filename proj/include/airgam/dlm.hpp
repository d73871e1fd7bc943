#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "airgam/gam.hpp"
#include "airgam/panel.hpp"

namespace airgam {

/// Lagged-exposure design for lags 0..K. Row for day t holds
/// x_t, x_{t-1}, ..., x_{t-K}; the first K days and any row with a missing
/// lagged value are dropped and recorded.
struct LagDesign {
    std::string pollutant;
    int max_lag = 0;
    Eigen::MatrixXd matrix;               // aligned_rows.size() x (K+1)
    std::vector<std::size_t> aligned_rows;  // day indices retained
    std::vector<std::size_t> dropped_rows;  // day indices lost to missing lags
};

LagDesign build_lag_matrix(const Series& series, int max_lag,
                           const std::string& pollutant = "x");

/// Distributed-lag quasi-Poisson fit: intercept + lag0..lagK + s(time_index,
/// time_df) + s(temp_mean, temp_df). temp_df = 0 omits the temperature smooth.
struct DlmFit {
    GamFit base;
    std::string pollutant;
    int max_lag = 0;
    Eigen::VectorXd lag_betas;   // beta_0..beta_K
    Eigen::MatrixXd lag_cov;     // (K+1)x(K+1) block of base covariance
    Eigen::VectorXd per_lag_p;
};

DlmFit fit_dlm(const DailyPanel& panel, const std::string& pollutant, int max_lag,
               int time_df_total, int temp_df, const std::string& stratum = "total",
               const std::vector<bool>* exclude = nullptr);

/// Cumulative effect over lags: (sum of betas, sqrt(1' Cov 1)).
struct CumulativeEffect {
    double beta_sum = 0.0;
    double se_sum = 0.0;
};

CumulativeEffect cumulative_effect(const DlmFit& fit);
CumulativeEffect cumulative_effect(const Eigen::VectorXd& betas, const Eigen::MatrixXd& cov);

/// Significance stars for a p-value: *** < 0.001, ** < 0.01, * < 0.05,
/// . < 0.1, blank otherwise.
std::string significance_stars(double p);

}  // namespace airgam
