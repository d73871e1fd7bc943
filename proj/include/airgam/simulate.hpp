#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "airgam/panel.hpp"

namespace airgam {

enum class TrendShape { none, linear, smooth_spline };

/// Synthetic-panel generator settings. The time-smooth component (trend +
/// seasonal) doubles as the confounder: scaled by `confounding_strength` it
/// shifts the pollutant mean, so outcome and exposure share one smooth
/// curve — the mechanism by which outcome-based smoothing can steal
/// exposure signal.
struct SimulationConfig {
    long n_days = 3652;
    std::vector<double> beta_true = {0.004, -0.001, 0.0, 0.0, 0.0};  // per-unit log RR by lag
    TrendShape trend_shape = TrendShape::smooth_spline;
    double trend_df_per_year = 8.0;  // smooth_spline shape only
    double trend_amplitude = 0.08;   // sd on the log-mean scale
    double seasonal_amplitude = 0.08;
    int seasonal_harmonics = 2;
    double confounding_strength = 0.0;  // corr(time-smooth, pollutant) in [0, 1)
    double dispersion_phi = 5.0;
    double pollutant_mean = 26.0;
    double pollutant_sd = 15.0;
    double pollutant_ar1 = 0.7;
    double base_daily_mean = 99.25;  // calibration target for counts
    std::string pollutant_name = "PM10";
    std::uint64_t seed = 42;

    // Experiment settings used by bias_experiment.
    std::vector<double> candidate_grid;  // df/year; empty = 1..16
    int temp_df = 6;
    double ci_level = 0.95;

    void validate() const;
};

void to_json(nlohmann::json& j, const SimulationConfig& config);
void from_json(const nlohmann::json& j, SimulationConfig& config);

/// Bundled scenario presets: A = no confounding, B = moderate, C = strong
/// confounding with a wiggly shared smooth.
SimulationConfig scenario_config(char scenario);

struct GroundTruth {
    double alpha = 0.0;
    std::vector<double> beta_true;
    double beta_sum = 0.0;
    Series log_time_component;  // trend + seasonal on the log-mean scale
    Series pollutant_smooth;    // standardized confounder added to the pollutant
};

struct GeneratedPanel {
    DailyPanel panel;
    GroundTruth truth;
};

/// Deterministic given (config, seed). Counts are negative binomial with
/// Var = phi * mean (Poisson at phi = 1); the pollutant is AR(1) Gaussian
/// plus the scaled shared smooth, truncated at zero.
GeneratedPanel generate_panel(const SimulationConfig& config, std::uint64_t seed);

struct StrategyStats {
    double mean_bias = 0.0;  // of the cumulative beta
    double rmse = 0.0;
    double coverage = 0.0;  // CI hit rate
    double mean_chosen_df_per_year = 0.0;
};

struct ReplicateRecord {
    bool ok = false;
    double error_exposure = 0.0;
    double error_outcome = 0.0;
    bool covered_exposure = false;
    bool covered_outcome = false;
    double df_exposure = 0.0;  // per year
    double df_outcome = 0.0;
};

struct SimulationReport {
    StrategyStats exposure;
    StrategyStats outcome;
    int n_replicates = 0;  // requested
    int n_used = 0;        // converged and included
    int n_excluded = 0;
    double beta_true_sum = 0.0;
    SimulationConfig config;  // echo
    std::vector<ReplicateRecord> replicates;
};

void to_json(nlohmann::json& j, const SimulationReport& report);

/// Runs both df-selection strategies on n_reps generated panels and
/// aggregates bias, RMSE, CI coverage and the chosen df. Replicates draw
/// from substreams of (config.seed, replicate index); results are identical
/// for any thread count. Non-convergent replicates are excluded and counted.
SimulationReport bias_experiment(const SimulationConfig& config, int n_reps, int n_threads = 1);

}  // namespace airgam
