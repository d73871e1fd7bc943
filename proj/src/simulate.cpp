#include "airgam/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "airgam/dates.hpp"
#include "airgam/dlm.hpp"
#include "airgam/probability.hpp"
#include "airgam/rng.hpp"
#include "airgam/selection.hpp"
#include "airgam/spline.hpp"
#include "airgam/threads.hpp"

namespace airgam {

namespace {

constexpr double kDaysPerYear = 365.25;

const char* trend_shape_name(TrendShape shape) {
    switch (shape) {
        case TrendShape::none: return "none";
        case TrendShape::linear: return "linear";
        case TrendShape::smooth_spline: return "smooth-spline";
    }
    return "none";
}

TrendShape trend_shape_from_name(const std::string& name) {
    if (name == "none") return TrendShape::none;
    if (name == "linear") return TrendShape::linear;
    if (name == "smooth-spline") return TrendShape::smooth_spline;
    throw std::invalid_argument("unknown trend_shape: " + name);
}

std::vector<double> default_grid() {
    std::vector<double> grid;
    for (int k = 1; k <= 16; ++k) grid.push_back(static_cast<double>(k));
    return grid;
}

// Age/sex split used for the synthetic strata (fixed proportions).
const std::vector<std::pair<std::string, double>> kStrataSplit = {
    {"male_lt65", 0.32},   {"male_65_75", 0.14},   {"male_gt75", 0.10},
    {"female_lt65", 0.18}, {"female_65_75", 0.13}, {"female_gt75", 0.13}};

}  // namespace

void SimulationConfig::validate() const {
    if (n_days < 730) throw std::invalid_argument("simulation: n_days must be >= 730");
    if (!(dispersion_phi >= 1.0)) throw std::invalid_argument("simulation: phi must be >= 1");
    if (!(std::fabs(pollutant_ar1) < 1.0)) {
        throw std::invalid_argument("simulation: |AR(1)| must be < 1");
    }
    if (beta_true.empty()) throw std::invalid_argument("simulation: beta_true must be non-empty");
    if (!(confounding_strength >= 0.0 && confounding_strength < 1.0)) {
        throw std::invalid_argument("simulation: confounding_strength must be in [0, 1)");
    }
    if (!(pollutant_sd >= 0.0) || !(base_daily_mean > 0.0)) {
        throw std::invalid_argument("simulation: pollutant_sd >= 0 and base_daily_mean > 0");
    }
}

void to_json(nlohmann::json& j, const SimulationConfig& c) {
    j = nlohmann::json{{"n_days", c.n_days},
                       {"beta_true", c.beta_true},
                       {"trend_shape", trend_shape_name(c.trend_shape)},
                       {"trend_df_per_year", c.trend_df_per_year},
                       {"trend_amplitude", c.trend_amplitude},
                       {"seasonal_amplitude", c.seasonal_amplitude},
                       {"seasonal_harmonics", c.seasonal_harmonics},
                       {"confounding_strength", c.confounding_strength},
                       {"dispersion_phi", c.dispersion_phi},
                       {"pollutant_mean", c.pollutant_mean},
                       {"pollutant_sd", c.pollutant_sd},
                       {"pollutant_ar1", c.pollutant_ar1},
                       {"base_daily_mean", c.base_daily_mean},
                       {"pollutant_name", c.pollutant_name},
                       {"seed", c.seed},
                       {"candidate_grid", c.candidate_grid},
                       {"temp_df", c.temp_df},
                       {"ci_level", c.ci_level}};
}

void from_json(const nlohmann::json& j, SimulationConfig& c) {
    SimulationConfig defaults;
    c = defaults;
    if (j.contains("n_days")) j.at("n_days").get_to(c.n_days);
    if (j.contains("beta_true")) j.at("beta_true").get_to(c.beta_true);
    if (j.contains("trend_shape")) c.trend_shape = trend_shape_from_name(j.at("trend_shape"));
    if (j.contains("trend_df_per_year")) j.at("trend_df_per_year").get_to(c.trend_df_per_year);
    if (j.contains("trend_amplitude")) j.at("trend_amplitude").get_to(c.trend_amplitude);
    if (j.contains("seasonal_amplitude")) j.at("seasonal_amplitude").get_to(c.seasonal_amplitude);
    if (j.contains("seasonal_harmonics")) j.at("seasonal_harmonics").get_to(c.seasonal_harmonics);
    if (j.contains("confounding_strength")) {
        j.at("confounding_strength").get_to(c.confounding_strength);
    }
    if (j.contains("dispersion_phi")) j.at("dispersion_phi").get_to(c.dispersion_phi);
    if (j.contains("pollutant_mean")) j.at("pollutant_mean").get_to(c.pollutant_mean);
    if (j.contains("pollutant_sd")) j.at("pollutant_sd").get_to(c.pollutant_sd);
    if (j.contains("pollutant_ar1")) j.at("pollutant_ar1").get_to(c.pollutant_ar1);
    if (j.contains("base_daily_mean")) j.at("base_daily_mean").get_to(c.base_daily_mean);
    if (j.contains("pollutant_name")) j.at("pollutant_name").get_to(c.pollutant_name);
    if (j.contains("seed")) j.at("seed").get_to(c.seed);
    if (j.contains("candidate_grid")) j.at("candidate_grid").get_to(c.candidate_grid);
    if (j.contains("temp_df")) j.at("temp_df").get_to(c.temp_df);
    if (j.contains("ci_level")) j.at("ci_level").get_to(c.ci_level);
}

SimulationConfig scenario_config(char scenario) {
    SimulationConfig c;
    c.beta_true = {0.004, -0.001, -0.001, -0.0003, -0.0005};  // cumulative 0.0012
    c.candidate_grid = default_grid();
    switch (scenario) {
        case 'A':  // smooth trend, no confounding
            c.confounding_strength = 0.0;
            c.trend_shape = TrendShape::smooth_spline;
            c.trend_df_per_year = 4.0;
            c.trend_amplitude = 0.08;
            c.seasonal_amplitude = 0.08;
            break;
        case 'B':  // moderate confounding
            c.confounding_strength = 0.4;
            c.trend_shape = TrendShape::smooth_spline;
            c.trend_df_per_year = 8.0;
            c.trend_amplitude = 0.06;
            c.seasonal_amplitude = 0.05;
            break;
        case 'C':  // strong confounding through a wiggly shared smooth
            c.confounding_strength = 0.85;
            c.trend_shape = TrendShape::smooth_spline;
            c.trend_df_per_year = 12.0;
            c.trend_amplitude = 0.03;
            c.seasonal_amplitude = 0.02;
            c.pollutant_ar1 = 0.5;
            break;
        default:
            throw std::invalid_argument(std::string("unknown scenario '") + scenario +
                                        "' (use A, B or C)");
    }
    return c;
}

GeneratedPanel generate_panel(const SimulationConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    const long n = config.n_days;
    const int max_lag = static_cast<int>(config.beta_true.size()) - 1;

    // Smooth time component on the log-mean scale, defined for t in
    // [-max_lag, n) so lagged exposures exist for every output day.
    std::vector<double> trend(static_cast<std::size_t>(n + max_lag), 0.0);
    auto trend_at = [&](long t) -> double& {
        return trend[static_cast<std::size_t>(t + max_lag)];
    };
    if (config.trend_shape == TrendShape::linear && config.trend_amplitude > 0.0) {
        for (long t = -max_lag; t < n; ++t) {
            const double u = 2.0 * static_cast<double>(t) / static_cast<double>(n - 1) - 1.0;
            trend_at(t) = std::sqrt(3.0) * config.trend_amplitude * u;
        }
    } else if (config.trend_shape == TrendShape::smooth_spline && config.trend_amplitude > 0.0) {
        const int df = std::max(
            2, df_per_year_to_total(config.trend_df_per_year, n));
        std::vector<double> grid(static_cast<std::size_t>(n));
        for (long t = 0; t < n; ++t) grid[static_cast<std::size_t>(t)] = static_cast<double>(t);
        auto [def, basis] = make_natural_basis(grid, df, "time_index");
        Eigen::VectorXd coef(def.df);
        for (int j = 0; j < def.df; ++j) coef(j) = rng.normal();
        std::vector<double> extended(static_cast<std::size_t>(n + max_lag));
        for (long t = -max_lag; t < n; ++t) {
            extended[static_cast<std::size_t>(t + max_lag)] = static_cast<double>(t);
        }
        const BasisMatrix eval = evaluate_basis(def, extended);
        Eigen::VectorXd curve = eval.values * coef;
        // Standardize over the observed window, then scale to the amplitude.
        const Eigen::VectorXd window = curve.tail(n);
        const double mean = window.mean();
        const double sd = std::sqrt((window.array() - mean).square().sum() /
                                    static_cast<double>(n));
        if (sd > 0.0) {
            for (long t = -max_lag; t < n; ++t) {
                trend_at(t) = config.trend_amplitude *
                              (curve(static_cast<Eigen::Index>(t + max_lag)) - mean) / sd;
            }
        }
    }

    auto seasonal_at = [&](long t) {
        double s = 0.0;
        for (int h = 1; h <= config.seasonal_harmonics; ++h) {
            s += std::cos(2.0 * M_PI * h * static_cast<double>(t) / kDaysPerYear) /
                 static_cast<double>(h);
        }
        return config.seasonal_amplitude * s;
    };

    GeneratedPanel out;
    out.truth.beta_true = config.beta_true;
    out.truth.beta_sum = 0.0;
    for (double b : config.beta_true) out.truth.beta_sum += b;

    std::vector<double> g_log(static_cast<std::size_t>(n + max_lag));
    for (long t = -max_lag; t < n; ++t) {
        g_log[static_cast<std::size_t>(t + max_lag)] = trend_at(t) + seasonal_at(t);
    }
    // Standardized confounder over the observed window.
    double g_mean = 0.0;
    for (long t = 0; t < n; ++t) g_mean += g_log[static_cast<std::size_t>(t + max_lag)];
    g_mean /= static_cast<double>(n);
    double g_var = 0.0;
    for (long t = 0; t < n; ++t) {
        const double d = g_log[static_cast<std::size_t>(t + max_lag)] - g_mean;
        g_var += d * d;
    }
    g_var /= static_cast<double>(n);
    const double g_sd = std::sqrt(g_var);

    std::vector<double> g_unit(static_cast<std::size_t>(n + max_lag), 0.0);
    if (g_sd > 0.0) {
        for (std::size_t i = 0; i < g_unit.size(); ++i) {
            g_unit[i] = (g_log[i] - g_mean) / g_sd;
        }
    }

    // Pollutant: stationary AR(1) noise blended with the shared smooth so
    // that corr(x, smooth) ~= confounding_strength; truncated at zero.
    const double c = config.confounding_strength;
    const double noise_share = std::sqrt(1.0 - c * c);
    std::vector<double> pollutant(static_cast<std::size_t>(n + max_lag));
    {
        const double ar = config.pollutant_ar1;
        double z = rng.normal();
        for (long t = -max_lag; t < n; ++t) {
            if (t > -max_lag) z = ar * z + std::sqrt(1.0 - ar * ar) * rng.normal();
            const double x = config.pollutant_mean +
                             config.pollutant_sd *
                                 (noise_share * z + c * g_unit[static_cast<std::size_t>(t + max_lag)]);
            pollutant[static_cast<std::size_t>(t + max_lag)] = std::max(0.0, x);
        }
    }

    // Mean temperature: seasonal cycle plus AR(1) noise (confounder-free).
    Series temp(static_cast<std::size_t>(n));
    {
        double z = rng.normal();
        for (long t = 0; t < n; ++t) {
            if (t > 0) z = 0.8 * z + std::sqrt(1.0 - 0.64) * rng.normal();
            temp[static_cast<std::size_t>(t)] =
                20.72 - 4.0 * std::cos(2.0 * M_PI * (static_cast<double>(t) - 15.0) / kDaysPerYear) +
                1.7 * z;
        }
    }

    // Linear predictor without intercept, then calibrate alpha to the target
    // daily mean.
    std::vector<double> s_lin(static_cast<std::size_t>(n));
    double mean_exp = 0.0;
    for (long t = 0; t < n; ++t) {
        double s = g_log[static_cast<std::size_t>(t + max_lag)];
        for (int l = 0; l <= max_lag; ++l) {
            s += config.beta_true[static_cast<std::size_t>(l)] *
                 pollutant[static_cast<std::size_t>(t - l + max_lag)];
        }
        s_lin[static_cast<std::size_t>(t)] = s;
        const double es = std::exp(s);
        if (!std::isfinite(es)) {
            throw std::runtime_error("generate_panel: infeasible mean on day " +
                                     std::to_string(t) + " (linear predictor overflow)");
        }
        mean_exp += es;
    }
    mean_exp /= static_cast<double>(n);
    const double alpha = std::log(config.base_daily_mean) - std::log(mean_exp);
    out.truth.alpha = alpha;

    Series total(static_cast<std::size_t>(n));
    std::map<std::string, Series> strata;
    for (const auto& [key, share] : kStrataSplit) {
        strata[key] = Series(static_cast<std::size_t>(n), 0.0);
    }
    for (long t = 0; t < n; ++t) {
        const double mu = std::exp(alpha + s_lin[static_cast<std::size_t>(t)]);
        if (!std::isfinite(mu) || mu > 1e12) {
            throw std::runtime_error("generate_panel: infeasible mean on day " +
                                     std::to_string(t) + " (mu overflow)");
        }
        const long y = rng.count_with_dispersion(mu, config.dispersion_phi);
        total[static_cast<std::size_t>(t)] = static_cast<double>(y);
        // Multinomial split into the six strata (sums exactly to the total).
        for (long unit = 0; unit < y; ++unit) {
            const double u = rng.uniform();
            double acc = 0.0;
            for (const auto& [key, share] : kStrataSplit) {
                acc += share;
                if (u < acc || key == kStrataSplit.back().first) {
                    strata[key][static_cast<std::size_t>(t)] += 1.0;
                    break;
                }
            }
        }
    }

    DailyPanel panel;
    const std::int64_t start = days_from_civil(2010, 1, 1);
    for (long t = 0; t < n; ++t) panel.dates.push_back(start + t);
    panel.outcomes["total"] = std::move(total);
    for (auto& [key, series] : strata) panel.outcomes[key] = std::move(series);
    panel.pollutants[config.pollutant_name] =
        Series(pollutant.begin() + max_lag, pollutant.end());
    panel.meteo["temp_mean"] = std::move(temp);

    out.truth.log_time_component =
        Series(g_log.begin() + max_lag, g_log.end());
    out.truth.pollutant_smooth = Series(g_unit.begin() + max_lag, g_unit.end());
    out.panel = std::move(panel);
    return out;
}

namespace {

StrategyStats aggregate(const std::vector<ReplicateRecord>& records, bool exposure_side) {
    StrategyStats stats;
    int used = 0;
    double sum_err = 0.0, sum_sq = 0.0, covered = 0.0, df_sum = 0.0;
    for (const auto& r : records) {
        if (!r.ok) continue;
        ++used;
        const double err = exposure_side ? r.error_exposure : r.error_outcome;
        sum_err += err;
        sum_sq += err * err;
        covered += (exposure_side ? r.covered_exposure : r.covered_outcome) ? 1.0 : 0.0;
        df_sum += exposure_side ? r.df_exposure : r.df_outcome;
    }
    if (used > 0) {
        stats.mean_bias = sum_err / used;
        stats.rmse = std::sqrt(sum_sq / used);
        stats.coverage = covered / used;
        stats.mean_chosen_df_per_year = df_sum / used;
    }
    return stats;
}

}  // namespace

void to_json(nlohmann::json& j, const SimulationReport& report) {
    auto strategy_json = [](const StrategyStats& s) {
        return nlohmann::json{{"mean_bias", s.mean_bias},
                              {"rmse", s.rmse},
                              {"coverage", s.coverage},
                              {"mean_chosen_df_per_year", s.mean_chosen_df_per_year}};
    };
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : report.replicates) {
        reps.push_back(nlohmann::json{{"ok", r.ok},
                                      {"error_exposure", r.error_exposure},
                                      {"error_outcome", r.error_outcome},
                                      {"covered_exposure", r.covered_exposure},
                                      {"covered_outcome", r.covered_outcome},
                                      {"df_exposure", r.df_exposure},
                                      {"df_outcome", r.df_outcome}});
    }
    j = nlohmann::json{{"exposure", strategy_json(report.exposure)},
                       {"outcome", strategy_json(report.outcome)},
                       {"n_replicates", report.n_replicates},
                       {"n_used", report.n_used},
                       {"n_excluded", report.n_excluded},
                       {"beta_true_sum", report.beta_true_sum},
                       {"config", report.config},
                       {"replicates", reps}};
}

SimulationReport bias_experiment(const SimulationConfig& config, int n_reps, int n_threads) {
    config.validate();
    if (n_reps < 50) throw std::invalid_argument("bias_experiment: need n_reps >= 50");

    const std::vector<double> grid =
        config.candidate_grid.empty() ? default_grid() : config.candidate_grid;
    const int max_lag = static_cast<int>(config.beta_true.size()) - 1;
    const double z = normal_quantile(0.5 + config.ci_level / 2.0);

    SimulationReport report;
    report.config = config;
    report.n_replicates = n_reps;
    for (double b : config.beta_true) report.beta_true_sum += b;
    report.replicates.assign(static_cast<std::size_t>(n_reps), ReplicateRecord{});

    parallel_for(static_cast<std::size_t>(n_reps), n_threads, [&](std::size_t rep) {
        ReplicateRecord& rec = report.replicates[rep];
        try {
            GeneratedPanel gen = generate_panel(config, substream_seed(config.seed, rep));

            const SelectionResult sel_exp =
                select_df_exposure(gen.panel, config.pollutant_name, grid);
            OutcomeSelectionOptions opts;
            opts.max_lag = max_lag;
            opts.temperature_df = config.temp_df;
            const SelectionResult sel_out =
                select_df_outcome(gen.panel, "total", config.pollutant_name, grid, opts);

            const DlmFit fit_exp = fit_dlm(gen.panel, config.pollutant_name, max_lag,
                                           sel_exp.chosen_total_df, config.temp_df);
            const DlmFit fit_out = fit_dlm(gen.panel, config.pollutant_name, max_lag,
                                           sel_out.chosen_total_df, config.temp_df);
            if (!fit_exp.base.converged || !fit_out.base.converged) return;

            const CumulativeEffect cum_exp = cumulative_effect(fit_exp);
            const CumulativeEffect cum_out = cumulative_effect(fit_out);
            const double truth = gen.truth.beta_sum;

            rec.error_exposure = cum_exp.beta_sum - truth;
            rec.error_outcome = cum_out.beta_sum - truth;
            rec.covered_exposure = std::fabs(rec.error_exposure) <= z * cum_exp.se_sum;
            rec.covered_outcome = std::fabs(rec.error_outcome) <= z * cum_out.se_sum;
            rec.df_exposure = sel_exp.chosen_df_per_year;
            rec.df_outcome = sel_out.chosen_df_per_year;
            rec.ok = true;
        } catch (const std::exception&) {
            rec.ok = false;  // excluded and counted below
        }
    });

    for (const auto& r : report.replicates) {
        if (r.ok) ++report.n_used;
    }
    report.n_excluded = report.n_replicates - report.n_used;
    report.exposure = aggregate(report.replicates, true);
    report.outcome = aggregate(report.replicates, false);
    return report;
}

}  // namespace airgam
