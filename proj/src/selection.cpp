#include "airgam/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "airgam/dlm.hpp"
#include "airgam/gam.hpp"
#include "airgam/probability.hpp"
#include "airgam/spline.hpp"
#include "airgam/threads.hpp"

namespace airgam {

namespace {

// Candidates are scored in ascending df order so that score ties always
// resolve toward the smaller df.
std::vector<double> validated_ascending_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("candidate df/year grid is empty");
    for (double g : grid) {
        if (!(g > 0.0)) throw std::invalid_argument("candidate df/year must be > 0");
    }
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    return sorted;
}

// Minimum in grid order with strict improvement; first (smallest df) wins ties.
std::size_t argmin_first(const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] < scores[best]) best = i;
    }
    return best;
}

}  // namespace

SelectionResult select_df_exposure(const DailyPanel& panel, const std::string& pollutant,
                                   const std::vector<double>& candidate_dfs_per_year,
                                   const ExposureSelectionOptions& options, int n_threads) {
    const std::vector<double> candidates = validated_ascending_grid(candidate_dfs_per_year);
    auto it = panel.pollutants.find(pollutant);
    if (it == panel.pollutants.end()) {
        throw std::invalid_argument("pollutant not in panel: " + pollutant);
    }
    const auto n_days = static_cast<long>(panel.size());
    if (n_days < 730) {
        throw std::invalid_argument("select_df_exposure: need at least 2 years of data");
    }

    SelectionResult result;
    result.strategy = SelectionStrategy::exposure;
    result.candidate_dfs_per_year = candidates;
    result.scores.assign(candidates.size(), std::numeric_limits<double>::quiet_NaN());
    result.candidate_total_dfs.assign(candidates.size(), 0);

    std::vector<GamSmoothSpec> base_smooths;
    if (options.include_temperature_smooth) {
        base_smooths.push_back({"temp_mean", options.temperature_df});
    }

    const Series& response = it->second;
    std::vector<std::string> errors(candidates.size());
    parallel_for(candidates.size(), n_threads, [&](std::size_t i) {
        const int total_df = df_per_year_to_total(candidates[i], n_days);
        result.candidate_total_dfs[i] = total_df;
        std::vector<GamSmoothSpec> smooths = base_smooths;
        smooths.push_back({"time_index", total_df});
        try {
            AssembledDesign design = assemble_design(response, {}, smooths, panel);
            const GaussianFit fit = fit_gaussian(design.X, design.y, std::move(design.names));
            result.scores[i] = fit.gcv;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    bool any_ok = false;
    for (double s : result.scores) any_ok |= std::isfinite(s);
    if (!any_ok) {
        throw std::runtime_error("select_df_exposure: all candidate fits failed (" + errors[0] +
                                 ")");
    }
    // A failed candidate keeps NaN and can never be chosen.
    std::vector<double> comparable = result.scores;
    for (double& s : comparable) {
        if (!std::isfinite(s)) s = std::numeric_limits<double>::infinity();
    }
    const std::size_t best = argmin_first(comparable);
    result.chosen_df_per_year = candidates[best];
    result.chosen_total_df = result.candidate_total_dfs[best];
    return result;
}

SelectionResult select_df_outcome(const DailyPanel& panel, const std::string& stratum,
                                  const std::string& pollutant,
                                  const std::vector<double>& candidate_dfs_per_year,
                                  const OutcomeSelectionOptions& options, int n_threads) {
    const std::vector<double> candidates = validated_ascending_grid(candidate_dfs_per_year);
    const auto n_days = static_cast<long>(panel.size());
    if (n_days < 730) {
        throw std::invalid_argument("select_df_outcome: need at least 2 years of data");
    }

    SelectionResult result;
    result.strategy = SelectionStrategy::outcome;
    result.candidate_dfs_per_year = candidates;
    result.scores.assign(candidates.size(), std::numeric_limits<double>::quiet_NaN());
    result.candidate_total_dfs.assign(candidates.size(), 0);

    auto fit_candidate = [&](int total_df) {
        if (options.model == OutcomeSelectionModel::with_pollutant) {
            return fit_dlm(panel, pollutant, options.max_lag, total_df, options.temperature_df,
                           stratum, options.exclude)
                .base;
        }
        ModelSpec spec;
        spec.response = stratum;
        spec.smooths.push_back({"time_index", total_df});
        if (options.temperature_df > 0) spec.smooths.push_back({"temp_mean", options.temperature_df});
        return fit(spec, panel, options.exclude);
    };

    std::vector<GamFit> fits(candidates.size());
    std::vector<std::string> errors(candidates.size());
    parallel_for(candidates.size(), n_threads, [&](std::size_t i) {
        result.candidate_total_dfs[i] = df_per_year_to_total(candidates[i], n_days);
        try {
            fits[i] = fit_candidate(result.candidate_total_dfs[i]);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    // Dispersion from the richest candidate keeps criteria comparable.
    double phi_hat = std::numeric_limits<double>::quiet_NaN();
    {
        int richest = -1;
        for (std::size_t i = 0; i < fits.size(); ++i) {
            if (errors[i].empty() &&
                (richest < 0 ||
                 result.candidate_total_dfs[i] >
                     result.candidate_total_dfs[static_cast<std::size_t>(richest)])) {
                richest = static_cast<int>(i);
            }
        }
        if (richest < 0) {
            throw std::runtime_error("select_df_outcome: all candidate fits failed (" + errors[0] +
                                     ")");
        }
        phi_hat = fits[static_cast<std::size_t>(richest)].dispersion;
    }

    for (std::size_t i = 0; i < fits.size(); ++i) {
        if (!errors[i].empty()) continue;
        const GamFit& f = fits[i];
        result.scores[i] = options.criterion == OutcomeCriterion::qaic
                               ? qaic(f, phi_hat)
                               : bic_score(f.deviance, phi_hat, f.edf, f.n_used);
    }

    std::vector<double> comparable = result.scores;
    for (double& s : comparable) {
        if (!std::isfinite(s)) s = std::numeric_limits<double>::infinity();
    }
    const std::size_t best = argmin_first(comparable);
    result.chosen_df_per_year = candidates[best];
    result.chosen_total_df = result.candidate_total_dfs[best];

    const GamFit& chosen = fits[best];
    std::vector<double> residuals(chosen.pearson_residuals.data(),
                                  chosen.pearson_residuals.data() + chosen.pearson_residuals.size());
    const int lags = std::min<int>(options.diagnostic_lags,
                                   static_cast<int>(residuals.size()) - 11);
    if (lags >= 1) {
        result.pacf_values = pacf(residuals, lags);
        const LjungBoxResult lb = ljung_box(residuals, lags);
        result.ljung_box_statistic = lb.statistic;
        result.white_noise_p_value = lb.p_value;
    }
    return result;
}

std::vector<double> sample_acf(const std::vector<double>& series, int max_lag) {
    const auto n = static_cast<long>(series.size());
    if (max_lag < 0 || n <= max_lag) {
        throw std::invalid_argument("sample_acf: need series longer than max_lag");
    }
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);

    std::vector<double> acf(static_cast<std::size_t>(max_lag) + 1, 0.0);
    double c0 = 0.0;
    for (long t = 0; t < n; ++t) {
        const double d = series[static_cast<std::size_t>(t)] - mean;
        c0 += d * d;
    }
    c0 /= static_cast<double>(n);
    if (c0 <= 0.0) throw std::invalid_argument("sample_acf: zero-variance series");
    acf[0] = 1.0;
    for (int k = 1; k <= max_lag; ++k) {
        double ck = 0.0;
        for (long t = k; t < n; ++t) {
            ck += (series[static_cast<std::size_t>(t)] - mean) *
                  (series[static_cast<std::size_t>(t - k)] - mean);
        }
        ck /= static_cast<double>(n);
        acf[static_cast<std::size_t>(k)] = ck / c0;
    }
    return acf;
}

std::vector<double> pacf(const std::vector<double>& residuals, int max_lag) {
    if (max_lag < 1) throw std::invalid_argument("pacf: max_lag must be >= 1");
    if (static_cast<long>(residuals.size()) <= max_lag + 10) {
        throw std::invalid_argument("pacf: need length > max_lag + 10");
    }
    const std::vector<double> rho = sample_acf(residuals, max_lag);

    // Durbin-Levinson. phi[k][j] are AR(k) coefficients; the diagonal is the
    // PACF. Partial correlations are clamped to [-1, 1]; once the prediction
    // error variance hits zero the remaining lags are exactly determined and
    // reported as zero.
    std::vector<double> pacf_values(static_cast<std::size_t>(max_lag), 0.0);
    std::vector<double> phi_prev(static_cast<std::size_t>(max_lag) + 1, 0.0);
    std::vector<double> phi_cur(static_cast<std::size_t>(max_lag) + 1, 0.0);
    double err = 1.0;

    double phi11 = std::clamp(rho[1], -1.0, 1.0);
    pacf_values[0] = phi11;
    phi_prev[1] = phi11;
    err *= (1.0 - phi11 * phi11);

    for (int k = 2; k <= max_lag; ++k) {
        if (err <= 1e-14) break;  // boundary: process deterministic from here
        double num = rho[static_cast<std::size_t>(k)];
        for (int j = 1; j < k; ++j) {
            num -= phi_prev[static_cast<std::size_t>(j)] * rho[static_cast<std::size_t>(k - j)];
        }
        double phikk = std::clamp(num / err, -1.0, 1.0);
        pacf_values[static_cast<std::size_t>(k - 1)] = phikk;
        for (int j = 1; j < k; ++j) {
            phi_cur[static_cast<std::size_t>(j)] =
                phi_prev[static_cast<std::size_t>(j)] -
                phikk * phi_prev[static_cast<std::size_t>(k - j)];
        }
        phi_cur[static_cast<std::size_t>(k)] = phikk;
        std::swap(phi_prev, phi_cur);
        err *= (1.0 - phikk * phikk);
    }
    return pacf_values;
}

LjungBoxResult ljung_box(const std::vector<double>& residuals, int n_lags) {
    if (n_lags < 1) throw std::invalid_argument("ljung_box: n_lags must be >= 1");
    const auto n = static_cast<long>(residuals.size());
    if (n <= n_lags + 10) {
        throw std::invalid_argument("ljung_box: need length > n_lags + 10");
    }
    const std::vector<double> rho = sample_acf(residuals, n_lags);
    double q = 0.0;
    for (int k = 1; k <= n_lags; ++k) {
        const double r = rho[static_cast<std::size_t>(k)];
        q += r * r / static_cast<double>(n - k);
    }
    q *= static_cast<double>(n) * static_cast<double>(n + 2);
    return LjungBoxResult{q, chi_squared_sf(q, static_cast<double>(n_lags))};
}

}  // namespace airgam
