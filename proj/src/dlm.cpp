#include "airgam/dlm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace airgam {

LagDesign build_lag_matrix(const Series& series, int max_lag, const std::string& pollutant) {
    if (max_lag < 0) throw std::invalid_argument("build_lag_matrix: max_lag must be >= 0");
    const auto n = static_cast<long>(series.size());
    if (n <= max_lag + 30) {
        throw std::invalid_argument("build_lag_matrix: series too short for max_lag " +
                                    std::to_string(max_lag));
    }

    LagDesign design;
    design.pollutant = pollutant;
    design.max_lag = max_lag;

    for (long t = max_lag; t < n; ++t) {
        bool complete = true;
        for (int l = 0; l <= max_lag; ++l) {
            if (is_missing(series[static_cast<std::size_t>(t - l)])) {
                complete = false;
                break;
            }
        }
        if (complete) {
            design.aligned_rows.push_back(static_cast<std::size_t>(t));
        } else {
            design.dropped_rows.push_back(static_cast<std::size_t>(t));
        }
    }

    design.matrix.resize(static_cast<Eigen::Index>(design.aligned_rows.size()), max_lag + 1);
    for (std::size_t r = 0; r < design.aligned_rows.size(); ++r) {
        const auto t = design.aligned_rows[r];
        for (int l = 0; l <= max_lag; ++l) {
            design.matrix(static_cast<Eigen::Index>(r), l) = series[t - l];
        }
    }
    return design;
}

DlmFit fit_dlm(const DailyPanel& panel, const std::string& pollutant, int max_lag,
               int time_df_total, int temp_df, const std::string& stratum,
               const std::vector<bool>* exclude) {
    auto it = panel.pollutants.find(pollutant);
    if (it == panel.pollutants.end()) {
        throw std::invalid_argument("pollutant not in panel: " + pollutant);
    }
    const Series& x = it->second;
    const std::size_t n = panel.size();
    if (max_lag < 0) throw std::invalid_argument("fit_dlm: max_lag must be >= 0");

    // Full-length lag columns; the head and missing-propagated rows carry NaN
    // and are trimmed during design assembly (complete case within the lag
    // window).
    ModelSpec spec;
    spec.response = stratum;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int l = 0; l <= max_lag; ++l) {
        NamedColumn col;
        col.name = "lag" + std::to_string(l);
        col.values = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), nan);
        for (std::size_t t = static_cast<std::size_t>(l); t < n; ++t) {
            col.values(static_cast<Eigen::Index>(t)) = x[t - static_cast<std::size_t>(l)];
        }
        spec.parametric.push_back(std::move(col));
    }
    spec.smooths.push_back({"time_index", time_df_total});
    if (temp_df > 0) spec.smooths.push_back({"temp_mean", temp_df});

    DlmFit fit;
    fit.base = airgam::fit(spec, panel, exclude);
    fit.pollutant = pollutant;
    fit.max_lag = max_lag;

    const int first = fit.base.term_index("lag0");
    if (first < 0) throw std::runtime_error("fit_dlm: lag terms missing from fit");
    fit.lag_betas = fit.base.coefficients.segment(first, max_lag + 1);
    fit.lag_cov = fit.base.covariance().block(first, first, max_lag + 1, max_lag + 1);
    fit.per_lag_p = fit.base.p_values().segment(first, max_lag + 1);
    return fit;
}

CumulativeEffect cumulative_effect(const Eigen::VectorXd& betas, const Eigen::MatrixXd& cov) {
    if (cov.rows() != betas.size() || cov.cols() != betas.size()) {
        throw std::invalid_argument("cumulative_effect: covariance block size mismatch");
    }
    CumulativeEffect out;
    out.beta_sum = betas.sum();
    out.se_sum = std::sqrt(std::max(0.0, cov.sum()));
    return out;
}

CumulativeEffect cumulative_effect(const DlmFit& fit) {
    return cumulative_effect(fit.lag_betas, fit.lag_cov);
}

std::string significance_stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    if (p < 0.1) return ".";
    return "";
}

}  // namespace airgam
