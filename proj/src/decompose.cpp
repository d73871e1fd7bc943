#include "airgam/decompose.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "airgam/errors.hpp"
#include "airgam/gam.hpp"
#include "airgam/probability.hpp"
#include "airgam/spline.hpp"

namespace airgam {

DecompositionResult three_scale_decomposition(const Series& series) {
    const auto n = static_cast<long>(series.size());
    if (n < 730) {
        throw std::invalid_argument("three_scale_decomposition: need at least 730 days");
    }
    for (double v : series) {
        if (is_missing(v)) {
            throw std::invalid_argument(
                "three_scale_decomposition: series has missing values; impute first");
        }
    }

    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);

    // Project the mean-removed series onto the integer-cycle trigonometric
    // basis for k = 1..14; those frequencies are mutually orthogonal on the
    // equispaced grid, so the residual is exactly the >= 15 cycle band.
    DecompositionResult out;
    out.long_term.assign(series.size(), mean);
    out.seasonal.assign(series.size(), 0.0);
    out.short_term.assign(series.size(), 0.0);

    const double w0 = 2.0 * M_PI / static_cast<double>(n);
    for (int k = 1; k <= 14; ++k) {
        double ca = 0.0, cb = 0.0;
        for (long t = 0; t < n; ++t) {
            const double y = series[static_cast<std::size_t>(t)] - mean;
            ca += y * std::cos(w0 * k * static_cast<double>(t));
            cb += y * std::sin(w0 * k * static_cast<double>(t));
        }
        ca *= 2.0 / static_cast<double>(n);
        cb *= 2.0 / static_cast<double>(n);
        Series& band = (k <= 1) ? out.long_term : out.seasonal;
        for (long t = 0; t < n; ++t) {
            band[static_cast<std::size_t>(t)] += ca * std::cos(w0 * k * static_cast<double>(t)) +
                                                 cb * std::sin(w0 * k * static_cast<double>(t));
        }
    }
    for (long t = 0; t < n; ++t) {
        const auto i = static_cast<std::size_t>(t);
        out.short_term[i] = series[i] - out.long_term[i] - out.seasonal[i];
    }
    return out;
}

TrendFit linear_trend(const Series& series, const std::vector<double>& time_index) {
    if (series.size() != time_index.size()) {
        throw std::invalid_argument("linear_trend: series/time_index length mismatch");
    }
    std::vector<double> x, y;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!is_missing(series[i]) && std::isfinite(time_index[i])) {
            x.push_back(time_index[i]);
            y.push_back(series[i]);
        }
    }
    if (x.size() < 30) throw std::invalid_argument("linear_trend: need >= 30 non-missing points");

    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("linear_trend: zero-variance predictor");

    TrendFit fit;
    fit.n_used = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        rss += r * r;
    }
    const double sigma2 = rss / (n - 2.0);
    fit.slope_se = std::sqrt(sigma2 / sxx);
    if (fit.slope_se > 0.0) {
        fit.p_value = student_t_two_sided_p(fit.slope / fit.slope_se, n - 2.0);
    } else {
        fit.p_value = fit.slope == 0.0 ? 1.0 : 0.0;
    }
    return fit;
}

TrendFit linear_trend(const Series& series) {
    std::vector<double> t(series.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    return linear_trend(series, t);
}

Series seasonal_spline_fit(const Series& series, double df_per_year) {
    const auto n = static_cast<long>(series.size());
    if (n < 365) throw std::invalid_argument("seasonal_spline_fit: need at least 1 year");
    const int total_df = df_per_year_to_total(df_per_year, n);

    std::vector<double> t_used;
    std::vector<double> y_used;
    for (long i = 0; i < n; ++i) {
        const double v = series[static_cast<std::size_t>(i)];
        if (!is_missing(v)) {
            t_used.push_back(static_cast<double>(i));
            y_used.push_back(v);
        }
    }
    if (static_cast<long>(t_used.size()) <= total_df + 1) {
        throw InsufficientSupportError("seasonal_spline_fit: insufficient support");
    }

    auto [def, basis] = make_natural_basis(t_used, total_df, "time_index");
    const auto m = static_cast<Eigen::Index>(t_used.size());
    Eigen::MatrixXd design(m, basis.values.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(basis.values.cols()) = basis.values;
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) y(i) = y_used[static_cast<std::size_t>(i)];

    std::vector<std::string> names{"(Intercept)"};
    for (Eigen::Index j = 0; j < basis.values.cols(); ++j) {
        names.push_back("s(time_index)." + std::to_string(j + 1));
    }
    const GaussianFit fit = fit_gaussian(design, y, std::move(names));

    Series out(series.size(), std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index i = 0; i < m; ++i) {
        out[static_cast<std::size_t>(t_used[static_cast<std::size_t>(i)])] = fit.fitted(i);
    }
    return out;
}

}  // namespace airgam
