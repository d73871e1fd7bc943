#pragma once

#include <utility>

#include "airgam/panel.hpp"

namespace airgam {

/// Fourier band-pass split of a complete daily series into three time
/// scales by whole-record cycle count: the mean plus the single-cycle
/// component (long term), 2-14 cycles (seasonal) and everything faster
/// (short term). Bands are orthogonal and sum to the original series.
struct DecompositionResult {
    Series long_term;
    Series seasonal;
    Series short_term;
    std::pair<int, int> cutoffs{1, 14};  // cycles over the record
};

DecompositionResult three_scale_decomposition(const Series& series);

/// Ordinary least squares of a series on its day index.
struct TrendFit {
    double slope = 0.0;  // per day
    double intercept = 0.0;
    double slope_se = 0.0;
    double p_value = 1.0;
    std::size_t n_used = 0;
};

TrendFit linear_trend(const Series& series, const std::vector<double>& time_index);
TrendFit linear_trend(const Series& series);  // time index 0..n-1

/// Least-squares seasonal curve: s(time, df_per_year * years) on the day
/// index, skipping missing days. Returns fitted values aligned to the
/// series (NaN where the input was missing).
Series seasonal_spline_fit(const Series& series, double df_per_year = 2.0);

}  // namespace airgam
