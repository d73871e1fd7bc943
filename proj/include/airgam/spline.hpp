#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace airgam {

/// Natural cubic spline basis with a fixed number of degrees of freedom.
/// Boundary knots sit at the data range, interior knots at evenly spaced
/// quantiles; the span is linear beyond the boundary knots. The number of
/// basis columns equals df (the constant is left to the model intercept).
struct BasisDef {
    std::string variable_name;
    int df = 0;  // column count; may be smaller than requested after knot deduplication
    std::vector<double> interior_knots;         // original units, strictly increasing
    std::pair<double, double> boundary_knots{0.0, 0.0};
    bool centered = true;
    bool linear = false;  // df == 1 degenerates to a single scaled-x column
    std::vector<std::string> warnings;

    // Fitted-space plumbing: maps the reduced B-spline row to the natural
    // columns, and records the construction-sample column means.
    Eigen::MatrixXd transform;     // (df + 2) x df, empty when linear
    Eigen::VectorXd column_means;  // df, zero when centering is off
};

struct BasisMatrix {
    Eigen::MatrixXd values;  // n x def.df
    BasisDef def;
};

/// Builds the basis from the sample `x` (all finite). Requires at least
/// df + 1 distinct values. Duplicate quantile knots are removed with a
/// warning and the df reduced accordingly.
std::pair<BasisDef, BasisMatrix> make_natural_basis(const std::vector<double>& x, int df,
                                                    const std::string& variable_name = "x",
                                                    bool centered = true);

/// Evaluates the same spline functions at new points; linear extrapolation
/// beyond the boundary knots. Evaluating at the construction sample
/// reproduces the construction matrix bit for bit.
BasisMatrix evaluate_basis(const BasisDef& def, const std::vector<double>& new_x);

/// Converts a per-year smoothness level to a total df over `n_days` of
/// daily data: round(df_per_year * n_days / 365.25), at least 1.
int df_per_year_to_total(double df_per_year, long n_days);

/// Type-7 quantile (linear interpolation between order statistics) of a
/// sorted sample.
double quantile_type7(const std::vector<double>& sorted_values, double p);

}  // namespace airgam
