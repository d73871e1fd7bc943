#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "airgam/panel.hpp"
#include "airgam/spline.hpp"

namespace airgam {

/// A named design column aligned to the panel's date axis (NaN = missing).
struct NamedColumn {
    std::string name;
    Eigen::VectorXd values;
};

/// One smooth term s(variable, df): natural cubic basis with `df` columns.
struct GamSmoothSpec {
    std::string variable;  // "time_index" or a panel series name
    int df = 0;
};

/// Quasi-Poisson log-link model: implicit intercept + parametric columns +
/// fixed-df smooths.
struct ModelSpec {
    std::string response;  // outcome stratum key, e.g. "total"
    std::vector<NamedColumn> parametric;
    std::vector<GamSmoothSpec> smooths;
};

struct GamFit {
    std::vector<std::string> term_names;  // "(Intercept)" first
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd covariance_unscaled;  // (X'WX)^-1; scale by dispersion for vcov
    double dispersion = 0.0;              // Pearson chi2 / (n_used - edf)
    Eigen::VectorXd fitted_mu;            // over used rows
    Eigen::VectorXd pearson_residuals;
    Eigen::VectorXd deviance_residuals;
    double deviance = 0.0;
    double edf = 0.0;  // number of estimated coefficients (fixed-df design)
    double gcv = 0.0;
    double qaic = 0.0;  // scored with this fit's own dispersion
    bool converged = false;
    int iterations = 0;
    std::vector<double> deviance_trace;  // accepted IRLS iterations
    Eigen::Index n_used = 0;
    std::vector<std::size_t> used_rows;  // panel day indices retained
    std::vector<BasisDef> smooth_bases;

    Eigen::MatrixXd covariance() const { return covariance_unscaled * dispersion; }
    Eigen::VectorXd standard_errors() const;
    Eigen::VectorXd standard_errors(double dispersion_override) const;
    Eigen::VectorXd t_values() const;
    /// Two-sided p-values from t(n_used - edf).
    Eigen::VectorXd p_values() const;
    int term_index(const std::string& name) const;
};

/// Fits the model by iteratively reweighted least squares. Rows with a
/// missing response, missing design inputs or an `exclude` flag are dropped.
/// Throws on negative responses, insufficient rows or a rank-deficient
/// design (naming the collinear columns). Non-convergence is reported via
/// converged = false with the last accepted iterate.
GamFit fit(const ModelSpec& spec, const DailyPanel& panel,
           const std::vector<bool>* exclude = nullptr);

/// IRLS on an assembled design whose first column is the intercept.
GamFit fit_quasipoisson(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                        std::vector<std::string> term_names);

double dispersion(const GamFit& fit);

/// n * deviance / (n - edf)^2.
double gcv_score(const GamFit& fit);

/// deviance / phi_hat + 2 * edf, with phi_hat held fixed across the
/// candidate set being compared.
double qaic(const GamFit& fit, double phi_hat);
double qaic_score(double deviance, double phi_hat, double edf);
double bic_score(double deviance, double phi_hat, double edf, Eigen::Index n_used);

/// Gaussian least squares on an assembled design; used by the
/// exposure-prediction models and the seasonal spline fit.
struct GaussianFit {
    std::vector<std::string> term_names;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd fitted;
    Eigen::VectorXd residuals;
    double rss = 0.0;
    double edf = 0.0;
    Eigen::Index n_used = 0;
    double gcv = 0.0;  // n * RSS / (n - edf)^2
};

GaussianFit fit_gaussian(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                         std::vector<std::string> term_names);

/// Design assembly shared by the quasi-Poisson and Gaussian paths: intercept,
/// parametric columns, then smooth bases built on the retained rows.
struct AssembledDesign {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> names;
    std::vector<std::size_t> used_rows;
    std::vector<BasisDef> smooth_bases;
};

AssembledDesign assemble_design(const Series& response, const std::vector<NamedColumn>& parametric,
                                const std::vector<GamSmoothSpec>& smooths, const DailyPanel& panel,
                                const std::vector<bool>* exclude = nullptr);

}  // namespace airgam
