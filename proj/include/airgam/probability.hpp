#pragma once

namespace airgam {

double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// Upper tail of the chi-squared distribution with `dof` degrees of freedom.
double chi_squared_sf(double x, double dof);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value for a t statistic with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

double normal_cdf(double z);

/// Inverse of normal_cdf, p in (0, 1).
double normal_quantile(double p);

}  // namespace airgam
