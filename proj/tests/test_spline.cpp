#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <vector>

#include "airgam/errors.hpp"
#include "airgam/spline.hpp"

using namespace airgam;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = a + (b - a) * i / (n - 1.0);
    return x;
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double ma = a.mean(), mb = b.mean();
    const Eigen::ArrayXd da = a.array() - ma, db = b.array() - mb;
    return (da * db).sum() / std::sqrt(da.square().sum() * db.square().sum());
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Least-squares fit of y on [1 | basis], returning fitted values at eval_x.
Eigen::VectorXd ls_fitted(const BasisDef& def, const std::vector<double>& x,
                          const Eigen::VectorXd& y, const std::vector<double>& eval_x) {
    const BasisMatrix basis = evaluate_basis(def, x);
    Eigen::MatrixXd design(basis.values.rows(), basis.values.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(basis.values.cols()) = basis.values;
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(y);
    const BasisMatrix eval = evaluate_basis(def, eval_x);
    Eigen::MatrixXd eval_design(eval.values.rows(), eval.values.cols() + 1);
    eval_design.col(0).setOnes();
    eval_design.rightCols(eval.values.cols()) = eval.values;
    return eval_design * coef;
}

}  // namespace

TEST_SUITE("spline") {

TEST_CASE("df 1 degenerates to a centered column proportional to x") {
    const auto x = linspace(0.0, 10.0, 11);
    auto [def, basis] = make_natural_basis(x, 1);
    REQUIRE(basis.values.cols() == 1);
    CHECK(std::fabs(basis.values.col(0).mean()) < 1e-12);
    CHECK(correlation(basis.values.col(0), to_eigen(x)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("column count equals df for df 1..20") {
    const auto x = linspace(0.0, 1.0, 300);
    for (int df = 1; df <= 20; ++df) {
        auto [def, basis] = make_natural_basis(x, df);
        CHECK(def.df == df);
        CHECK(basis.values.cols() == df);
        CHECK(basis.values.allFinite());
        for (Eigen::Index j = 0; j < basis.values.cols(); ++j) {
            CHECK(std::fabs(basis.values.col(j).mean()) < 1e-10);
        }
    }
}

TEST_CASE("second derivative vanishes beyond the boundary knots") {
    // 101 equispaced points on [0,1], df 4; probe curvature outside by
    // central finite differences on each basis column and on a combination.
    const auto x = linspace(0.0, 1.0, 101);
    auto [def, basis] = make_natural_basis(x, 4);
    const double h = 1e-3;
    for (double probe : {-0.5, 1.5}) {
        const BasisMatrix lo = evaluate_basis(def, {probe - h});
        const BasisMatrix mid = evaluate_basis(def, {probe});
        const BasisMatrix hi = evaluate_basis(def, {probe + h});
        for (int j = 0; j < def.df; ++j) {
            const double second =
                (lo.values(0, j) - 2.0 * mid.values(0, j) + hi.values(0, j)) / (h * h);
            INFO("probe=", probe, " column=", j);
            CHECK(std::fabs(second) < 1e-6);
        }
        // An arbitrary fitted combination stays linear out there too.
        const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(def.df, 1.0, 2.0);
        const double second = (lo.values.row(0).dot(w) - 2.0 * mid.values.row(0).dot(w) +
                               hi.values.row(0).dot(w)) /
                              (h * h);
        CHECK(std::fabs(second) < 1e-6);
    }
}

TEST_CASE("re-evaluating at the construction sample is bitwise equal") {
    const auto x = linspace(-3.0, 7.0, 257);
    auto [def, basis] = make_natural_basis(x, 6);
    const BasisMatrix again = evaluate_basis(def, x);
    CHECK((again.values.array() == basis.values.array()).all());
}

TEST_CASE("extrapolation is linear: equal increments beyond the boundary") {
    const auto x = linspace(0.0, 5.0, 200);
    auto [def, basis] = make_natural_basis(x, 5);
    const double b = def.boundary_knots.second;
    const BasisMatrix v0 = evaluate_basis(def, {b});
    const BasisMatrix v1 = evaluate_basis(def, {b + 1.0});
    const BasisMatrix v2 = evaluate_basis(def, {b + 2.0});
    for (int j = 0; j < def.df; ++j) {
        const double d1 = v1.values(0, j) - v0.values(0, j);
        const double d2 = v2.values(0, j) - v1.values(0, j);
        CHECK(d1 == doctest::Approx(d2).epsilon(1e-10));
    }
    const double a = def.boundary_knots.first;
    const BasisMatrix w0 = evaluate_basis(def, {a});
    const BasisMatrix w1 = evaluate_basis(def, {a - 1.0});
    const BasisMatrix w2 = evaluate_basis(def, {a - 2.0});
    for (int j = 0; j < def.df; ++j) {
        const double d1 = w0.values(0, j) - w1.values(0, j);
        const double d2 = w1.values(0, j) - w2.values(0, j);
        CHECK(d1 == doctest::Approx(d2).epsilon(1e-10));
    }
}

TEST_CASE("single interior point evaluates to a finite 1 x df row") {
    const auto x = linspace(0.0, 1.0, 50);
    auto [def, basis] = make_natural_basis(x, 4);
    const BasisMatrix row = evaluate_basis(def, {0.37});
    CHECK(row.values.rows() == 1);
    CHECK(row.values.cols() == 4);
    CHECK(row.values.allFinite());
}

TEST_CASE("fitted curves are invariant to affine rescaling of x") {
    const auto x = linspace(0.0, 1.0, 120);
    std::vector<double> x2(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) x2[i] = 2.0 * x[i] + 1.0;

    Eigen::VectorXd y(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = std::sin(6.0 * x[i]) + 0.3 * x[i];
    }

    auto [def1, b1] = make_natural_basis(x, 6);
    auto [def2, b2] = make_natural_basis(x2, 6);
    const Eigen::VectorXd f1 = ls_fitted(def1, x, y, x);
    const Eigen::VectorXd f2 = ls_fitted(def2, x2, y, x2);
    CHECK((f1 - f2).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("df = k interpolates k distinct points in least squares") {
    for (int k : {3, 5, 8}) {
        const auto support = linspace(0.0, 1.0, 2 * k + 5);
        auto [def, basis] = make_natural_basis(support, k);
        std::vector<double> pts(static_cast<std::size_t>(k));
        Eigen::VectorXd y(k);
        for (int i = 0; i < k; ++i) {
            pts[static_cast<std::size_t>(i)] = (i + 0.5) / k;
            y(i) = std::cos(3.0 * i) + i;
        }
        const Eigen::VectorXd fitted = ls_fitted(def, pts, y, pts);
        CHECK((fitted - y).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("duplicate quantile knots are removed with a warning and df reduced") {
    // Heavy ties leave few distinct quantiles.
    std::vector<double> x;
    for (int i = 0; i < 40; ++i) x.push_back(0.0);
    for (int i = 0; i < 40; ++i) x.push_back(1.0);
    for (int i = 0; i < 5; ++i) x.push_back(0.5 + 0.01 * i);
    auto [def, basis] = make_natural_basis(x, 6);
    CHECK(def.df < 6);
    CHECK(basis.values.cols() == def.df);
    CHECK_FALSE(def.warnings.empty());
}

TEST_CASE("insufficient distinct values is rejected") {
    const std::vector<double> x = {1.0, 2.0, 3.0, 1.0, 2.0};
    CHECK_THROWS_AS(make_natural_basis(x, 4), InsufficientSupportError);
    CHECK_THROWS_AS(make_natural_basis(x, 0), std::invalid_argument);
}

TEST_CASE("df per year converts with the 365.25 convention") {
    CHECK(df_per_year_to_total(3.07, 3652) == 31);
    CHECK(df_per_year_to_total(1.0, 365) == 1);
    CHECK(df_per_year_to_total(13.58, 3652) == 136);
    CHECK(df_per_year_to_total(0.01, 400) == 1);  // floored at 1
    CHECK_THROWS_AS(df_per_year_to_total(0.0, 3652), std::invalid_argument);
    CHECK_THROWS_AS(df_per_year_to_total(2.0, 100), std::invalid_argument);
}

TEST_CASE("type-7 quantiles interpolate order statistics") {
    const std::vector<double> v = {1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(quantile_type7(v, 0.0) == 1.0);
    CHECK(quantile_type7(v, 1.0) == 5.0);
    CHECK(quantile_type7(v, 0.5) == 3.0);
    CHECK(quantile_type7(v, 0.25) == 2.0);
    const std::vector<double> w = {1.0, 2.0, 3.0, 4.0};
    CHECK(quantile_type7(w, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_type7(w, 0.5) == doctest::Approx(2.5));
}

}  // TEST_SUITE
