#include "airgam/spline.hpp"

#include "airgam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace airgam {

namespace {

constexpr int kDegree = 3;  // cubic

// Index i with knots[i] <= u < knots[i+1], clamped so u at the right
// boundary falls in the last non-degenerate span.
int find_span(double u, const std::vector<double>& knots) {
    const int m = static_cast<int>(knots.size()) - 1;
    const int last = m - kDegree - 1;
    if (u >= knots[m - kDegree]) return last;
    if (u <= knots[kDegree]) return kDegree;
    int lo = kDegree, hi = last;
    while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        if (knots[mid] <= u) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return lo;
}

// B-spline basis values and derivatives at u for functions span-3..span.
// Returns (n_ders + 1) x 4; row k holds the k-th derivatives.
Eigen::MatrixXd ders_basis_funs(int span, double u, int n_ders, const std::vector<double>& knots) {
    const int p = kDegree;
    Eigen::MatrixXd ndu(p + 1, p + 1);
    Eigen::VectorXd left(p + 1), right(p + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left(j) = u - knots[span + 1 - j];
        right(j) = knots[span + j] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right(r + 1) + left(j - r);
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right(r + 1) * temp;
            saved = left(j - r) * temp;
        }
        ndu(j, j) = saved;
    }
    Eigen::MatrixXd ders = Eigen::MatrixXd::Zero(n_ders + 1, p + 1);
    for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= n_ders; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            ders(k, r) = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= n_ders; ++k) {
        for (int j = 0; j <= p; ++j) ders(k, j) *= factor;
        factor *= (p - k);
    }
    return ders;
}

// Full B-spline row (and optionally derivatives) over all n_basis functions.
void full_row(double u, const std::vector<double>& knots, int n_basis, int n_ders,
              Eigen::MatrixXd& out) {
    out.setZero(n_ders + 1, n_basis);
    const int span = find_span(u, knots);
    const Eigen::MatrixXd local = ders_basis_funs(span, u, n_ders, knots);
    for (int j = 0; j <= kDegree; ++j) {
        const int col = span - kDegree + j;
        if (col >= 0 && col < n_basis) {
            for (int k = 0; k <= n_ders; ++k) out(k, col) = local(k, j);
        }
    }
}

struct Normalizer {
    double a, b;
    double to_unit(double x) const { return (x - a) / (b - a); }
};

// B-spline row at u as 4 local values starting at B-spline index `first`.
// Beyond [0, 1] the row is extended linearly (value + first derivative at
// the boundary), which keeps every natural combination linear outside.
struct LocalRow {
    int first;
    double value[4];
};

LocalRow local_row(double u, const std::vector<double>& knots) {
    LocalRow row{};
    if (u < 0.0 || u > 1.0) {
        const double at = u < 0.0 ? 0.0 : 1.0;
        const int span = find_span(at, knots);
        const Eigen::MatrixXd local = ders_basis_funs(span, at, 1, knots);
        row.first = span - kDegree;
        for (int j = 0; j <= kDegree; ++j) {
            row.value[j] = local(0, j) + (u - at) * local(1, j);
        }
    } else {
        const int span = find_span(u, knots);
        const Eigen::MatrixXd local = ders_basis_funs(span, u, 0, knots);
        row.first = span - kDegree;
        for (int j = 0; j <= kDegree; ++j) row.value[j] = local(0, j);
    }
    return row;
}

std::vector<double> extended_knots(const std::vector<double>& interior_unit) {
    std::vector<double> knots;
    knots.reserve(interior_unit.size() + 8);
    for (int i = 0; i < 4; ++i) knots.push_back(0.0);
    for (double k : interior_unit) knots.push_back(k);
    for (int i = 0; i < 4; ++i) knots.push_back(1.0);
    return knots;
}

void check_finite(const std::vector<double>& x, const char* what) {
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(what) + ": non-finite value in input");
        }
    }
}

}  // namespace

double quantile_type7(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile_type7: empty sample");
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = (static_cast<double>(n) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo >= n - 1) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

int df_per_year_to_total(double df_per_year, long n_days) {
    if (!(df_per_year > 0.0)) {
        throw std::invalid_argument("df_per_year_to_total: df_per_year must be > 0");
    }
    if (n_days < 365) {
        throw std::invalid_argument("df_per_year_to_total: need at least 365 days");
    }
    const double total = df_per_year * static_cast<double>(n_days) / 365.25;
    const long rounded = std::lround(total);
    return static_cast<int>(std::max(1L, rounded));
}

std::pair<BasisDef, BasisMatrix> make_natural_basis(const std::vector<double>& x, int df,
                                                    const std::string& variable_name,
                                                    bool centered) {
    if (df < 1) throw std::invalid_argument("make_natural_basis: df must be >= 1");
    check_finite(x, "make_natural_basis");

    std::set<double> distinct(x.begin(), x.end());
    if (static_cast<int>(distinct.size()) < df + 1) {
        throw InsufficientSupportError("make_natural_basis: insufficient support for " +
                                    variable_name + " (need at least " + std::to_string(df + 1) +
                                    " distinct values, have " + std::to_string(distinct.size()) +
                                    ")");
    }

    BasisDef def;
    def.variable_name = variable_name;
    def.centered = centered;
    def.boundary_knots = {*distinct.begin(), *distinct.rbegin()};

    if (df >= 2) {
        std::vector<double> sorted(x);
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> knots;
        for (int i = 1; i < df; ++i) {
            knots.push_back(quantile_type7(sorted, static_cast<double>(i) / df));
        }
        // Keep strictly increasing knots strictly inside the boundary.
        std::vector<double> kept;
        for (double k : knots) {
            const bool inside = k > def.boundary_knots.first && k < def.boundary_knots.second;
            if (inside && (kept.empty() || k > kept.back())) kept.push_back(k);
        }
        if (static_cast<int>(kept.size()) < df - 1) {
            def.warnings.push_back("duplicate quantile knots for " + variable_name +
                                   ": df reduced from " + std::to_string(df) + " to " +
                                   std::to_string(kept.size() + 1));
        }
        def.interior_knots = std::move(kept);
        def.df = static_cast<int>(def.interior_knots.size()) + 1;
    } else {
        def.df = 1;
    }

    if (def.df == 1) {
        def.linear = true;
        def.interior_knots.clear();
    } else {
        // Second-derivative constraints at the boundaries select the natural
        // subspace of the (reduced) cubic B-spline basis.
        const Normalizer nrm{def.boundary_knots.first, def.boundary_knots.second};
        std::vector<double> interior_unit;
        interior_unit.reserve(def.interior_knots.size());
        for (double k : def.interior_knots) interior_unit.push_back(nrm.to_unit(k));
        const auto knots = extended_knots(interior_unit);
        const int n_basis = static_cast<int>(interior_unit.size()) + 4;

        Eigen::MatrixXd at0, at1;
        full_row(0.0, knots, n_basis, 2, at0);
        full_row(1.0, knots, n_basis, 2, at1);
        Eigen::MatrixXd constraints(2, n_basis - 1);
        constraints.row(0) = at0.row(2).tail(n_basis - 1);
        constraints.row(1) = at1.row(2).tail(n_basis - 1);

        Eigen::HouseholderQR<Eigen::MatrixXd> qr(constraints.transpose());
        const Eigen::MatrixXd q =
            qr.householderQ() * Eigen::MatrixXd::Identity(n_basis - 1, n_basis - 1);
        def.transform = q.rightCols(n_basis - 3);  // = def.df columns
    }

    def.column_means = Eigen::VectorXd::Zero(def.df);
    if (centered) {
        BasisMatrix uncentered = evaluate_basis(def, x);
        def.column_means = uncentered.values.colwise().mean();
    }

    BasisMatrix matrix = evaluate_basis(def, x);
    return {def, std::move(matrix)};
}

BasisMatrix evaluate_basis(const BasisDef& def, const std::vector<double>& new_x) {
    check_finite(new_x, "evaluate_basis");
    const auto n = static_cast<Eigen::Index>(new_x.size());
    BasisMatrix out;
    out.def = def;
    out.values.resize(n, def.df);

    const Normalizer nrm{def.boundary_knots.first, def.boundary_knots.second};
    if (def.linear) {
        for (Eigen::Index i = 0; i < n; ++i) out.values(i, 0) = nrm.to_unit(new_x[i]);
    } else {
        std::vector<double> interior_unit;
        interior_unit.reserve(def.interior_knots.size());
        for (double k : def.interior_knots) interior_unit.push_back(nrm.to_unit(k));
        const auto knots = extended_knots(interior_unit);
        // Only four B-splines are nonzero at any point, so each output row
        // is a short combination of transform rows. Row 0 of the full basis
        // is the dropped column and does not contribute.
        for (Eigen::Index i = 0; i < n; ++i) {
            const LocalRow row = local_row(nrm.to_unit(new_x[i]), knots);
            out.values.row(i).setZero();
            for (int j = 0; j <= kDegree; ++j) {
                const int col = row.first + j;       // full B-spline index
                if (col < 1 || row.value[j] == 0.0) continue;
                out.values.row(i) += row.value[j] * def.transform.row(col - 1);
            }
        }
    }
    if (def.centered) out.values.rowwise() -= def.column_means.transpose();
    return out;
}

}  // namespace airgam
